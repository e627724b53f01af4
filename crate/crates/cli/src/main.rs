//! Command-line front end: simulate, reconstruct, sweep, export, and
//! validate-config subcommands over a TOML experiment config.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mlcs_cli::config::{ExperimentConfig, Overrides};
use mlcs_cli::error::{CliError, CliResult};
use mlcs_cli::{export, runner};
use mlcs_core::Seed;

#[derive(Parser)]
#[command(name = "mlcs", version, about = "Multilook compressed-sensing SAR imaging lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(long, short = 'c')]
    config: PathBuf,
    /// Override sampling.rate.
    #[arg(long)]
    rate: Option<f64>,
    /// Override solver.look_count.
    #[arg(long)]
    looks: Option<usize>,
    /// Override solver.lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Override solver.max_iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> CliResult<(ExperimentConfig, PathBuf)> {
        let mut config = ExperimentConfig::load(&self.config)?;
        config.apply_overrides(&Overrides {
            rate: self.rate,
            looks: self.looks,
            lambda: self.lambda,
            iters: self.iters,
            seed: self.seed,
        });
        config.validate()?;
        let out = self
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&config.output.directory));
        Ok((config, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize raw echoes and compressed samples.
    Simulate(ConfigArgs),
    /// Run the full pipeline: simulate, subsample, reconstruct, evaluate.
    Reconstruct(ConfigArgs),
    /// Run the configured (rate x looks x repetitions) sweep.
    Sweep(ConfigArgs),
    /// Export a stored grid or image as an 8-bit PGM.
    Export {
        /// Input .mlcs file (complex grid or real image).
        #[arg(long, short = 'i')]
        input: PathBuf,
        /// Output .pgm file.
        #[arg(long, short = 'o')]
        output: PathBuf,
        /// Dynamic range below peak, in dB.
        #[arg(long, default_value_t = 60.0)]
        dynamic_range_db: f64,
    },
    /// Parse and validate a config file.
    ValidateConfig {
        /// Experiment config (TOML).
        #[arg(long, short = 'c')]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(args) => {
            let (config, out) = args.load()?;
            let manifest = runner::run_simulate(&config, &out)?;
            println!("simulated {} files into {}", manifest.files.len(), out.display());
            Ok(())
        }
        Command::Reconstruct(args) => {
            let (config, out) = args.load()?;
            let run = runner::run_single(
                &config,
                &out,
                Seed(config.seed),
                config.sampling.rate,
                config.solver.look_count,
                0,
            )?;
            println!(
                "reconstructed into {} (ENL {:.3}, baseline {:.3}, rel err {:.1} dB)",
                out.display(),
                run.metrics.enl,
                run.metrics.enl_baseline,
                run.metrics.relative_error_db
            );
            Ok(())
        }
        Command::Sweep(args) => {
            let (config, out) = args.load()?;
            runner::run_sweep(&config, &out)?;
            println!("sweep aggregate written to {}", out.join("aggregate.csv").display());
            Ok(())
        }
        Command::Export {
            input,
            output,
            dynamic_range_db,
        } => {
            if dynamic_range_db <= 0.0 {
                return Err(CliError::Config("dynamic_range_db must be > 0".into()));
            }
            export::export_file(&input, &output, dynamic_range_db)?;
            println!("wrote {}", output.display());
            Ok(())
        }
        Command::ValidateConfig { config } => {
            ExperimentConfig::load(&config)?;
            println!("config ok");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
