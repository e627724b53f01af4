//! Experiment execution: single runs, sweeps, and artifact persistence.
//!
//! Seed discipline: the config's master seed spawns one derived seed per
//! sweep cell (rate index, look index, repetition), and every run derives
//! its scene, sampling, and solver streams from its own run seed, so runs
//! are independent and reproducible in isolation.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use mlcs_core::io::{
    write_complex_grid, write_compressed_data, write_look_stack, write_real_image,
    write_target_list,
};
use mlcs_core::metrics::{enl, relative_error_db};
use mlcs_core::mlrda::{build_filters, look_form, LookPlan, RdaFilters};
use mlcs_core::sim::{generate_mask, rayleigh_scene, simulate_raw, subsample};
use mlcs_core::solver::{multilook_sum, reconstruct, refit_on_support, SolverConfig};
use mlcs_core::{RadarParams, RegionSpec, Scene, Seed, SolverTrace};
use num_complex::Complex64;

use crate::config::{ExperimentConfig, SceneKind};
use crate::error::{CliError, CliResult};
use crate::export::write_pgm;

const SCENE_STREAM: u64 = 1;
const SAMPLING_STREAM: u64 = 2;
const SOLVER_STREAM: u64 = 3;
const SWEEP_STREAM: u64 = 4;

/// Inventory of one run (or sweep), written as JSON next to the outputs.
///
/// All data artifacts are byte-determined by (config, seed); the
/// timestamps here are the single documented exception.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub software_version: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub files: Vec<String>,
    /// SNR reference for the noise block: per-sample raw SNR over
    /// signal-support samples.
    pub noise_snr_reference: String,
}

/// One row of the per-run metrics CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRow {
    pub run_id: String,
    pub rate: f64,
    pub look_count: usize,
    pub rep: u64,
    pub seed: u64,
    pub enl: f64,
    pub enl_baseline: f64,
    pub relative_error_db: f64,
    pub iterations: usize,
    pub mu: f64,
    pub active_rows: usize,
}

/// One row of the sweep aggregate CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub rate: f64,
    pub look_count: usize,
    pub repetitions: usize,
    pub mean_enl: f64,
    pub std_enl: f64,
    pub stderr_enl: f64,
    pub mean_enl_baseline: f64,
    pub std_enl_baseline: f64,
    pub mean_relative_error_db: f64,
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", dir.display())))
}

fn build_scene(config: &ExperimentConfig, params: &RadarParams, seed: Seed) -> CliResult<Scene> {
    let (n_az, n_rg) = (config.radar.n_azimuth, config.radar.n_range);
    match config.scene.kind {
        SceneKind::PointTargets => {
            let mut scene = Scene::empty(n_az, n_rg, params);
            for t in &config.scene.targets {
                scene.reflectivity.set(
                    t.az_cell,
                    t.rg_cell,
                    Complex64::new(t.amplitude_re, t.amplitude_im),
                );
            }
            Ok(scene)
        }
        SceneKind::Rayleigh => {
            let region = config.scene.region.as_ref().expect("validated");
            rayleigh_scene(
                n_az,
                n_rg,
                region,
                params,
                seed,
                config.scene.scatterers_per_cell,
                config.scene.exact_scatterer_sum,
            )
            .map_err(|e| CliError::stage("scene", e))
        }
    }
}

fn build_run_filters(
    config: &ExperimentConfig,
    params: &RadarParams,
) -> CliResult<RdaFilters> {
    let shape = (config.radar.n_azimuth, config.radar.n_range);
    let filters = build_filters(params, shape).map_err(|e| CliError::stage("filters", e))?;
    Ok(if config.radar.zero_migration {
        filters.with_zero_migration()
    } else {
        filters
    })
}

/// Map a full-resolution evaluation region onto a look image whose azimuth
/// axis is decimated by the look count.
fn region_for_looks(region: &RegionSpec, look_count: usize) -> CliResult<RegionSpec> {
    RegionSpec::new(
        region.az_start / look_count,
        (region.az_end / look_count).max(region.az_start / look_count + 1),
        region.rg_start,
        region.rg_end,
    )
    .map_err(|e| CliError::Runtime(format!("evaluation region: {e}")))
}

fn write_trace_csv(path: &Path, trace: &SolverTrace) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
    w.write_record(["iteration", "objective", "fidelity", "regularizer", "rel_change", "active_rows"])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for (k, s) in trace.iterations.iter().enumerate() {
        w.write_record([
            k.to_string(),
            s.objective.to_string(),
            s.fidelity.to_string(),
            s.l21.to_string(),
            s.rel_change.to_string(),
            s.active_rows.to_string(),
        ])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn read_metrics_csv(path: &Path) -> CliResult<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::Runtime(format!("read {}: {e}", path.display())))?;
    r.deserialize()
        .collect::<Result<Vec<MetricsRow>, _>>()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Outcome of one pipeline execution.
pub struct SingleRun {
    pub manifest: RunManifest,
    pub metrics: MetricsRow,
}

/// Execute the full pipeline once into `dir`. `rate`, `look_count`, and
/// `rep` identify the sweep cell (a standalone run uses the config values
/// and rep 0). Partial outputs are removed on failure.
pub fn run_single(
    config: &ExperimentConfig,
    dir: &Path,
    run_seed: Seed,
    rate: f64,
    look_count: usize,
    rep: u64,
) -> CliResult<SingleRun> {
    create_dir(dir)?;
    let result = run_single_inner(config, dir, run_seed, rate, look_count, rep);
    if result.is_err() {
        let _ = std::fs::remove_dir_all(dir);
    }
    result
}

fn run_single_inner(
    config: &ExperimentConfig,
    dir: &Path,
    run_seed: Seed,
    rate: f64,
    look_count: usize,
    rep: u64,
) -> CliResult<SingleRun> {
    let started_at = now_rfc3339();
    let mut files: Vec<String> = Vec::new();
    let track = |name: &str, files: &mut Vec<String>| files.push(name.to_string());

    let params = config.radar.radar_params();
    let shape = (config.radar.n_azimuth, config.radar.n_range);
    let filters = build_run_filters(config, &params)?;
    let plan = LookPlan::new(shape.0, look_count)
        .map_err(|e| CliError::stage("look plan", e))?;

    // Simulate.
    let scene = build_scene(config, &params, run_seed.derive(&[SCENE_STREAM]))?;
    let raw = simulate_raw(&scene, &params, run_seed.derive(&[SCENE_STREAM]),
        config.scene.noise_snr_db)
        .map_err(|e| CliError::stage("simulate", e))?;
    write_complex_grid(&dir.join("raw.mlcs"), &raw)
        .map_err(|e| CliError::stage("write raw", e))?;
    track("raw.mlcs", &mut files);
    if !scene.target_list.is_empty() {
        write_target_list(&dir.join("targets.txt"), &scene.target_list)
            .map_err(|e| CliError::stage("write targets", e))?;
        track("targets.txt", &mut files);
    }

    // Subsample.
    let mask = generate_mask(shape, rate, run_seed.derive(&[SAMPLING_STREAM]),
        config.sampling.pattern)
        .map_err(|e| CliError::stage("mask", e))?;
    let data = subsample(&raw, &mask).map_err(|e| CliError::stage("subsample", e))?;
    write_compressed_data(&dir.join("samples.mlcm"), &dir.join("samples.mlcv"), &data)
        .map_err(|e| CliError::stage("write samples", e))?;
    track("samples.mlcm", &mut files);
    track("samples.mlcv", &mut files);

    // Full-sample multilook RDA baseline (like-for-like comparison).
    let baseline_stack = look_form(&raw, &filters, &plan)
        .map_err(|e| CliError::stage("baseline", e))?;
    let baseline_image = multilook_sum(&baseline_stack);
    let peak = baseline_image.values().iter().cloned().fold(0.0, f64::max);

    // Reconstruct.
    let lambda = if config.solver.lambda_relative_to_peak {
        config.solver.lambda * peak
    } else {
        config.solver.lambda
    };
    let mut solver_config =
        SolverConfig::new(lambda, look_count, run_seed.derive(&[SOLVER_STREAM]));
    solver_config.mu = config.solver.mu;
    solver_config.max_iterations = config.solver.max_iterations;
    solver_config.rel_change_tol = config.solver.rel_change_tol;
    solver_config.warm_start = config.solver.warm_start;
    let (mut stack, trace) = reconstruct(&data, &filters, &plan, &solver_config)
        .map_err(|e| CliError::stage("reconstruct", e))?;
    if config.solver.debias_iterations > 0 {
        stack = refit_on_support(
            &data,
            &filters,
            &plan,
            &stack,
            config.solver.debias_iterations,
            run_seed.derive(&[SOLVER_STREAM, 1]),
        )
        .map_err(|e| CliError::stage("debias", e))?;
    }
    let image = multilook_sum(&stack);

    write_look_stack(dir, "recon", &stack, &plan, params.hash())
        .map_err(|e| CliError::stage("write look stack", e))?;
    for i in 0..stack.look_count() {
        track(&format!("recon_look_{i:03}.mlcs"), &mut files);
    }
    track("recon_stack.json", &mut files);
    write_real_image(&dir.join("recon_image.mlcs"), &image)
        .map_err(|e| CliError::stage("write image", e))?;
    track("recon_image.mlcs", &mut files);
    write_trace_csv(&dir.join("trace.csv"), &trace)?;
    track("trace.csv", &mut files);
    if config.output.baseline {
        write_real_image(&dir.join("baseline_image.mlcs"), &baseline_image)
            .map_err(|e| CliError::stage("write baseline", e))?;
        track("baseline_image.mlcs", &mut files);
    }
    if config.output.export_pgm {
        write_pgm(&dir.join("recon_image.pgm"), &image, config.output.dynamic_range_db)?;
        track("recon_image.pgm", &mut files);
        if config.output.baseline {
            write_pgm(
                &dir.join("baseline_image.pgm"),
                &baseline_image,
                config.output.dynamic_range_db,
            )?;
            track("baseline_image.pgm", &mut files);
        }
    }

    // Metrics.
    let region = region_for_looks(&config.evaluation.enl_region, look_count)?;
    region
        .check_bounds(image.n_azimuth(), image.n_range())
        .map_err(|e| CliError::stage("metrics", e))?;
    let enl_recon = enl(&image, &region).map_err(|e| CliError::stage("metrics", e))?;
    let enl_base = enl(&baseline_image, &region).map_err(|e| CliError::stage("metrics", e))?;
    let rel_db = relative_error_db(&image, &baseline_image)
        .map_err(|e| CliError::stage("metrics", e))?;
    let metrics = MetricsRow {
        run_id: format!("rate{rate}_look{look_count}_rep{rep}"),
        rate,
        look_count,
        rep,
        seed: run_seed.0,
        enl: enl_recon,
        enl_baseline: enl_base,
        relative_error_db: rel_db,
        iterations: trace.iterations.len(),
        mu: trace.mu,
        active_rows: trace.iterations.last().map_or(0, |s| s.active_rows),
    };
    write_metrics_csv(&dir.join("metrics.csv"), std::slice::from_ref(&metrics))?;
    track("metrics.csv", &mut files);

    let manifest = RunManifest {
        config_hash: format!("{:016x}", config.hash()),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: run_seed.0,
        started_at,
        finished_at: now_rfc3339(),
        files,
        noise_snr_reference: "per-sample raw SNR over signal-support samples".to_string(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), json)
        .map_err(|e| CliError::Runtime(format!("write manifest: {e}")))?;
    Ok(SingleRun { manifest, metrics })
}

/// Simulation-only pipeline: raw echoes, mask, and compressed samples.
pub fn run_simulate(config: &ExperimentConfig, dir: &Path) -> CliResult<RunManifest> {
    create_dir(dir)?;
    let started_at = now_rfc3339();
    let params = config.radar.radar_params();
    let shape = (config.radar.n_azimuth, config.radar.n_range);
    let run_seed = Seed(config.seed);
    let scene = build_scene(config, &params, run_seed.derive(&[SCENE_STREAM]))?;
    let raw = simulate_raw(&scene, &params, run_seed.derive(&[SCENE_STREAM]),
        config.scene.noise_snr_db)
        .map_err(|e| CliError::stage("simulate", e))?;
    let mask = generate_mask(shape, config.sampling.rate,
        run_seed.derive(&[SAMPLING_STREAM]), config.sampling.pattern)
        .map_err(|e| CliError::stage("mask", e))?;
    let data = subsample(&raw, &mask).map_err(|e| CliError::stage("subsample", e))?;

    let mut files = vec!["raw.mlcs".to_string(), "samples.mlcm".into(), "samples.mlcv".into()];
    write_complex_grid(&dir.join("raw.mlcs"), &raw)
        .map_err(|e| CliError::stage("write raw", e))?;
    write_compressed_data(&dir.join("samples.mlcm"), &dir.join("samples.mlcv"), &data)
        .map_err(|e| CliError::stage("write samples", e))?;
    if !scene.target_list.is_empty() {
        write_target_list(&dir.join("targets.txt"), &scene.target_list)
            .map_err(|e| CliError::stage("write targets", e))?;
        files.push("targets.txt".into());
    }
    let manifest = RunManifest {
        config_hash: format!("{:016x}", config.hash()),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        started_at,
        finished_at: now_rfc3339(),
        files,
        noise_snr_reference: "per-sample raw SNR over signal-support samples".to_string(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), json)
        .map_err(|e| CliError::Runtime(format!("write manifest: {e}")))?;
    Ok(manifest)
}

/// Cartesian sweep over (rate, look count, repetition). Failed cells are
/// recorded and skipped; the aggregate is recomputed from the per-run
/// metrics CSVs after a deterministic sort.
pub fn run_sweep(config: &ExperimentConfig, dir: &Path) -> CliResult<RunManifest> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep block missing".into()))?;
    create_dir(dir)?;
    let started_at = now_rfc3339();
    let base = Seed(config.seed);

    struct Cell {
        rate_idx: usize,
        look_idx: usize,
        rep: u64,
        dir: PathBuf,
    }
    let mut cells = Vec::new();
    for (rate_idx, _) in sweep.rates.iter().enumerate() {
        for (look_idx, look) in sweep.looks.iter().enumerate() {
            for rep in 0..sweep.repetitions {
                let rate = sweep.rates[rate_idx];
                cells.push(Cell {
                    rate_idx,
                    look_idx,
                    rep,
                    dir: dir.join(format!("rate{rate}_look{look}_rep{rep}")),
                });
            }
        }
    }

    let next = Mutex::new(0usize);
    let failures: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let workers = sweep.workers.min(cells.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().expect("queue lock");
                    let idx = *guard;
                    if idx >= cells.len() {
                        break;
                    }
                    *guard += 1;
                    idx
                };
                let cell = &cells[idx];
                let rate = sweep.rates[cell.rate_idx];
                let look = sweep.looks[cell.look_idx];
                let run_seed = base.derive(&[
                    SWEEP_STREAM,
                    cell.rate_idx as u64,
                    cell.look_idx as u64,
                    cell.rep,
                ]);
                if let Err(e) =
                    run_single(config, &cell.dir, run_seed, rate, look, cell.rep)
                {
                    failures
                        .lock()
                        .expect("failure lock")
                        .push(format!("{}: {e}", cell.dir.display()));
                }
            });
        }
    });
    let mut failures = failures.into_inner().expect("failure lock");
    failures.sort();

    // Aggregate strictly from the per-run CSVs.
    let mut all_rows: Vec<MetricsRow> = Vec::new();
    for cell in &cells {
        let path = cell.dir.join("metrics.csv");
        if path.exists() {
            all_rows.extend(read_metrics_csv(&path)?);
        }
    }
    let mut aggregate: Vec<AggregateRow> = Vec::new();
    for &rate in &sweep.rates {
        for &look in &sweep.looks {
            let rows: Vec<&MetricsRow> = all_rows
                .iter()
                .filter(|r| r.rate == rate && r.look_count == look)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let n = rows.len() as f64;
            let mean = |f: &dyn Fn(&MetricsRow) -> f64| {
                rows.iter().map(|r| f(r)).sum::<f64>() / n
            };
            let std = |f: &dyn Fn(&MetricsRow) -> f64, m: f64| {
                if rows.len() < 2 {
                    0.0
                } else {
                    (rows.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                }
            };
            let mean_enl = mean(&|r| r.enl);
            let std_enl = std(&|r| r.enl, mean_enl);
            let mean_base = mean(&|r| r.enl_baseline);
            aggregate.push(AggregateRow {
                rate,
                look_count: look,
                repetitions: rows.len(),
                mean_enl,
                std_enl,
                stderr_enl: std_enl / n.sqrt(),
                mean_enl_baseline: mean_base,
                std_enl_baseline: std(&|r| r.enl_baseline, mean_base),
                mean_relative_error_db: mean(&|r| r.relative_error_db),
            });
        }
    }
    aggregate.sort_by(|a, b| {
        a.rate
            .partial_cmp(&b.rate)
            .expect("finite rates")
            .then(a.look_count.cmp(&b.look_count))
    });
    let agg_path = dir.join("aggregate.csv");
    let mut w = csv::Writer::from_path(&agg_path)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", agg_path.display())))?;
    for row in &aggregate {
        w.serialize(row).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;

    if !failures.is_empty() {
        let report = dir.join("failures.txt");
        std::fs::write(&report, failures.join("\n"))
            .map_err(|e| CliError::Runtime(format!("write failures: {e}")))?;
        return Err(CliError::PartialSweep {
            failed: failures.len(),
            total: cells.len(),
        });
    }

    let manifest = RunManifest {
        config_hash: format!("{:016x}", config.hash()),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        started_at,
        finished_at: now_rfc3339(),
        files: vec!["aggregate.csv".to_string()],
        noise_snr_reference: "per-sample raw SNR over signal-support samples".to_string(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), json)
        .map_err(|e| CliError::Runtime(format!("write manifest: {e}")))?;
    Ok(manifest)
}
