//! Experiment configuration: TOML-backed, strictly validated, with
//! command-line overrides and a stable content hash.

use std::path::Path;

use serde::{Deserialize, Serialize};

use mlcs_core::seed::fnv1a64;
use mlcs_core::sim::MaskPattern;
use mlcs_core::{RadarParams, RegionSpec, Window};

use crate::error::{CliError, CliResult};

/// Complete description of one experiment (or sweep of experiments).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; all per-stage streams derive from it.
    pub seed: u64,
    pub radar: RadarBlock,
    pub scene: SceneBlock,
    pub sampling: SamplingBlock,
    pub solver: SolverBlock,
    pub evaluation: EvaluationBlock,
    pub output: OutputBlock,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum RadarPreset {
    DeskScale,
    AirborneCBand,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarBlock {
    pub preset: RadarPreset,
    pub n_azimuth: usize,
    pub n_range: usize,
    #[serde(default)]
    pub azimuth_window: Window,
    #[serde(default)]
    pub range_window: Window,
    /// Force an all-zero RCMC shift table (exactly unitary chain); a
    /// closed-form test geometry, not a physical one.
    #[serde(default)]
    pub zero_migration: bool,
    /// Explicit parameter table; overrides the preset entirely when given.
    #[serde(default)]
    pub params: Option<RadarParams>,
}

impl RadarBlock {
    pub fn radar_params(&self) -> RadarParams {
        let mut p = match &self.params {
            Some(p) => p.clone(),
            None => match self.preset {
                RadarPreset::DeskScale => RadarParams::desk_scale(self.n_azimuth, self.n_range),
                RadarPreset::AirborneCBand => RadarParams::airborne_c_band(),
            },
        };
        p.azimuth_window = self.azimuth_window;
        p.range_window = self.range_window;
        p
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetCell {
    pub az_cell: usize,
    pub rg_cell: usize,
    #[serde(default = "one")]
    pub amplitude_re: f64,
    #[serde(default)]
    pub amplitude_im: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneKind {
    PointTargets,
    Rayleigh,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneBlock {
    pub kind: SceneKind,
    #[serde(default)]
    pub targets: Vec<TargetCell>,
    #[serde(default)]
    pub region: Option<RegionSpec>,
    #[serde(default = "default_scatterers")]
    pub scatterers_per_cell: usize,
    #[serde(default)]
    pub exact_scatterer_sum: bool,
    /// Per-sample raw SNR over signal-support samples, in dB; omit for
    /// noiseless synthesis.
    #[serde(default)]
    pub noise_snr_db: Option<f64>,
}

fn default_scatterers() -> usize {
    mlcs_core::sim::DEFAULT_SCATTERERS_PER_CELL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBlock {
    pub rate: f64,
    #[serde(default)]
    pub pattern: MaskPattern,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub lambda: f64,
    /// Interpret `lambda` as a fraction of the baseline image peak.
    #[serde(default)]
    pub lambda_relative_to_peak: bool,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_iters")]
    pub max_iterations: usize,
    #[serde(default = "default_tol")]
    pub rel_change_tol: f64,
    pub look_count: usize,
    #[serde(default)]
    pub warm_start: bool,
    /// Least-squares refit iterations on the recovered support (0 = off).
    #[serde(default)]
    pub debias_iterations: usize,
}

fn default_iters() -> usize {
    500
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationBlock {
    /// Homogeneous region for ENL, in full-resolution pixel coordinates;
    /// azimuth indices are divided by the look count for look images.
    pub enl_region: RegionSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub directory: String,
    #[serde(default = "default_true")]
    pub baseline: bool,
    #[serde(default)]
    pub export_pgm: bool,
    #[serde(default = "default_dynamic_range")]
    pub dynamic_range_db: f64,
}

fn default_true() -> bool {
    true
}

fn default_dynamic_range() -> f64 {
    60.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub rates: Vec<f64>,
    pub looks: Vec<usize>,
    pub repetitions: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

/// Command-line overrides of config keys.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub rate: Option<f64>,
    pub looks: Option<usize>,
    pub lambda: Option<f64>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("read {}: {e}", path.display())))?;
        let config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(rate) = ov.rate {
            self.sampling.rate = rate;
        }
        if let Some(looks) = ov.looks {
            self.solver.look_count = looks;
        }
        if let Some(lambda) = ov.lambda {
            self.solver.lambda = lambda;
        }
        if let Some(iters) = ov.iters {
            self.solver.max_iterations = iters;
        }
        if let Some(seed) = ov.seed {
            self.seed = seed;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let params = self.radar.radar_params();
        if let Err(e) = params.validate() {
            return bad(format!("radar: {e}"));
        }
        let (n_az, n_rg) = (self.radar.n_azimuth, self.radar.n_range);
        if self.radar.params.is_none()
            && matches!(self.radar.preset, RadarPreset::DeskScale)
            && (n_az < 8 || n_rg < 8)
        {
            return bad(format!("radar: grid {n_az}x{n_rg} below minimum 8x8"));
        }
        match self.scene.kind {
            SceneKind::PointTargets => {
                if self.scene.targets.is_empty() {
                    return bad("scene: point-targets kind with empty target list".into());
                }
                for t in &self.scene.targets {
                    if t.az_cell >= n_az || t.rg_cell >= n_rg {
                        return bad(format!(
                            "scene: target cell ({}, {}) outside {n_az}x{n_rg}",
                            t.az_cell, t.rg_cell
                        ));
                    }
                }
            }
            SceneKind::Rayleigh => {
                let region = match &self.scene.region {
                    Some(r) => r,
                    None => return bad("scene: rayleigh kind requires a region".into()),
                };
                if let Err(e) = region.check_bounds(n_az, n_rg) {
                    return bad(format!("scene: {e}"));
                }
                if self.scene.scatterers_per_cell == 0 {
                    return bad("scene: scatterers_per_cell must be >= 1".into());
                }
            }
        }
        if !(self.sampling.rate > 0.0 && self.sampling.rate <= 1.0) {
            return bad(format!("sampling: rate {} outside (0, 1]", self.sampling.rate));
        }
        if self.solver.lambda < 0.0 {
            return bad("solver: lambda must be >= 0".into());
        }
        if let Some(mu) = self.solver.mu {
            if mu <= 0.0 {
                return bad("solver: mu must be > 0 when present".into());
            }
        }
        if self.solver.max_iterations == 0 {
            return bad("solver: max_iterations must be >= 1".into());
        }
        if self.solver.look_count == 0 || n_az % self.solver.look_count != 0 {
            return bad(format!(
                "solver: look_count {} must divide azimuth length {n_az}",
                self.solver.look_count
            ));
        }
        if let Err(e) = self.evaluation.enl_region.check_bounds(n_az, n_rg) {
            return bad(format!("evaluation: {e}"));
        }
        if self.output.dynamic_range_db <= 0.0 {
            return bad("output: dynamic_range_db must be > 0".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.rates.is_empty() || sweep.looks.is_empty() {
                return bad("sweep: rates and looks must be nonempty".into());
            }
            if sweep.repetitions == 0 {
                return bad("sweep: repetitions must be >= 1".into());
            }
            if sweep.workers == 0 {
                return bad("sweep: workers must be >= 1".into());
            }
            for &r in &sweep.rates {
                if !(r > 0.0 && r <= 1.0) {
                    return bad(format!("sweep: rate {r} outside (0, 1]"));
                }
            }
            for &l in &sweep.looks {
                if l == 0 || n_az % l != 0 {
                    return bad(format!("sweep: look count {l} must divide azimuth length {n_az}"));
                }
            }
        }
        Ok(())
    }

    /// Stable content hash over the canonical JSON form.
    pub fn hash(&self) -> u64 {
        let json = serde_json::to_string(self).expect("config serializes");
        fnv1a64(json.as_bytes())
    }
}
