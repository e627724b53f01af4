//! Quantitative evaluation: equivalent number of looks, reconstruction
//! error, and peak/sidelobe statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::LookStack;
use crate::solver::MultilookImage;

/// dB floor replacing -inf in outputs, for CSV friendliness.
pub const DB_FLOOR: f64 = -300.0;

/// Rectangle in pixel indices, end-exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub az_start: usize,
    pub az_end: usize,
    pub rg_start: usize,
    pub rg_end: usize,
}

impl RegionSpec {
    pub fn new(az_start: usize, az_end: usize, rg_start: usize, rg_end: usize) -> Result<Self> {
        let r = Self {
            az_start,
            az_end,
            rg_start,
            rg_end,
        };
        if az_end <= az_start || rg_end <= rg_start {
            return Err(Error::InvalidRegion(format!("empty region {r:?}")));
        }
        Ok(r)
    }

    pub fn pixel_count(&self) -> usize {
        (self.az_end - self.az_start) * (self.rg_end - self.rg_start)
    }

    pub fn check_bounds(&self, n_azimuth: usize, n_range: usize) -> Result<()> {
        if self.az_end > n_azimuth || self.rg_end > n_range {
            return Err(Error::InvalidRegion(format!(
                "region {self:?} exceeds image bounds ({n_azimuth}, {n_range})"
            )));
        }
        Ok(())
    }
}

/// Which power of the image the ENL statistics run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnlMode {
    /// mean^2 / variance of z^2, the paper's definition.
    #[default]
    Intensity,
    /// Cross-check mode on z directly.
    Amplitude,
}

/// Equivalent number of looks over a homogeneous region.
pub fn enl(image: &MultilookImage, region: &RegionSpec) -> Result<f64> {
    enl_with_mode(image, region, EnlMode::Intensity)
}

pub fn enl_with_mode(image: &MultilookImage, region: &RegionSpec, mode: EnlMode) -> Result<f64> {
    region.check_bounds(image.n_azimuth(), image.n_range())?;
    if region.pixel_count() < 16 {
        return Err(Error::InvalidRegion(format!(
            "ENL region needs at least 16 pixels, got {}",
            region.pixel_count()
        )));
    }
    let mut values = Vec::with_capacity(region.pixel_count());
    for az in region.az_start..region.az_end {
        for rg in region.rg_start..region.rg_end {
            let z = image.get(az, rg);
            values.push(match mode {
                EnlMode::Intensity => z * z,
                EnlMode::Amplitude => z,
            });
        }
    }
    enl_of_samples(&values)
}

/// ENL of a bare intensity sample set: mean^2 / variance.
pub fn enl_of_samples(intensity: &[f64]) -> Result<f64> {
    let n = intensity.len() as f64;
    let mean = intensity.iter().sum::<f64>() / n;
    let var = intensity.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::DegenerateRegion);
    }
    Ok(mean * mean / var)
}

fn ratio_db(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        return DB_FLOOR;
    }
    (20.0 * (num / den).log10()).max(DB_FLOOR)
}

/// 20 log10(||estimate - truth|| / ||truth||).
pub fn relative_error_db(estimate: &MultilookImage, truth: &MultilookImage) -> Result<f64> {
    if estimate.shape() != truth.shape() {
        return Err(Error::ShapeMismatch {
            expected: truth.shape(),
            got: estimate.shape(),
        });
    }
    let truth_norm = truth.norm();
    if truth_norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff: f64 = estimate
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(ratio_db(diff, truth_norm))
}

/// Relative error between look stacks, in dB.
pub fn relative_error_stack_db(estimate: &LookStack, truth: &LookStack) -> Result<f64> {
    let truth_norm = truth.norm();
    if truth_norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff = estimate.sub(truth)?.norm();
    Ok(ratio_db(diff, truth_norm))
}

/// Peak location/value and integrated sidelobe ratio of an image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReport {
    pub az: usize,
    pub rg: usize,
    pub value: f64,
    /// 10 log10(energy outside the mainlobe window / energy inside).
    pub islr_db: f64,
}

/// Locate the image peak and integrate sidelobe energy outside a square
/// window of half-width `window_half` around it.
pub fn peak_report(image: &MultilookImage, window_half: usize) -> Result<PeakReport> {
    let (n_az, n_rg) = image.shape();
    let mut peak = (0usize, 0usize, f64::MIN);
    for az in 0..n_az {
        for rg in 0..n_rg {
            let v = image.get(az, rg);
            if v > peak.2 {
                peak = (az, rg, v);
            }
        }
    }
    if peak.2 <= 0.0 {
        return Err(Error::InvalidRegion("image has no positive peak".into()));
    }
    let mut inside = 0.0;
    let mut outside = 0.0;
    for az in 0..n_az {
        for rg in 0..n_rg {
            let e = image.get(az, rg).powi(2);
            let in_window = az.abs_diff(peak.0) <= window_half && rg.abs_diff(peak.1) <= window_half;
            if in_window {
                inside += e;
            } else {
                outside += e;
            }
        }
    }
    let islr_db = if outside == 0.0 {
        DB_FLOOR
    } else {
        (10.0 * (outside / inside).log10()).max(DB_FLOOR)
    };
    Ok(PeakReport {
        az: peak.0,
        rg: peak.1,
        value: peak.2,
        islr_db,
    })
}
