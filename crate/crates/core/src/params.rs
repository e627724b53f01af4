//! SAR geometry and sampling constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LIGHT_SPEED_MPS: f64 = 299_792_458.0;

/// Envelope function selector for the azimuth and range apertures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    #[default]
    Rectangular,
    Hamming,
}

impl Window {
    /// Envelope value at normalized offset `t` (support is |t| <= 0.5).
    pub fn evaluate(self, t: f64) -> f64 {
        if t.abs() > 0.5 {
            return 0.0;
        }
        match self {
            Window::Rectangular => 1.0,
            Window::Hamming => 0.54 + 0.46 * (2.0 * std::f64::consts::PI * t).cos(),
        }
    }
}

/// Physical and sampling constants of the SAR geometry.
///
/// Constructed through [`RadarParams::new`], which enforces positivity,
/// the chirp-rate consistency Kr = Br / Tr, and the oversampling margins
/// on PRF and range sample rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarParams {
    pub carrier_freq_hz: f64,
    /// Closest-approach slant range of the scene center.
    pub slant_range_m: f64,
    pub platform_velocity_mps: f64,
    pub range_bandwidth_hz: f64,
    pub pulse_duration_s: f64,
    pub range_fm_rate_hzps: f64,
    pub prf_hz: f64,
    pub range_sample_rate_hz: f64,
    pub synthetic_aperture_time_s: f64,
    pub light_speed_mps: f64,
    #[serde(default)]
    pub azimuth_window: Window,
    #[serde(default)]
    pub range_window: Window,
}

impl RadarParams {
    pub fn new(params: RadarParams) -> Result<RadarParams> {
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("slant_range_m", self.slant_range_m),
            ("platform_velocity_mps", self.platform_velocity_mps),
            ("range_bandwidth_hz", self.range_bandwidth_hz),
            ("pulse_duration_s", self.pulse_duration_s),
            ("range_fm_rate_hzps", self.range_fm_rate_hzps),
            ("prf_hz", self.prf_hz),
            ("range_sample_rate_hz", self.range_sample_rate_hz),
            ("synthetic_aperture_time_s", self.synthetic_aperture_time_s),
            ("light_speed_mps", self.light_speed_mps),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        let kr_expected = self.range_bandwidth_hz / self.pulse_duration_s;
        let kr_err = (self.range_fm_rate_hzps - kr_expected).abs() / kr_expected;
        if kr_err > 1e-9 {
            return Err(Error::InvalidParams(format!(
                "range_fm_rate_hzps {} inconsistent with Br/Tr = {}",
                self.range_fm_rate_hzps, kr_expected
            )));
        }
        if self.range_sample_rate_hz < 1.1 * self.range_bandwidth_hz {
            return Err(Error::InvalidParams(format!(
                "range_sample_rate_hz {} below 1.1 * Br = {}",
                self.range_sample_rate_hz,
                1.1 * self.range_bandwidth_hz
            )));
        }
        let doppler_bw = self.doppler_bandwidth_hz();
        if self.prf_hz < 1.1 * doppler_bw {
            return Err(Error::InvalidParams(format!(
                "prf_hz {} below 1.1 * Doppler bandwidth = {}",
                self.prf_hz,
                1.1 * doppler_bw
            )));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        self.light_speed_mps / self.carrier_freq_hz
    }

    /// Azimuth FM rate Ka = 2 v^2 / (lambda R0) at zero squint.
    pub fn azimuth_fm_rate_hzps(&self) -> f64 {
        2.0 * self.platform_velocity_mps.powi(2) / (self.wavelength_m() * self.slant_range_m)
    }

    pub fn doppler_bandwidth_hz(&self) -> f64 {
        self.azimuth_fm_rate_hzps() * self.synthetic_aperture_time_s
    }

    /// Slant-range extent of one range sample.
    pub fn range_cell_m(&self) -> f64 {
        self.light_speed_mps / (2.0 * self.range_sample_rate_hz)
    }

    /// Along-track extent of one pulse interval.
    pub fn azimuth_cell_m(&self) -> f64 {
        self.platform_velocity_mps / self.prf_hz
    }

    /// Stable hash over the parameter values, recorded in manifests.
    pub fn hash(&self) -> u64 {
        let json = serde_json::to_vec(self).expect("params serialize");
        crate::seed::fnv1a64(&json)
    }

    /// Desk-scale geometry sized so a grid of the given shape holds a full
    /// synthetic aperture and chirp with margin. Oversampling factors are
    /// 1.2 in range and 1.15 in azimuth.
    pub fn desk_scale(n_azimuth: usize, n_range: usize) -> RadarParams {
        let light_speed = 3.0e8;
        let carrier = 1.0e9;
        let slant_range = 2000.0;
        let velocity = 100.0;
        let bandwidth = 100.0e6;
        let sample_rate = 1.2 * bandwidth;
        // Chirp occupies ~30% of the range window.
        let pulse_duration = 0.3 * n_range as f64 / sample_rate;
        let lambda = light_speed / carrier;
        let ka = 2.0 * velocity * velocity / (lambda * slant_range);
        // Aperture fills at most 80% of the azimuth window at 1.15x Doppler
        // oversampling: prf^2 <= 0.8 * 1.15 * Ka * n_az.
        let prf = (0.8 * 1.15 * ka * n_azimuth as f64).sqrt().floor();
        let aperture = prf / (1.15 * ka);
        RadarParams {
            carrier_freq_hz: carrier,
            slant_range_m: slant_range,
            platform_velocity_mps: velocity,
            range_bandwidth_hz: bandwidth,
            pulse_duration_s: pulse_duration,
            range_fm_rate_hzps: bandwidth / pulse_duration,
            prf_hz: prf,
            range_sample_rate_hz: sample_rate,
            synthetic_aperture_time_s: aperture,
            light_speed_mps: light_speed,
            azimuth_window: Window::Rectangular,
            range_window: Window::Rectangular,
        }
    }

    /// Airborne C-band geometry: R0 = 20 km, v = 350 m/s, f0 = 5 GHz,
    /// Br = 75 MHz, Tr = 2 us. Intended for grids of roughly 256 x 256
    /// and larger; the 2 us chirp alone spans 180 range samples.
    pub fn airborne_c_band() -> RadarParams {
        let bandwidth = 75.0e6;
        let pulse_duration = 2.0e-6;
        let carrier = 5.0e9;
        let light_speed = LIGHT_SPEED_MPS;
        let slant_range = 20.0e3;
        let velocity = 350.0;
        let lambda = light_speed / carrier;
        let ka = 2.0 * velocity * velocity / (lambda * slant_range);
        let prf = 168.0;
        RadarParams {
            carrier_freq_hz: carrier,
            slant_range_m: slant_range,
            platform_velocity_mps: velocity,
            range_bandwidth_hz: bandwidth,
            pulse_duration_s: pulse_duration,
            range_fm_rate_hzps: bandwidth / pulse_duration,
            prf_hz: prf,
            range_sample_rate_hz: 1.2 * bandwidth,
            synthetic_aperture_time_s: prf / (1.15 * ka),
            light_speed_mps: light_speed,
            azimuth_window: Window::Rectangular,
            range_window: Window::Rectangular,
        }
    }
}
