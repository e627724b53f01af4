//! Raw SAR echo synthesis and compressive subsampling.
//!
//! The echo model is the time-domain superposition of hyperbolic-range
//! impulse responses over all scene scatterers, with optional circular
//! complex Gaussian noise. The raw grid shares the scene grid's shape:
//! pulse i carries azimuth time (i - n_az/2) / prf and range sample k
//! carries fast time 2 R0 / c + (k - n_rg/2) / fs.

use num_complex::Complex64;
use rand::seq::index::sample as index_sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::mask::SamplingMask;
use crate::metrics::RegionSpec;
use crate::params::RadarParams;
use crate::seed::Seed;

/// Entry cap for the dense observation-matrix oracle.
pub const OBSERVATION_MATRIX_CAP: usize = 1 << 24;

/// Scatterer count behind the default Rayleigh speckle region.
pub const DEFAULT_SCATTERERS_PER_CELL: usize = 400;

const NOISE_STREAM: u64 = 0x6e6f_6973;
const SPECKLE_STREAM: u64 = 0x7370_6563;

/// An explicit off-grid point target, positioned in meters relative to the
/// scene center (azimuth along track, range in slant range).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTarget {
    pub azimuth_m: f64,
    pub range_m: f64,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
}

impl PointTarget {
    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.amplitude_re, self.amplitude_im)
    }
}

/// Synthetic reflectivity scene: a complex grid of on-cell scatterers plus
/// an optional list of off-grid point targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub reflectivity: ComplexGrid,
    pub cell_spacing_azimuth_m: f64,
    pub cell_spacing_range_m: f64,
    pub target_list: Vec<PointTarget>,
}

impl Scene {
    /// Empty scene on the natural raw-data grid of `params`.
    pub fn empty(n_azimuth: usize, n_range: usize, params: &RadarParams) -> Scene {
        Scene {
            reflectivity: ComplexGrid::zeros(n_azimuth, n_range),
            cell_spacing_azimuth_m: params.azimuth_cell_m(),
            cell_spacing_range_m: params.range_cell_m(),
            target_list: Vec::new(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.reflectivity.shape()
    }

    fn validate(&self, params: &RadarParams) -> Result<()> {
        if !self.reflectivity.is_finite() {
            return Err(Error::InvalidScene("non-finite reflectivity".into()));
        }
        let (n_az, n_rg) = self.shape();
        let half_az = 0.5 * n_az as f64 * params.azimuth_cell_m();
        let half_rg = 0.5 * n_rg as f64 * params.range_cell_m();
        for t in &self.target_list {
            if !(t.amplitude().re.is_finite() && t.amplitude().im.is_finite()) {
                return Err(Error::InvalidScene("non-finite target amplitude".into()));
            }
            if t.azimuth_m.abs() > half_az || t.range_m.abs() > half_rg {
                return Err(Error::InvalidScene(format!(
                    "target at ({}, {}) m outside the illuminated swath (+-{half_az}, +-{half_rg})",
                    t.azimuth_m, t.range_m
                )));
            }
        }
        Ok(())
    }

    /// All scatterers as (closest-approach azimuth time, closest-approach
    /// slant range, amplitude).
    fn scatterers(&self, params: &RadarParams) -> Vec<(f64, f64, Complex64)> {
        let (n_az, n_rg) = self.shape();
        let c_az = n_az as f64 / 2.0;
        let c_rg = n_rg as f64 / 2.0;
        let mut out = Vec::new();
        for az in 0..n_az {
            for rg in 0..n_rg {
                let amp = self.reflectivity.get(az, rg);
                if amp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let p_az = (az as f64 - c_az) * self.cell_spacing_azimuth_m;
                let p_rg = (rg as f64 - c_rg) * self.cell_spacing_range_m;
                out.push((
                    p_az / params.platform_velocity_mps,
                    params.slant_range_m + p_rg,
                    amp,
                ));
            }
        }
        for t in &self.target_list {
            out.push((
                t.azimuth_m / params.platform_velocity_mps,
                params.slant_range_m + t.range_m,
                t.amplitude(),
            ));
        }
        out
    }
}

/// Homogeneous speckle scene: every cell inside `region` carries a Rayleigh
/// amplitude with uniform phase. The default draws the circular-Gaussian
/// limit of `scatterers_per_cell` unit scatterers; passing
/// `exact_scatterer_sum = true` sums that many unit phasors instead.
pub fn rayleigh_scene(
    n_azimuth: usize,
    n_range: usize,
    region: &RegionSpec,
    params: &RadarParams,
    seed: Seed,
    scatterers_per_cell: usize,
    exact_scatterer_sum: bool,
) -> Result<Scene> {
    region.check_bounds(n_azimuth, n_range)?;
    let mut scene = Scene::empty(n_azimuth, n_range, params);
    let k = scatterers_per_cell.max(1);
    for az in region.az_start..region.az_end {
        for rg in region.rg_start..region.rg_end {
            let idx = (az * n_range + rg) as u64;
            let mut rng = seed.derive(&[SPECKLE_STREAM, idx]).rng();
            let value = if exact_scatterer_sum {
                let mut acc = Complex64::new(0.0, 0.0);
                for _ in 0..k {
                    let phase: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                    acc += Complex64::from_polar(1.0, phase);
                }
                acc
            } else {
                let sigma = (k as f64 / 2.0).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * sigma, im * sigma)
            };
            scene.reflectivity.set(az, rg, value);
        }
    }
    Ok(scene)
}

/// Compressed measurements: the retained raw samples in mask order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedData {
    pub values: Vec<Complex64>,
    pub mask: SamplingMask,
    pub full_shape: (usize, usize),
}

impl CompressedData {
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Time-domain SAR impulse response h(eta, tau) for a scatterer at the
/// reference slant range, with eta relative to its closest approach and
/// tau the absolute fast time.
pub fn impulse_response(params: &RadarParams, eta: f64, tau: f64) -> Complex64 {
    impulse_response_at(params, params.slant_range_m, eta, tau)
}

fn impulse_response_at(params: &RadarParams, r_closest: f64, eta: f64, tau: f64) -> Complex64 {
    let w_a = params
        .azimuth_window
        .evaluate(eta / params.synthetic_aperture_time_s);
    if w_a == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let v_eta = params.platform_velocity_mps * eta;
    let range = (r_closest * r_closest + v_eta * v_eta).sqrt();
    let delay = 2.0 * range / params.light_speed_mps;
    let dtau = tau - delay;
    let w_r = params.range_window.evaluate(dtau / params.pulse_duration_s);
    if w_r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = -4.0 * std::f64::consts::PI * params.carrier_freq_hz * range
        / params.light_speed_mps
        + std::f64::consts::PI * params.range_fm_rate_hzps * dtau * dtau;
    Complex64::from_polar(w_a * w_r, phase)
}

/// Synthesize the fully sampled raw echo of `scene`. Noise, when requested,
/// is circular complex Gaussian calibrated so the signal-to-noise power
/// ratio over signal-support samples equals `noise_snr_db`; its stream is
/// keyed by (seed, sample index) so results are schedule-independent.
pub fn simulate_raw(
    scene: &Scene,
    params: &RadarParams,
    seed: Seed,
    noise_snr_db: Option<f64>,
) -> Result<ComplexGrid> {
    params.validate()?;
    scene.validate(params)?;
    let (n_az, n_rg) = scene.shape();
    let mut raw = ComplexGrid::zeros(n_az, n_rg);

    let prf = params.prf_hz;
    let fs = params.range_sample_rate_hz;
    let c_az = n_az as f64 / 2.0;
    let c_rg = n_rg as f64 / 2.0;
    let tau0 = 2.0 * params.slant_range_m / params.light_speed_mps;
    let half_aperture = 0.5 * params.synthetic_aperture_time_s;
    let half_pulse = 0.5 * params.pulse_duration_s;

    for (eta_c, r_closest, amp) in scene.scatterers(params) {
        // Pulse indices inside the azimuth envelope support.
        let i_lo = ((eta_c - half_aperture) * prf + c_az).ceil().max(0.0) as usize;
        let i_hi = (((eta_c + half_aperture) * prf + c_az).floor() as i64 + 1)
            .clamp(0, n_az as i64) as usize;
        for i in i_lo..i_hi {
            let eta = (i as f64 - c_az) / prf - eta_c;
            let v_eta = params.platform_velocity_mps * eta;
            let delay = 2.0 * (r_closest * r_closest + v_eta * v_eta).sqrt()
                / params.light_speed_mps;
            // Range samples inside the chirp support.
            let k_lo = ((delay - half_pulse - tau0) * fs + c_rg).ceil().max(0.0) as usize;
            let k_hi = (((delay + half_pulse - tau0) * fs + c_rg).floor() as i64 + 1)
                .clamp(0, n_rg as i64) as usize;
            for k in k_lo..k_hi {
                let tau = tau0 + (k as f64 - c_rg) / fs;
                let h = impulse_response_at(params, r_closest, eta, tau);
                raw.set(i, k, raw.get(i, k) + amp * h);
            }
        }
    }

    if let Some(snr_db) = noise_snr_db {
        let support: Vec<f64> = raw
            .data()
            .iter()
            .map(|v| v.norm_sqr())
            .filter(|&p| p > 0.0)
            .collect();
        let signal_power = if support.is_empty() {
            1.0
        } else {
            support.iter().sum::<f64>() / support.len() as f64
        };
        let noise_power = signal_power / 10f64.powf(snr_db / 10.0);
        let sigma = (noise_power / 2.0).sqrt();
        for idx in 0..raw.len() {
            let mut rng = seed.derive(&[NOISE_STREAM, idx as u64]).rng();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let az = idx / n_rg;
            let rg = idx % n_rg;
            let noisy = raw.get(az, rg) + Complex64::new(re * sigma, im * sigma);
            raw.set(az, rg, noisy);
        }
    }
    Ok(raw)
}

/// Explicit dense observation matrix H with simulate_raw(scene) = H vec(scene)
/// for noiseless on-grid scenes. Oracle use only; capped at
/// [`OBSERVATION_MATRIX_CAP`] entries.
pub fn observation_matrix(
    scene_shape: (usize, usize),
    params: &RadarParams,
) -> Result<DenseMatrix> {
    let (n_az, n_rg) = scene_shape;
    let n = n_az * n_rg;
    let entries = n * n;
    if entries > OBSERVATION_MATRIX_CAP {
        return Err(Error::SizeCapExceeded {
            entries,
            cap: OBSERVATION_MATRIX_CAP,
        });
    }
    let mut h = DenseMatrix::zeros(n, n);
    let mut scene = Scene::empty(n_az, n_rg, params);
    for cell in 0..n {
        let (az, rg) = (cell / n_rg, cell % n_rg);
        scene.reflectivity.set(az, rg, Complex64::new(1.0, 0.0));
        let column = simulate_raw(&scene, params, Seed(0), None)?;
        h.set_column(cell, column.data());
        scene.reflectivity.set(az, rg, Complex64::new(0.0, 0.0));
    }
    Ok(h)
}

/// Random subsampling pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MaskPattern {
    /// Uniform choice of individual raw samples without replacement.
    #[default]
    SampleWise,
    /// Uniform choice of whole azimuth pulses; all range samples of the
    /// chosen pulses are retained (reduced-PRF acquisition).
    PulseWise,
}

/// Draw a deterministic sampling mask over a raw grid of the given shape.
pub fn generate_mask(
    shape: (usize, usize),
    rate: f64,
    seed: Seed,
    pattern: MaskPattern,
) -> Result<SamplingMask> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::RateOutOfRange(rate));
    }
    let (n_az, n_rg) = shape;
    let total = n_az * n_rg;
    let mut rng = seed.rng();
    let retained: Vec<u64> = match pattern {
        MaskPattern::SampleWise => {
            let count = ((rate * total as f64).round() as usize).clamp(1, total);
            let mut idx: Vec<u64> = index_sample(&mut rng, total, count)
                .into_iter()
                .map(|i| i as u64)
                .collect();
            idx.sort_unstable();
            idx
        }
        MaskPattern::PulseWise => {
            let count = ((rate * n_az as f64).round() as usize).clamp(1, n_az);
            let mut pulses: Vec<usize> = index_sample(&mut rng, n_az, count).into_vec();
            pulses.sort_unstable();
            pulses
                .iter()
                .flat_map(|&p| (0..n_rg).map(move |k| (p * n_rg + k) as u64))
                .collect()
        }
    };
    SamplingMask::new(retained, total as u64)
}

/// Apply the selection matrix: keep raw values at retained indices, in
/// mask order.
pub fn subsample(raw: &ComplexGrid, mask: &SamplingMask) -> Result<CompressedData> {
    if mask.total_samples() as usize != raw.len() {
        return Err(Error::InvalidMask(format!(
            "mask covers {} samples but grid has {}",
            mask.total_samples(),
            raw.len()
        )));
    }
    let values = mask
        .retained()
        .iter()
        .map(|&i| raw.data()[i as usize])
        .collect();
    Ok(CompressedData {
        values,
        mask: mask.clone(),
        full_shape: raw.shape(),
    })
}

/// Adjoint of the selection matrix: scatter values back, zero elsewhere.
pub fn subsample_adjoint(data: &CompressedData) -> ComplexGrid {
    let (n_az, n_rg) = data.full_shape;
    let mut grid = ComplexGrid::zeros(n_az, n_rg);
    for (&idx, &v) in data.mask.retained().iter().zip(&data.values) {
        grid.data_mut()[idx as usize] = v;
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inner_product;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn desk() -> RadarParams {
        RadarParams::desk_scale(32, 32)
    }

    #[test]
    fn impulse_response_zero_offset_phase() {
        let p = desk();
        let tau0 = 2.0 * p.slant_range_m / p.light_speed_mps;
        let h = impulse_response(&p, 0.0, tau0);
        let expected = Complex64::from_polar(
            1.0,
            -4.0 * std::f64::consts::PI * p.carrier_freq_hz * p.slant_range_m
                / p.light_speed_mps,
        );
        assert!((h - expected).norm() < 1e-12);
    }

    #[test]
    fn impulse_response_outside_chirp_support_is_zero() {
        let p = desk();
        let tau0 = 2.0 * p.slant_range_m / p.light_speed_mps;
        assert_eq!(
            impulse_response(&p, 0.0, tau0 + 0.51 * p.pulse_duration_s),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn impulse_response_unit_modulus_inside_support() {
        let p = desk();
        let tau0 = 2.0 * p.slant_range_m / p.light_speed_mps;
        let h = impulse_response(&p, 0.0, tau0 + 0.25 * p.pulse_duration_s);
        assert!((h.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_scene_gives_zero_grid() {
        let p = desk();
        let scene = Scene::empty(32, 32, &p);
        let raw = simulate_raw(&scene, &p, Seed(1), None).unwrap();
        assert_eq!(raw.norm(), 0.0);
    }

    #[test]
    fn two_target_scene_is_sum_of_singles() {
        let p = desk();
        let mut a = Scene::empty(32, 32, &p);
        a.reflectivity.set(10, 12, Complex64::new(1.0, 0.5));
        let mut b = Scene::empty(32, 32, &p);
        b.reflectivity.set(20, 18, Complex64::new(-0.3, 1.0));
        let mut both = Scene::empty(32, 32, &p);
        both.reflectivity.set(10, 12, Complex64::new(1.0, 0.5));
        both.reflectivity.set(20, 18, Complex64::new(-0.3, 1.0));

        let ya = simulate_raw(&a, &p, Seed(0), None).unwrap();
        let yb = simulate_raw(&b, &p, Seed(0), None).unwrap();
        let yab = simulate_raw(&both, &p, Seed(0), None).unwrap();
        let sum = ya.add(&yb).unwrap();
        assert!(yab.sub(&sum).unwrap().norm() <= 1e-12 * yab.norm());
    }

    #[test]
    fn simulation_linearity_in_amplitude() {
        let p = desk();
        let mut scene = Scene::empty(32, 32, &p);
        scene.reflectivity.set(16, 16, Complex64::new(1.0, 0.0));
        let y1 = simulate_raw(&scene, &p, Seed(0), None).unwrap();
        scene.reflectivity.set(16, 16, Complex64::new(2.5, -1.0));
        let y2 = simulate_raw(&scene, &p, Seed(0), None).unwrap();
        let scaled = y1.scaled(Complex64::new(2.5, -1.0));
        assert!(y2.sub(&scaled).unwrap().norm() <= 1e-12 * y2.norm());
    }

    #[test]
    fn off_swath_target_rejected() {
        let p = desk();
        let mut scene = Scene::empty(32, 32, &p);
        scene.target_list.push(PointTarget {
            azimuth_m: 1.0e6,
            range_m: 0.0,
            amplitude_re: 1.0,
            amplitude_im: 0.0,
        });
        assert!(simulate_raw(&scene, &p, Seed(0), None).is_err());
    }

    #[test]
    fn mask_full_rate_is_all_indices() {
        for pattern in [MaskPattern::SampleWise, MaskPattern::PulseWise] {
            let m = generate_mask((4, 5), 1.0, Seed(3), pattern).unwrap();
            assert_eq!(m.retained(), (0u64..20).collect::<Vec<_>>().as_slice());
        }
    }

    #[test]
    fn mask_cardinality_and_determinism() {
        let m = generate_mask((10, 10), 0.2, Seed(5), MaskPattern::SampleWise).unwrap();
        assert_eq!(m.retained_count(), 20);
        let m2 = generate_mask((10, 10), 0.2, Seed(5), MaskPattern::SampleWise).unwrap();
        assert_eq!(m, m2);
        let m3 = generate_mask((10, 10), 0.2, Seed(6), MaskPattern::SampleWise).unwrap();
        assert_ne!(m, m3);
    }

    #[test]
    fn pulse_wise_mask_keeps_whole_pulses() {
        let m = generate_mask((10, 7), 0.3, Seed(9), MaskPattern::PulseWise).unwrap();
        assert_eq!(m.retained_count(), 3 * 7);
        for chunk in m.retained().chunks(7) {
            let pulse = chunk[0] / 7;
            assert!(chunk.iter().enumerate().all(|(k, &i)| i == pulse * 7 + k as u64));
        }
    }

    #[test]
    fn mask_rate_out_of_range() {
        assert!(generate_mask((4, 4), 0.0, Seed(0), MaskPattern::SampleWise).is_err());
        assert!(generate_mask((4, 4), 1.5, Seed(0), MaskPattern::SampleWise).is_err());
    }

    #[test]
    fn subsample_and_adjoint_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y = ComplexGrid::random(6, 6, &mut rng);
        let mask = generate_mask((6, 6), 0.4, Seed(2), MaskPattern::SampleWise).unwrap();
        let d = subsample(&y, &mask).unwrap();
        assert!(d.norm() <= y.norm());

        // Theta Theta^H = I on the retained set.
        let round = subsample(&subsample_adjoint(&d), &mask).unwrap();
        assert_eq!(round.values, d.values);

        // <Theta y, d> = <y, Theta^H d>.
        let mut d_rand = d.clone();
        for v in &mut d_rand.values {
            *v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let lhs: Complex64 = subsample(&y, &mask)
            .unwrap()
            .values
            .iter()
            .zip(&d_rand.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let rhs = inner_product(&y, &subsample_adjoint(&d_rand)).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn full_rate_subsample_is_vec_and_adjoint_is_reshape() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let y = ComplexGrid::random(3, 4, &mut rng);
        let mask = SamplingMask::full(12);
        let d = subsample(&y, &mask).unwrap();
        assert_eq!(d.values.as_slice(), y.data());
        assert_eq!(subsample_adjoint(&d), y);
    }

    #[test]
    fn single_index_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let y = ComplexGrid::random(3, 3, &mut rng);
        let mask = SamplingMask::new(vec![4], 9).unwrap();
        let d = subsample(&y, &mask).unwrap();
        assert_eq!(d.values, vec![y.data()[4]]);
    }

    #[test]
    fn noise_calibration_within_half_db() {
        let p = RadarParams::desk_scale(128, 128);
        let region = RegionSpec::new(32, 96, 32, 96).unwrap();
        let scene = rayleigh_scene(128, 128, &region, &p, Seed(21), 4, false).unwrap();
        let clean = simulate_raw(&scene, &p, Seed(21), None).unwrap();
        let noisy = simulate_raw(&scene, &p, Seed(21), Some(20.0)).unwrap();
        let noise = noisy.sub(&clean).unwrap();
        let support: Vec<usize> = clean
            .data()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() > 0.0)
            .map(|(i, _)| i)
            .collect();
        let sig_p: f64 =
            support.iter().map(|&i| clean.data()[i].norm_sqr()).sum::<f64>() / support.len() as f64;
        let noise_p: f64 = noise.data().iter().map(|v| v.norm_sqr()).sum::<f64>()
            / noise.len() as f64;
        let measured = 10.0 * (sig_p / noise_p).log10();
        assert!(
            (measured - 20.0).abs() < 0.5,
            "measured SNR {measured} dB, wanted 20 +- 0.5"
        );
    }

    #[test]
    fn noise_stream_is_deterministic() {
        let p = desk();
        let mut scene = Scene::empty(32, 32, &p);
        scene.reflectivity.set(16, 16, Complex64::new(1.0, 0.0));
        let a = simulate_raw(&scene, &p, Seed(77), Some(10.0)).unwrap();
        let b = simulate_raw(&scene, &p, Seed(77), Some(10.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rayleigh_scene_exact_sum_mode_matches_power_scale() {
        let p = RadarParams::desk_scale(32, 32);
        let region = RegionSpec::new(4, 28, 4, 28).unwrap();
        let k = 400;
        let exact = rayleigh_scene(32, 32, &region, &p, Seed(5), k, true).unwrap();
        let gauss = rayleigh_scene(32, 32, &region, &p, Seed(5), k, false).unwrap();
        let cells = ((28 - 4) * (28 - 4)) as f64;
        let p_exact = exact.reflectivity.norm_sq() / cells;
        let p_gauss = gauss.reflectivity.norm_sq() / cells;
        // Both modes have per-cell mean power K.
        assert!((p_exact / k as f64 - 1.0).abs() < 0.15);
        assert!((p_gauss / k as f64 - 1.0).abs() < 0.15);
    }
}
