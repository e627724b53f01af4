//! Multilook range-Doppler operators.
//!
//! `look_form` is the look-formation map M: range compression, azimuth
//! FFT, range cell migration correction, azimuth matched filtering, then
//! extraction of L nonoverlapping Doppler subbands, each returned to the
//! image domain by a short inverse FFT. `look_inverse` is its inverse G,
//! built by running every stage backwards from the stacked look spectra.
//! With the RCMC adjoint realized as the exact transpose of the
//! interpolation stencil (the default), G is exactly the conjugate
//! transpose of M.

mod interp;

pub use interp::{kernel_weights, KERNEL_TAPS};

use num_complex::Complex64;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::fft::{fft_azimuth, fft_range, fft_slice, FftDirection};
use crate::grid::{ComplexGrid, LookStack};
use crate::params::RadarParams;
use crate::sim::{subsample_adjoint, CompressedData};

/// Size cap for dense materialization (azimuth x range and look count).
pub const MATERIALIZE_MAX_SIDE: usize = 16;
pub const MATERIALIZE_MAX_LOOKS: usize = 4;

/// How the reverse range-migration stage C realizes the adjoint of the
/// interpolation stencil D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RcmcAdjointMode {
    /// Exact transpose of the forward stencil; makes <G(X), y> = <X, M(y)>
    /// hold to roundoff.
    #[default]
    ExactTranspose,
    /// Re-interpolation with negated shifts, the approximate reversal;
    /// kept for fidelity experiments.
    NegatedShift,
}

/// Frequency-domain matched filters and the migration shift table for one
/// grid shape. All filter spectra are phase-only.
#[derive(Debug, Clone, PartialEq)]
pub struct RdaFilters {
    /// Range matched filter per range-frequency bin (natural FFT order).
    range_filter: Vec<Complex64>,
    /// Azimuth matched filter per (Doppler bin, range gate).
    azimuth_filter: ComplexGrid,
    /// RCMC shift per Doppler bin, in range samples.
    rcmc_shift_samples: Vec<f64>,
    shape: (usize, usize),
    rcmc_adjoint: RcmcAdjointMode,
}

impl RdaFilters {
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn rcmc_shift_samples(&self) -> &[f64] {
        &self.rcmc_shift_samples
    }

    pub fn rcmc_adjoint(&self) -> RcmcAdjointMode {
        self.rcmc_adjoint
    }

    pub fn with_rcmc_adjoint(mut self, mode: RcmcAdjointMode) -> Self {
        self.rcmc_adjoint = mode;
        self
    }

    /// Copy with an all-zero RCMC shift table. Every stage of the chain is
    /// then exactly unitary; used as a closed-form test geometry.
    pub fn with_zero_migration(mut self) -> Self {
        self.rcmc_shift_samples.fill(0.0);
        self
    }

    /// Synthetic filters with a caller-supplied shift table; used by tests
    /// that need zero or exaggerated migration.
    pub fn synthetic(
        shape: (usize, usize),
        range_filter: Vec<Complex64>,
        azimuth_filter: ComplexGrid,
        rcmc_shift_samples: Vec<f64>,
    ) -> Result<Self> {
        if range_filter.len() != shape.1
            || azimuth_filter.shape() != shape
            || rcmc_shift_samples.len() != shape.0
        {
            return Err(Error::ShapeMismatch {
                expected: shape,
                got: (rcmc_shift_samples.len(), range_filter.len()),
            });
        }
        Ok(Self {
            range_filter,
            azimuth_filter,
            rcmc_shift_samples,
            shape,
            rcmc_adjoint: RcmcAdjointMode::ExactTranspose,
        })
    }

    /// Identity filters with no migration: the operator chain degenerates
    /// to a purely unitary FFT/extraction pipeline.
    pub fn identity(shape: (usize, usize)) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let mut q = ComplexGrid::zeros(shape.0, shape.1);
        q.data_mut().fill(one);
        Self {
            range_filter: vec![one; shape.1],
            azimuth_filter: q,
            rcmc_shift_samples: vec![0.0; shape.0],
            shape,
            rcmc_adjoint: RcmcAdjointMode::ExactTranspose,
        }
    }
}

/// Signed frequency index of natural-order FFT bin `k` out of `n`.
fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Hyperbolic range-migration factor D(f_eta) at zero squint.
fn migration_factor(params: &RadarParams, f_eta: f64) -> Result<f64> {
    let s = params.wavelength_m() * f_eta / (2.0 * params.platform_velocity_mps);
    let d_sq = 1.0 - s * s;
    if d_sq <= 0.0 {
        return Err(Error::AliasedGeometry {
            doppler_bw_hz: 2.0 * f_eta.abs(),
            prf_hz: params.prf_hz,
        });
    }
    Ok(d_sq.sqrt())
}

/// Build the matched filters and RCMC shift table for one grid shape.
pub fn build_filters(params: &RadarParams, shape: (usize, usize)) -> Result<RdaFilters> {
    params.validate()?;
    let (n_az, n_rg) = shape;
    if params.doppler_bandwidth_hz() > params.prf_hz {
        return Err(Error::AliasedGeometry {
            doppler_bw_hz: params.doppler_bandwidth_hz(),
            prf_hz: params.prf_hz,
        });
    }

    // Range matched filter: conjugate chirp spectrum, phase-only.
    let mut range_filter = Vec::with_capacity(n_rg);
    for k in 0..n_rg {
        let f = signed_bin(k, n_rg) as f64 * params.range_sample_rate_hz / n_rg as f64;
        let phase = std::f64::consts::PI * f * f / params.range_fm_rate_hzps;
        range_filter.push(Complex64::from_polar(1.0, phase));
    }

    let lambda = params.wavelength_m();
    let range_cell = params.range_cell_m();
    let c_rg = n_rg as f64 / 2.0;
    let mut azimuth_filter = ComplexGrid::zeros(n_az, n_rg);
    let mut rcmc_shift_samples = Vec::with_capacity(n_az);
    for k_az in 0..n_az {
        let f_eta = signed_bin(k_az, n_az) as f64 * params.prf_hz / n_az as f64;
        let d = migration_factor(params, f_eta)?;
        let delta_r = params.slant_range_m * (1.0 / d - 1.0);
        rcmc_shift_samples.push(delta_r / range_cell);
        for rg in 0..n_rg {
            let r_gate = params.slant_range_m + (rg as f64 - c_rg) * range_cell;
            let phase = 4.0 * std::f64::consts::PI * r_gate * d / lambda;
            azimuth_filter.set(k_az, rg, Complex64::from_polar(1.0, phase));
        }
    }

    Ok(RdaFilters {
        range_filter,
        azimuth_filter,
        rcmc_shift_samples,
        shape,
        rcmc_adjoint: RcmcAdjointMode::ExactTranspose,
    })
}

/// Assignment of Doppler bins to looks: L disjoint contiguous subbands,
/// numbered from most negative Doppler, covering all bins exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct LookPlan {
    look_count: usize,
    n_azimuth: usize,
    /// For look i, the natural-order Doppler bins in sub-FFT order.
    band_assignments: Vec<Vec<usize>>,
}

impl LookPlan {
    pub fn new(n_azimuth: usize, look_count: usize) -> Result<Self> {
        if look_count == 0 || !n_azimuth.is_multiple_of(look_count) {
            return Err(Error::LookCountMismatch {
                looks: look_count,
                n_azimuth,
            });
        }
        let band_len = n_azimuth / look_count;
        let half = n_azimuth / 2;
        let band_half = band_len / 2;
        // Shifted position p (increasing Doppler, most negative first) maps
        // to natural bin (p + n - half) mod n. Within each band the bins are
        // rotated by band_half so the band center sits at sub-FFT bin 0; for
        // L = 1 this reduces the extraction to a plain inverse FFT.
        let nat = |p: usize| (p + n_azimuth - half) % n_azimuth;
        let band_assignments = (0..look_count)
            .map(|i| {
                (0..band_len)
                    .map(|t| nat(i * band_len + (t + band_half) % band_len))
                    .collect()
            })
            .collect();
        Ok(Self {
            look_count,
            n_azimuth,
            band_assignments,
        })
    }

    pub fn look_count(&self) -> usize {
        self.look_count
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    pub fn band_len(&self) -> usize {
        self.n_azimuth / self.look_count
    }

    pub fn band_assignments(&self) -> &[Vec<usize>] {
        &self.band_assignments
    }
}

fn check_operator_shapes(
    filters: &RdaFilters,
    plan: &LookPlan,
    shape: (usize, usize),
) -> Result<()> {
    if filters.shape != shape {
        return Err(Error::ShapeMismatch {
            expected: filters.shape,
            got: shape,
        });
    }
    if plan.n_azimuth != shape.0 {
        return Err(Error::LookCountMismatch {
            looks: plan.look_count,
            n_azimuth: shape.0,
        });
    }
    Ok(())
}

/// Multiply by the range matched filter in the range-frequency domain.
fn apply_range_filter(grid: &ComplexGrid, filter: &[Complex64], conjugate: bool) -> ComplexGrid {
    let mut spec = fft_range(grid, FftDirection::Forward);
    let (n_az, n_rg) = spec.shape();
    for az in 0..n_az {
        for rg in 0..n_rg {
            let f = if conjugate {
                filter[rg].conj()
            } else {
                filter[rg]
            };
            spec.set(az, rg, spec.get(az, rg) * f);
        }
    }
    fft_range(&spec, FftDirection::Inverse)
}

fn apply_azimuth_filter(grid: &mut ComplexGrid, filter: &ComplexGrid, conjugate: bool) {
    for (v, f) in grid.data_mut().iter_mut().zip(filter.data()) {
        *v *= if conjugate { f.conj() } else { *f };
    }
}

enum RcmcStage {
    Forward,
    Reverse(RcmcAdjointMode),
}

fn apply_rcmc(grid: &ComplexGrid, shifts: &[f64], stage: RcmcStage) -> ComplexGrid {
    let (n_az, n_rg) = grid.shape();
    let mut out = ComplexGrid::zeros(n_az, n_rg);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_rg];
    for az in 0..n_az {
        let row = &grid.data()[az * n_rg..(az + 1) * n_rg];
        match stage {
            RcmcStage::Forward => interp::shift_row(row, &mut buf, shifts[az]),
            RcmcStage::Reverse(RcmcAdjointMode::ExactTranspose) => {
                interp::shift_row_transpose(row, &mut buf, shifts[az])
            }
            RcmcStage::Reverse(RcmcAdjointMode::NegatedShift) => {
                interp::shift_row(row, &mut buf, -shifts[az])
            }
        }
        out.data_mut()[az * n_rg..(az + 1) * n_rg].copy_from_slice(&buf);
    }
    out
}

/// The look-formation operator M: raw data to L low-resolution subimages.
pub fn look_form(
    raw: &ComplexGrid,
    filters: &RdaFilters,
    plan: &LookPlan,
) -> Result<LookStack> {
    check_operator_shapes(filters, plan, raw.shape())?;
    let (_, n_rg) = raw.shape();
    let band_len = plan.band_len();

    let compressed = apply_range_filter(raw, &filters.range_filter, false);
    let mut doppler = fft_azimuth(&compressed, FftDirection::Forward);
    doppler = apply_rcmc(&doppler, &filters.rcmc_shift_samples, RcmcStage::Forward);
    apply_azimuth_filter(&mut doppler, &filters.azimuth_filter, false);

    let mut stack = LookStack::zeros(plan.look_count, band_len, n_rg);
    let mut column = vec![Complex64::new(0.0, 0.0); band_len];
    for (i, band) in plan.band_assignments.iter().enumerate() {
        let look = stack.look_mut(i);
        for rg in 0..n_rg {
            for (t, &bin) in band.iter().enumerate() {
                column[t] = doppler.get(bin, rg);
            }
            fft_slice(&mut column, FftDirection::Inverse);
            for (t, &v) in column.iter().enumerate() {
                look.set(t, rg, v);
            }
        }
    }
    Ok(stack)
}

/// The spectrum-stacking operator S: short forward FFT of each look placed
/// into that look's Doppler band of a full-size spectrum grid.
pub fn spectrum_stack(looks: &LookStack, plan: &LookPlan) -> Result<ComplexGrid> {
    let (band_len, n_rg) = looks.look_shape();
    if looks.look_count() != plan.look_count || band_len != plan.band_len() {
        return Err(Error::LookCountMismatch {
            looks: looks.look_count(),
            n_azimuth: plan.n_azimuth,
        });
    }
    let mut spectrum = ComplexGrid::zeros(plan.n_azimuth, n_rg);
    let mut column = vec![Complex64::new(0.0, 0.0); band_len];
    for (i, band) in plan.band_assignments.iter().enumerate() {
        let look = looks.look(i);
        for rg in 0..n_rg {
            for t in 0..band_len {
                column[t] = look.get(t, rg);
            }
            fft_slice(&mut column, FftDirection::Forward);
            for (t, &bin) in band.iter().enumerate() {
                spectrum.set(bin, rg, column[t]);
            }
        }
    }
    Ok(spectrum)
}

/// The inverse look-formation operator G: subimages back to raw data.
pub fn look_inverse(
    looks: &LookStack,
    filters: &RdaFilters,
    plan: &LookPlan,
) -> Result<ComplexGrid> {
    let mut spectrum = spectrum_stack(looks, plan)?;
    check_operator_shapes(filters, plan, spectrum.shape())?;
    apply_azimuth_filter(&mut spectrum, &filters.azimuth_filter, true);
    let reversed = apply_rcmc(
        &spectrum,
        &filters.rcmc_shift_samples,
        RcmcStage::Reverse(filters.rcmc_adjoint),
    );
    let time_domain = fft_azimuth(&reversed, FftDirection::Inverse);
    Ok(apply_range_filter(&time_domain, &filters.range_filter, true))
}

/// Adjoint of the composite sensing map Theta G: zero-fill the residual,
/// then run look formation.
pub fn adjoint_of_sensing(
    residual: &CompressedData,
    filters: &RdaFilters,
    plan: &LookPlan,
) -> Result<LookStack> {
    look_form(&subsample_adjoint(residual), filters, plan)
}

/// Flatten a look stack look-major, each look azimuth-major.
pub fn stack_to_vec(stack: &LookStack) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(stack.look_count() * stack.look(0).len());
    for look in stack.looks() {
        out.extend_from_slice(look.data());
    }
    out
}

pub fn vec_to_stack(
    v: &[Complex64],
    look_count: usize,
    n_azimuth_sub: usize,
    n_range: usize,
) -> Result<LookStack> {
    let per_look = n_azimuth_sub * n_range;
    if v.len() != look_count * per_look {
        return Err(Error::ShapeMismatch {
            expected: (look_count * per_look, 1),
            got: (v.len(), 1),
        });
    }
    let looks = v
        .chunks(per_look)
        .map(|chunk| ComplexGrid::from_data(n_azimuth_sub, n_range, chunk.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    LookStack::new(looks)
}

fn check_materialize_cap(shape: (usize, usize), looks: usize) -> Result<()> {
    if shape.0 > MATERIALIZE_MAX_SIDE || shape.1 > MATERIALIZE_MAX_SIDE || looks > MATERIALIZE_MAX_LOOKS
    {
        return Err(Error::SizeCapExceeded {
            entries: (shape.0 * shape.1).pow(2),
            cap: (MATERIALIZE_MAX_SIDE * MATERIALIZE_MAX_SIDE).pow(2),
        });
    }
    Ok(())
}

/// Dense matrix of G: column c is G applied to the c-th unit look-stack
/// impulse. Oracle use only.
pub fn materialize_operator(
    filters: &RdaFilters,
    plan: &LookPlan,
    shape: (usize, usize),
) -> Result<DenseMatrix> {
    check_materialize_cap(shape, plan.look_count())?;
    check_operator_shapes(filters, plan, shape)?;
    let n = shape.0 * shape.1;
    let band_len = plan.band_len();
    let mut out = DenseMatrix::zeros(n, n);
    let mut stack = LookStack::zeros(plan.look_count(), band_len, shape.1);
    for c in 0..n {
        let look_idx = c / (band_len * shape.1);
        let within = c % (band_len * shape.1);
        let (az, rg) = (within / shape.1, within % shape.1);
        stack.look_mut(look_idx).set(az, rg, Complex64::new(1.0, 0.0));
        let grid = look_inverse(&stack, filters, plan)?;
        out.set_column(c, grid.data());
        stack.look_mut(look_idx).set(az, rg, Complex64::new(0.0, 0.0));
    }
    Ok(out)
}

/// Dense matrix of M, built the same way from unit grid impulses.
pub fn materialize_look_form(
    filters: &RdaFilters,
    plan: &LookPlan,
    shape: (usize, usize),
) -> Result<DenseMatrix> {
    check_materialize_cap(shape, plan.look_count())?;
    check_operator_shapes(filters, plan, shape)?;
    let n = shape.0 * shape.1;
    let mut out = DenseMatrix::zeros(n, n);
    let mut grid = ComplexGrid::zeros(shape.0, shape.1);
    for c in 0..n {
        let (az, rg) = (c / shape.1, c % shape.1);
        grid.set(az, rg, Complex64::new(1.0, 0.0));
        let stack = look_form(&grid, filters, plan)?;
        out.set_column(c, &stack_to_vec(&stack));
        grid.set(az, rg, Complex64::new(0.0, 0.0));
    }
    Ok(out)
}
