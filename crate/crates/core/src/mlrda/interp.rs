//! Fractional range shifts via truncated-sinc interpolation.
//!
//! The kernel is an 8-tap Hamming-weighted sinc, normalized to unit DC
//! gain. Samples shifted beyond the range extent wrap circularly, so each
//! per-row interpolation is an exactly linear square map whose transpose
//! is well defined.

use num_complex::Complex64;

pub const KERNEL_TAPS: usize = 8;
const TAP_LO: i64 = -(KERNEL_TAPS as i64) / 2 + 1; // -3
const TAP_HI: i64 = KERNEL_TAPS as i64 / 2; // +4

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Tap weights for a fractional offset mu in [0, 1). Tap j applies to the
/// source sample floor(position) + j.
pub fn kernel_weights(mu: f64) -> [f64; KERNEL_TAPS] {
    debug_assert!((0.0..1.0).contains(&mu));
    let mut w = [0.0; KERNEL_TAPS];
    let half = KERNEL_TAPS as f64 / 2.0;
    let mut sum = 0.0;
    for (slot, j) in (TAP_LO..=TAP_HI).enumerate() {
        let x = j as f64 - mu;
        let window = 0.54 + 0.46 * (std::f64::consts::PI * x / half).cos();
        w[slot] = sinc(x) * window;
        sum += w[slot];
    }
    for v in &mut w {
        *v /= sum;
    }
    w
}

#[inline]
fn wrap(idx: i64, n: i64) -> usize {
    idx.rem_euclid(n) as usize
}

/// Shift one row by `shift` samples: out[r] = in[r + shift], interpolated.
pub fn shift_row(input: &[Complex64], output: &mut [Complex64], shift: f64) {
    let n = input.len() as i64;
    let base = shift.floor();
    let mu = shift - base;
    let w = kernel_weights(mu);
    let base = base as i64;
    for r in 0..input.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (slot, j) in (TAP_LO..=TAP_HI).enumerate() {
            acc += w[slot] * input[wrap(r as i64 + base + j, n)];
        }
        output[r] = acc;
    }
}

/// Exact transpose of [`shift_row`] for the same `shift`: the adjoint of
/// the interpolation stencil (weights are real, so transpose = adjoint).
pub fn shift_row_transpose(input: &[Complex64], output: &mut [Complex64], shift: f64) {
    let n = input.len() as i64;
    let base = shift.floor();
    let mu = shift - base;
    let w = kernel_weights(mu);
    let base = base as i64;
    for r in 0..input.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (slot, j) in (TAP_LO..=TAP_HI).enumerate() {
            acc += w[slot] * input[wrap(r as i64 - base - j, n)];
        }
        output[r] = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_row(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn zero_shift_is_identity() {
        let row = random_row(16, 1);
        let mut out = vec![Complex64::default(); 16];
        shift_row(&row, &mut out, 0.0);
        for (a, b) in row.iter().zip(&out) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn integer_shift_is_circular_rotation() {
        let row = random_row(12, 2);
        let mut out = vec![Complex64::default(); 12];
        shift_row(&row, &mut out, 3.0);
        for r in 0..12 {
            assert!((out[r] - row[(r + 3) % 12]).norm() < 1e-13);
        }
    }

    #[test]
    fn transpose_matches_dense_transpose() {
        let n = 10;
        let shift = 1.37;
        // Build the dense stencil column by column and compare products.
        let x = random_row(n, 3);
        let y = random_row(n, 4);
        let mut ax = vec![Complex64::default(); n];
        shift_row(&x, &mut ax, shift);
        let mut aty = vec![Complex64::default(); n];
        shift_row_transpose(&y, &mut aty, shift);
        let lhs: Complex64 = ax.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let rhs: Complex64 = x.iter().zip(&aty).map(|(a, b)| a.conj() * b).sum();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn fractional_shift_round_trip_error_is_small() {
        // Shift forward then back with negated shift; bandlimited-ish data.
        let n = 64;
        let row: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                Complex64::new(
                    (std::f64::consts::TAU * 3.0 * t).sin(),
                    (std::f64::consts::TAU * 2.0 * t).cos(),
                )
            })
            .collect();
        let mut fwd = vec![Complex64::default(); n];
        let mut back = vec![Complex64::default(); n];
        shift_row(&row, &mut fwd, 0.41);
        shift_row(&fwd, &mut back, -0.41);
        let err: f64 = row
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm < 3e-2, "round trip rel err {}", err / norm);
    }
}
