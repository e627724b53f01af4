//! Unitary FFTs along the azimuth and range axes.
//!
//! Both directions carry a 1/sqrt(N) factor, so forward and inverse are
//! conjugate transposes of each other and every transform preserves energy.
//! This is what makes the adjoint of each operator stage equal its inverse.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::ComplexGrid;

/// Transform direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftDirection {
    Forward,
    Inverse,
}

/// Unitary DFT along the azimuth axis of every range column.
pub fn fft_azimuth(grid: &ComplexGrid, direction: FftDirection) -> ComplexGrid {
    let (n_az, n_rg) = grid.shape();
    let mut planner = FftPlanner::new();
    let fft = match direction {
        FftDirection::Forward => planner.plan_fft_forward(n_az),
        FftDirection::Inverse => planner.plan_fft_inverse(n_az),
    };
    let scale = 1.0 / (n_az as f64).sqrt();
    let mut out = grid.clone();
    let mut column = vec![Complex64::new(0.0, 0.0); n_az];
    for rg in 0..n_rg {
        for az in 0..n_az {
            column[az] = grid.get(az, rg);
        }
        fft.process(&mut column);
        for az in 0..n_az {
            out.set(az, rg, column[az] * scale);
        }
    }
    out
}

/// Unitary DFT along the range axis of every azimuth row.
pub fn fft_range(grid: &ComplexGrid, direction: FftDirection) -> ComplexGrid {
    let (n_az, n_rg) = grid.shape();
    let mut planner = FftPlanner::new();
    let fft = match direction {
        FftDirection::Forward => planner.plan_fft_forward(n_rg),
        FftDirection::Inverse => planner.plan_fft_inverse(n_rg),
    };
    let scale = 1.0 / (n_rg as f64).sqrt();
    let mut out = grid.clone();
    for az in 0..n_az {
        let row = &mut out.data_mut()[az * n_rg..(az + 1) * n_rg];
        fft.process(row);
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    out
}

/// Unitary DFT of a bare slice, used for per-look azimuth transforms.
pub fn fft_slice(data: &mut [Complex64], direction: FftDirection) {
    let n = data.len();
    let mut planner = FftPlanner::new();
    let fft = match direction {
        FftDirection::Forward => planner.plan_fft_forward(n),
        FftDirection::Inverse => planner.plan_fft_inverse(n),
    };
    fft.process(data);
    let scale = 1.0 / (n as f64).sqrt();
    for v in data.iter_mut() {
        *v *= scale;
    }
}
