//! Desk-scale multilook compressed-sensing SAR imaging laboratory.
//!
//! The pipeline: synthesize raw echoes from a reflectivity scene
//! ([`sim`]), compressively subsample them, reconstruct multilook
//! subimages through the invertible look-formation operator pair
//! ([`mlrda`]) with a group-sparse iterative thresholding solver
//! ([`solver`]), and evaluate speckle reduction via the equivalent number
//! of looks ([`metrics`]).

// Index-based loops mirror the (azimuth, range) grid math throughout.
#![allow(clippy::needless_range_loop)]

pub mod dense;
pub mod error;
pub mod fft;
pub mod grid;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod mlrda;
pub mod params;
pub mod seed;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{inner_product, ComplexGrid, LookStack};
pub use mask::SamplingMask;
pub use metrics::RegionSpec;
pub use params::{RadarParams, Window};
pub use seed::Seed;
pub use sim::{CompressedData, MaskPattern, PointTarget, Scene};
pub use solver::{MultilookImage, SolverConfig, SolverTrace};
