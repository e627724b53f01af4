use thiserror::Error;

/// Errors shared by all numerical modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radar parameters: {0}")]
    InvalidParams(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("invalid sampling mask: {0}")]
    InvalidMask(String),

    #[error("sampling rate {0} outside (0, 1]")]
    RateOutOfRange(f64),

    #[error("look count {looks} does not divide azimuth length {n_azimuth}")]
    LookCountMismatch { looks: usize, n_azimuth: usize },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("dense materialization cap exceeded: {entries} entries > {cap}")]
    SizeCapExceeded { entries: usize, cap: usize },

    #[error("aliased geometry: Doppler bandwidth {doppler_bw_hz} Hz exceeds PRF {prf_hz} Hz")]
    AliasedGeometry { doppler_bw_hz: f64, prf_hz: f64 },

    #[error("invalid solver config: {0}")]
    InvalidSolverConfig(String),

    #[error("solver diverged at iteration {iteration}: objective {objective} > 10x minimum {minimum}")]
    SolverDiverged {
        iteration: usize,
        objective: f64,
        minimum: f64,
    },

    #[error("degenerate region: zero intensity variance")]
    DegenerateRegion,

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("zero-norm reference in relative error")]
    ZeroReference,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad file format: {0}")]
    BadFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
