//! Retained-sample index sets for compressive subsampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted set of retained flat sample indices into a raw-data grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingMask {
    retained: Vec<u64>,
    total_samples: u64,
    /// Achieved sampling fraction |retained| / total_samples.
    rate: f64,
}

impl SamplingMask {
    /// Build from a sorted, duplicate-free index list.
    pub fn new(retained: Vec<u64>, total_samples: u64) -> Result<Self> {
        if retained.is_empty() {
            return Err(Error::InvalidMask("no retained indices".into()));
        }
        for pair in retained.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidMask(format!(
                    "indices not strictly increasing at {} -> {}",
                    pair[0], pair[1]
                )));
            }
        }
        if *retained.last().unwrap() >= total_samples {
            return Err(Error::InvalidMask(format!(
                "index {} out of range for {} samples",
                retained.last().unwrap(),
                total_samples
            )));
        }
        let rate = retained.len() as f64 / total_samples as f64;
        Ok(Self {
            retained,
            total_samples,
            rate,
        })
    }

    pub fn full(total_samples: u64) -> Self {
        Self {
            retained: (0..total_samples).collect(),
            total_samples,
            rate: 1.0,
        }
    }

    #[inline]
    pub fn retained(&self) -> &[u64] {
        &self.retained
    }

    #[inline]
    pub fn total_samples(&self) -> u64 {
        self.total_samples
    }

    #[inline]
    pub fn rate(&self) -> f64 {
        self.rate
    }

    #[inline]
    pub fn retained_count(&self) -> usize {
        self.retained.len()
    }
}
