//! Frequency-map diagnostics, Diophantine sieving and persistence experiments.

mod frequency;
mod measure;
mod persistence;
mod rotation;
mod sieve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::expr::EvalError;

pub use frequency::{frequency_jacobian, frequency_map_at, nondegeneracy_rank, FrequencyMap, RankReport, RANK_TOL};
pub use measure::{resonance_measure_mc, MeasureEstimate, MIN_MC_SAMPLES};
pub use persistence::{
    classify, drift_threshold, persistence_experiment, Classification, PersistenceExperiment, PersistenceReport,
    DRIFT_FACTOR, LOW_ORDER_A_MAX,
};
pub use rotation::{extract_rotation_vector, MIN_ROTATION_POINTS};
pub use sieve::{diophantine_test, DiophantineSieve, DiophantineSpec, SieveResult, DEFAULT_A_MAX};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("frequency map produced a non-finite value")]
    NonFinite,
    #[error("trajectory has {len} recorded points, at least {min} are needed")]
    TooShort { len: usize, min: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// A frequency vector `ω ∈ R^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub omega: Vec<f64>,
}

impl FrequencyVector {
    pub fn new(omega: Vec<f64>) -> Self {
        FrequencyVector { omega }
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    /// Sup-norm distance to another vector of the same dimension.
    pub fn distance(&self, other: &FrequencyVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "frequency dimension");
        self.omega
            .iter()
            .zip(&other.omega)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
