//! Chart, Poisson structure and symplectic form.

mod bracket;
mod chart;
mod symplectic;

use thiserror::Error;

use crate::expr::EvalError;

pub use bracket::{
    hamiltonian_vf_poisson, involution_check, jacobi_check, jacobi_check_with, poisson_bracket, InvolutionReport,
    JacobiReport, PairBracket, VectorFieldSpec, INVOLUTION_TOL, JACOBI_TOL,
};
pub use chart::{ChartSpec, Interval};
pub use symplectic::{assemble_omega_matrix, hamiltonian_vf_symplectic_at, SymplecticCoeffs};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("invalid symplectic coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("omega_AB[{a}][{b}] is not minus omega_AB[{b}][{a}]")]
    NotAntisymmetric { a: usize, b: usize },
    #[error("symplectic form is degenerate at this point (det = {det:e})")]
    SingularForm { det: f64 },
    #[error("state has (k, m) = {found:?}, chart expects {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}
