//! Numerical tools for partially integrable Hamiltonian systems on charts
//! `V × W × T^k`: symbolic expressions, Poisson and symplectic structure,
//! perturbed flows and KAM-style diagnostics.

pub mod analysis;
pub mod dynamics;
pub mod expr;
pub mod geometry;
pub mod rng;

pub use analysis::{
    diophantine_test, extract_rotation_vector, frequency_map_at, nondegeneracy_rank, persistence_experiment,
    resonance_measure_mc, AnalysisError, Classification, DiophantineSpec, FrequencyVector, MeasureEstimate,
    PersistenceReport, RankReport, SieveResult,
};
pub use dynamics::{
    energy_drift, exact_unperturbed_flow, integrate_backward, integrate_perturbed, DynamicsError, IntegratorConfig,
    Method, ModelSpec, State, Trajectory,
};
pub use expr::{diff, parse, simplify_fold, EvalError, Expr, ParseError, Var};
pub use geometry::{
    hamiltonian_vf_poisson, involution_check, jacobi_check, poisson_bracket, ChartSpec, GeometryError, Interval,
    SymplecticCoeffs, VectorFieldSpec,
};
