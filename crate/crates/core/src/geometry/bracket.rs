//! The rank-2k Poisson structure `w = ∂/∂I_i ∧ ∂/∂phi^i` and its Hamiltonian
//! vector fields.
//!
//! Sign convention: `{f, g} = Σ_i (∂f/∂phi_i ∂g/∂I_i − ∂f/∂I_i ∂g/∂phi_i)`,
//! so the flow of `H'` is `İ = {I, H'} = −∂H'/∂phi`, `phi' = {phi, H'} =
//! ∂H'/∂I`, and `z' = 0`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ChartSpec;
use crate::expr::random::random_poly_trig;
use crate::expr::{diff, simplify_fold, Expr, Var};

/// Involution and Jacobi checks pass when every sampled value is at most this.
pub const INVOLUTION_TOL: f64 = 1e-10;
pub const JACOBI_TOL: f64 = 1e-8;

pub fn poisson_bracket(f: &Expr, g: &Expr, chart: &ChartSpec) -> Expr {
    let mut acc = Expr::zero();
    for i in 0..chart.k() {
        let (act, ang) = (Var::Action(i), Var::Angle(i));
        let term = diff(f, ang) * diff(g, act) - diff(f, act) * diff(g, ang);
        acc = acc + term;
    }
    simplify_fold(&acc)
}

/// Components of a first-order dynamic equation on the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldSpec {
    pub d_actions: Vec<Expr>,
    pub d_params: Vec<Expr>,
    pub d_angles: Vec<Expr>,
}

impl VectorFieldSpec {
    /// Components in `(I, z, phi)` order.
    pub fn components(&self) -> impl Iterator<Item = &Expr> {
        self.d_actions.iter().chain(&self.d_params).chain(&self.d_angles)
    }

    pub fn matches_chart(&self, chart: &ChartSpec) -> bool {
        self.d_actions.len() == chart.k() && self.d_params.len() == chart.m() && self.d_angles.len() == chart.k()
    }
}

pub fn hamiltonian_vf_poisson(hp: &Expr, chart: &ChartSpec) -> VectorFieldSpec {
    VectorFieldSpec {
        d_actions: (0..chart.k())
            .map(|i| simplify_fold(&-diff(hp, Var::Angle(i))))
            .collect(),
        d_params: vec![Expr::zero(); chart.m()],
        d_angles: (0..chart.k()).map(|i| diff(hp, Var::Action(i))).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairBracket {
    pub i: usize,
    pub j: usize,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvolutionReport {
    pub n_samples: usize,
    pub pairs: Vec<PairBracket>,
    pub max_abs: f64,
    pub passed: bool,
}

/// Samples `{f_i, f_j}` for all pairs at uniform points of `V×W×T^k`.
/// Evaluation failures count as an infinite bracket.
pub fn involution_check(fs: &[Expr], chart: &ChartSpec, n_samples: usize, seed: u64) -> InvolutionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<_> = (0..n_samples).map(|_| chart.sample_state(&mut rng)).collect();
    let mut pairs = Vec::new();
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            let b = poisson_bracket(&fs[i], &fs[j], chart);
            let max_abs = points
                .iter()
                .map(|p| b.eval(&p.as_point()).map_or(f64::INFINITY, f64::abs))
                .fold(0.0, f64::max);
            pairs.push(PairBracket { i, j, max_abs });
        }
    }
    let max_abs = pairs.iter().map(|p| p.max_abs).fold(0.0, f64::max);
    InvolutionReport {
        n_samples,
        pairs,
        max_abs,
        passed: max_abs <= INVOLUTION_TOL,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobiReport {
    pub n_samples: usize,
    pub max_residual: f64,
    pub passed: bool,
}

pub fn jacobi_check(chart: &ChartSpec, n_samples: usize, seed: u64) -> JacobiReport {
    jacobi_check_with(poisson_bracket, chart, n_samples, seed)
}

/// Jacobi identity for an arbitrary bracket rule; each sample draws a fresh
/// random triple and a fresh point.
pub fn jacobi_check_with<B>(bracket: B, chart: &ChartSpec, n_samples: usize, seed: u64) -> JacobiReport
where
    B: Fn(&Expr, &Expr, &ChartSpec) -> Expr,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0f64;
    for _ in 0..n_samples {
        let f = random_poly_trig(chart, 2, &mut rng);
        let g = random_poly_trig(chart, 2, &mut rng);
        let h = random_poly_trig(chart, 2, &mut rng);
        let cyclic = bracket(&f, &bracket(&g, &h, chart), chart)
            + bracket(&g, &bracket(&h, &f, chart), chart)
            + bracket(&h, &bracket(&f, &g, chart), chart);
        let p = chart.sample_state(&mut rng);
        let r = cyclic.eval(&p.as_point()).map_or(f64::INFINITY, f64::abs);
        max_residual = max_residual.max(if r.is_nan() { f64::INFINITY } else { r });
    }
    JacobiReport {
        n_samples,
        max_residual,
        passed: max_residual <= JACOBI_TOL,
    }
}
