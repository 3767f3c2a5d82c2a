use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, FrequencyVector};
use crate::dynamics::ModelSpec;
use crate::expr::{diff, CompiledExpr, Expr, Var};

/// `ω(I, z) = ∂H/∂I`, compiled once for repeated evaluation.
#[derive(Debug, Clone)]
pub struct FrequencyMap {
    k: usize,
    m: usize,
    components: Vec<CompiledExpr>,
}

impl FrequencyMap {
    pub fn new(model: &ModelSpec) -> Self {
        let chart = model.chart();
        let (k, m) = (chart.k(), chart.m());
        let components = (0..k)
            .map(|i| CompiledExpr::new(&diff(model.hamiltonian(), Var::Action(i)), k, m))
            .collect();
        FrequencyMap { k, m, components }
    }

    pub fn eval(&self, actions: &[f64], params: &[f64]) -> Result<FrequencyVector, AnalysisError> {
        if actions.len() != self.k || params.len() != self.m {
            return Err(AnalysisError::Dimension(format!(
                "expected {} actions and {} parameters",
                self.k, self.m
            )));
        }
        let mut flat = Vec::with_capacity(2 * self.k + self.m);
        flat.extend_from_slice(actions);
        flat.extend_from_slice(params);
        // H is angle-free, any angle value will do
        flat.extend(std::iter::repeat_n(0.0, self.k));
        let omega: Vec<f64> = self.components.iter().map(|c| c.eval(&flat)).collect();
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(AnalysisError::NonFinite);
        }
        Ok(FrequencyVector::new(omega))
    }
}

pub fn frequency_map_at(model: &ModelSpec, actions: &[f64], params: &[f64]) -> Result<FrequencyVector, AnalysisError> {
    FrequencyMap::new(model).eval(actions, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub nondegenerate: bool,
    pub singular_values: Vec<f64>,
}

/// Default relative threshold on singular values.
pub const RANK_TOL: f64 = 1e-9;

/// Symbolic `k × (k+m)` Jacobian of the frequency map, columns `(I, z)`.
pub fn frequency_jacobian(model: &ModelSpec) -> Vec<Vec<Expr>> {
    let chart = model.chart();
    let cols: Vec<Var> = (0..chart.k())
        .map(Var::Action)
        .chain((0..chart.m()).map(Var::Param))
        .collect();
    (0..chart.k())
        .map(|i| {
            let w = diff(model.hamiltonian(), Var::Action(i));
            cols.iter().map(|&v| diff(&w, v)).collect()
        })
        .collect()
}

/// Numerical rank of `Dω` at `(I, z)`: singular values above
/// `tol · σ_max` count.
pub fn nondegeneracy_rank(
    model: &ModelSpec,
    actions: &[f64],
    params: &[f64],
    tol: f64,
) -> Result<RankReport, AnalysisError> {
    let chart = model.chart();
    let (k, m) = (chart.k(), chart.m());
    if actions.len() != k || params.len() != m {
        return Err(AnalysisError::Dimension(format!(
            "expected {k} actions and {m} parameters"
        )));
    }
    let angles = vec![0.0; k];
    let p = crate::expr::Point {
        actions,
        params,
        angles: &angles,
    };
    let jac = frequency_jacobian(model);
    let mut mat = DMatrix::zeros(k, k + m);
    for (i, row) in jac.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            mat[(i, j)] = e.eval(&p)?;
        }
    }
    if mat.iter().any(|x| !x.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let mut singular_values: Vec<f64> = mat.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let rank = if sigma_max == 0.0 {
        0
    } else {
        singular_values.iter().filter(|&&s| s > tol * sigma_max).count()
    };
    Ok(RankReport {
        rank,
        nondegenerate: rank == k,
        singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::ChartSpec;

    fn model(k: usize, m: usize, h: &str) -> ModelSpec {
        let c = ChartSpec::unit(k, m);
        ModelSpec::new(c.clone(), parse(h, &c).unwrap(), Expr::zero(), 0.0).unwrap()
    }

    #[test]
    fn frequency_examples() {
        let w = frequency_map_at(&model(2, 0, "I1^2/2 + I2"), &[0.5, 7.0], &[]).unwrap();
        assert_eq!(w.omega, vec![0.5, 1.0]);
        let w = frequency_map_at(&model(2, 1, "I1^2/2 + I2 + z1*I1"), &[0.5, 0.0], &[0.25]).unwrap();
        assert_eq!(w.omega, vec![0.75, 1.0]);
        let m = model(1, 0, "I1");
        for x in [-3.0, 0.0, 11.0] {
            assert_eq!(frequency_map_at(&m, &[x], &[]).unwrap().omega, vec![1.0]);
        }
    }

    #[test]
    fn rank_examples() {
        let r = nondegeneracy_rank(&model(2, 0, "I1^2/2 + I2^2/2"), &[0.3, 0.4], &[], RANK_TOL).unwrap();
        assert_eq!((r.rank, r.nondegenerate), (2, true));
        let r = nondegeneracy_rank(&model(2, 0, "I1^2/2 + I2"), &[0.3, 0.4], &[], RANK_TOL).unwrap();
        assert_eq!((r.rank, r.nondegenerate), (1, false));
        let r = nondegeneracy_rank(&model(2, 1, "I1^2/2 + I2 + z1*I2"), &[0.3, 0.4], &[0.5], RANK_TOL).unwrap();
        assert_eq!((r.rank, r.nondegenerate), (2, true));
    }

    #[test]
    fn rank_is_scale_invariant() {
        for scale in ["1e-8", "1", "1e8"] {
            let h = format!("{scale}*(I1^2/2 + I2)");
            let r = nondegeneracy_rank(&model(2, 0, &h), &[0.3, 0.4], &[], RANK_TOL).unwrap();
            assert_eq!(r.rank, 1, "scale {scale}");
        }
    }

    #[test]
    fn linear_hamiltonian_has_rank_zero() {
        let r = nondegeneracy_rank(&model(2, 0, "I1 + 2*I2"), &[0.3, 0.4], &[], RANK_TOL).unwrap();
        assert_eq!(r.rank, 0);
        assert!(!r.nondegenerate);
    }
}
