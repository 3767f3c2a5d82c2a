use super::DynamicsError;
use crate::expr::{diff, simplify_fold, Expr, Var};
use crate::geometry::{ChartSpec, SymplecticCoeffs};

/// A perturbed partially integrable system `H' = H + eps·H1` on a chart.
///
/// `H` and the integrals of motion must not depend on the angles; `H1` may
/// depend on everything.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    chart: ChartSpec,
    h: Expr,
    h1: Expr,
    eps: f64,
    integrals: Vec<Expr>,
    sc: Option<SymplecticCoeffs>,
}

fn check_angle_free(e: &Expr, chart: &ChartSpec, which: &str) -> Result<(), DynamicsError> {
    for i in 0..chart.k() {
        if !diff(e, Var::Angle(i)).is_identically_zero(chart) {
            return Err(DynamicsError::AngleDependent {
                which: which.to_string(),
            });
        }
    }
    Ok(())
}

fn check_symbols(e: &Expr, chart: &ChartSpec, which: &str) -> Result<(), DynamicsError> {
    match e.raw_vars().into_iter().find(|v| !chart.contains(*v)) {
        Some(v) => Err(DynamicsError::InvalidModel(format!(
            "{which} uses {v}, which is not a symbol of the chart"
        ))),
        None => Ok(()),
    }
}

impl ModelSpec {
    /// Integrals default to the coordinate actions `I1..Ik`.
    pub fn new(chart: ChartSpec, h: Expr, h1: Expr, eps: f64) -> Result<Self, DynamicsError> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(DynamicsError::InvalidModel(format!(
                "eps must be finite and non-negative, got {eps}"
            )));
        }
        check_symbols(&h, &chart, "H")?;
        check_symbols(&h1, &chart, "H1")?;
        check_angle_free(&h, &chart, "H")?;
        let integrals = (0..chart.k()).map(|i| Expr::Var(Var::Action(i))).collect();
        Ok(ModelSpec {
            chart,
            h,
            h1,
            eps,
            integrals,
            sc: None,
        })
    }

    pub fn with_integrals(mut self, integrals: Vec<Expr>) -> Result<Self, DynamicsError> {
        if integrals.len() != self.chart.k() {
            return Err(DynamicsError::InvalidModel(format!(
                "expected {} integrals of motion, got {}",
                self.chart.k(),
                integrals.len()
            )));
        }
        for (n, f) in integrals.iter().enumerate() {
            let which = format!("integral {}", n + 1);
            check_symbols(f, &self.chart, &which)?;
            check_angle_free(f, &self.chart, &which)?;
        }
        self.integrals = integrals;
        Ok(self)
    }

    pub fn with_symplectic(mut self, sc: SymplecticCoeffs) -> Self {
        self.sc = Some(sc);
        self
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self, DynamicsError> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(DynamicsError::InvalidModel(format!(
                "eps must be finite and non-negative, got {eps}"
            )));
        }
        let mut m = self.clone();
        m.eps = eps;
        Ok(m)
    }

    pub fn chart(&self) -> &ChartSpec {
        &self.chart
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    pub fn perturbation(&self) -> &Expr {
        &self.h1
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn integrals(&self) -> &[Expr] {
        &self.integrals
    }

    pub fn symplectic(&self) -> Option<&SymplecticCoeffs> {
        self.sc.as_ref()
    }

    /// `H + eps·H1`, folded; with `eps = 0` this is exactly `H`.
    pub fn perturbed_hamiltonian(&self) -> Expr {
        simplify_fold(&(self.h.clone() + Expr::Const(self.eps) * self.h1.clone()))
    }
}
