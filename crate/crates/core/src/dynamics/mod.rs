//! Unperturbed and perturbed flows on the chart.

mod integrate;
mod model;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Point};

pub use integrate::{
    energy_drift, exact_unperturbed_flow, integrate_backward, integrate_perturbed, EnergyDrift, IntegratorConfig,
    Method, Trajectory,
};
pub use model::ModelSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("{which} depends on the angle coordinates")]
    AngleDependent { which: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("implicit midpoint fixed-point iteration did not converge at step {step}")]
    FixedPointDivergence { step: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A point `(I, z, phi)` of the chart with angles wrapped to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub actions: Vec<f64>,
    pub params: Vec<f64>,
    pub angles: Vec<f64>,
}

impl State {
    pub fn new(actions: Vec<f64>, params: Vec<f64>, angles: Vec<f64>) -> Self {
        let angles = angles.into_iter().map(wrap_angle).collect();
        State {
            actions,
            params,
            angles,
        }
    }

    pub fn as_point(&self) -> Point<'_> {
        Point {
            actions: &self.actions,
            params: &self.params,
            angles: &self.angles,
        }
    }

    /// Concatenation in `(I, z, phi)` order.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.actions.len() * 2 + self.params.len());
        v.extend_from_slice(&self.actions);
        v.extend_from_slice(&self.params);
        v.extend_from_slice(&self.angles);
        v
    }
}

/// `x mod 2π` in `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds up to TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance on the circle, in `[0, π]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(TAU), 0.0);
        assert!((wrap_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((wrap_angle(7.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn wrap_range_holds_broadly() {
        let mut x = -1e4;
        while x < 1e4 {
            let w = wrap_angle(x);
            assert!((0.0..TAU).contains(&w));
            assert!(angle_distance(w, x) < 1e-11);
            x += 0.7371;
        }
    }

    #[test]
    fn circular_distance() {
        assert!((angle_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
        assert!((angle_distance(PI, 0.0) - PI).abs() < 1e-15);
    }
}
