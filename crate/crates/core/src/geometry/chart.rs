use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::dynamics::State;
use crate::expr::{uniform_in, Var};

/// Closed interval `[lo, hi]` with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, GeometryError> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(GeometryError::InvalidChart(format!(
                "interval [{lo}, {hi}] is empty or unbounded"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Toroidal chart `U = V×W×T^k` with `k` action/angle pairs and `m`
/// transverse coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    actions: Vec<Interval>,
    params: Vec<Interval>,
}

impl ChartSpec {
    pub fn new(actions: Vec<Interval>, params: Vec<Interval>) -> Result<Self, GeometryError> {
        if actions.is_empty() {
            return Err(GeometryError::InvalidChart(
                "at least one action/angle pair is required".into(),
            ));
        }
        for iv in actions.iter().chain(&params) {
            Interval::new(iv.lo, iv.hi)?;
        }
        Ok(ChartSpec { actions, params })
    }

    /// Chart with every box equal to `[0, 1]`.
    pub fn unit(k: usize, m: usize) -> Self {
        let unit = Interval { lo: 0.0, hi: 1.0 };
        ChartSpec::new(vec![unit; k], vec![unit; m]).expect("k >= 1")
    }

    pub fn k(&self) -> usize {
        self.actions.len()
    }

    pub fn m(&self) -> usize {
        self.params.len()
    }

    /// Phase-space dimension `2k + m`.
    pub fn dim(&self) -> usize {
        2 * self.k() + self.m()
    }

    pub fn action_box(&self) -> &[Interval] {
        &self.actions
    }

    pub fn param_box(&self) -> &[Interval] {
        &self.params
    }

    /// Symbols in matrix order: `I1..Ik, z1..zm, phi1..phik`.
    pub fn symbols(&self) -> Vec<Var> {
        (0..self.k())
            .map(Var::Action)
            .chain((0..self.m()).map(Var::Param))
            .chain((0..self.k()).map(Var::Angle))
            .collect()
    }

    pub fn contains(&self, var: Var) -> bool {
        match var {
            Var::Action(i) | Var::Angle(i) => i < self.k(),
            Var::Param(a) => a < self.m(),
        }
    }

    /// Index of `var` in the `(I, z, phi)` ordering.
    pub fn slot(&self, var: Var) -> usize {
        match var {
            Var::Action(i) => i,
            Var::Param(a) => self.k() + a,
            Var::Angle(i) => self.k() + self.m() + i,
        }
    }

    pub fn actions_inside(&self, actions: &[f64]) -> bool {
        self.actions.iter().zip(actions).all(|(iv, &x)| iv.contains(x))
    }

    pub fn params_inside(&self, params: &[f64]) -> bool {
        self.params.iter().zip(params).all(|(iv, &x)| iv.contains(x))
    }

    pub fn action_center(&self) -> Vec<f64> {
        self.actions.iter().map(Interval::center).collect()
    }

    pub fn param_center(&self) -> Vec<f64> {
        self.params.iter().map(Interval::center).collect()
    }

    pub fn sample_actions<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.actions.iter().map(|iv| uniform_in(rng, iv.lo, iv.hi)).collect()
    }

    pub fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.params.iter().map(|iv| uniform_in(rng, iv.lo, iv.hi)).collect()
    }

    /// Uniform point of `V×W×T^k`.
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        let actions = self.sample_actions(rng);
        let params = self.sample_params(rng);
        let angles = (0..self.k())
            .map(|_| uniform_in(rng, 0.0, std::f64::consts::TAU))
            .collect();
        State::new(actions, params, angles)
    }

    pub(crate) fn check_state(&self, s: &State) -> Result<(), GeometryError> {
        if s.actions.len() != self.k() || s.params.len() != self.m() || s.angles.len() != self.k() {
            return Err(GeometryError::DimensionMismatch {
                expected: (self.k(), self.m()),
                found: (s.actions.len(), s.params.len()),
            });
        }
        Ok(())
    }
}
