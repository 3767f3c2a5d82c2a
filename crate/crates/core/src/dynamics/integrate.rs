//! Fixed-step integration of `İ = −∂H'/∂phi, ż = 0, phi' = ∂H'/∂I`.
//!
//! The `z` block of the working vector is never written by a step: it is the
//! initial value, copied into every recorded state.

use serde::{Deserialize, Serialize};

use super::{wrap_angle, DynamicsError, ModelSpec, State};
use crate::expr::{diff, CompiledExpr, Var};
use crate::geometry::hamiltonian_vf_poisson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step size.
    pub h: f64,
    /// Horizon; the run takes `round(t_end / h)` steps.
    pub t_end: f64,
    pub record_every: usize,
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
}

impl IntegratorConfig {
    pub fn new(method: Method, h: f64, t_end: f64, record_every: usize) -> Self {
        IntegratorConfig {
            method,
            h,
            t_end,
            record_every,
            fixed_point_tol: 1e-12,
            fixed_point_max_iter: 50,
        }
    }

    pub fn rk4(h: f64, t_end: f64, record_every: usize) -> Self {
        Self::new(Method::Rk4, h, t_end, record_every)
    }

    pub fn implicit_midpoint(h: f64, t_end: f64, record_every: usize) -> Self {
        Self::new(Method::ImplicitMidpoint, h, t_end, record_every)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::InvalidConfig(msg));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("step must be positive, got {}", self.h));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.t_end));
        }
        if self.h > self.t_end {
            return bad(format!("step {} exceeds horizon {}", self.h, self.t_end));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if self.fixed_point_tol.is_nan() || self.fixed_point_tol <= 0.0 || self.fixed_point_max_iter == 0 {
            return bad("fixed-point tolerance and iteration cap must be positive".into());
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.h).round() as usize
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::rk4(1e-3, 100.0, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Recording times, `j·record_every·h` (negative for backward runs).
    pub times: Vec<f64>,
    /// Recorded states with wrapped angles.
    pub states: Vec<State>,
    /// Cumulative angles at the recorded times.
    pub unwrapped_angles: Vec<Vec<f64>>,
    /// First step at which the actions were outside the chart's box.
    pub left_domain: Option<usize>,
    /// `sup |I(t) − I(0)|_∞` over every step, not just recorded ones.
    pub max_action_deviation: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has the initial state")
    }

    pub fn left_domain(&self) -> bool {
        self.left_domain.is_some()
    }
}

/// Compiled right-hand side of the perturbed equation.
struct Field {
    k: usize,
    m: usize,
    d_actions: Vec<CompiledExpr>,
    d_angles: Vec<CompiledExpr>,
}

impl Field {
    fn new(model: &ModelSpec) -> Self {
        let chart = model.chart();
        let (k, m) = (chart.k(), chart.m());
        let vf = hamiltonian_vf_poisson(&model.perturbed_hamiltonian(), chart);
        Field {
            k,
            m,
            d_actions: vf.d_actions.iter().map(|e| CompiledExpr::new(e, k, m)).collect(),
            d_angles: vf.d_angles.iter().map(|e| CompiledExpr::new(e, k, m)).collect(),
        }
    }

    /// Writes the I- and phi-derivatives into `out` at the same slots as `y`.
    /// The z slots of `out` are left untouched.
    fn eval(&self, y: &[f64], out: &mut [f64]) {
        for (i, c) in self.d_actions.iter().enumerate() {
            out[i] = c.eval(y);
        }
        let off = self.k + self.m;
        for (i, c) in self.d_angles.iter().enumerate() {
            out[off + i] = c.eval(y);
        }
    }

    /// Slots that evolve: actions then angles.
    fn moving(&self) -> impl Iterator<Item = usize> + Clone {
        let (k, m) = (self.k, self.m);
        (0..k).chain(k + m..k + m + k)
    }
}

struct Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(y: &[f64]) -> Self {
        Workspace {
            k1: vec![0.0; y.len()],
            k2: vec![0.0; y.len()],
            k3: vec![0.0; y.len()],
            k4: vec![0.0; y.len()],
            scratch: y.to_vec(),
        }
    }
}

fn rk4_step(field: &Field, y: &mut [f64], h: f64, ws: &mut Workspace) {
    let moving = field.moving();
    field.eval(y, &mut ws.k1);
    for i in moving.clone() {
        ws.scratch[i] = y[i] + 0.5 * h * ws.k1[i];
    }
    field.eval(&ws.scratch, &mut ws.k2);
    for i in moving.clone() {
        ws.scratch[i] = y[i] + 0.5 * h * ws.k2[i];
    }
    field.eval(&ws.scratch, &mut ws.k3);
    for i in moving.clone() {
        ws.scratch[i] = y[i] + h * ws.k3[i];
    }
    field.eval(&ws.scratch, &mut ws.k4);
    for i in moving {
        y[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}

/// `y1 = y0 + h·K` with `K = f(y0 + h/2·K)`, solved by fixed-point iteration
/// until `|h|·|ΔK|_∞ ≤ tol`.
fn midpoint_step(field: &Field, y: &mut [f64], h: f64, tol: f64, max_iter: usize, ws: &mut Workspace) -> bool {
    let moving = field.moving();
    field.eval(y, &mut ws.k1);
    for _ in 0..max_iter {
        for i in moving.clone() {
            ws.scratch[i] = y[i] + 0.5 * h * ws.k1[i];
        }
        field.eval(&ws.scratch, &mut ws.k2);
        let delta = moving
            .clone()
            .map(|i| (ws.k2[i] - ws.k1[i]).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(&mut ws.k1, &mut ws.k2);
        if !delta.is_finite() {
            return false;
        }
        if h.abs() * delta <= tol {
            for i in moving {
                y[i] += h * ws.k1[i];
            }
            return true;
        }
    }
    false
}

fn run(model: &ModelSpec, s0: &State, cfg: &IntegratorConfig, direction: f64) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    let chart = model.chart();
    chart
        .check_state(s0)
        .map_err(|e| DynamicsError::InvalidModel(e.to_string()))?;
    let (k, m) = (chart.k(), chart.m());
    let field = Field::new(model);
    let h = direction * cfg.h;
    let n_steps = cfg.n_steps();

    let mut y = s0.flat();
    let mut ws = Workspace::new(&y);
    let capacity = n_steps / cfg.record_every + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        unwrapped_angles: Vec::with_capacity(capacity),
        left_domain: (!chart.actions_inside(&s0.actions)).then_some(0),
        max_action_deviation: 0.0,
    };
    let record = |traj: &mut Trajectory, y: &[f64], step: usize| {
        let angles = &y[k + m..];
        traj.times.push(step as f64 * h);
        traj.states.push(State {
            actions: y[..k].to_vec(),
            params: s0.params.clone(),
            angles: angles.iter().copied().map(wrap_angle).collect(),
        });
        traj.unwrapped_angles.push(angles.to_vec());
    };
    record(&mut traj, &y, 0);

    for step in 1..=n_steps {
        match cfg.method {
            Method::Rk4 => rk4_step(&field, &mut y, h, &mut ws),
            Method::ImplicitMidpoint => {
                if !midpoint_step(
                    &field,
                    &mut y,
                    h,
                    cfg.fixed_point_tol,
                    cfg.fixed_point_max_iter,
                    &mut ws,
                ) {
                    if field.moving().any(|i| !y[i].is_finite()) {
                        return Err(DynamicsError::NonFiniteState { step });
                    }
                    return Err(DynamicsError::FixedPointDivergence { step });
                }
            }
        }
        if field.moving().any(|i| !y[i].is_finite()) {
            return Err(DynamicsError::NonFiniteState { step });
        }
        let dev = y[..k]
            .iter()
            .zip(&s0.actions)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        traj.max_action_deviation = traj.max_action_deviation.max(dev);
        if traj.left_domain.is_none() && !chart.actions_inside(&y[..k]) {
            traj.left_domain = Some(step);
        }
        if step % cfg.record_every == 0 {
            record(&mut traj, &y, step);
        }
    }
    Ok(traj)
}

/// Integrates the perturbed Poisson dynamics forward in time.
pub fn integrate_perturbed(model: &ModelSpec, s0: &State, cfg: &IntegratorConfig) -> Result<Trajectory, DynamicsError> {
    run(model, s0, cfg, 1.0)
}

/// Same as [`integrate_perturbed`] with the step negated.
pub fn integrate_backward(model: &ModelSpec, s0: &State, cfg: &IntegratorConfig) -> Result<Trajectory, DynamicsError> {
    run(model, s0, cfg, -1.0)
}

/// Closed-form flow of the unperturbed Hamiltonian: actions and parameters
/// frozen, angles advance at `ω = ∂H/∂I`.
pub fn exact_unperturbed_flow(model: &ModelSpec, s0: &State, t: f64) -> Result<State, DynamicsError> {
    let p = s0.as_point();
    let angles = s0
        .angles
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let omega = diff(model.hamiltonian(), Var::Action(i)).eval(&p)?;
            Ok(wrap_angle(phi + t * omega))
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(State {
        actions: s0.actions.clone(),
        params: s0.params.clone(),
        angles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDrift {
    pub max_abs_drift: f64,
    pub series: Vec<f64>,
}

/// `H'(s_j) − H'(s_0)` along the recorded states.
pub fn energy_drift(traj: &Trajectory, model: &ModelSpec) -> EnergyDrift {
    let chart = model.chart();
    let hp = CompiledExpr::new(&model.perturbed_hamiltonian(), chart.k(), chart.m());
    let energy = |s: &State| hp.eval(&s.flat());
    let e0 = traj.states.first().map(energy).unwrap_or(0.0);
    let series: Vec<f64> = traj.states.iter().map(|s| energy(s) - e0).collect();
    let max_abs_drift = series.iter().map(|d| d.abs()).fold(0.0, f64::max);
    EnergyDrift { max_abs_drift, series }
}
