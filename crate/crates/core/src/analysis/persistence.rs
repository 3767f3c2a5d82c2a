//! Torus-persistence experiment: integrate the perturbed flow from a grid of
//! initial actions and compare the observed action drift with `√eps`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    extract_rotation_vector, nondegeneracy_rank, AnalysisError, DiophantineSieve, DiophantineSpec, FrequencyMap,
    FrequencyVector, RankReport, SieveResult, RANK_TOL,
};
use crate::dynamics::{integrate_perturbed, IntegratorConfig, ModelSpec, State};

/// Lattice cutoff of the sieve applied to unperturbed frequencies here; the
/// low-order resonances are the ones visible on experiment time scales.
pub const LOW_ORDER_A_MAX: u32 = 10;

/// Action drift above `DRIFT_FACTOR · √eps` counts as resonant.
pub const DRIFT_FACTOR: f64 = 5.0;

pub fn drift_threshold(eps: f64) -> f64 {
    DRIFT_FACTOR * eps.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Persistent,
    Resonant,
    Escaped,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Persistent => "persistent",
            Classification::Resonant => "resonant",
            Classification::Escaped => "escaped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub initial_actions: Vec<f64>,
    pub eps: f64,
    /// `sup_t |I(t) − I(0)|_∞`; infinite when the run failed.
    pub action_drift: f64,
    /// Rotation vector of the perturbed orbit, when it could be measured.
    pub extracted_omega: Option<FrequencyVector>,
    /// Unperturbed frequency `ω(I₀, z)`.
    pub unperturbed_omega: FrequencyVector,
    /// Low-order sieve on the unperturbed frequency.
    pub sieve: SieveResult,
    pub left_domain: bool,
    pub classification: Classification,
    /// Integrator failure, if any; such runs are classified as escaped.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceExperiment {
    /// Rank of `Dω` at the centroid of the action grid.
    pub center_rank: RankReport,
    /// One entry per `(I₀, eps)`, action-major.
    pub reports: Vec<PersistenceReport>,
}

/// Escaped iff the orbit left the action box (or failed). Otherwise an
/// unperturbed run (`eps = 0`) is persistent, since its tori are exact; a
/// perturbed run is resonant if its unperturbed frequency fails the
/// low-order sieve, and else persistent iff the drift stays under
/// [`drift_threshold`].
pub fn classify(eps: f64, action_drift: f64, left_domain: bool, low_order_sieve_passed: bool) -> Classification {
    if left_domain {
        Classification::Escaped
    } else if eps == 0.0 {
        Classification::Persistent
    } else if !low_order_sieve_passed {
        Classification::Resonant
    } else if action_drift <= drift_threshold(eps) {
        Classification::Persistent
    } else {
        Classification::Resonant
    }
}

pub fn persistence_experiment(
    model: &ModelSpec,
    action_grid: &[Vec<f64>],
    params: &[f64],
    phi0: &[f64],
    eps_list: &[f64],
    cfg: &IntegratorConfig,
    spec: &DiophantineSpec,
) -> Result<PersistenceExperiment, AnalysisError> {
    let chart = model.chart();
    let (k, m) = (chart.k(), chart.m());
    if action_grid.is_empty() || eps_list.is_empty() {
        return Err(AnalysisError::InvalidSpec("empty action grid or eps list".into()));
    }
    if action_grid.iter().any(|a| a.len() != k) || params.len() != m || phi0.len() != k {
        return Err(AnalysisError::Dimension(format!(
            "expected {k} actions, {m} parameters and {k} angles"
        )));
    }
    if let Some(e) = eps_list.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(AnalysisError::InvalidSpec(format!(
            "eps must be finite and >= 0, got {e}"
        )));
    }
    cfg.validate()?;

    let center: Vec<f64> = (0..k)
        .map(|i| action_grid.iter().map(|a| a[i]).sum::<f64>() / action_grid.len() as f64)
        .collect();
    let center_rank = nondegeneracy_rank(model, &center, params, RANK_TOL)?;
    if !center_rank.nondegenerate {
        log::warn!(
            "frequency map is degenerate at the grid center (rank {} < {k}); \
             persistence is not guaranteed by the nondegenerate theory",
            center_rank.rank
        );
    }

    let low = DiophantineSpec {
        a_max: spec.a_max.min(LOW_ORDER_A_MAX),
        ..*spec
    };
    let sieve = DiophantineSieve::new(k, low)?;
    let freq = FrequencyMap::new(model);
    let jobs: Vec<(&Vec<f64>, f64)> = action_grid
        .iter()
        .flat_map(|a| eps_list.iter().map(move |&e| (a, e)))
        .collect();

    let reports = jobs
        .par_iter()
        .map(|&(actions, eps)| {
            let unperturbed_omega = freq.eval(actions, params)?;
            let sieve_result = sieve.test(&unperturbed_omega);
            let perturbed = model.with_eps(eps)?;
            let s0 = State::new(actions.clone(), params.to_vec(), phi0.to_vec());
            let report = match integrate_perturbed(&perturbed, &s0, cfg) {
                Ok(traj) => {
                    let left = traj.left_domain();
                    let extracted = extract_rotation_vector(&traj).ok();
                    let classification = classify(eps, traj.max_action_deviation, left, sieve_result.passed);
                    PersistenceReport {
                        initial_actions: actions.clone(),
                        eps,
                        action_drift: traj.max_action_deviation,
                        extracted_omega: extracted,
                        unperturbed_omega,
                        sieve: sieve_result,
                        left_domain: left,
                        classification,
                        error: None,
                    }
                }
                Err(e) => {
                    log::warn!("integration from I0 = {actions:?}, eps = {eps} failed: {e}");
                    PersistenceReport {
                        initial_actions: actions.clone(),
                        eps,
                        action_drift: f64::INFINITY,
                        extracted_omega: None,
                        unperturbed_omega,
                        sieve: sieve_result,
                        left_domain: true,
                        classification: Classification::Escaped,
                        error: Some(e.to_string()),
                    }
                }
            };
            Ok(report)
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;

    Ok(PersistenceExperiment { center_rank, reports })
}
