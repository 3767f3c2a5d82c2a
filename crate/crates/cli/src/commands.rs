//! The six subcommands. Each writes its artifacts through an
//! [`OutputSink`] and returns the process exit status.

use pistlab_core::analysis::{
    frequency_map_at, nondegeneracy_rank, persistence_experiment, resonance_measure_mc, Classification,
    DiophantineSieve, DiophantineSpec, FrequencyMap, FrequencyVector, MeasureEstimate, RankReport, SieveResult,
    DRIFT_FACTOR, LOW_ORDER_A_MAX, RANK_TOL,
};
use pistlab_core::geometry::{
    hamiltonian_vf_poisson, hamiltonian_vf_symplectic_at, involution_check, jacobi_check, InvolutionReport,
    JacobiReport,
};
use pistlab_core::rng::job_seed;
use pistlab_core::{energy_drift, integrate_perturbed, Method, State};
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, numbered, run_id, Manifest, OutputSink, Table};

/// Random points per structural check in `check`.
pub const CHECK_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Check,
    Integrate,
    Freqmap,
    Sieve,
    Measure,
    Persist,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Integrate => "integrate",
            Command::Freqmap => "freqmap",
            Command::Sieve => "sieve",
            Command::Measure => "measure",
            Command::Persist => "persist",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterRank {
    pub actions: Vec<f64>,
    pub params: Vec<f64>,
    pub report: RankReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymplecticDemo {
    pub state: State,
    /// `(I, z, phi)` components of the symplectic Hamiltonian vector field.
    pub xi_symplectic: Vec<f64>,
    /// The same for the Poisson reformulation.
    pub xi_poisson: Vec<f64>,
    pub zdot_symplectic: Vec<f64>,
    pub zdot_poisson: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSummary {
    pub run_id: String,
    pub involution: InvolutionReport,
    pub jacobi: JacobiReport,
    pub rank_at_center: CenterRank,
    pub symplectic: Option<SymplecticDemo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateSummary {
    pub run_id: String,
    pub method: Method,
    pub h: f64,
    pub t_end: f64,
    pub eps: f64,
    pub n_records: usize,
    pub initial: State,
    pub last: State,
    pub max_abs_energy_drift: f64,
    pub max_action_deviation: f64,
    pub left_domain_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqmapSummary {
    pub run_id: String,
    pub params: Vec<f64>,
    pub n_points: usize,
    pub min_rank: usize,
    pub degenerate_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SieveEntry {
    /// Initial actions the frequency came from, if it was not given directly.
    pub actions: Option<Vec<f64>>,
    pub omega: Vec<f64>,
    pub result: SieveResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SieveSummary {
    pub run_id: String,
    pub spec: DiophantineSpec,
    pub entries: Vec<SieveEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSummary {
    pub run_id: String,
    pub seed: u64,
    pub tau: f64,
    pub a_max: u32,
    pub estimates: Vec<MeasureEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistSummary {
    pub run_id: String,
    pub params: Vec<f64>,
    pub phi0: Vec<f64>,
    pub drift_factor: f64,
    pub low_order_a_max: u32,
    pub center_rank: RankReport,
    pub n_entries: usize,
    pub persistent: usize,
    pub resonant: usize,
    pub escaped: usize,
    pub failed: usize,
}

/// Runs `command` and returns the exit status: 0, or 1 when `check` finds
/// the declared integrals not in involution.
pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<(u8, Manifest), CliError> {
    let seed = cfg.experiment.seed;
    let id = run_id(&cfg.raw, seed);
    let mut sink = OutputSink::new(&cfg.directory, command.name(), id.clone(), seed)?;
    let status = match command {
        Command::Check => check(cfg, &id, &mut sink)?,
        Command::Integrate => integrate(cfg, &id, &mut sink)?,
        Command::Freqmap => freqmap(cfg, &id, &mut sink)?,
        Command::Sieve => sieve(cfg, &id, &mut sink)?,
        Command::Measure => measure(cfg, &id, &mut sink)?,
        Command::Persist => persist(cfg, &id, &mut sink)?,
    };
    Ok((status, sink.finish()?))
}

fn json<T: Serialize>(cfg: &RunConfig, sink: &mut OutputSink, value: &T) -> Result<(), CliError> {
    if cfg.formats.contains(&Format::Json) {
        sink.write_json("", value)?;
    }
    Ok(())
}

fn csv(cfg: &RunConfig, sink: &mut OutputSink, table: Table) -> Result<(), CliError> {
    if cfg.formats.contains(&Format::Csv) {
        sink.write_csv("", table)?;
    }
    Ok(())
}

fn check(cfg: &RunConfig, id: &str, sink: &mut OutputSink) -> Result<u8, CliError> {
    let chart = cfg.chart();
    let seed = cfg.experiment.seed;
    let involution = involution_check(cfg.model.integrals(), chart, CHECK_SAMPLES, job_seed(seed, 0));
    let jacobi = jacobi_check(chart, CHECK_SAMPLES, job_seed(seed, 1));
    let actions = chart.action_center();
    let params = cfg.experiment.z.clone();
    let report = nondegeneracy_rank(&cfg.model, &actions, &params, RANK_TOL)?;
    if !report.nondegenerate {
        log::warn!(
            "frequency map has rank {} < {} at the chart center",
            report.rank,
            chart.k()
        );
    }
    let symplectic = match cfg.model.symplectic() {
        None => None,
        Some(sc) => {
            let state = State::new(actions.clone(), params.clone(), cfg.experiment.phi0.clone());
            let hp = cfg.model.perturbed_hamiltonian();
            // `+ 0.0` turns the -0.0 entries of the linear solve into 0.0
            let xi_symplectic: Vec<f64> = hamiltonian_vf_symplectic_at(&hp, sc, chart, &state)?
                .into_iter()
                .map(|x| x + 0.0)
                .collect();
            let p = state.as_point();
            let xi_poisson = hamiltonian_vf_poisson(&hp, chart)
                .components()
                .map(|e| e.eval(&p))
                .collect::<Result<Vec<_>, _>>()?;
            let (k, m) = (chart.k(), chart.m());
            Some(SymplecticDemo {
                zdot_symplectic: xi_symplectic[k..k + m].to_vec(),
                zdot_poisson: xi_poisson[k..k + m].to_vec(),
                state,
                xi_symplectic,
                xi_poisson,
            })
        }
    };
    let passed = involution.passed && jacobi.passed;
    json(
        cfg,
        sink,
        &CheckSummary {
            run_id: id.to_string(),
            involution,
            jacobi,
            rank_at_center: CenterRank {
                actions,
                params,
                report,
            },
            symplectic,
        },
    )?;
    Ok(if passed { 0 } else { 1 })
}

fn integrate(cfg: &RunConfig, id: &str, sink: &mut OutputSink) -> Result<u8, CliError> {
    let icfg = cfg.require_integrator("integrate")?;
    let e = &cfg.experiment;
    let s0 = State::new(e.i0.clone(), e.z.clone(), e.phi0.clone());
    let traj = integrate_perturbed(&cfg.model, &s0, icfg)?;
    let drift = energy_drift(&traj, &cfg.model);
    let (k, m) = (cfg.chart().k(), cfg.chart().m());

    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(numbered("I", k))
        .chain(numbered("z", m))
        .chain(numbered("phi", k))
        .chain(numbered("phiu", k))
        .collect();
    let mut table = Table::new(&header)?;
    for ((t, s), u) in traj.times.iter().zip(&traj.states).zip(&traj.unwrapped_angles) {
        let row = std::iter::once(*t)
            .chain(s.actions.iter().copied())
            .chain(s.params.iter().copied())
            .chain(s.angles.iter().copied())
            .chain(u.iter().copied())
            .map(fmt_f64)
            .collect();
        table.row(row)?;
    }
    csv(cfg, sink, table)?;
    if let Some(step) = traj.left_domain {
        log::warn!("trajectory left the action box at step {step}");
    }
    json(
        cfg,
        sink,
        &IntegrateSummary {
            run_id: id.to_string(),
            method: icfg.method,
            h: icfg.h,
            t_end: icfg.t_end,
            eps: cfg.model.eps(),
            n_records: traj.len(),
            initial: s0,
            last: traj.last().clone(),
            max_abs_energy_drift: drift.max_abs_drift,
            max_action_deviation: traj.max_action_deviation,
            left_domain_step: traj.left_domain,
        },
    )?;
    Ok(0)
}

fn action_grid(cfg: &RunConfig) -> Vec<Vec<f64>> {
    if let Some(grid) = &cfg.experiment.i_grid {
        return grid.clone();
    }
    let n = cfg.experiment.grid_n;
    let mut points = vec![Vec::new()];
    for iv in cfg.chart().action_box() {
        let axis: Vec<f64> = (0..n)
            .map(|j| {
                if n == 1 {
                    iv.center()
                } else {
                    iv.lo + iv.width() * j as f64 / (n - 1) as f64
                }
            })
            .collect();
        points = points
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

fn freqmap(cfg: &RunConfig, id: &str, sink: &mut OutputSink) -> Result<u8, CliError> {
    let k = cfg.chart().k();
    let z = &cfg.experiment.z;
    let freq = FrequencyMap::new(&cfg.model);
    let header: Vec<String> = numbered("I", k)
        .chain(numbered("omega", k))
        .chain(["rank".to_string()])
        .collect();
    let mut table = Table::new(&header)?;
    let grid = action_grid(cfg);
    let mut min_rank = k;
    let mut degenerate = 0;
    for actions in &grid {
        let w = freq.eval(actions, z)?;
        let rank = nondegeneracy_rank(&cfg.model, actions, z, RANK_TOL)?;
        min_rank = min_rank.min(rank.rank);
        degenerate += usize::from(!rank.nondegenerate);
        let row = actions
            .iter()
            .chain(&w.omega)
            .copied()
            .map(fmt_f64)
            .chain([rank.rank.to_string()])
            .collect();
        table.row(row)?;
    }
    csv(cfg, sink, table)?;
    json(
        cfg,
        sink,
        &FreqmapSummary {
            run_id: id.to_string(),
            params: z.clone(),
            n_points: grid.len(),
            min_rank,
            degenerate_points: degenerate,
        },
    )?;
    Ok(0)
}

fn sieve(cfg: &RunConfig, id: &str, sink: &mut OutputSink) -> Result<u8, CliError> {
    let spec = *cfg.require_diophantine("sieve")?;
    let k = cfg.chart().k();
    let sieve = DiophantineSieve::new(k, spec)?;
    let entries: Vec<SieveEntry> = match (&cfg.experiment.omega, &cfg.experiment.i_grid) {
        (Some(w), _) => vec![SieveEntry {
            actions: None,
            omega: w.clone(),
            result: sieve.test(&FrequencyVector::new(w.clone())),
        }],
        (None, Some(grid)) => grid
            .iter()
            .map(|a| {
                let w = frequency_map_at(&cfg.model, a, &cfg.experiment.z)?;
                Ok(SieveEntry {
                    actions: Some(a.clone()),
                    result: sieve.test(&w),
                    omega: w.omega,
                })
            })
            .collect::<Result<_, CliError>>()?,
        (None, None) => {
            return Err(CliError::schema(
                "experiment.omega",
                "`sieve` needs experiment.omega or experiment.I_grid",
            ))
        }
    };
    let mut table = Table::new(
        &numbered("omega", k)
            .chain(["sieve_passed".into(), "worst_a".into(), "worst_margin".into()])
            .collect::<Vec<_>>(),
    )?;
    for e in &entries {
        let row = e
            .omega
            .iter()
            .copied()
            .map(fmt_f64)
            .chain([
                e.result.passed.to_string(),
                serde_json::to_string(&e.result.worst_a).expect("integers serialize"),
                fmt_f64(e.result.worst_margin),
            ])
            .collect();
        table.row(row)?;
    }
    csv(cfg, sink, table)?;
    json(
        cfg,
        sink,
        &SieveSummary {
            run_id: id.to_string(),
            spec,
            entries,
        },
    )?;
    Ok(0)
}

fn measure(cfg: &RunConfig, id: &str, sink: &mut OutputSink) -> Result<u8, CliError> {
    let base = *cfg.require_diophantine("measure")?;
    // one sample set for every gamma, so the fractions are comparable exactly
    let seed = job_seed(cfg.experiment.seed, 0);
    let estimates = cfg
        .gamma_list
        .iter()
        .map(|&gamma| {
            let spec = DiophantineSpec { gamma, ..base };
            resonance_measure_mc(&cfg.model, &spec, cfg.experiment.n_samples, seed)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["gamma", "resonant_fraction", "stderr", "n_samples"])?;
    for e in &estimates {
        table.row(vec![
            fmt_f64(e.gamma),
            fmt_f64(e.resonant_fraction),
            fmt_f64(e.stderr),
            e.n_samples.to_string(),
        ])?;
    }
    csv(cfg, sink, table)?;
    json(
        cfg,
        sink,
        &MeasureSummary {
            run_id: id.to_string(),
            seed: cfg.experiment.seed,
            tau: base.tau,
            a_max: base.a_max,
            estimates,
        },
    )?;
    Ok(0)
}

fn persist(cfg: &RunConfig, id: &str, sink: &mut OutputSink) -> Result<u8, CliError> {
    let icfg = cfg.require_integrator("persist")?;
    let spec = cfg.require_diophantine("persist")?;
    let grid = cfg.require_grid("persist")?;
    let e = &cfg.experiment;
    let k = cfg.chart().k();
    let out = persistence_experiment(&cfg.model, grid, &e.z, &e.phi0, &e.eps_list, icfg, spec)?;

    let header: Vec<String> = numbered("I0_", k)
        .chain(["eps".into(), "action_drift".into()])
        .chain(numbered("omega_hat_", k))
        .chain(["sieve_passed".into(), "worst_a".into(), "classification".into()])
        .collect();
    let mut table = Table::new(&header)?;
    for r in &out.reports {
        let omega_hat: Vec<f64> = match &r.extracted_omega {
            Some(w) => w.omega.clone(),
            None => vec![f64::NAN; k],
        };
        let row = r
            .initial_actions
            .iter()
            .chain([&r.eps, &r.action_drift])
            .chain(&omega_hat)
            .copied()
            .map(fmt_f64)
            .chain([
                r.sieve.passed.to_string(),
                serde_json::to_string(&r.sieve.worst_a).expect("integers serialize"),
                r.classification.as_str().to_string(),
            ])
            .collect();
        table.row(row)?;
    }
    csv(cfg, sink, table)?;
    let count = |c: Classification| out.reports.iter().filter(|r| r.classification == c).count();
    json(
        cfg,
        sink,
        &PersistSummary {
            run_id: id.to_string(),
            params: e.z.clone(),
            phi0: e.phi0.clone(),
            drift_factor: DRIFT_FACTOR,
            low_order_a_max: spec.a_max.min(LOW_ORDER_A_MAX),
            center_rank: out.center_rank.clone(),
            n_entries: out.reports.len(),
            persistent: count(Classification::Persistent),
            resonant: count(Classification::Resonant),
            escaped: count(Classification::Escaped),
            failed: out.reports.iter().filter(|r| r.error.is_some()).count(),
        },
    )?;
    Ok(0)
}
