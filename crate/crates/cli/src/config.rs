//! Run configuration: the JSON schema as read from disk, and its validated
//! form built from core types.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use pistlab_core::analysis::DiophantineSpec;
use pistlab_core::expr::{parse, Expr, ParseError};
use pistlab_core::{ChartSpec, DynamicsError, IntegratorConfig, Interval, Method, ModelSpec, SymplecticCoeffs};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_GRID_N: usize = 11;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub chart: RawChart,
    pub model: RawModel,
    #[serde(default)]
    pub integrator: Option<RawIntegrator>,
    #[serde(default)]
    pub diophantine: Option<RawDiophantine>,
    #[serde(default)]
    pub experiment: RawExperiment,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChart {
    pub k: usize,
    pub m: usize,
    #[serde(rename = "V")]
    pub v: Vec<[f64; 2]>,
    #[serde(rename = "W", default)]
    pub w: Vec<[f64; 2]>,
}

/// An expression given either as text or as a bare number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExprText {
    Text(String),
    Number(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    #[serde(rename = "H")]
    pub h: String,
    #[serde(rename = "H1", default)]
    pub h1: Option<String>,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub integrals: Option<Vec<String>>,
    #[serde(rename = "omega_AB", default)]
    pub omega_ab: Option<Vec<Vec<ExprText>>>,
    #[serde(rename = "omega_iA", default)]
    pub omega_ia: Option<Vec<Vec<ExprText>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIntegrator {
    #[serde(default = "default_method")]
    pub method: Method,
    pub h: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_method() -> Method {
    Method::Rk4
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDiophantine {
    pub gamma: f64,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub a_max: Option<u32>,
    #[serde(default)]
    pub gamma_list: Option<Vec<f64>>,
}

/// Initial actions: an explicit list, or a tensor grid `n_i` points per axis
/// spanning `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<Vec<f64>>),
    Box(BoxGrid),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExperiment {
    #[serde(rename = "I_grid", default)]
    pub i_grid: Option<GridSpec>,
    #[serde(rename = "I0", default)]
    pub i0: Option<Vec<f64>>,
    #[serde(default)]
    pub z: Option<Vec<f64>>,
    #[serde(default)]
    pub phi0: Option<Vec<f64>>,
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub omega: Option<Vec<f64>>,
    #[serde(default)]
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub formats: Option<Vec<Format>>,
}

/// Experiment inputs with defaults filled in and dimensions checked.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub i_grid: Option<Vec<Vec<f64>>>,
    pub i0: Vec<f64>,
    pub z: Vec<f64>,
    pub phi0: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub seed: u64,
    pub omega: Option<Vec<f64>>,
    pub n_samples: usize,
    pub grid_n: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub model: ModelSpec,
    pub integrator: Option<IntegratorConfig>,
    pub diophantine: Option<DiophantineSpec>,
    pub gamma_list: Vec<f64>,
    pub experiment: Experiment,
    pub directory: PathBuf,
    pub formats: BTreeSet<Format>,
}

impl RunConfig {
    pub fn chart(&self) -> &ChartSpec {
        self.model.chart()
    }

    pub fn require_integrator(&self, command: &str) -> Result<&IntegratorConfig, CliError> {
        self.integrator
            .as_ref()
            .ok_or_else(|| CliError::schema("integrator", format!("required by `{command}`")))
    }

    pub fn require_diophantine(&self, command: &str) -> Result<&DiophantineSpec, CliError> {
        self.diophantine
            .as_ref()
            .ok_or_else(|| CliError::schema("diophantine", format!("required by `{command}`")))
    }

    pub fn require_grid(&self, command: &str) -> Result<&[Vec<f64>], CliError> {
        self.experiment
            .i_grid
            .as_deref()
            .ok_or_else(|| CliError::schema("experiment.I_grid", format!("required by `{command}`")))
    }
}

/// Reads and validates a configuration file. `seed` overrides
/// `experiment.seed`; `out` overrides `output.directory`.
pub fn load_config(path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw = parse_raw(&text)?;
    validate(raw, path, seed, out)
}

pub fn parse_raw(text: &str) -> Result<RawConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.to_string();
        // the path stops at the parent of a missing field; name the field
        let field = msg
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next());
        let key = match (field, path.as_str()) {
            (Some(f), "." | "") => f.to_string(),
            (Some(f), p) => format!("{p}.{f}"),
            (None, p) => p.to_string(),
        };
        let reason = msg.split(" at line").next().unwrap_or(&msg).to_string();
        CliError::schema(key, reason)
    })
}

fn interval(key: &str, pair: &[f64; 2]) -> Result<Interval, CliError> {
    Interval::new(pair[0], pair[1]).map_err(|e| CliError::schema(key, e.to_string()))
}

fn vector(key: &str, v: &[f64], len: usize) -> Result<(), CliError> {
    if v.len() != len {
        return Err(CliError::schema(
            key,
            format!("expected {len} entries, got {}", v.len()),
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::schema(key, "entries must be finite"));
    }
    Ok(())
}

fn parse_expr(file: &Path, key: &str, text: &str, chart: &ChartSpec) -> Result<Expr, CliError> {
    parse(text, chart).map_err(|e| CliError::Expression {
        file: file.to_path_buf(),
        key: key.to_string(),
        code: match e {
            ParseError::UnknownVariable(_) => "unknown_variable",
            ParseError::Syntax { .. } | ParseError::ZeroDivisor => "syntax_error",
        },
        reason: e.to_string(),
    })
}

fn parse_matrix(file: &Path, key: &str, rows: &[Vec<ExprText>], chart: &ChartSpec) -> Result<Vec<Vec<Expr>>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, entry)| match entry {
                    ExprText::Number(x) => Ok(Expr::constant(*x)),
                    ExprText::Text(t) => parse_expr(file, &format!("{key}[{r}][{c}]"), t, chart),
                })
                .collect()
        })
        .collect()
}

fn model_error(e: DynamicsError) -> CliError {
    match e {
        DynamicsError::AngleDependent { which } => {
            let key = match which.as_str() {
                "H" => "model.H".to_string(),
                "H1" => "model.H1".to_string(),
                other => match other.strip_prefix("integral ").and_then(|n| n.parse::<usize>().ok()) {
                    Some(n) => format!("model.integrals[{}]", n - 1),
                    None => "model.integrals".to_string(),
                },
            };
            CliError::schema(key, "angle-dependent")
        }
        DynamicsError::InvalidModel(msg) => CliError::schema("model", msg),
        other => CliError::schema("model", other.to_string()),
    }
}

fn tensor_grid(key: &str, g: &BoxGrid, k: usize) -> Result<Vec<Vec<f64>>, CliError> {
    vector(&format!("{key}.lo"), &g.lo, k)?;
    vector(&format!("{key}.hi"), &g.hi, k)?;
    if g.n.len() != k || g.n.contains(&0) {
        return Err(CliError::schema(
            format!("{key}.n"),
            format!("expected {k} positive counts"),
        ));
    }
    let axes: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let n = g.n[i];
            (0..n)
                .map(|j| {
                    if n == 1 {
                        0.5 * (g.lo[i] + g.hi[i])
                    } else {
                        g.lo[i] + (g.hi[i] - g.lo[i]) * j as f64 / (n - 1) as f64
                    }
                })
                .collect()
        })
        .collect();
    // first axis varies slowest
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

pub fn validate(raw: RawConfig, file: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<RunConfig, CliError> {
    let c = &raw.chart;
    if c.k == 0 {
        return Err(CliError::schema("chart.k", "must be at least 1"));
    }
    if c.v.len() != c.k {
        return Err(CliError::schema(
            "chart.V",
            format!("expected {} intervals, got {}", c.k, c.v.len()),
        ));
    }
    if c.w.len() != c.m {
        return Err(CliError::schema(
            "chart.W",
            format!("expected {} intervals, got {}", c.m, c.w.len()),
        ));
    }
    let actions =
        c.v.iter()
            .enumerate()
            .map(|(i, p)| interval(&format!("chart.V[{i}]"), p))
            .collect::<Result<_, _>>()?;
    let params =
        c.w.iter()
            .enumerate()
            .map(|(i, p)| interval(&format!("chart.W[{i}]"), p))
            .collect::<Result<_, _>>()?;
    let chart = ChartSpec::new(actions, params).map_err(|e| CliError::schema("chart", e.to_string()))?;
    let (k, m) = (chart.k(), chart.m());

    let rm = &raw.model;
    let h = parse_expr(file, "model.H", &rm.h, &chart)?;
    let h1 = match &rm.h1 {
        Some(t) => parse_expr(file, "model.H1", t, &chart)?,
        None => Expr::zero(),
    };
    if !(rm.eps.is_finite() && rm.eps >= 0.0) {
        return Err(CliError::schema("model.eps", "must be finite and non-negative"));
    }
    let mut model = ModelSpec::new(chart.clone(), h, h1, rm.eps).map_err(model_error)?;
    if let Some(list) = &rm.integrals {
        let fs = list
            .iter()
            .enumerate()
            .map(|(i, t)| parse_expr(file, &format!("model.integrals[{i}]"), t, &chart))
            .collect::<Result<Vec<_>, _>>()?;
        model = model.with_integrals(fs).map_err(model_error)?;
    }
    match (&rm.omega_ab, &rm.omega_ia) {
        (None, None) => {}
        (ab, ia) => {
            let ab = match ab {
                Some(rows) => parse_matrix(file, "model.omega_AB", rows, &chart)?,
                None => parse_matrix(file, "model.omega_AB", &vec![vec![ExprText::Number(0.0); m]; m], &chart)?,
            };
            let ia = match ia {
                Some(rows) => parse_matrix(file, "model.omega_iA", rows, &chart)?,
                None => parse_matrix(file, "model.omega_iA", &vec![vec![ExprText::Number(0.0); m]; k], &chart)?,
            };
            let sc =
                SymplecticCoeffs::new(&chart, ab, ia).map_err(|e| CliError::schema("model.omega_AB", e.to_string()))?;
            sc.validate(&chart, 100, 0)
                .map_err(|e| CliError::schema("model.omega_AB", e.to_string()))?;
            model = model.with_symplectic(sc);
        }
    }

    let integrator = match &raw.integrator {
        None => None,
        Some(ri) => {
            let cfg = IntegratorConfig::new(ri.method, ri.h, ri.t, ri.record_every);
            if ri.h > ri.t {
                return Err(CliError::schema(
                    "integrator.h",
                    format!("step {} exceeds horizon T = {}", ri.h, ri.t),
                ));
            }
            cfg.validate()
                .map_err(|e| CliError::schema("integrator", e.to_string()))?;
            Some(cfg)
        }
    };

    let (diophantine, gamma_list) = match &raw.diophantine {
        None => (None, Vec::new()),
        Some(rd) => {
            let tau = rd.tau.unwrap_or(k as f64 + 1.0);
            let a_max = rd.a_max.unwrap_or(pistlab_core::analysis::DEFAULT_A_MAX);
            let spec = DiophantineSpec::new(rd.gamma, tau, a_max)
                .and_then(|s| s.validate_for(k).map(|_| s))
                .map_err(|e| CliError::schema("diophantine", e.to_string()))?;
            let list = rd.gamma_list.clone().unwrap_or_else(|| vec![rd.gamma]);
            if list.is_empty() || list.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
                return Err(CliError::schema("diophantine.gamma_list", "gammas must be positive"));
            }
            (Some(spec), list)
        }
    };

    let re = &raw.experiment;
    let i_grid = match &re.i_grid {
        None => None,
        Some(GridSpec::Points(points)) => {
            if points.is_empty() {
                return Err(CliError::schema("experiment.I_grid", "must not be empty"));
            }
            for (i, p) in points.iter().enumerate() {
                vector(&format!("experiment.I_grid[{i}]"), p, k)?;
            }
            Some(points.clone())
        }
        Some(GridSpec::Box(g)) => Some(tensor_grid("experiment.I_grid", g, k)?),
    };
    let i0 = re.i0.clone().unwrap_or_else(|| chart.action_center());
    vector("experiment.I0", &i0, k)?;
    let z = re.z.clone().unwrap_or_else(|| chart.param_center());
    vector("experiment.z", &z, m)?;
    if !chart.params_inside(&z) {
        return Err(CliError::schema("experiment.z", "outside the parameter box W"));
    }
    let phi0 = re.phi0.clone().unwrap_or_else(|| vec![0.0; k]);
    vector("experiment.phi0", &phi0, k)?;
    let eps_list = re.eps_list.clone().unwrap_or_else(|| vec![rm.eps]);
    if eps_list.is_empty() || eps_list.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(CliError::schema(
            "experiment.eps_list",
            "entries must be finite and non-negative",
        ));
    }
    if let Some(w) = &re.omega {
        vector("experiment.omega", w, k)?;
    }
    let n_samples = re.n_samples.unwrap_or(DEFAULT_SAMPLES);
    if n_samples < pistlab_core::analysis::MIN_MC_SAMPLES {
        return Err(CliError::schema(
            "experiment.n_samples",
            format!("at least {} required", pistlab_core::analysis::MIN_MC_SAMPLES),
        ));
    }
    let grid_n = re.grid_n.unwrap_or(DEFAULT_GRID_N);
    if grid_n == 0 {
        return Err(CliError::schema("experiment.grid_n", "must be positive"));
    }
    let experiment = Experiment {
        i_grid,
        i0,
        z,
        phi0,
        eps_list,
        seed: seed.or(re.seed).unwrap_or(0),
        omega: re.omega.clone(),
        n_samples,
        grid_n,
    };

    let directory = out
        .map(Path::to_path_buf)
        .or_else(|| raw.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let formats: BTreeSet<Format> = match &raw.output.formats {
        Some(list) => list.iter().copied().collect(),
        None => [Format::Csv, Format::Json].into(),
    };

    Ok(RunConfig {
        raw,
        model,
        integrator,
        diophantine,
        gamma_list,
        experiment,
        directory,
        formats,
    })
}
