//! Experiment configuration: JSON schema, defaults and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxDomain, GrushinSpace};
use crate::integrator::{InitialCondition, SimConfig};
use crate::linalg::{DEFAULT_CG_TOL, DEFAULT_EIG_TOL};
use crate::nonlinearity::{Nonlinearity, DEFAULT_SAMPLES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Blowup,
    Global,
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub m: usize,
    pub k: usize,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Power { p: f64, c: f64 },
    Expr(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    /// `amplitude * prod sin(pi (z - a) / (b - a))`
    Sine { amplitude: f64 },
    /// `amplitude * phi1`
    Eigenmode { amplitude: f64 },
    /// one nodal value per line; relative paths resolve against the config file
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub cg_tol: f64,
    pub eig_tol: f64,
    /// outer inverse-power iterations; `None` means `10 * unknowns`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eig_max_iter: Option<usize>,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            cg_tol: DEFAULT_CG_TOL,
            eig_tol: DEFAULT_EIG_TOL,
            eig_max_iter: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypothesisSpec {
    pub samples: usize,
    /// the pre-run check covers `[0, range_factor * sup u0]`
    pub range_factor: f64,
}

impl Default for HypothesisSpec {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            range_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// directory for report.json, records.csv and plots; `--out` overrides
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub dump_matrix: bool,
}

/// The file format, as written by users.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// free text, echoed into the report
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub mode: Mode,
    pub space: SpaceSpec,
    pub domain: Vec<[f64; 2]>,
    pub cells: Vec<usize>,
    pub nonlinearity: NonlinearitySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// replace beta by `min(beta, lambda1 (alpha - 2) / 2)` once lambda1 is known
    #[serde(default)]
    pub clamp_beta: bool,
    pub initial: InitialSpec,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub hypothesis: HypothesisSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub space: GrushinSpace,
    pub domain: BoxDomain,
    pub cells: Vec<usize>,
    pub nonlinearity: Nonlinearity,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub clamp_beta: bool,
    pub initial: InitialCondition,
    pub sim: SimConfig,
    pub solver: SolverSpec,
    pub hypothesis: HypothesisSpec,
    pub output: OutputSpec,
    /// the parsed form, kept for sweeps and for echoing into reports
    pub raw: RawConfig,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut p = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => p.push_str(&format!("/{index}")),
            Segment::Map { key } => p.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => p.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    if p.is_empty() {
        "/".into()
    } else {
        p
    }
}

/// Parses JSON text; `base` resolves relative file paths.
pub fn parse_config_str(text: &str, base: Option<&Path>) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        Error::config(pointer, e.into_inner().to_string())
    })?;
    let mut raw = raw;
    if let (Some(base), InitialSpec::File { path }) = (base, &mut raw.initial) {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    validate(raw)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path.parent())
}

fn finite(pointer: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(pointer, format!("must be finite, got {v}")))
    }
}

fn required(pointer: &str, v: Option<f64>, mode: Mode) -> Result<f64> {
    match v {
        Some(v) => finite(pointer, v),
        None => Err(Error::config(pointer, format!("required in mode {mode:?}").to_lowercase())),
    }
}

fn at(pointer: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(pointer, other.to_string()),
    }
}

/// Checks ranges and builds the typed objects. Every error names a JSON pointer.
pub fn validate(raw: RawConfig) -> Result<ExperimentConfig> {
    let s = &raw.space;
    finite("/space/gamma", s.gamma)?;
    if s.gamma < 0.0 {
        return Err(Error::config("/space/gamma", format!("must be >= 0, got {}", s.gamma)));
    }
    if s.m == 0 {
        return Err(Error::config("/space/m", "must be >= 1"));
    }
    if s.k == 0 {
        return Err(Error::config("/space/k", "must be >= 1"));
    }
    let space = GrushinSpace::new(s.m, s.k, s.gamma).map_err(at("/space"))?;

    if raw.domain.len() != space.dim() {
        return Err(Error::config(
            "/domain",
            format!("expected {} intervals (m + k), got {}", space.dim(), raw.domain.len()),
        ));
    }
    for (i, [a, b]) in raw.domain.iter().enumerate() {
        let p = format!("/domain/{i}");
        finite(&p, *a)?;
        finite(&p, *b)?;
        if !(a < b) {
            return Err(Error::config(&p, format!("need a < b, got [{a}, {b}]")));
        }
    }
    let domain = BoxDomain::new(raw.domain.iter().map(|[a, b]| (*a, *b)).collect()).map_err(at("/domain"))?;

    if raw.cells.len() != space.dim() {
        return Err(Error::config(
            "/cells",
            format!("expected {} entries, got {}", space.dim(), raw.cells.len()),
        ));
    }
    for (i, &c) in raw.cells.iter().enumerate() {
        if c < 2 {
            return Err(Error::config(format!("/cells/{i}"), format!("need at least 2 cells, got {c}")));
        }
    }

    let nonlinearity = match &raw.nonlinearity {
        NonlinearitySpec::Power { p, c } => Nonlinearity::power(*p, *c).map_err(at("/nonlinearity/power"))?,
        NonlinearitySpec::Expr(text) => Nonlinearity::expression(text).map_err(at("/nonlinearity/expr"))?,
    };

    let (alpha, beta, theta) = match raw.mode {
        Mode::Free => (
            raw.alpha.map(|v| finite("/alpha", v)).transpose()?.unwrap_or(0.0),
            raw.beta.map(|v| finite("/beta", v)).transpose()?.unwrap_or(0.0),
            raw.theta.map(|v| finite("/theta", v)).transpose()?.unwrap_or(0.0),
        ),
        mode => (
            required("/alpha", raw.alpha, mode)?,
            required("/beta", raw.beta, mode)?,
            required("/theta", raw.theta, mode)?,
        ),
    };

    let initial = match &raw.initial {
        InitialSpec::Sine { amplitude } => {
            check_amplitude("/initial/sine/amplitude", *amplitude)?;
            InitialCondition::ProductSine { amplitude: *amplitude }
        }
        InitialSpec::Eigenmode { amplitude } => {
            check_amplitude("/initial/eigenmode/amplitude", *amplitude)?;
            InitialCondition::Eigenmode { amplitude: *amplitude }
        }
        InitialSpec::File { path } => {
            InitialCondition::Nodal(crate::integrator::read_nodal_file(path).map_err(at("/initial/file/path"))?)
        }
    };

    raw.sim.validate().map_err(at("/sim"))?;
    let sv = &raw.solver;
    for (p, v) in [("/solver/cg_tol", sv.cg_tol), ("/solver/eig_tol", sv.eig_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::config(p, format!("must be positive, got {v}")));
        }
    }
    if raw.hypothesis.samples < 2 {
        return Err(Error::config("/hypothesis/samples", "need at least 2 samples"));
    }
    if !(raw.hypothesis.range_factor >= 1.0 && raw.hypothesis.range_factor.is_finite()) {
        return Err(Error::config("/hypothesis/range_factor", "must be >= 1"));
    }

    Ok(ExperimentConfig {
        mode: raw.mode,
        space,
        domain,
        cells: raw.cells.clone(),
        nonlinearity,
        alpha,
        beta,
        theta,
        clamp_beta: raw.clamp_beta,
        initial,
        sim: raw.sim.clone(),
        solver: raw.solver.clone(),
        hypothesis: raw.hypothesis.clone(),
        output: raw.output.clone(),
        raw,
    })
}

fn check_amplitude(pointer: &str, a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::config(pointer, format!("must be positive, got {a}")))
    }
}
