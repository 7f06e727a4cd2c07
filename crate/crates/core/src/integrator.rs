//! Semi-implicit time stepping of `(I + L) u' = -L u + f(u)` with `L = -A`,
//! adaptive step control and blow-up detection.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::linalg::{cg_solve_from, Affine, EigenResult, DEFAULT_CG_TOL};
use crate::nonlinearity::Nonlinearity;
use crate::operator::SparseMatrix;

/// Step-control and stopping parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// sup-norm at which blow-up is declared
    pub blowup_threshold: f64,
    /// relative sup-norm change above which a step is halved and retried
    pub step_change_high: f64,
    /// relative sup-norm change below which the next step grows by 1.5
    pub step_change_low: f64,
    pub cg_tol: f64,
    pub record_every: usize,
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-3,
            dt_min: 1e-12,
            dt_max: 1e-2,
            t_end: 1.0,
            blowup_threshold: 1e8,
            step_change_high: 0.1,
            step_change_low: 0.01,
            cg_tol: DEFAULT_CG_TOL,
            record_every: 1,
            max_steps: 10_000_000,
        }
    }
}

impl SimConfig {
    /// Fixed step: `dt_min = dt_init = dt_max = dt`.
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self {
            dt_init: dt,
            dt_min: dt,
            dt_max: dt,
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
            ("t_end", self.t_end),
            ("blowup_threshold", self.blowup_threshold),
            ("step_change_high", self.step_change_high),
            ("step_change_low", self.step_change_low),
            ("cg_tol", self.cg_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::invalid("need dt_min <= dt_init <= dt_max"));
        }
        if self.step_change_low >= self.step_change_high {
            return Err(Error::invalid("need step_change_low < step_change_high"));
        }
        if self.record_every == 0 || self.max_steps == 0 {
            return Err(Error::invalid("record_every and max_steps must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupCause {
    /// sup-norm reached the threshold
    Threshold,
    /// the step controller hit `dt_min` while still violating the change bound
    StepExhaustion,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Running,
    Completed,
    Blowup { t_blow: f64, cause: BlowupCause },
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    /// step size proposed for the next step
    pub dt: f64,
    /// last accepted step size (0 before the first step)
    pub last_dt: f64,
    pub steps: usize,
    pub rejected: usize,
    pub status: Status,
}

impl SimState {
    pub fn new(u0: Vec<f64>, cfg: &SimConfig) -> Self {
        Self {
            t: 0.0,
            u: u0,
            dt: cfg.dt_init,
            last_dt: 0.0,
            steps: 0,
            rejected: 0,
            status: Status::Running,
        }
    }

    pub fn is_running(&self) -> bool {
        self.status == Status::Running
    }

    fn with_status(&self, status: Status) -> Self {
        Self {
            status,
            ..self.clone()
        }
    }
}

pub fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Initial data choices.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// `c * prod_i sin(pi (z_i - a_i) / (b_i - a_i))`
    ProductSine { amplitude: f64 },
    /// `c * phi1`
    Eigenmode { amplitude: f64 },
    /// nodal values, lexicographic order
    Nodal(Vec<f64>),
}

/// Builds a nonnegative, nontrivial `u0` on the interior nodes.
pub fn build_initial_condition(
    grid: &Grid,
    spec: &InitialCondition,
    eigen: Option<&EigenResult>,
) -> Result<Vec<f64>> {
    let u = match spec {
        InitialCondition::ProductSine { amplitude } => {
            let bounds = grid.domain().bounds().to_vec();
            grid.sample(|z| {
                amplitude
                    * z.iter()
                        .zip(&bounds)
                        .map(|(zi, (a, b))| (std::f64::consts::PI * (zi - a) / (b - a)).sin())
                        .product::<f64>()
            })
        }
        InitialCondition::Eigenmode { amplitude } => {
            let eig = eigen.ok_or_else(|| Error::invalid("eigenmode initial data needs the eigenpair"))?;
            eig.phi1.iter().map(|v| amplitude * v).collect()
        }
        InitialCondition::Nodal(values) => {
            crate::error::check_len(grid.len(), values.len())?;
            values.clone()
        }
    };
    // discrete eigenvectors may carry rounding-level negative entries near the boundary
    let floor = match spec {
        InitialCondition::Eigenmode { .. } => -1e-12 * sup_norm(&u),
        _ => 0.0,
    };
    if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v >= floor && v.is_finite())) {
        return Err(Error::invalid(format!("initial value at node {i} is {v}; u0 must be >= 0")));
    }
    if u.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("initial data is identically zero"));
    }
    Ok(u)
}

/// Reads one nodal value per line (blank lines ignored).
pub fn read_nodal_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// One accepted step of
/// `(I + L + dt L) u+ = (I + L) u + dt f(u)`, with step halving on large
/// relative sup-norm changes.
pub fn step(state: &SimState, a: &SparseMatrix, nl: &Nonlinearity, cfg: &SimConfig) -> SimState {
    if !state.is_running() {
        return state.clone();
    }
    let n = state.u.len();
    let mut fu = Vec::with_capacity(n);
    for &v in &state.u {
        match nl.eval_f(v) {
            Ok(x) => fu.push(x),
            Err(e) => return state.with_status(Status::Failed { reason: e.to_string() }),
        }
    }
    // (I + L) u = u - A u
    let mut mass_u = vec![0.0; n];
    a.apply_into(&state.u, &mut mass_u);
    for (m, &v) in mass_u.iter_mut().zip(&state.u) {
        *m = v - *m;
    }
    let sup_u = sup_norm(&state.u);
    let remaining = cfg.t_end - state.t;
    let mut dt = state.dt.min(remaining);
    let mut rejected = state.rejected;
    let mut rhs = vec![0.0; n];
    loop {
        for i in 0..n {
            rhs[i] = mass_u[i] + dt * fu[i];
        }
        let op = Affine {
            base: a,
            shift: 1.0,
            scale: -(1.0 + dt),
        };
        let next = match cg_solve_from(&op, &rhs, state.u.clone(), cfg.cg_tol, 10 * n.max(100)) {
            Ok((x, _)) => x,
            Err(e) => return state.with_status(Status::Failed { reason: format!("linear solve: {e}") }),
        };
        let diff = next
            .iter()
            .zip(&state.u)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        let change = if sup_u > 0.0 {
            diff / sup_u
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if change > cfg.step_change_high {
            if dt <= cfg.dt_min {
                let mut s = state.with_status(Status::Blowup {
                    t_blow: state.t,
                    cause: BlowupCause::StepExhaustion,
                });
                s.rejected = rejected + 1;
                s.dt = dt;
                return s;
            }
            rejected += 1;
            dt = (0.5 * dt).max(cfg.dt_min);
            continue;
        }
        // absorb round-off so that t lands exactly on t_end
        let reached_end = remaining - dt <= 1e-12 * cfg.t_end;
        let t = if reached_end { cfg.t_end } else { state.t + dt };
        let proposal = if change < cfg.step_change_low {
            (1.5 * dt).min(cfg.dt_max)
        } else {
            dt
        };
        let status = if sup_norm(&next) >= cfg.blowup_threshold {
            Status::Blowup {
                t_blow: t,
                cause: BlowupCause::Threshold,
            }
        } else if reached_end {
            Status::Completed
        } else {
            Status::Running
        };
        return SimState {
            t,
            u: next,
            dt: proposal,
            last_dt: dt,
            steps: state.steps + 1,
            rejected,
            status,
        };
    }
}

/// Steps until completion, blow-up or failure. The observer sees the initial
/// state, every `record_every`-th accepted state, and the final state.
pub fn run<O>(u0: Vec<f64>, a: &SparseMatrix, nl: &Nonlinearity, cfg: &SimConfig, mut observer: O) -> Result<SimState>
where
    O: FnMut(&SimState) -> Result<()>,
{
    cfg.validate()?;
    crate::error::check_len(a.dim(), u0.len())?;
    let mut state = SimState::new(u0, cfg);
    observer(&state)?;
    let mut last_observed = 0;
    while state.is_running() {
        if state.steps >= cfg.max_steps {
            state.status = Status::Failed {
                reason: format!("step limit {} reached at t = {}", cfg.max_steps, state.t),
            };
            break;
        }
        let next = step(&state, a, nl, cfg);
        let advanced = next.steps > state.steps;
        state = next;
        if advanced && state.is_running() && state.steps.is_multiple_of(cfg.record_every) {
            observer(&state)?;
            last_observed = state.steps;
        }
    }
    if last_observed != state.steps {
        observer(&state)?;
    }
    Ok(state)
}
