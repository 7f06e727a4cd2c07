//! Theorem reports and the verdict rules.

use serde::{Serialize, Serializer};

use crate::diagnostics::Certification;
use crate::error::{Error, Result};
use crate::integrator::Status;
use crate::nonlinearity::{ConstraintCheck, HypothesisReport, PositivityReport};

use super::config::{Mode, RawConfig};

/// Marker written in place of any quantity that does not apply to a run.
pub const NOT_APPLICABLE: &str = "not-applicable";

/// Slack on the blow-up time bound: `t_blow <= BLOWUP_TIME_SLACK * T*_bound`.
pub const BLOWUP_TIME_SLACK: f64 = 1.1;

/// Slack on the decay envelope: `decay_margin <= 1 + DECAY_TOL`.
pub const DECAY_TOL: f64 = 1e-3;

/// Serializes `None` as [`NOT_APPLICABLE`] and non-finite floats as strings.
pub fn or_na<T: Serialize, S: Serializer>(v: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => v.serialize(s),
        None => s.serialize_str(NOT_APPLICABLE),
    }
}

fn num_or_na<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_finite() => s.serialize_f64(*x),
        Some(x) => s.serialize_str(&format!("non-finite: {x}")),
        None => s.serialize_str(NOT_APPLICABLE),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ConsistentWithTheorem,
    HypothesesNotMet,
    Inconclusive,
    InconsistencyFlag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// The three numbers produced from `alpha`, `F0` and `I0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlowupConstants {
    pub sigma: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "Tstar_bound")]
    pub tstar_bound: f64,
}

/// `sigma = sqrt(alpha/2) - 1`, `M = (1+sigma)(1+1/sigma) I0^2 / (2 alpha F0)`,
/// `T*_bound = M / (sigma I0)`.
#[allow(non_snake_case)]
pub fn compute_blowup_constants(alpha: f64, F0: f64, I0: f64) -> Result<BlowupConstants> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be > 2, got {alpha}")));
    }
    if !(F0 > 0.0) || !F0.is_finite() {
        return Err(Error::invalid(format!("F0 must be > 0, got {F0}")));
    }
    if !(I0 > 0.0) || !I0.is_finite() {
        return Err(Error::invalid(format!("I0 must be > 0, got {I0}")));
    }
    // sqrt(alpha/2) - 1 without cancellation near alpha = 2
    let sigma = (alpha - 2.0) / ((2.0 * alpha).sqrt() + 2.0);
    let m = (1.0 + sigma) * (1.0 + 1.0 / sigma) * I0 * I0 / (2.0 * alpha * F0);
    Ok(BlowupConstants {
        sigma,
        m,
        tstar_bound: m / (sigma * I0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitialSummary {
    pub sup_norm: f64,
    pub l2: f64,
    pub grad: f64,
    /// `int u0^2 + |grad_gamma u0|^2`
    #[serde(rename = "I0")]
    pub i0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub outcome: Status,
    pub t_final: f64,
    pub steps: usize,
    pub rejected: usize,
    pub records: usize,
    pub max_supnorm: f64,
    #[serde(serialize_with = "num_or_na")]
    pub t_blow: Option<f64>,
    /// `calE(t_final) / calE(0)`
    #[serde(serialize_with = "num_or_na")]
    pub final_energy_ratio: Option<f64>,
}

/// Whether the global-existence hypothesis on the range of `u0` and `F0 > 0`
/// can hold together for this configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointSatisfiability {
    pub hypothesis_on_u0_range: bool,
    pub worst_margin_on_u0_range: f64,
    #[serde(rename = "F0_positive")]
    pub f0_positive: bool,
    pub jointly_satisfied: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub status: RunStatus,
    #[serde(serialize_with = "or_na")]
    pub failed_stage: Option<String>,
    #[serde(serialize_with = "or_na")]
    pub error: Option<String>,
    pub mode: Mode,
    pub config: RawConfig,
    pub nonlinearity: String,
    pub homogeneous_dimension: f64,
    pub unknowns: usize,
    #[serde(serialize_with = "num_or_na")]
    pub lambda1: Option<f64>,
    #[serde(serialize_with = "num_or_na")]
    pub eigen_residual: Option<f64>,
    pub alpha: f64,
    /// beta as used, after the optional spectral clamp
    pub beta: f64,
    pub beta_requested: f64,
    pub theta: f64,
    #[serde(serialize_with = "or_na")]
    pub initial: Option<InitialSummary>,
    #[serde(rename = "F0", serialize_with = "num_or_na")]
    pub f0: Option<f64>,
    #[serde(serialize_with = "or_na")]
    pub positivity: Option<PositivityReport>,
    #[serde(serialize_with = "or_na")]
    pub hypothesis: Option<HypothesisReport>,
    pub constraint_check: Vec<ConstraintCheck>,
    #[serde(serialize_with = "num_or_na")]
    pub sigma: Option<f64>,
    #[serde(rename = "M", serialize_with = "num_or_na")]
    pub m: Option<f64>,
    #[serde(rename = "Tstar_bound", serialize_with = "num_or_na")]
    pub tstar_bound: Option<f64>,
    #[serde(serialize_with = "num_or_na")]
    pub decay_rate: Option<f64>,
    #[serde(serialize_with = "or_na")]
    pub simulation: Option<SimulationSummary>,
    #[serde(serialize_with = "or_na")]
    pub hypothesis_recheck: Option<HypothesisReport>,
    pub certification: Vec<Certification>,
    /// certifications that could not be evaluated (too few records, ...)
    pub certification_errors: Vec<String>,
    #[serde(serialize_with = "or_na")]
    pub joint_satisfiability: Option<JointSatisfiability>,
    pub warnings: Vec<String>,
    #[serde(serialize_with = "or_na")]
    pub verdict: Option<Verdict>,
    pub verdict_reason: String,
}

impl TheoremReport {
    /// Stable, pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Sampled hypothesis margin, side conditions, positivity of `f` and the
    /// post-run recheck all hold, and `F0 > 0`.
    pub fn hypotheses_hold(&self) -> bool {
        let Some(h) = &self.hypothesis else { return false };
        let recheck = self.hypothesis_recheck.as_ref().is_none_or(|r| r.holds);
        let f0_ok = self.f0.is_some_and(|f| f > 0.0);
        h.holds
            && recheck
            && f0_ok
            && self.positivity.as_ref().is_some_and(|p| p.holds)
            && !self.constraint_check.is_empty()
            && self.constraint_check.iter().all(|c| c.holds)
    }

    fn certified(&self) -> bool {
        self.certification_errors.is_empty() && self.certification.iter().all(|c| c.certified)
    }
}

/// Applies the verdict rules to a finished report. `None` in free mode and
/// when the hypotheses hold but nothing was simulated.
pub fn decide_verdict(r: &TheoremReport) -> (Option<Verdict>, String) {
    use Verdict::*;
    if r.mode == Mode::Free {
        return (None, "free mode: no theorem is checked".into());
    }
    if r.status == RunStatus::Failed {
        let stage = r.failed_stage.as_deref().unwrap_or("unknown");
        return (Some(Inconclusive), format!("run failed at stage {stage}"));
    }
    if !r.hypotheses_hold() {
        return (Some(HypothesesNotMet), unmet_reason(r));
    }
    let Some(sim) = &r.simulation else {
        return (None, "hypotheses hold; no simulation was run".into());
    };
    match r.mode {
        Mode::Blowup => {
            let Some(bound) = r.tstar_bound else {
                return (Some(Inconclusive), "blow-up time bound unavailable".into());
            };
            let limit = BLOWUP_TIME_SLACK * bound;
            match &sim.outcome {
                Status::Blowup { t_blow, .. } if *t_blow <= limit => {
                    if r.certified() {
                        (
                            Some(ConsistentWithTheorem),
                            format!("blow-up at t = {t_blow} <= {BLOWUP_TIME_SLACK} * T*_bound = {limit}"),
                        )
                    } else {
                        (
                            Some(Inconclusive),
                            format!("blow-up at t = {t_blow} within bound, but a certification failed"),
                        )
                    }
                }
                Status::Blowup { t_blow, .. } => (
                    Some(InconsistencyFlag),
                    format!("blow-up at t = {t_blow} later than {BLOWUP_TIME_SLACK} * T*_bound = {limit}"),
                ),
                Status::Completed if sim.t_final > limit => (
                    Some(InconsistencyFlag),
                    format!("no blow-up by t = {} > {BLOWUP_TIME_SLACK} * T*_bound = {limit}", sim.t_final),
                ),
                Status::Completed => (
                    Some(Inconclusive),
                    format!("t_end = {} stops before {BLOWUP_TIME_SLACK} * T*_bound = {limit}", sim.t_final),
                ),
                Status::Failed { reason } => (Some(Inconclusive), format!("simulation failed: {reason}")),
                Status::Running => (Some(Inconclusive), "simulation did not finish".into()),
            }
        }
        Mode::Global => match &sim.outcome {
            Status::Blowup { t_blow, .. } => (
                Some(InconsistencyFlag),
                format!("blow-up at t = {t_blow} although global existence was predicted"),
            ),
            Status::Completed => {
                let decay = r.certification.iter().find(|c| c.check.starts_with("calE(t) <="));
                match decay {
                    Some(c) if c.margin <= 1.0 + DECAY_TOL => (
                        Some(ConsistentWithTheorem),
                        format!("decay margin {} <= 1 + {DECAY_TOL}", c.margin),
                    ),
                    Some(c) => (
                        Some(InconsistencyFlag),
                        format!("decay margin {} exceeds 1 + {DECAY_TOL}", c.margin),
                    ),
                    None => (Some(Inconclusive), "decay envelope not evaluated".into()),
                }
            }
            Status::Failed { reason } => (Some(Inconclusive), format!("simulation failed: {reason}")),
            Status::Running => (Some(Inconclusive), "simulation did not finish".into()),
        },
        Mode::Free => unreachable!(),
    }
}

fn unmet_reason(r: &TheoremReport) -> String {
    let mut why = Vec::new();
    match &r.hypothesis {
        None => why.push("hypothesis not evaluated".to_string()),
        Some(h) if !h.holds => why.push(format!(
            "hypothesis margin {} at u = {} on [0, {}]",
            h.worst_margin, h.argmin_u, h.u_range[1]
        )),
        _ => {}
    }
    if let Some(h) = &r.hypothesis_recheck {
        if !h.holds && Some(h) != r.hypothesis.as_ref() {
            why.push(format!("post-run recheck margin {} at u = {}", h.worst_margin, h.argmin_u));
        }
    }
    for c in r.constraint_check.iter().filter(|c| !c.holds) {
        why.push(format!("{} fails ({} vs {})", c.label, c.lhs, c.rhs));
    }
    if let Some(p) = &r.positivity {
        if !p.holds {
            why.push(format!("f(u) > 0 fails at u = {} (f = {})", p.argmin_u, p.min_value));
        }
    }
    if !r.f0.is_some_and(|f| f > 0.0) {
        match r.f0 {
            Some(f) => why.push(format!("F0 = {f} is not positive")),
            None => why.push("F0 not computed".into()),
        }
    }
    why.join("; ")
}
