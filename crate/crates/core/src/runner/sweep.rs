//! One-parameter sweeps over a config template.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::Status;

use super::config::{validate, InitialSpec, RawConfig};
use super::report::{or_na, RunStatus, Verdict, NOT_APPLICABLE};
use super::{run_experiment_with, RunOptions};

pub const SWEEP_CSV_HEADER: &str = "value,lambda1,F0,verdict,t_blow_or_decay_margin,status";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Gamma,
    Alpha,
    Beta,
    Theta,
    Amplitude,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(Self::Gamma),
            "alpha" => Ok(Self::Alpha),
            "beta" => Ok(Self::Beta),
            "theta" => Ok(Self::Theta),
            "amplitude" => Ok(Self::Amplitude),
            other => Err(Error::invalid(format!(
                "unknown sweep axis '{other}'; expected gamma, alpha, beta, theta or amplitude"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Gamma => "gamma",
            Self::Alpha => "alpha",
            Self::Beta => "beta",
            Self::Theta => "theta",
            Self::Amplitude => "amplitude",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(serialize_with = "or_na")]
    pub lambda1: Option<f64>,
    #[serde(rename = "F0", serialize_with = "or_na")]
    pub f0: Option<f64>,
    #[serde(serialize_with = "or_na")]
    pub verdict: Option<Verdict>,
    /// blow-up time if the run blew up, otherwise the decay margin when evaluated
    #[serde(serialize_with = "or_na")]
    pub t_blow_or_decay_margin: Option<f64>,
    /// `ok`, or the error that stopped this run
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        Some(x) => format!("{x}"),
        None => NOT_APPLICABLE.into(),
    }
}

impl SweepSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let verdict = r.verdict.map_or(NOT_APPLICABLE.to_string(), |v| format!("{v:?}"));
            let status = r.status.replace([',', '\n'], ";");
            out.push_str(&format!(
                "{:.16e},{},{},{verdict},{},{status}\n",
                r.value,
                cell(r.lambda1),
                cell(r.f0),
                cell(r.t_blow_or_decay_margin)
            ));
        }
        out
    }
}

fn apply(raw: &mut RawConfig, axis: SweepAxis, value: f64) -> Result<()> {
    match axis {
        SweepAxis::Gamma => raw.space.gamma = value,
        SweepAxis::Alpha => raw.alpha = Some(value),
        SweepAxis::Beta => raw.beta = Some(value),
        SweepAxis::Theta => raw.theta = Some(value),
        SweepAxis::Amplitude => match &mut raw.initial {
            InitialSpec::Sine { amplitude } | InitialSpec::Eigenmode { amplitude } => *amplitude = value,
            InitialSpec::File { .. } => {
                return Err(Error::invalid("amplitude sweep needs sine or eigenmode initial data"))
            }
        },
    }
    Ok(())
}

fn run_one(template: &RawConfig, axis: SweepAxis, value: f64, out_dir: Option<PathBuf>) -> SweepRow {
    let mut row = SweepRow {
        value,
        lambda1: None,
        f0: None,
        verdict: None,
        t_blow_or_decay_margin: None,
        status: "ok".into(),
    };
    let mut raw = template.clone();
    let cfg = match apply(&mut raw, axis, value).and_then(|_| validate(raw)) {
        Ok(c) => c,
        Err(e) => {
            row.status = e.to_string();
            return row;
        }
    };
    let opts = RunOptions {
        out_dir,
        ..RunOptions::default()
    };
    let report = run_experiment_with(&cfg, &opts).report;
    row.lambda1 = report.lambda1;
    row.f0 = report.f0;
    row.verdict = report.verdict;
    row.t_blow_or_decay_margin = match report.simulation.as_ref().map(|s| &s.outcome) {
        Some(Status::Blowup { t_blow, .. }) => Some(*t_blow),
        _ => report
            .certification
            .iter()
            .find(|c| c.check.starts_with("calE(t) <="))
            .map(|c| c.margin),
    };
    if report.status == RunStatus::Failed {
        row.status = format!(
            "failed at {}: {}",
            report.failed_stage.as_deref().unwrap_or("unknown"),
            report.error.as_deref().unwrap_or("")
        );
    }
    row
}

/// Runs one experiment per value, concurrently. Row order follows `values`;
/// a failing run is recorded in its row and does not stop the others. With
/// `out_dir`, run `i` writes its files under `out_dir/run_<i>`.
pub fn run_sweep(template: &RawConfig, axis: SweepAxis, values: &[f64], out_dir: Option<&Path>) -> SweepSummary {
    let rows = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| run_one(template, axis, v, out_dir.map(|d| d.join(format!("run_{i:03}")))))
        .collect();
    SweepSummary { axis, rows }
}
