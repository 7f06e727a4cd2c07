//! Experiment orchestration: config to operator, eigenpair, hypothesis
//! checks, simulation, certification and a theorem verdict.

mod config;
mod report;
mod sweep;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{
    parse_config, parse_config_str, validate, ExperimentConfig, HypothesisSpec, InitialSpec, Mode, NonlinearitySpec,
    OutputSpec, RawConfig, SolverSpec, SpaceSpec,
};
pub use report::{
    compute_blowup_constants, decide_verdict, BlowupConstants, InitialSummary, JointSatisfiability, RunStatus,
    SimulationSummary, TheoremReport, Verdict, BLOWUP_TIME_SLACK, DECAY_TOL, NOT_APPLICABLE,
};
pub use sweep::{run_sweep, SweepAxis, SweepRow, SweepSummary, SWEEP_CSV_HEADER};

use crate::diagnostics::{
    certify_concavity, certify_decay, certify_monotonicity, compute_F_functional, emit_svg_plot, write_csv,
    EnergyRecord, EnergyTracker, CERTIFY_REL_TOL, UNDER_RESOLVED_TAIL,
};
use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::integrator::{build_initial_condition, run, sup_norm, InitialCondition, Status};
use crate::linalg::{smallest_eigenpair_with, EigenResult};
use crate::nonlinearity::{
    blowup_constraints, check_blowup_hypothesis, check_global_hypothesis, check_positivity, global_constraints,
};
use crate::operator::{assemble_grushin, grushin_energy, l2_norm_sq, SparseMatrix};

/// What to do beyond the pre-run checks.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// stop after the hypothesis stage
    pub skip_simulation: bool,
    /// force `Mode::Free` regardless of the config
    pub force_free: bool,
    /// overrides the config's output directory
    pub out_dir: Option<PathBuf>,
    pub dump_matrix: bool,
}

/// A finished run: the report plus the recorded trajectory diagnostics.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub report: TheoremReport,
    pub records: Vec<EnergyRecord>,
}

/// Operator, grid and eigenpair for a configuration.
pub struct Discretization {
    pub grid: Grid,
    pub matrix: SparseMatrix,
    pub eigen: EigenResult,
}

pub fn discretize(cfg: &ExperimentConfig) -> Result<Discretization> {
    let grid = Grid::new(&cfg.domain, &cfg.cells)?;
    let matrix = assemble_grushin(&grid, &cfg.space)?;
    let eigen = eigenpair(cfg, &grid, &matrix)?;
    Ok(Discretization { grid, matrix, eigen })
}

fn eigenpair(cfg: &ExperimentConfig, grid: &Grid, a: &SparseMatrix) -> Result<EigenResult> {
    let max_iter = cfg.solver.eig_max_iter.unwrap_or(10 * grid.len()).max(1);
    smallest_eigenpair_with(a, grid.cell_volume(), cfg.solver.eig_tol, max_iter, cfg.solver.cg_tol)
}

/// Output of the `eig` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct EigenReport {
    pub lambda1: f64,
    pub residual: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub unknowns: usize,
    pub nonzeros: usize,
    pub spacing: Vec<f64>,
    pub homogeneous_dimension: f64,
    pub warnings: Vec<String>,
}

/// Assembles the operator and computes the smallest eigenpair; optionally
/// writes `matrix.txt` and `phi1.txt` under `out_dir`.
pub fn run_eigen(cfg: &ExperimentConfig, out_dir: Option<&Path>, dump_matrix: bool) -> Result<EigenReport> {
    let d = discretize(cfg)?;
    let report = EigenReport {
        lambda1: d.eigen.lambda1,
        residual: d.eigen.residual,
        iterations: d.eigen.iterations,
        inner_iterations: d.eigen.inner_iterations,
        unknowns: d.grid.len(),
        nonzeros: d.matrix.nnz(),
        spacing: d.grid.spacing().to_vec(),
        homogeneous_dimension: cfg.space.homogeneous_dimension(),
        warnings: cfg.domain.connectivity_warning(&cfg.space).into_iter().collect(),
    };
    if let Some(dir) = out_dir {
        create_dir(dir)?;
        if dump_matrix {
            d.matrix.dump(&dir.join("matrix.txt"))?;
        }
        let phi: String = d.eigen.phi1.iter().map(|v| format!("{v:.16e}\n")).collect();
        write_file(&dir.join("phi1.txt"), &phi)?;
        let mut json = serde_json::to_string_pretty(&report).expect("eigen report serializes");
        json.push('\n');
        write_file(&dir.join("eig.json"), &json)?;
    }
    Ok(report)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs the full pipeline with default options.
pub fn run_experiment(cfg: &ExperimentConfig) -> TheoremReport {
    run_experiment_with(cfg, &RunOptions::default()).report
}

/// Runs the pipeline. Stage failures end up in the report, never as `Err`.
pub fn run_experiment_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Experiment {
    let mode = if opts.force_free { Mode::Free } else { cfg.mode };
    let mut report = TheoremReport {
        status: RunStatus::Ok,
        failed_stage: None,
        error: None,
        mode,
        config: cfg.raw.clone(),
        nonlinearity: cfg.nonlinearity.describe(),
        homogeneous_dimension: cfg.space.homogeneous_dimension(),
        unknowns: cfg.cells.iter().map(|c| c - 1).product(),
        lambda1: None,
        eigen_residual: None,
        alpha: cfg.alpha,
        beta: cfg.beta,
        beta_requested: cfg.beta,
        theta: cfg.theta,
        initial: None,
        f0: None,
        positivity: None,
        hypothesis: None,
        constraint_check: Vec::new(),
        sigma: None,
        m: None,
        tstar_bound: None,
        decay_rate: None,
        simulation: None,
        hypothesis_recheck: None,
        certification: Vec::new(),
        certification_errors: Vec::new(),
        joint_satisfiability: None,
        warnings: Vec::new(),
        verdict: None,
        verdict_reason: String::new(),
    };
    report.config.mode = mode;
    let mut records = Vec::new();
    if let Err((stage, e)) = pipeline(cfg, opts, &mut report, &mut records) {
        log::error!("stage {stage} failed: {e}");
        report.status = RunStatus::Failed;
        report.failed_stage = Some(stage.to_string());
        report.error = Some(e.to_string());
    }
    let (verdict, reason) = decide_verdict(&report);
    report.verdict = verdict;
    report.verdict_reason = reason;
    if verdict == Some(Verdict::InconsistencyFlag) {
        log::warn!("INCONSISTENCY FLAG: {}", report.verdict_reason);
    }
    if let Err(e) = write_outputs(cfg, opts, &report, &records) {
        log::error!("writing outputs failed: {e}");
        report.status = RunStatus::Failed;
        report.failed_stage = Some("output".into());
        report.error = Some(e.to_string());
    }
    Experiment { report, records }
}

type StageResult<T> = std::result::Result<T, (&'static str, Error)>;

fn stage<T>(name: &'static str, r: Result<T>) -> StageResult<T> {
    log::debug!("stage {name}");
    r.map_err(|e| (name, e))
}

fn pipeline(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    report: &mut TheoremReport,
    records: &mut Vec<EnergyRecord>,
) -> StageResult<()> {
    let mode = report.mode;
    let samples = cfg.hypothesis.samples;
    if let Some(w) = cfg.domain.connectivity_warning(&cfg.space) {
        log::warn!("{w}");
        report.warnings.push(w);
    }

    let grid = stage("assemble", Grid::new(&cfg.domain, &cfg.cells))?;
    let a = stage("assemble", assemble_grushin(&grid, &cfg.space))?;
    let eigen = stage("eigen", eigenpair(cfg, &grid, &a))?;
    let lambda1 = eigen.lambda1;
    report.lambda1 = Some(lambda1);
    report.eigen_residual = Some(eigen.residual);

    let mut beta = cfg.beta;
    if cfg.clamp_beta {
        if mode == Mode::Blowup {
            beta = beta.min(lambda1 * (cfg.alpha - 2.0) / 2.0);
        } else {
            report.warnings.push("clamp_beta only applies in blowup mode; ignored".into());
        }
    }
    report.beta = beta;

    let u0 = match &cfg.initial {
        InitialCondition::Eigenmode { .. } => stage("initial", build_initial_condition(&grid, &cfg.initial, Some(&eigen))),
        spec => stage("initial", build_initial_condition(&grid, spec, None)),
    }?;
    let sup0 = sup_norm(&u0);
    let l2 = stage("functionals", l2_norm_sq(&grid, &u0))?;
    let grad = stage("functionals", grushin_energy(&grid, &cfg.space, &u0))?;
    let i0 = l2 + grad;
    report.initial = Some(InitialSummary {
        sup_norm: sup0,
        l2,
        grad,
        i0,
    });
    let f0 = stage(
        "functionals",
        compute_F_functional(&grid, &cfg.space, &cfg.nonlinearity, cfg.theta, &u0),
    )?;
    report.f0 = Some(f0);

    let u_max = cfg.hypothesis.range_factor * sup0;
    let positivity = stage("hypothesis", check_positivity(&cfg.nonlinearity, u_max, samples))?;
    if !positivity.holds {
        let w = format!(
            "f(u) > 0 fails on (0, {u_max}]: f({}) = {}",
            positivity.argmin_u, positivity.min_value
        );
        log::warn!("{w}");
        report.warnings.push(w);
    }
    report.positivity = Some(positivity);
    let nl = &cfg.nonlinearity;
    let (alpha, theta) = (cfg.alpha, cfg.theta);
    match mode {
        Mode::Blowup => {
            report.hypothesis = Some(stage(
                "hypothesis",
                check_blowup_hypothesis(nl, alpha, beta, theta, u_max, samples),
            )?);
            report.constraint_check = blowup_constraints(alpha, beta, theta, lambda1);
        }
        Mode::Global => {
            report.hypothesis = Some(stage(
                "hypothesis",
                check_global_hypothesis(nl, alpha, beta, theta, u_max, samples),
            )?);
            report.constraint_check = global_constraints(alpha, beta, theta);
            report.decay_rate = Some(2.0 - alpha);
            let on_u0 = stage("hypothesis", check_global_hypothesis(nl, alpha, beta, theta, sup0, samples))?;
            let jointly = on_u0.holds && f0 > 0.0;
            let note = if jointly {
                "hypothesis on the range of u0 and F0 > 0 hold together".to_string()
            } else if on_u0.holds {
                format!("hypothesis holds on [0, {sup0}] but F0 = {f0} <= 0: jointly unsatisfiable here")
            } else {
                format!(
                    "hypothesis fails on [0, {sup0}] (margin {} at u = {}); F0 = {f0}",
                    on_u0.worst_margin, on_u0.argmin_u
                )
            };
            report.joint_satisfiability = Some(JointSatisfiability {
                hypothesis_on_u0_range: on_u0.holds,
                worst_margin_on_u0_range: on_u0.worst_margin,
                f0_positive: f0 > 0.0,
                jointly_satisfied: jointly,
                note,
            });
        }
        Mode::Free => {}
    }

    let mut m_const = 0.0;
    if mode == Mode::Blowup && report.hypotheses_hold() {
        let c = stage("constants", compute_blowup_constants(alpha, f0, i0))?;
        report.sigma = Some(c.sigma);
        report.m = Some(c.m);
        report.tstar_bound = Some(c.tstar_bound);
        m_const = c.m;
    }
    if opts.skip_simulation {
        return Ok(());
    }

    let mut tracker = EnergyTracker::new(&grid, &cfg.space, nl, theta, m_const);
    let end = stage("simulate", run(u0, &a, nl, &cfg.sim, |s| tracker.observe(s)))?;
    *records = tracker.into_records();
    let max_supnorm = records.iter().map(|r| r.supnorm).fold(sup0, f64::max);
    let t_blow = match end.status {
        Status::Blowup { t_blow, .. } => Some(t_blow),
        _ => None,
    };
    let ratio = match (records.first(), records.last()) {
        (Some(a), Some(b)) if a.cal_e > 0.0 => Some(b.cal_e / a.cal_e),
        _ => None,
    };
    report.simulation = Some(SimulationSummary {
        outcome: end.status.clone(),
        t_final: end.t,
        steps: end.steps,
        rejected: end.rejected,
        records: records.len(),
        max_supnorm,
        t_blow,
        final_energy_ratio: ratio,
    });

    if max_supnorm > u_max && mode != Mode::Free {
        let recheck = match mode {
            Mode::Blowup => check_blowup_hypothesis(nl, alpha, beta, theta, max_supnorm, samples),
            _ => check_global_hypothesis(nl, alpha, beta, theta, max_supnorm, samples),
        };
        report.hypothesis_recheck = Some(stage("recheck", recheck)?);
        let pos = stage("recheck", check_positivity(nl, max_supnorm, samples))?;
        if !pos.holds {
            report
                .warnings
                .push(format!("f(u) > 0 fails on the trajectory range (0, {max_supnorm}]"));
        }
        report.positivity = Some(pos);
    } else if mode != Mode::Free {
        // the pre-run range already covers the trajectory
        report.hypothesis_recheck = report.hypothesis.clone();
    }

    let tail = if t_blow.is_some() { UNDER_RESOLVED_TAIL } else { 0 };
    let mut checks = vec![certify_monotonicity(records, tail, CERTIFY_REL_TOL)];
    if let Some(sigma) = report.sigma {
        checks.push(certify_concavity(records, sigma, m_const, tail, CERTIFY_REL_TOL));
    }
    if let Some(rate) = report.decay_rate {
        checks.push(certify_decay(records, rate, DECAY_TOL));
    }
    for c in checks {
        match c {
            Ok(c) => report.certification.push(c),
            Err(e) => {
                report.warnings.push(format!("certification not evaluated: {e}"));
                report.certification_errors.push(e.to_string());
            }
        }
    }
    Ok(())
}

fn write_outputs(cfg: &ExperimentConfig, opts: &RunOptions, report: &TheoremReport, records: &[EnergyRecord]) -> Result<()> {
    let Some(dir) = opts.out_dir.as_ref().or(cfg.output.dir.as_ref()) else {
        return Ok(());
    };
    create_dir(dir)?;
    write_file(&dir.join("report.json"), &report.to_json())?;
    if !records.is_empty() {
        write_csv(records, &dir.join("records.csv"))?;
        emit_svg_plot(records, &["calE", "l2", "grad"], &dir.join("energy.svg"))?;
        emit_svg_plot(records, &["calF"], &dir.join("functional.svg"))?;
        emit_svg_plot(records, &["supnorm"], &dir.join("supnorm.svg"))?;
    }
    if opts.dump_matrix || cfg.output.dump_matrix {
        let grid = Grid::new(&cfg.domain, &cfg.cells)?;
        assemble_grushin(&grid, &cfg.space)?.dump(&dir.join("matrix.txt"))?;
    }
    Ok(())
}
