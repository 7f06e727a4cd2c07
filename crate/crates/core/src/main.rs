use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use grushin_core::runner::{
    parse_config, run_eigen, run_experiment_with, run_sweep, ExperimentConfig, RunOptions, RunStatus, SweepAxis,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Pseudo-parabolic Baouendi-Grushin laboratory.
#[derive(Parser)]
#[command(name = "grushin-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// directory for reports, CSV records and plots
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// also write the assembled matrix in coordinate format
    #[arg(long, global = true)]
    dump_matrix: bool,

    /// only log errors
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the operator and compute the first Dirichlet eigenpair
    Eig { config: PathBuf },
    /// Run the simulation with diagnostics, no theorem verdict
    Simulate { config: PathBuf },
    /// Full pipeline: hypotheses, constants, simulation, certification, verdict
    Verify { config: PathBuf },
    /// One run per value of a parameter
    Sweep {
        config: PathBuf,
        /// gamma, alpha, beta, theta or amplitude
        #[arg(long)]
        axis: String,
        /// comma-separated values; an empty list gives a header-only summary
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Hypothesis and constraint checks on the initial data only
    CheckHypothesis { config: PathBuf },
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    parse_config(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

// a closed pipe on stdout is not an error worth a panic
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json<T: serde::Serialize>(v: &T) {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    emit(&s);
}

fn parse_values(text: &str) -> Result<Vec<f64>, std::num::ParseFloatError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match dispatch(&cli) {
        Ok(code) | Err(code) => code,
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, ExitCode> {
    let experiment = |config: &Path, skip_simulation: bool, force_free: bool| -> Result<ExitCode, ExitCode> {
        let cfg = load(config)?;
        let opts = RunOptions {
            skip_simulation,
            force_free,
            out_dir: cli.out.clone(),
            dump_matrix: cli.dump_matrix,
        };
        let report = run_experiment_with(&cfg, &opts).report;
        emit(&report.to_json());
        if let Some(v) = report.verdict {
            log::info!("verdict: {v:?} ({})", report.verdict_reason);
        }
        Ok(match report.status {
            RunStatus::Ok => ExitCode::SUCCESS,
            RunStatus::Failed => ExitCode::from(EXIT_RUNTIME),
        })
    };
    match &cli.command {
        Command::Eig { config } => {
            let cfg = load(config)?;
            let out = cli.out.as_deref().or(cfg.output.dir.as_deref());
            match run_eigen(&cfg, out, cli.dump_matrix || cfg.output.dump_matrix) {
                Ok(r) => {
                    print_json(&r);
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Err(ExitCode::from(EXIT_RUNTIME))
                }
            }
        }
        Command::Simulate { config } => experiment(config, false, true),
        Command::Verify { config } => experiment(config, false, false),
        Command::CheckHypothesis { config } => experiment(config, true, false),
        Command::Sweep { config, axis, values } => {
            let axis: SweepAxis = axis.parse().map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            })?;
            let values = parse_values(values).map_err(|e| {
                eprintln!("error: --values: {e}");
                ExitCode::from(EXIT_CONFIG)
            })?;
            let cfg = load(config)?;
            let out = cli.out.as_deref().or(cfg.output.dir.as_deref());
            let summary = run_sweep(&cfg.raw, axis, &values, out);
            if let Some(dir) = out {
                let path = dir.join("sweep.csv");
                if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, summary.to_csv())) {
                    eprintln!("error: {}: {e}", path.display());
                    return Err(ExitCode::from(EXIT_RUNTIME));
                }
            }
            print_json(&summary);
            Ok(ExitCode::SUCCESS)
        }
    }
}
