use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use capres::cli::config::{parse_config_with, read_config_text};
use capres::cli::report::report;
use capres::cli::{run, run_dir_path, CliError, Command, RunConfig, EXIT_OK, EXIT_USAGE, SAMPLES_FILE};

/// Scattering resonances of 1D model operators.
///
/// Every stage prints one JSON status line on stdout and a human-readable
/// table on stderr. Artifacts go to `<output>/<config digest>/`.
#[derive(Debug, Parser)]
#[command(name = "capres", version)]
struct Cli {
    /// Recompute even when the stage is cached.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    group: Group,
}

#[derive(Debug, Subcommand)]
enum Group {
    /// Scaling contour checks.
    Contour {
        #[command(subcommand)]
        action: ContourAction,
    },
    /// Model operator with known spectrum.
    Davies {
        #[command(subcommand)]
        action: DaviesAction,
    },
    /// Transfer-matrix resonances.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Eigenvalues of the complex-scaled operator.
    Scaling {
        #[command(subcommand)]
        action: ScalingAction,
    },
    /// Absorbing-potential sweeps.
    Cap {
        #[command(subcommand)]
        action: CapAction,
    },
    /// DtN winding counts.
    Dtn {
        #[command(subcommand)]
        action: DtnAction,
    },
    /// Consolidated report of a run directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum ContourAction {
    /// Checks the contour properties on a dense grid.
    Check {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum DaviesAction {
    /// Compares computed eigenvalues with the exact ones.
    Validate {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum OracleAction {
    /// Finds resonances in an energy window.
    Find {
        #[command(flatten)]
        cfg: ConfigArg,
        /// `re_min,re_max,im_min,im_max`
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum ScalingAction {
    /// Dense eigenvalues of the scaled operator.
    Eig {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum CapAction {
    /// Tracks eigenvalues as the absorption strength goes to zero.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArg,
    },
}

#[derive(Debug, Subcommand)]
enum DtnAction {
    /// Winding number of the DtN determinant around a circle.
    Count {
        #[command(flatten)]
        cfg: ConfigArg,
        /// `re,im`
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        /// Write the determinant samples, also to PATH when given.
        #[arg(long, value_name = "PATH", num_args = 0..=1)]
        emit_samples: Option<Option<PathBuf>>,
    },
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long, value_name = "DIR", conflicts_with = "config")]
    run_dir: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

/// Problem lines used when a stage that ignores the problem runs without a file.
fn standalone_problem(r1: f64) -> String {
    format!("problem.r0 = {}\nproblem.r1 = {r1}\n", 0.5 * r1)
}

fn load(config: &Option<PathBuf>, fallback: Option<String>, overrides: Vec<(&str, String)>) -> Result<RunConfig, CliError> {
    let text = match (config, fallback) {
        (Some(p), _) => read_config_text(p)?,
        (None, Some(t)) => t,
        (None, None) => return Err(CliError::Usage("--config is required".into())),
    };
    Ok(parse_config_with(&text, &overrides)?)
}

fn flag(key: &'static str, v: Option<impl ToString>) -> Option<(&'static str, String)> {
    v.map(|x| (key, x.to_string()))
}

fn execute(cli: Cli) -> Result<(Value, String, i32), CliError> {
    let (cmd, cfg, copy_samples) = match cli.group {
        Group::Report(a) => {
            let dir = match (a.run_dir, a.config) {
                (Some(d), _) => d,
                (None, Some(c)) => run_dir_path(&load(&Some(c), None, vec![])?),
                (None, None) => return Err(CliError::Usage("report needs --run-dir or --config".into())),
            };
            let (rep, text, path) = report(&dir)?;
            let status = serde_json::json!({
                "status": "ok", "stage": "report", "run_dir": path.display().to_string(),
                "complete": rep.complete, "missing_stages": rep.missing_stages, "exit_code": EXIT_OK,
            });
            return Ok((status, text, EXIT_OK));
        }
        Group::Contour {
            action: ContourAction::Check { cfg, theta, r1, alpha },
        } => {
            let fallback = Some(standalone_problem(r1.unwrap_or(3.0)));
            let o = [flag("contour.theta", theta), flag("problem.r1", r1), flag("contour.alpha0", alpha)];
            (Command::ContourCheck, load(&cfg.config, fallback, o.into_iter().flatten().collect())?, None)
        }
        Group::Davies {
            action: DaviesAction::Validate { cfg, epsilon, theta },
        } => {
            let o = [flag("davies.epsilon", epsilon), flag("davies.theta", theta)];
            let fallback = Some(standalone_problem(3.0));
            (Command::DaviesValidate, load(&cfg.config, fallback, o.into_iter().flatten().collect())?, None)
        }
        Group::Oracle {
            action: OracleAction::Find { cfg, window },
        } => {
            let o = flag("oracle.window", window).into_iter().collect();
            (Command::OracleFind, load(&cfg.config, None, o)?, None)
        }
        Group::Scaling {
            action: ScalingAction::Eig { cfg, theta, epsilon },
        } => {
            let o = [flag("contour.theta", theta), flag("scaling.epsilon", epsilon)];
            (Command::ScalingEig, load(&cfg.config, None, o.into_iter().flatten().collect())?, None)
        }
        Group::Cap {
            action: CapAction::Sweep { cfg },
        } => (Command::CapSweep, load(&cfg.config, None, vec![])?, None),
        Group::Dtn {
            action:
                DtnAction::Count {
                    cfg,
                    center,
                    radius,
                    epsilon,
                    theta,
                    emit_samples,
                },
        } => {
            let o = [
                flag("dtn.center", center),
                flag("dtn.radius", radius),
                flag("dtn.epsilon", epsilon),
                flag("contour.theta", theta),
            ];
            let cmd = Command::DtnCount {
                emit_samples: emit_samples.is_some(),
            };
            (cmd, load(&cfg.config, None, o.into_iter().flatten().collect())?, emit_samples.flatten())
        }
    };
    let outcome = run(cmd, &cfg, cli.force)?;
    if let Some(dest) = copy_samples {
        let src = outcome.run_dir.join(SAMPLES_FILE);
        std::fs::copy(&src, &dest).map_err(|e| CliError::io(Path::new(&dest), e))?;
    }
    Ok((outcome.to_json(), outcome.table, outcome.exit_code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            println!("{}", err.to_json());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match execute(cli) {
        Ok((status, table, code)) => {
            eprint!("{table}");
            println!("{status}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
