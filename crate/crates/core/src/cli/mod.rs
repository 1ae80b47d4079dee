//! Subcommand dispatch over content-addressed run directories.
//!
//! Every stage writes its artifacts under `<output root>/<config digest>/`
//! and records them in `manifest.json`. A rerun with the same configuration
//! reuses the recorded artifacts unless forced.

pub mod artifacts;
pub mod config;
pub mod report;

use std::fmt::Debug;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::contour::{build_contour, verify_contour, ScalingContour};
use crate::discretize::{assemble_davies, assemble_scaled_operator, Grid};
use crate::dtn::{self, Circle, ExteriorDiscretization, ExteriorDtn, Interface, Region};
use crate::eigen::{eig_dense, projection_rank};
use crate::linalg::C64;
use crate::oracle::{self, EnergyWindow, OracleError};
use crate::sweep::{self, Reference, ReferenceMode, SweepConfig};
use artifacts::{csv, num, now_unix, ArtifactRecord, RunDir, StageRecord};
pub use config::{parse_config, parse_config_str, ConfigError, Format, RunConfig};

/// Per-sample DtN determinant written by `dtn count --emit-samples`.
pub const SAMPLES_FILE: &str = "dtn_samples.csv";

/// Environment variable overriding `output.directory`.
pub const OUTPUT_ENV: &str = "CAPRES_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run directory is locked by another process ({path})")]
    Locked { path: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{stage}: {message}")]
    Compute {
        stage: String,
        kind: String,
        message: String,
    },
    #[error("missing artifacts: {}", missing.join(", "))]
    MissingArtifact { missing: Vec<String> },
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    fn compute<E: Debug + std::fmt::Display>(stage: &str, e: E) -> Self {
        Self::Compute {
            stage: stage.to_string(),
            kind: variant_name(&e),
            message: e.to_string(),
        }
    }

    pub fn kind(&self) -> String {
        match self {
            Self::Usage(_) => "Usage".into(),
            Self::Config(e) => e.kind().into(),
            Self::Locked { .. } => "Locked".into(),
            Self::Io { .. } => "Io".into(),
            Self::Compute { kind, .. } => kind.clone(),
            Self::MissingArtifact { .. } => "MissingArtifact".into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config(_) => EXIT_USAGE,
            _ => EXIT_COMPUTE,
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "status": "error",
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            Self::MissingArtifact { missing } => v["missing"] = json!(missing),
            Self::Compute { stage, .. } => v["stage"] = json!(stage),
            Self::Config(ConfigError::Parse { line, .. } | ConfigError::UnknownKey { line, .. }) => {
                v["line"] = json!(line)
            }
            Self::Config(ConfigError::Duplicate { first, line, .. }) => v["lines"] = json!([first, line]),
            _ => {}
        }
        v
    }
}

/// Name of an error variant, from its `Debug` form.
fn variant_name(e: &impl Debug) -> String {
    let d = format!("{e:?}");
    d.split(|c: char| !c.is_alphanumeric() && c != '_').next().unwrap_or("Error").to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ContourCheck,
    DaviesValidate,
    OracleFind,
    ScalingEig,
    CapSweep,
    DtnCount { emit_samples: bool },
}

impl Command {
    pub fn stage(&self) -> &'static str {
        match self {
            Self::ContourCheck => "contour check",
            Self::DaviesValidate => "davies validate",
            Self::OracleFind => "oracle find",
            Self::ScalingEig => "scaling eig",
            Self::CapSweep => "cap sweep",
            Self::DtnCount { .. } => "dtn count",
        }
    }

    fn options(&self) -> String {
        match self {
            Self::DtnCount { emit_samples: true } => "emit-samples".into(),
            _ => String::new(),
        }
    }
}

/// What a finished stage reports back.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub stage: String,
    pub run_dir: PathBuf,
    pub cached: bool,
    pub exit_code: i32,
    pub artifacts: Vec<String>,
    pub summary: Value,
    /// Human-readable summary table.
    pub table: String,
}

impl Outcome {
    pub fn to_json(&self) -> Value {
        json!({
            "status": if self.cached { "cached" } else { "ok" },
            "stage": self.stage,
            "run_dir": self.run_dir.display().to_string(),
            "exit_code": self.exit_code,
            "verified": self.exit_code == EXIT_OK,
            "summary": self.summary,
            "artifacts": self.artifacts,
        })
    }
}

/// `CAPRES_OUTPUT_DIR` when set, else `output.directory`.
pub fn output_root(cfg: &RunConfig) -> PathBuf {
    match std::env::var(OUTPUT_ENV) {
        Ok(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(&cfg.output.directory),
    }
}

pub fn run_dir_path(cfg: &RunConfig) -> PathBuf {
    output_root(cfg).join(&cfg.digest)
}

/// Artifacts produced by one stage before they are written.
struct Produced {
    files: Vec<(String, Vec<u8>)>,
    verified: bool,
    summary: Value,
    table: String,
}

impl Produced {
    fn new(verified: bool, table: String) -> Self {
        Self {
            files: Vec::new(),
            verified,
            summary: Value::Null,
            table,
        }
    }

    fn json(&mut self, cfg: &RunConfig, name: &str, v: &impl Serialize) {
        if cfg.wants(Format::Json) {
            let text = serde_json::to_string_pretty(v).expect("artifact serializes");
            self.files.push((name.into(), text.into_bytes()));
        }
    }

    fn csv(&mut self, cfg: &RunConfig, name: &str, header: &[&str], rows: &[Vec<String>]) {
        if cfg.wants(Format::Csv) {
            self.files.push((name.into(), csv(header, rows).into_bytes()));
        }
    }
}

/// Runs one stage, reusing cached artifacts unless `force`.
pub fn run(cmd: Command, cfg: &RunConfig, force: bool) -> Result<Outcome, CliError> {
    let stage = cmd.stage();
    let mut dir = RunDir::open(&output_root(cfg), &cfg.digest)?;
    if !force {
        if let Some(rec) = dir.cached(stage, &cmd.options()) {
            let table_file = dir.file(&table_name(stage));
            let table = std::fs::read_to_string(table_file).unwrap_or_default();
            return Ok(Outcome {
                stage: stage.into(),
                run_dir: dir.path.clone(),
                cached: true,
                exit_code: rec.exit_code,
                artifacts: rec.artifacts.iter().map(|a| a.file.clone()).collect(),
                summary: rec.summary.clone(),
                table,
            });
        }
    }
    let started = now_unix();
    let mut produced = match cmd {
        Command::ContourCheck => contour_check(cfg)?,
        Command::DaviesValidate => davies_validate(cfg)?,
        Command::OracleFind => oracle_find(cfg)?,
        Command::ScalingEig => scaling_eig(cfg)?,
        Command::CapSweep => cap_sweep(cfg)?,
        Command::DtnCount { emit_samples } => dtn_count(cfg, emit_samples)?,
    };
    produced.files.push((table_name(stage), produced.table.clone().into_bytes()));
    let records: Vec<ArtifactRecord> = produced
        .files
        .iter()
        .map(|(name, bytes)| dir.write(name, bytes))
        .collect::<Result<_, _>>()?;
    let exit_code = if produced.verified { EXIT_OK } else { EXIT_VERIFICATION };
    dir.record(
        stage,
        StageRecord {
            options: cmd.options(),
            started_unix: started,
            finished_unix: now_unix(),
            exit_code,
            summary: produced.summary.clone(),
            artifacts: records.clone(),
        },
    )?;
    Ok(Outcome {
        stage: stage.into(),
        run_dir: dir.path.clone(),
        cached: false,
        exit_code,
        artifacts: records.into_iter().map(|a| a.file).collect(),
        summary: produced.summary,
        table: produced.table,
    })
}

fn table_name(stage: &str) -> String {
    format!("{}.txt", stage.replace(' ', "_"))
}

fn contour(cfg: &RunConfig, stage: &str) -> Result<ScalingContour, CliError> {
    build_contour(cfg.contour.theta, cfg.problem.r1, cfg.contour.alpha0).map_err(|e| CliError::compute(stage, e))
}

fn require<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| ConfigError::MissingKey { key: key.into() }.into())
}

fn contour_check(cfg: &RunConfig) -> Result<Produced, CliError> {
    let stage = "contour check";
    let c = contour(cfg, stage)?;
    let rep = verify_contour(&c, cfg.contour.grid_points);
    let passed = rep.passed(cfg.contour.tolerance);
    let mut table = format!(
        "contour theta = {} alpha0 = {} R1 = {} T0 = {}\nproperty  max_violation            at_t\n",
        c.theta(),
        c.alpha0(),
        c.r1(),
        c.t0()
    );
    for p in &rep.properties {
        table.push_str(&format!("{:>8}  {:<22}  {}\n", p.property, num(p.max_violation), num(p.at_t)));
    }
    table.push_str(&format!("tolerance {:e}: {}\n", cfg.contour.tolerance, verdict(passed)));
    let rows: Vec<Vec<String>> = rep
        .properties
        .iter()
        .map(|p| vec![p.property.to_string(), num(p.max_violation), num(p.at_t)])
        .collect();
    let mut out = Produced::new(passed, table);
    out.summary = json!({"worst_violation": rep.worst(), "passed": passed});
    out.csv(cfg, "contour.csv", &["property", "max_violation", "at_t"], &rows);
    out.json(
        cfg,
        "contour.json",
        &json!({
            "theta": c.theta(), "alpha0": c.alpha0(), "r1": c.r1(), "t0": c.t0(),
            "tolerance": cfg.contour.tolerance, "report": rep, "passed": passed,
        }),
    );
    Ok(out)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Exact Davies eigenvalues `e^{-i pi/4} sqrt(eps) (2k + 1)`.
pub fn davies_exact(epsilon: f64, k: usize) -> C64 {
    C64::from_polar(epsilon.sqrt() * (2 * k + 1) as f64, -std::f64::consts::FRAC_PI_4)
}

fn davies_validate(cfg: &RunConfig) -> Result<Produced, CliError> {
    let stage = "davies validate";
    let d = &cfg.davies;
    let grid = Grid::new(-d.length, d.length, d.n_points).map_err(|e| CliError::compute(stage, e))?;
    let op = assemble_davies(d.epsilon, d.theta, &grid).map_err(|e| CliError::compute(stage, e))?;
    let eig = eig_dense(&op.entries).map_err(|e| CliError::compute(stage, e))?;
    let mut zs = eig.eigenvalues.clone();
    zs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut table = format!(
        "davies eps = {} theta = {} L = {} n = {}\n k  exact                    computed                 rel_error\n",
        d.epsilon, d.theta, d.length, d.n_points
    );
    for (k, z) in zs.iter().take(d.count).enumerate() {
        let exact = davies_exact(d.epsilon, k);
        let rel = (z - exact).norm() / exact.norm();
        worst = worst.max(rel);
        table.push_str(&format!("{k:>2}  {exact:<23.15}  {z:<23.15}  {rel:.3e}\n"));
        rows.push(vec![
            k.to_string(),
            num(exact.re),
            num(exact.im),
            num(z.re),
            num(z.im),
            num(rel),
        ]);
    }
    let passed = rows.len() == d.count && worst < d.tolerance;
    table.push_str(&format!("max relative error {worst:.3e}, tolerance {:e}: {}\n", d.tolerance, verdict(passed)));
    let mut out = Produced::new(passed, table);
    out.summary = json!({"max_rel_error": worst, "passed": passed});
    out.csv(cfg, "davies.csv", &["k", "re_exact", "im_exact", "re_z", "im_z", "rel_error"], &rows);
    out.json(
        cfg,
        "davies.json",
        &json!({
            "epsilon": d.epsilon, "theta": d.theta, "length": d.length, "n_points": d.n_points,
            "eigenvalues": zs.iter().take(d.count).collect::<Vec<_>>(),
            "max_rel_error": worst, "tolerance": d.tolerance, "residual_bound": eig.residual_bound,
            "passed": passed,
        }),
    );
    Ok(out)
}

fn sort_lex(zs: &mut [C64]) {
    zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn oracle_find(cfg: &RunConfig) -> Result<Produced, CliError> {
    let stage = "oracle find";
    let window = require(cfg.oracle_window(), "oracle.window")?;
    let mut found = oracle::find_resonances(&cfg.problem, &window).map_err(|e| CliError::compute(stage, e))?;
    found.sort_by(|a, b| {
        let (za, zb) = (a.energy(), b.energy());
        za.re.total_cmp(&zb.re).then(za.im.total_cmp(&zb.im))
    });
    let mut table = format!(
        "oracle window Re z in [{}, {}], Im z in [{}, {}]\n #  z                                         multiplicity  residual\n",
        window.re_min, window.re_max, window.im_min, window.im_max
    );
    let mut rows = Vec::new();
    for (i, r) in found.iter().enumerate() {
        let z = r.energy();
        table.push_str(&format!("{i:>2}  {z:<40.15}  {:>12}  {:.1e}\n", r.multiplicity, r.residual));
        rows.push(vec![
            num(r.k.re),
            num(r.k.im),
            num(z.re),
            num(z.im),
            r.multiplicity.to_string(),
            num(r.residual),
        ]);
    }
    let mut out = Produced::new(true, table);
    out.summary = json!({"resonances": found.iter().map(|r| r.energy()).collect::<Vec<_>>()});
    out.csv(
        cfg,
        "oracle.csv",
        &["re_k", "im_k", "re_z", "im_z", "multiplicity", "residual"],
        &rows,
    );
    let list: Vec<Value> = found
        .iter()
        .map(|r| json!({"k": r.k, "z": r.energy(), "multiplicity": r.multiplicity, "residual": r.residual}))
        .collect();
    out.json(cfg, "oracle.json", &json!({"window": window, "resonances": list}));
    Ok(out)
}

/// Eigenvalues of the scaled operator at `contour.theta` and `scaling.epsilon`.
pub fn scaled_spectrum(cfg: &RunConfig, stage: &str) -> Result<(Vec<C64>, f64, usize), CliError> {
    let c = contour(cfg, stage)?;
    let grid = cfg.discretization.grid();
    let op = assemble_scaled_operator(&cfg.problem, &c, cfg.scaling_epsilon, &cfg.discretization.cutoff, &grid)
        .map_err(|e| CliError::compute(stage, e))?;
    let eig = eig_dense(&op.entries).map_err(|e| CliError::compute(stage, e))?;
    let mut zs = eig.eigenvalues;
    sort_lex(&mut zs);
    Ok((zs, eig.residual_bound, op.dim()))
}

fn scaling_eig(cfg: &RunConfig) -> Result<Produced, CliError> {
    let stage = "scaling eig";
    let window = require(cfg.sweep.window, "sweep.window")?;
    let (zs, residual, dim) = scaled_spectrum(cfg, stage)?;
    let inside: Vec<C64> = zs.iter().copied().filter(|z| window.contains(*z)).collect();
    let rows: Vec<Vec<String>> = zs
        .iter()
        .enumerate()
        .map(|(i, z)| vec![i.to_string(), num(z.re), num(z.im), (window.contains(*z) as u8).to_string()])
        .collect();
    let mut table = format!(
        "scaled operator theta = {} eps = {} dim = {dim} backward error {residual:.1e}\n{} eigenvalues in the window\n",
        cfg.contour.theta,
        cfg.scaling_epsilon,
        inside.len()
    );
    for z in &inside {
        table.push_str(&format!("  {z:.15}\n"));
    }
    let mut out = Produced::new(true, table);
    out.summary = json!({"window_eigenvalues": inside});
    out.csv(cfg, "scaling.csv", &["index", "re_z", "im_z", "in_window"], &rows);
    out.json(
        cfg,
        "scaling.json",
        &json!({
            "theta": cfg.contour.theta, "alpha0": cfg.contour.alpha0, "epsilon": cfg.scaling_epsilon,
            "dim": dim, "residual_bound": residual, "window": window, "window_eigenvalues": inside,
        }),
    );
    Ok(out)
}

/// Oracle resonances in the window, or scaled eigenvalues when the problem
/// has no oracle.
pub fn references(cfg: &RunConfig, window: &EnergyWindow, stage: &str) -> Result<(Vec<Reference>, ReferenceMode), CliError> {
    // Resonances lie in the closed lower half-plane.
    let lower = EnergyWindow {
        im_max: window.im_max.min(0.0),
        ..*window
    };
    match oracle::find_resonances(&cfg.problem, &lower) {
        Ok(found) => {
            let mut refs: Vec<Reference> = found
                .iter()
                .map(|r| Reference {
                    z: r.energy(),
                    multiplicity: r.multiplicity,
                })
                .collect();
            refs.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
            Ok((refs, ReferenceMode::Oracle))
        }
        Err(OracleError::Unsupported(_)) => {
            let (zs, _, _) = scaled_spectrum(cfg, stage)?;
            let refs = zs
                .into_iter()
                .filter(|z| window.contains(*z))
                .map(|z| Reference { z, multiplicity: 1 })
                .collect();
            Ok((refs, ReferenceMode::CrossMethod))
        }
        Err(e) => Err(CliError::compute(stage, e)),
    }
}

fn cap_sweep(cfg: &RunConfig) -> Result<Produced, CliError> {
    let stage = "cap sweep";
    let window = require(cfg.sweep.window, "sweep.window")?;
    let (refs, mode) = references(cfg, &window, stage)?;
    let ref_z: Vec<C64> = refs.iter().map(|r| r.z).collect();
    let delta = cfg.sweep.delta.unwrap_or_else(|| SweepConfig::default_delta(&ref_z));
    let sc = SweepConfig {
        window,
        epsilon_schedule: cfg.sweep.epsilon_schedule.clone(),
        delta,
        matching_radius: cfg.sweep.matching_radius,
        theta: cfg.sweep.theta,
        alpha0: cfg.contour.alpha0,
        grow_domain: cfg.sweep.grow_domain,
    };
    let result = sweep::cap_sweep(&cfg.problem, &sc, &cfg.discretization.grid(), &cfg.discretization.cutoff)
        .map_err(|e| CliError::compute(stage, e))?;
    let report = sweep::verify_convergence(&result.trajectories, &refs, mode, delta, &window);

    let mut traj_rows = Vec::new();
    let mut limit_rows = Vec::new();
    for t in &result.trajectories {
        for p in &t.points {
            traj_rows.push(vec![
                t.id.to_string(),
                num(p.epsilon),
                num(p.z.re),
                num(p.z.im),
                format!("{:?}", t.status),
            ]);
        }
        if let Some(x) = &t.extrapolation {
            limit_rows.push(vec![
                t.id.to_string(),
                num(x.limit.re),
                num(x.limit.im),
                num(x.exponent),
                num(x.fit_residual),
            ]);
        }
    }
    let mut table = format!(
        "cap sweep theta = {} over {} epsilons, delta = {delta}, mode {mode:?}\n",
        sc.theta,
        sc.epsilon_schedule.len()
    );
    for t in &result.trajectories {
        let last = t.last();
        table.push_str(&format!(
            "trajectory {:>3} {:<10} points {:>2} last {:.12}",
            t.id,
            format!("{:?}", t.status),
            t.points.len(),
            last.z
        ));
        if let Some(x) = &t.extrapolation {
            table.push_str(&format!(" limit {:.12} p {:.3}", x.limit, x.exponent));
        }
        table.push('\n');
    }
    for d in &report.disks {
        table.push_str(&format!(
            "reference {:.12}: count {} monotone {} {}\n",
            d.reference.z,
            d.count,
            d.monotone,
            verdict(d.passed)
        ));
    }
    table.push_str(&format!("verification: {}\n", verdict(report.passed)));

    let lengths: Vec<Value> = result
        .spectra
        .iter()
        .map(|s| json!({"epsilon": s.epsilon, "length": s.length, "dim": s.dim, "residual": s.residual}))
        .collect();
    let mut out = Produced::new(report.passed, table);
    out.summary = json!({
        "passed": report.passed,
        "limits": result.trajectories.iter().filter_map(|t| t.extrapolation.map(|x| x.limit)).collect::<Vec<_>>(),
    });
    out.csv(cfg, "trajectories.csv", &["trajectory_id", "epsilon", "re_z", "im_z", "status"], &traj_rows);
    out.csv(cfg, "limits.csv", &["trajectory_id", "re_z0", "im_z0", "p", "fit_residual"], &limit_rows);
    out.json(
        cfg,
        "report.json",
        &json!({
            "sweep": sc, "references": refs, "verification": report,
            "levels": lengths, "trajectories": result.trajectories,
        }),
    );
    Ok(out)
}

fn dtn_count(cfg: &RunConfig, emit_samples: bool) -> Result<Produced, CliError> {
    let stage = "dtn count";
    let center = require(cfg.dtn.center, "dtn.center")?;
    let circle = Circle::new(center, cfg.dtn.radius);
    let c = contour(cfg, stage)?;
    let disc = ExteriorDiscretization {
        length: cfg.discretization.length,
        spacing: cfg.discretization.spacing(),
        cutoff: cfg.discretization.cutoff,
    };
    let eps = cfg.dtn.epsilon;
    let err = |e: dtn::DtnError| CliError::Compute {
        stage: stage.into(),
        kind: e.kind().into(),
        message: e.to_string(),
    };
    // One candidate is taken as given; several are ranked by spectral margin.
    let (interface, choice) = match cfg.dtn.candidates[..] {
        [a] => (Interface::new(&cfg.problem, a).map_err(err)?, None),
        _ => {
            let ch = dtn::choose_interface(&cfg.problem, &c, eps, &Region::Disk(circle), &cfg.dtn.candidates, &disc)
                .map_err(err)?;
            (ch.interface, Some(ch))
        }
    };
    let exterior = ExteriorDtn::new(&cfg.problem, &c, eps, &interface, &disc).map_err(err)?;
    let mut samples = Vec::new();
    let count = dtn::count_with(&exterior, &cfg.problem, &interface, &circle, cfg.dtn.samples, |s| {
        if emit_samples {
            samples.push(*s)
        }
    })
    .map_err(err)?;
    let grid = cfg.discretization.grid();
    let op = assemble_scaled_operator(&cfg.problem, &c, eps, &cfg.discretization.cutoff, &grid)
        .map_err(|e| CliError::compute(stage, e))?;
    let proj = projection_rank(&op.entries, center, cfg.dtn.radius, cfg.quadrature_points)
        .map_err(|e| CliError::compute(stage, e))?;
    let agree = count.winding == proj.rank as i64;
    let mut table = format!(
        "dtn count on |z - {center}| = {} at interface a = {}\n",
        cfg.dtn.radius, interface.a
    );
    if let Some(ch) = &choice {
        table.push_str(&format!(
            "margins interior {:.3e} exterior {:.3e}, error estimate {:.1e}\n",
            ch.margins.interior, ch.margins.exterior, ch.error_estimate
        ));
    }
    table.push_str(&format!(
        "winding {} ({} samples, min |N| {:.3e})\nprojection rank {} (trace {:.6})\ncounts agree: {}\n",
        count.winding,
        count.samples,
        count.min_modulus,
        proj.rank,
        proj.trace_value,
        verdict(agree)
    ));
    let mut out = Produced::new(agree, table);
    out.summary = json!({
        "circle": circle, "interface": interface.a, "winding": count.winding, "samples": count.samples,
        "min_modulus": count.min_modulus, "projection_rank": proj.rank,
    });
    out.json(
        cfg,
        "dtn.json",
        &json!({
            "circle": circle, "epsilon": eps, "interface": interface, "choice": choice,
            "winding": count.winding, "samples": count.samples, "min_modulus": count.min_modulus,
            "projection_rank": proj.rank, "trace": proj.trace_value,
            "idempotency_defect": proj.idempotency_defect, "agree": agree,
        }),
    );
    if emit_samples {
        // Samples arrive in evaluation order; list them along the circle.
        samples.sort_by(|a, b| {
            let pa = (a.z - center).arg().rem_euclid(std::f64::consts::TAU);
            let pb = (b.z - center).arg().rem_euclid(std::f64::consts::TAU);
            pa.total_cmp(&pb)
        });
        // Phase of N along the circle, unwrapped from the first sample.
        let mut phase = 0.0;
        let mut prev: Option<C64> = None;
        let rows: Vec<Vec<String>> = samples
            .iter()
            .map(|s| {
                phase = match prev {
                    None => s.n_total.arg(),
                    Some(p) => phase + (s.n_total / p).arg(),
                };
                prev = Some(s.n_total);
                vec![num(s.z.re), num(s.z.im), num(s.n_total.re), num(s.n_total.im), num(phase)]
            })
            .collect();
        out.files.push((
            SAMPLES_FILE.into(),
            csv(&["re_z", "im_z", "re_N", "im_N", "phase"], &rows).into_bytes(),
        ));
    }
    Ok(out)
}
