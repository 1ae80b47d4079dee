//! Consolidated per-resonance report assembled from a run directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::artifacts::{num, read_json, RunDir, RunManifest, MANIFEST};
use super::CliError;
use crate::linalg::C64;

pub const REPORT_JSON: &str = "consolidated.json";
pub const REPORT_TEXT: &str = "consolidated.txt";

/// Stages whose artifacts feed the report, with the file each one provides.
const SOURCES: [(&str, &str); 4] = [
    ("oracle find", "oracle.json"),
    ("scaling eig", "scaling.json"),
    ("cap sweep", "report.json"),
    ("dtn count", "dtn.json"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceRow {
    /// Oracle resonance, or the scaled eigenvalue in cross-method runs.
    pub reference: C64,
    pub multiplicity: i64,
    pub oracle_z: Option<C64>,
    pub scaling_z: Option<C64>,
    pub extrapolated_z0: Option<C64>,
    /// `|z0 - reference|`.
    pub distance: Option<f64>,
    pub sweep_verified: Option<bool>,
    pub dtn_count: Option<i64>,
    pub projection_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsolidatedReport {
    pub config_digest: String,
    pub tool_version: String,
    pub complete: bool,
    pub missing_stages: Vec<String>,
    /// `Oracle` or `CrossMethod`.
    pub reference_mode: String,
    /// Exit code recorded by every stage that has run.
    pub stage_exit_codes: Vec<(String, i32)>,
    pub rows: Vec<ResonanceRow>,
}

fn c64(v: &Value) -> Option<C64> {
    serde_json::from_value(v.clone()).ok()
}

fn load(dir: &Path, manifest: &RunManifest, stage: &str, file: &str) -> Option<Value> {
    let rec = manifest.stages.get(stage)?;
    if !rec.artifacts.iter().any(|a| a.file == file) {
        return None;
    }
    read_json(&dir.join(file)).ok()
}

fn nearest(zs: impl Iterator<Item = C64>, target: C64) -> Option<C64> {
    zs.min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
}

/// Assembles the report for `run_dir` and writes [`REPORT_JSON`] and
/// [`REPORT_TEXT`] next to the stage artifacts.
pub fn report(run_dir: &Path) -> Result<(ConsolidatedReport, String, PathBuf), CliError> {
    if !run_dir.join(MANIFEST).is_file() {
        return Err(CliError::MissingArtifact {
            missing: vec![run_dir.join(MANIFEST).display().to_string()],
        });
    }
    let manifest: RunManifest = read_json(&run_dir.join(MANIFEST))?;
    let root = run_dir.parent().unwrap_or(Path::new("."));
    let dir = RunDir::open(root, &manifest.config_digest)?;
    if dir.path.canonicalize().ok() != run_dir.canonicalize().ok() {
        return Err(CliError::Io {
            path: run_dir.display().to_string(),
            message: format!("directory name does not match config digest {}", manifest.config_digest),
        });
    }

    let [oracle, scaling, sweep, dtn] = SOURCES.map(|(stage, file)| load(run_dir, &manifest, stage, file));
    if oracle.is_none() && scaling.is_none() {
        return Err(CliError::MissingArtifact {
            missing: vec!["oracle.json".into(), "scaling.json".into()],
        });
    }
    let cross_method = sweep
        .as_ref()
        .is_some_and(|s| s["verification"]["mode"] == "CrossMethod");
    let missing_stages: Vec<String> = SOURCES
        .iter()
        .zip([&oracle, &scaling, &sweep, &dtn])
        .filter(|((stage, _), v)| v.is_none() && !(cross_method && *stage == "oracle find"))
        .map(|((stage, _), _)| stage.to_string())
        .collect();

    let scaling_z: Vec<C64> = scaling
        .as_ref()
        .and_then(|s| s["window_eigenvalues"].as_array().cloned())
        .unwrap_or_default()
        .iter()
        .filter_map(c64)
        .collect();
    let mut refs: Vec<(C64, i64, bool)> = match &oracle {
        Some(o) => o["resonances"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|r| Some((c64(&r["z"])?, r["multiplicity"].as_i64().unwrap_or(1), true)))
            .collect(),
        None => scaling_z.iter().map(|z| (*z, 1, false)).collect(),
    };
    refs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));

    let rows = refs
        .iter()
        .map(|&(z, multiplicity, from_oracle)| {
            let mut row = ResonanceRow {
                reference: z,
                multiplicity,
                oracle_z: from_oracle.then_some(z),
                scaling_z: nearest(scaling_z.iter().copied(), z),
                extrapolated_z0: None,
                distance: None,
                sweep_verified: None,
                dtn_count: None,
                projection_rank: None,
            };
            if let Some(s) = &sweep {
                let disk = s["verification"]["disks"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .find(|d| c64(&d["reference"]["z"]).is_some_and(|r| (r - z).norm() < 1e-12));
                if let Some(d) = disk {
                    row.sweep_verified = d["passed"].as_bool();
                    let id = d["trajectory"].as_u64();
                    row.extrapolated_z0 = s["trajectories"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .find(|t| id.is_some() && t["id"].as_u64() == id)
                        .and_then(|t| c64(&t["extrapolation"]["limit"]));
                }
                row.distance = row.extrapolated_z0.map(|z0| (z0 - z).norm());
            }
            if let Some(d) = &dtn {
                let center = c64(&d["circle"]["center"]);
                let radius = d["circle"]["radius"].as_f64();
                if let (Some(c), Some(r)) = (center, radius) {
                    if (z - c).norm() < r {
                        row.dtn_count = d["winding"].as_i64();
                        row.projection_rank = d["projection_rank"].as_u64().map(|x| x as usize);
                    }
                }
            }
            row
        })
        .collect();

    let rep = ConsolidatedReport {
        config_digest: manifest.config_digest.clone(),
        tool_version: manifest.tool_version.clone(),
        complete: missing_stages.is_empty(),
        missing_stages,
        reference_mode: if oracle.is_some() { "Oracle" } else { "CrossMethod" }.into(),
        stage_exit_codes: manifest.stages.iter().map(|(k, v)| (k.clone(), v.exit_code)).collect(),
        rows,
    };
    let text = render(&rep);
    let json = serde_json::to_string_pretty(&rep).expect("report serializes");
    dir.write(REPORT_JSON, json.as_bytes())?;
    dir.write(REPORT_TEXT, text.as_bytes())?;
    Ok((rep, text, dir.path.clone()))
}

fn opt_z(z: Option<C64>) -> String {
    z.map_or("-".into(), |z| format!("{} {}", num(z.re), num(z.im)))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or("-".into(), |x| x.to_string())
}

/// Human-readable table; contains nothing that varies between reruns.
pub fn render(rep: &ConsolidatedReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "run {} (capres {})", rep.config_digest, rep.tool_version);
    let _ = writeln!(out, "references: {}", rep.reference_mode);
    if rep.complete {
        let _ = writeln!(out, "all stages present");
    } else {
        let _ = writeln!(out, "INCOMPLETE, missing: {}", rep.missing_stages.join(", "));
    }
    for (stage, code) in &rep.stage_exit_codes {
        let _ = writeln!(out, "  {stage:<16} exit {code}");
    }
    for (i, r) in rep.rows.iter().enumerate() {
        let _ = writeln!(out, "resonance {i} (multiplicity {})", r.multiplicity);
        let _ = writeln!(out, "  oracle z*        {}", opt_z(r.oracle_z));
        let _ = writeln!(out, "  scaling z        {}", opt_z(r.scaling_z));
        let _ = writeln!(out, "  extrapolated z0  {}", opt_z(r.extrapolated_z0));
        let _ = writeln!(out, "  |z0 - z*|        {}", r.distance.map_or("-".into(), num));
        let _ = writeln!(out, "  sweep verified   {}", opt(r.sweep_verified));
        let _ = writeln!(out, "  DtN count        {}", opt(r.dtn_count));
        let _ = writeln!(out, "  projection rank  {}", opt(r.projection_rank));
    }
    out
}
