//! End-to-end runs of the `capres` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const BARRIER: &str = "problem.potential = piecewise
problem.segments = 1, 2, 10
problem.r0 = 2
problem.r1 = 3
contour.alpha0 = 0.4
discretization.length = 40
discretization.n_points = 401
discretization.r_inner = 2.2
discretization.r_outer = 2.8
oracle.window = 3, 8, -0.15, 0
sweep.window = 3, 8, -0.15, 0.05
sweep.epsilon_start = 0.1
sweep.epsilon_end = 1e-3
sweep.epsilon_steps = 5
dtn.center = 5.378137567450531, -0.043149661054699945
dtn.radius = 0.05
dtn.candidates = 2.8
";

struct Run {
    code: i32,
    json: Value,
    stderr: String,
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn capres(out: &Path, args: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_capres"))
        .args(args)
        .env("CAPRES_OUTPUT_DIR", out)
        .output()
        .unwrap();
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1, "stdout must be one JSON line: {stdout}");
    Run {
        code: o.status.code().unwrap(),
        json: serde_json::from_str(&stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

#[test]
fn stages_cache_and_report() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "barrier.conf", BARRIER);
    let cfg = cfg.to_str().unwrap();
    let out = tmp.path().join("runs");

    let r = capres(&out, &["oracle", "find", "--config", cfg]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json["status"], "ok");
    let run_dir = PathBuf::from(r.json["run_dir"].as_str().unwrap());
    assert!(run_dir.starts_with(&out));
    let csv = std::fs::read_to_string(run_dir.join("oracle.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "re_k,im_k,re_z,im_z,multiplicity,residual");
    assert_eq!(csv.lines().count(), 2);

    // Only the oracle has run: the report is partial.
    let rep = capres(&out, &["report", "--run-dir", run_dir.to_str().unwrap()]);
    assert_eq!(rep.code, 0, "{}", rep.stderr);
    assert_eq!(rep.json["complete"], false);
    assert_eq!(rep.json["missing_stages"].as_array().unwrap().len(), 3);

    // A rerun is served from the manifest without touching the artifacts.
    let before = std::fs::metadata(run_dir.join("oracle.csv")).unwrap().modified().unwrap();
    let again = capres(&out, &["oracle", "find", "--config", cfg]);
    assert_eq!((again.code, again.json["status"].as_str()), (0, Some("cached")));
    assert_eq!(again.json["summary"], r.json["summary"]);
    let after = std::fs::metadata(run_dir.join("oracle.csv")).unwrap().modified().unwrap();
    assert_eq!(before, after);
    let forced = capres(&out, &["oracle", "find", "--config", cfg, "--force"]);
    assert_eq!(forced.json["status"], "ok");

    for stage in [&["scaling", "eig"][..], &["cap", "sweep"], &["dtn", "count", "--emit-samples"]] {
        let mut args = stage.to_vec();
        args.extend(["--config", cfg]);
        let r = capres(&out, &args);
        assert!(r.code == 0 || r.code == 3, "{stage:?}: {}", r.stderr);
    }
    let dtn: Value = serde_json::from_str(&std::fs::read_to_string(run_dir.join("dtn.json")).unwrap()).unwrap();
    assert_eq!((dtn["winding"].as_i64(), dtn["projection_rank"].as_u64()), (Some(1), Some(1)));
    let samples = std::fs::read_to_string(run_dir.join("dtn_samples.csv")).unwrap();
    assert_eq!(samples.lines().next().unwrap(), "re_z,im_z,re_N,im_N,phase");
    let limits = std::fs::read_to_string(run_dir.join("limits.csv")).unwrap();
    assert_eq!(limits.lines().next().unwrap(), "trajectory_id,re_z0,im_z0,p,fit_residual");

    let rep = capres(&out, &["report", "--config", cfg]);
    assert_eq!(rep.code, 0, "{}", rep.stderr);
    assert_eq!(rep.json["complete"], true);
    let text = std::fs::read_to_string(run_dir.join("consolidated.txt")).unwrap();
    let json: Value = serde_json::from_str(&std::fs::read_to_string(run_dir.join("consolidated.json")).unwrap()).unwrap();
    let row = &json["rows"][0];
    assert_eq!(row["dtn_count"], 1);
    assert_eq!(row["projection_rank"], 1);
    let z0: [f64; 2] = serde_json::from_value(row["extrapolated_z0"].clone()).unwrap();
    assert!((z0[0] - 5.378137567450531).abs() < 1e-3 && (z0[1] + 0.043149661054699945).abs() < 1e-3);
    assert!(text.contains("all stages present"));

    // Report assembly is deterministic.
    capres(&out, &["report", "--config", cfg]);
    assert_eq!(std::fs::read_to_string(run_dir.join("consolidated.txt")).unwrap(), text);
}

#[test]
fn dtn_circle_through_interior_eigenvalue_is_a_compute_error() {
    let tmp = TempDir::new().unwrap();
    // Interior Dirichlet eigenvalue (pi / 2.5)^2 of the free problem on [0, 2.5].
    let pole = (std::f64::consts::PI / 2.5).powi(2);
    let text = format!(
        "problem.r0 = 2\nproblem.r1 = 3\ncontour.alpha0 = 0.4\ndtn.center = {}, 0\ndtn.radius = 0.1\ndtn.candidates = 2.5\n",
        pole - 0.1
    );
    let cfg = write_config(tmp.path(), "free.conf", &text);
    let r = capres(&tmp.path().join("runs"), &["dtn", "count", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert_eq!(r.json["status"], "error");
    assert_eq!(r.json["kind"], "InteriorSingular");
}

#[test]
fn report_without_manifest_lists_missing_artifacts() {
    let tmp = TempDir::new().unwrap();
    let r = capres(tmp.path(), &["report", "--run-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json["kind"], "MissingArtifact");
    assert!(r.json["missing"][0].as_str().unwrap().ends_with("manifest.json"));
}

#[test]
fn configuration_errors_exit_with_usage_code() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("runs");
    let bad = write_config(tmp.path(), "theta.conf", "problem.r0 = 2\nproblem.r1 = 3\ncontour.theta = 0.5\n");
    let r = capres(&out, &["scaling", "eig", "--config", bad.to_str().unwrap()]);
    assert_eq!((r.code, r.json["kind"].as_str()), (1, Some("RangeError")));
    assert!(r.json["message"].as_str().unwrap().contains("sector bound"));

    let dup = write_config(tmp.path(), "dup.conf", "problem.r0 = 2\nproblem.r1 = 3\nproblem.r0 = 2\n");
    let r = capres(&out, &["oracle", "find", "--config", dup.to_str().unwrap()]);
    assert_eq!((r.code, r.json["kind"].as_str()), (1, Some("ParseError")));
    assert_eq!(r.json["lines"], serde_json::json!([1, 3]));

    let r = capres(&out, &["cap", "sweep"]);
    assert_eq!((r.code, r.json["kind"].as_str()), (1, Some("Usage")));
    let r = capres(&out, &["frobnicate"]);
    assert_eq!((r.code, r.json["kind"].as_str()), (1, Some("Usage")));
    assert!(!out.exists(), "nothing is written before validation succeeds");
}

#[test]
fn contour_check_runs_from_flags_alone() {
    let tmp = TempDir::new().unwrap();
    let r = capres(tmp.path(), &["contour", "check", "--theta", "0.39169908169872414", "--r1", "3", "--alpha", "0.2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let dir = PathBuf::from(r.json["run_dir"].as_str().unwrap());
    let csv = std::fs::read_to_string(dir.join("contour.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "property,max_violation,at_t");
    assert_eq!(csv.lines().count(), 5);
    // Flags take part in the digest.
    let other = capres(tmp.path(), &["contour", "check", "--theta", "0.2", "--r1", "3", "--alpha", "0.2"]);
    assert_ne!(other.json["run_dir"], r.json["run_dir"]);
}
