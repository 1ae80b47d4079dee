//! End-to-end acceptance criteria C1 to C9. One PASS/FAIL line per criterion
//! goes straight to stderr, so it shows without `--nocapture`. The test fails
//! if any criterion fails.

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use capres::cli::config::{parse_config, RunConfig};
use capres::cli::references;
use capres::contour::{build_contour, verify_contour};
use capres::discretize::{assemble_davies, assemble_scaled_operator, CutoffSpec, Grid};
use capres::dtn::{choose_interface, count_resonances_dtn, Circle, ExteriorDiscretization, Region};
use capres::eigen::{eig_dense, projection_rank, ShiftedLu};
use capres::linalg::{CMatrix, C64};
use capres::model::ModelProblem;
use capres::oracle::{find_resonances, EnergyWindow};
use capres::sweep::{
    build_trajectories, cap_sweep, filter_spurious, pair_eigenvalues, restrict, theta_invariance_check, verify_convergence,
    SpuriousClass, SweepConfig, SweepResult, TrajectoryStatus, BRANCH_EXPONENT_RANGE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DAVIES_TOL: f64 = 1e-6;
const CONTOUR_TOL: f64 = 1e-12;
const SCALING_TOL: f64 = 1e-4;
const LIMIT_TOL: f64 = 1e-3;
const THETA_TOL: f64 = 1e-4;
const EIGEN_TOL: f64 = 1e-8;
const CROSS_TOL: f64 = 1e-3;

const THETA: f64 = 0.3;

fn barrier() -> ModelProblem {
    ModelProblem::barrier(1.0, 2.0, 10.0, 2.0, 3.0)
}

fn cutoff() -> CutoffSpec {
    CutoffSpec::new(2.2, 2.8)
}

fn config(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    parse_config(&path).unwrap()
}

fn scaled_eigenvalues(p: &ModelProblem, theta: f64, h: f64) -> Vec<C64> {
    let c = build_contour(theta, p.r1, 0.4).unwrap();
    let grid = Grid::with_spacing(0.0, 40.0, h).unwrap();
    let op = assemble_scaled_operator(p, &c, 0.0, &cutoff(), &grid).unwrap();
    eig_dense(&op.entries).unwrap().eigenvalues
}

fn nearest(zs: &[C64], z: C64) -> f64 {
    zs.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
}

fn sweep(cfg: &RunConfig, window: EnergyWindow, delta: f64) -> SweepResult {
    let sc = SweepConfig {
        window,
        epsilon_schedule: cfg.sweep.epsilon_schedule.clone(),
        delta,
        matching_radius: cfg.sweep.matching_radius,
        theta: cfg.sweep.theta,
        alpha0: cfg.contour.alpha0,
        grow_domain: cfg.sweep.grow_domain,
    };
    cap_sweep(&cfg.problem, &sc, &cfg.discretization.grid(), &cfg.discretization.cutoff).unwrap()
}

fn c1() -> (bool, String) {
    let grid = Grid::new(-12.0, 12.0, 1600).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for theta in [0.0, 0.1] {
        let start = Instant::now();
        let op = assemble_davies(1.0, theta, &grid).unwrap();
        let mut zs = eig_dense(&op.entries).unwrap().eigenvalues;
        zs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let worst = (0..6)
            .map(|k| {
                let exact = C64::from_polar(2.0 * k as f64 + 1.0, -FRAC_PI_4);
                (zs[k] - exact).norm() / exact.norm()
            })
            .fold(0.0, f64::max);
        let took = start.elapsed();
        ok &= worst < DAVIES_TOL && took < Duration::from_secs(60);
        detail.push(format!("theta {theta}: rel err {worst:.1e} in {:.1}s", took.as_secs_f64()));
    }
    (ok, detail.join(", "))
}

fn c2() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for theta in [PI / 16.0, PI / 8.0 - 1e-3] {
        for alpha0 in [0.05, 0.1, 0.2] {
            let start = Instant::now();
            let c = build_contour(theta, 3.0, alpha0).unwrap();
            worst = worst.max(verify_contour(&c, 10_000).worst());
            slowest = slowest.max(start.elapsed());
        }
    }
    let ok = worst < CONTOUR_TOL && slowest < Duration::from_secs(1);
    (ok, format!("max violation {worst:.1e}, slowest {:.3}s", slowest.as_secs_f64()))
}

/// Oracle resonances of the barrier visible at the scaling angle.
fn barrier_resonances() -> Vec<C64> {
    find_resonances(&barrier(), &EnergyWindow::new(1.0, 9.0, -2.0, 0.0))
        .unwrap()
        .iter()
        .map(|r| r.energy())
        .filter(|z| z.im < 0.0 && z.arg() > -2.0 * THETA)
        .collect()
}

fn c3(resonances: &[C64]) -> (bool, String) {
    let start = Instant::now();
    let coarse = scaled_eigenvalues(&barrier(), THETA, 0.05);
    let fine = scaled_eigenvalues(&barrier(), THETA, 0.025);
    let mut worst = 0.0f64;
    let mut drift = 0.0f64;
    for &z in resonances {
        worst = worst.max(nearest(&coarse, z)).max(nearest(&fine, z));
        let zc = coarse.iter().min_by(|a, b| (*a - z).norm().total_cmp(&(*b - z).norm())).unwrap();
        drift = drift.max(nearest(&fine, *zc));
    }
    let took = start.elapsed();
    let ok = !resonances.is_empty() && worst < SCALING_TOL && drift < SCALING_TOL && took < Duration::from_secs(300);
    let detail = format!(
        "{} resonances, max distance {worst:.1e}, doubling drift {drift:.1e}, {:.0}s",
        resonances.len(),
        took.as_secs_f64()
    );
    (ok, detail)
}

/// Window eigenvalues near the string ray that must be recognized as branch.
fn string_check(result: &SweepResult) -> (usize, usize) {
    let levels = restrict(&result.spectra, &EnergyWindow::new(0.0, 1.5, -1.5, 0.0));
    let (mut seen, mut bad) = (0, 0);
    for (i, s) in result.spectra.iter().enumerate() {
        // The string only reaches |Im z| ~ eps L^2 / 6 before the box cuts it off.
        let reach = s.epsilon * s.length * s.length / 6.0;
        for d in &filter_spurious(&levels, i, None).detail {
            if (d.z.arg() + FRAC_PI_4).abs() < 0.1 && d.z.im.abs() < reach {
                seen += 1;
                let (lo, hi) = BRANCH_EXPONENT_RANGE;
                if !(d.class == SpuriousClass::Branch && d.exponent.is_some_and(|q| (lo..=hi).contains(&q))) {
                    bad += 1;
                }
            }
        }
    }
    (seen, bad)
}

fn c4(resonances: &[C64]) -> (bool, String) {
    let start = Instant::now();
    let cfg = config("barrier.conf");
    let window = cfg.sweep.window.unwrap();
    let (refs, mode) = references(&cfg, &window, "cap sweep").unwrap();
    let ref_z: Vec<C64> = refs.iter().map(|r| r.z).collect();
    let delta = cfg.sweep.delta.unwrap_or_else(|| SweepConfig::default_delta(&ref_z));
    let result = sweep(&cfg, window, delta);
    let report = verify_convergence(&result.trajectories, &refs, mode, delta, &window);
    let mut ok = report.passed && resonances.iter().all(|z| ref_z.iter().any(|r| (r - z).norm() < 1e-10));
    let mut detail = Vec::new();
    for d in &report.disks {
        let limit = d
            .trajectory
            .and_then(|id| result.trajectories.iter().find(|t| t.id == id))
            .filter(|t| t.status == TrajectoryStatus::Converging)
            .and_then(|t| t.extrapolation.map(|x| x.limit));
        let err = limit.map_or(f64::INFINITY, |l| (l - d.reference.z).norm());
        ok &= d.monotone && err < LIMIT_TOL;
        detail.push(format!("|z0 - z*| {err:.1e} monotone {}", d.monotone));
    }
    let (seen, bad) = string_check(&result);
    ok &= seen > 0 && bad == 0;
    let took = start.elapsed();
    ok &= took < Duration::from_secs(1200);
    detail.push(format!("{seen} string eigenvalues, {bad} misclassified, {:.0}s", took.as_secs_f64()));
    (ok, detail.join(", "))
}

fn c5(resonances: &[C64]) -> (bool, String) {
    let start = Instant::now();
    let p = barrier();
    let contour = build_contour(THETA, p.r1, 0.4).unwrap();
    let disc = ExteriorDiscretization {
        length: 40.0,
        spacing: 0.1,
        cutoff: cutoff(),
    };
    let grid = Grid::with_spacing(0.0, 40.0, 0.1).unwrap();
    let op = assemble_scaled_operator(&p, &contour, 0.0, &cutoff(), &grid).unwrap();
    let multiplicity: Vec<i64> = find_resonances(&p, &EnergyWindow::new(1.0, 9.0, -2.0, 0.0))
        .unwrap()
        .iter()
        .filter(|r| resonances.iter().any(|z| (r.energy() - z).norm() < 1e-10))
        .map(|r| r.multiplicity)
        .collect();
    let disks: Vec<(C64, i64)> = resonances
        .iter()
        .zip(&multiplicity)
        .map(|(z, m)| (*z, *m))
        .chain([(C64::new(6.5, -0.3), 0)])
        .collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for (center, expected) in disks {
        let circle = Circle::new(center, 0.05);
        let region = Region::Disk(circle);
        let counts = choose_interface(&p, &contour, 0.0, &region, &[2.2, 2.5, 2.8], &disc).and_then(|ch| {
            let w = count_resonances_dtn(&p, &contour, 0.0, &ch.interface, &disc, &circle, 128)?;
            Ok((ch.interface.a, w.winding))
        });
        let rank = projection_rank(&op.entries, center, 0.05, 64).map(|r| r.rank as i64);
        match (counts, rank) {
            (Ok((a, w)), Ok(r)) => {
                ok &= w == r && r == expected;
                detail.push(format!("D({center:.3}) a={a} winding {w} rank {r} expected {expected}"));
            }
            (c, r) => {
                ok = false;
                detail.push(format!("D({center:.3}) failed: {c:?} {r:?}"));
            }
        }
    }
    let took = start.elapsed();
    ok &= took < Duration::from_secs(300);
    detail.push(format!("{:.0}s", took.as_secs_f64()));
    (ok, detail.join(", "))
}

fn c6() -> (bool, String) {
    let grid = Grid::with_spacing(0.0, 40.0, 0.05).unwrap();
    let window = EnergyWindow::new(3.0, 8.0, -0.15, 0.05);
    match theta_invariance_check(&barrier(), 1e-3, 0.1, 0.2, 0.4, &window, &grid, &cutoff()) {
        Ok(inv) => (
            inv.max_discrepancy < THETA_TOL && !inv.pairs.is_empty(),
            format!("{} pairs, max discrepancy {:.1e}", inv.pairs.len(), inv.max_discrepancy),
        ),
        Err(e) => (false, e.to_string()),
    }
}

fn c7() -> (bool, String) {
    let cfg = config("free.conf");
    let windows = [EnergyWindow::new(3.0, 8.0, -0.15, 0.05), EnergyWindow::new(0.5, 3.0, -0.15, 0.05)];
    // Both windows share the spectra; the first sets the domain growth.
    let result = sweep(&cfg, windows[0], 0.05);
    let mut ok = true;
    let mut detail = Vec::new();
    for w in &windows {
        let trajs = build_trajectories(&restrict(&result.spectra, w), cfg.sweep.matching_radius);
        let conv = trajs.iter().filter(|t| t.status == TrajectoryStatus::Converging).count();
        ok &= conv == 0;
        detail.push(format!("window re [{}, {}]: {conv} converging of {}", w.re_min, w.re_max, trajs.len()));
    }
    (ok, detail.join(", "))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, diagonal: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let shift = if i == j { diagonal } else { 0.0 };
        C64::new(rng.gen_range(-0.5..0.5) + shift, rng.gen_range(-0.5..0.5))
    })
}

fn inverse(s: &CMatrix) -> CMatrix {
    let n = s.rows();
    let lu = ShiftedLu::new(s, C64::new(0.0, 0.0)).unwrap();
    let cols: Vec<Vec<C64>> = (0..n)
        .map(|j| lu.solve(&(0..n).map(|i| C64::new((i == j) as u8 as f64, 0.0)).collect::<Vec<_>>()))
        .collect();
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Eigensolver properties over seeded random fixtures; every case must pass.
fn c8() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases = 20;
    let (mut similarity, mut trace) = (0.0f64, 0.0f64);
    let mut additive = true;
    for _ in 0..cases {
        let n = rng.gen_range(5..40);
        let a = random_matrix(&mut rng, n, 0.0);
        let s = random_matrix(&mut rng, n, 2.0 * (n as f64).sqrt());
        let b = inverse(&s).matmul(&a).matmul(&s);
        let ea = eig_dense(&a).unwrap().eigenvalues;
        let eb = eig_dense(&b).unwrap().eigenvalues;
        let paired = pair_eigenvalues(&ea, &eb);
        similarity = similarity.max(paired.iter().map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
        let sum: C64 = ea.iter().sum();
        trace = trace.max((sum - a.trace()).norm() / (a.norm_fro() * n as f64));

        let (left, right) = (rng.gen_range(0..4), rng.gen_range(0..4));
        let diag: Vec<C64> = (0..left)
            .map(|_| -2.0)
            .chain((0..right).map(|_| 2.0))
            .chain([10.0])
            .map(|x| C64::new(x + rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)))
            .collect();
        let d = CMatrix::from_fn(diag.len(), diag.len(), |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) });
        let rank = |c: f64, r: f64| projection_rank(&d, C64::new(c, 0.0), r, 128).unwrap().rank;
        additive &= rank(-2.0, 1.0) == left && rank(2.0, 1.0) == right && rank(0.0, 3.5) == left + right;
    }
    let ok = similarity < EIGEN_TOL && trace < EIGEN_TOL && additive;
    (
        ok,
        format!("{cases} cases: similarity {similarity:.1e}, trace {trace:.1e}, additivity {additive}"),
    )
}

fn c9() -> (bool, String) {
    let cfg = config("metric.conf");
    let reference = scaled_eigenvalues(&cfg.problem, THETA, 0.025);
    let result = sweep(&cfg, cfg.sweep.window.unwrap(), 0.05);
    let limits: Vec<C64> = result
        .trajectories
        .iter()
        .filter(|t| t.status == TrajectoryStatus::Converging)
        .filter_map(|t| t.extrapolation.map(|x| x.limit))
        .collect();
    let worst = limits.iter().map(|z| nearest(&reference, *z)).fold(0.0, f64::max);
    (
        !limits.is_empty() && worst < CROSS_TOL,
        format!("{} converging limits, max distance to scaling {worst:.1e}", limits.len()),
    )
}

#[test]
fn acceptance() {
    let resonances = barrier_resonances();
    type Check<'a> = Box<dyn Fn() -> (bool, String) + 'a>;
    let criteria: [(&str, Check); 9] = [
        ("C1 Davies spectrum", Box::new(c1)),
        ("C2 contour properties", Box::new(c2)),
        ("C3 oracle vs scaling", Box::new(|| c3(&resonances))),
        ("C4 CAP convergence", Box::new(|| c4(&resonances))),
        ("C5 counting identity", Box::new(|| c5(&resonances))),
        ("C6 theta invariance", Box::new(c6)),
        ("C7 free null result", Box::new(c7)),
        ("C8 eigensolver suite", Box::new(c8)),
        ("C9 cross-method metric", Box::new(c9)),
    ];
    let mut failed = Vec::new();
    for (name, check) in &criteria {
        let (ok, detail) = check();
        // Bypasses the test harness capture.
        let _ = writeln!(std::io::stderr().lock(), "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
