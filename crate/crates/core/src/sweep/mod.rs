//! CAP epsilon sweeps: spectra along a schedule, trajectories through them,
//! extrapolation to `eps -> 0+`, and checks against reference resonances.

mod extrapolate;
mod matching;
mod spurious;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extrapolate::{extrapolate, ExtrapolationError, FIT_POINTS, MAX_EXPONENT_SPREAD};
pub use matching::{
    classify, match_trajectories, Extrapolation, Level, Trajectory, TrajectoryPoint, TrajectoryStatus,
    MIN_CONVERGING_POINTS,
};
pub use spurious::{
    filter_spurious, scale_exponent, Classified, Partition, SpuriousClass, BRANCH_EXPONENT_RANGE, REFINEMENT_FACTOR,
    SCALE_MATCH_TOL,
};

use crate::contour::{build_contour, ContourError, MAX_THETA};
use crate::discretize::{assemble_scaled_operator, CutoffSpec, DiscretizeError, Grid};
use crate::eigen::{eig_dense, EigenError};
use crate::linalg::C64;
use crate::model::{ModelProblem, MAX_SECTOR_ANGLE};
use crate::oracle::EnergyWindow;

/// Floor for the default counting radius.
pub const MIN_DELTA: f64 = 1e-2;
/// Required attenuation exponent of a wave that crosses the absorbing layer,
/// reflects off the wall and comes back: the round trip damps it by `e^-A`.
pub const ROUND_TRIP_ATTENUATION: f64 = 25.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("at epsilon = {epsilon}: {source}")]
    Discretize {
        epsilon: f64,
        #[source]
        source: DiscretizeError,
    },
    #[error("at epsilon = {epsilon}: {source}")]
    Eigen {
        epsilon: f64,
        #[source]
        source: EigenError,
    },
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("eigenvalue counts differ between the two angles: {first} vs {second}")]
    PairingFailed { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub window: EnergyWindow,
    /// Strictly decreasing.
    pub epsilon_schedule: Vec<f64>,
    pub delta: f64,
    pub matching_radius: f64,
    pub theta: f64,
    pub alpha0: f64,
    /// Grow the domain as `eps` shrinks so the absorber stays effective.
    /// Only used without scaling (`theta = 0`).
    pub grow_domain: bool,
}

/// `n` geometric steps from `start` down to `end`, both included.
pub fn geometric_schedule(start: f64, end: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![start];
    }
    let ratio = (end / start).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i + 1 == n {
                end
            } else {
                start * (ratio * i as f64).exp()
            }
        })
        .collect()
}

/// Whether the rectangle touches the ray `arg z = -pi/4` (`z != 0`).
pub fn window_meets_string_ray(w: &EnergyWindow) -> bool {
    // Points (x, -x), x > 0.
    let lo = w.re_min.max(-w.im_max).max(0.0);
    let hi = w.re_max.min(-w.im_min);
    hi > lo || (hi == lo && hi > 0.0)
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidConfig(m));
        let w = &self.window;
        if !(w.re_max > w.re_min && w.im_max > w.im_min) {
            return bad(format!("degenerate window {w:?}"));
        }
        if self.epsilon_schedule.len() < 2 {
            return bad("the epsilon schedule needs at least two values".into());
        }
        if self.epsilon_schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("epsilon values must be positive".into());
        }
        if self.epsilon_schedule.windows(2).any(|p| !(p[1] < p[0])) {
            return bad("epsilon values must strictly decrease".into());
        }
        if !(self.delta > 0.0) || !(self.matching_radius > 0.0) {
            return bad("delta and matching_radius must be positive".into());
        }
        if !(0.0..MAX_THETA).contains(&self.theta) {
            return bad(format!("theta = {} outside [0, pi/8)", self.theta));
        }
        // The sector -2 theta0 < arg z < 3 pi/2 + 2 theta0 excludes only the string ray here.
        if 2.0 * MAX_SECTOR_ANGLE >= std::f64::consts::FRAC_PI_4 && window_meets_string_ray(w) {
            return bad(format!("window {w:?} meets the ray arg z = -pi/4"));
        }
        Ok(())
    }

    /// Domain length used at `epsilon`.
    ///
    /// A wave of momentum `k` crossing `-i eps x^2` out to `L` and back is
    /// damped by about `exp(-eps L^3 / (3k))`. The length is chosen so this
    /// is [`ROUND_TRIP_ATTENUATION`] for the largest momentum in the window.
    /// The wall-reflected box modes then sit near `Im z = -eps L^2 / 3`,
    /// which stays well below the window.
    pub fn length_at(&self, base: f64, spacing: f64, epsilon: f64) -> f64 {
        if !self.grow_domain || self.theta != 0.0 {
            return base;
        }
        let w = &self.window;
        let k_max = [w.re_min, w.re_max]
            .iter()
            .flat_map(|&re| [w.im_min, w.im_max].map(|im| C64::new(re, im).norm()))
            .fold(0.0, f64::max)
            .sqrt()
            .max(1e-3);
        let needed = (3.0 * ROUND_TRIP_ATTENUATION * k_max / epsilon).cbrt();
        let l = base.max(needed);
        (l / spacing).round() * spacing
    }

    /// Half the smallest distance between the given resonances, at least [`MIN_DELTA`].
    pub fn default_delta(resonances: &[C64]) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in resonances.iter().enumerate() {
            for b in &resonances[i + 1..] {
                d = d.min((a - b).norm());
            }
        }
        if d.is_finite() {
            (0.5 * d).max(MIN_DELTA)
        } else {
            MIN_DELTA.max(0.05)
        }
    }
}

/// Full spectrum of the CAP operator at one epsilon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub epsilon: f64,
    pub length: f64,
    pub dim: usize,
    pub eigenvalues: Vec<C64>,
    pub residual: f64,
}

/// Eigenvalues of `P_{eps,theta}` for every epsilon of the schedule.
/// `base` fixes the spacing and the smallest domain. The solves are spread
/// over the available cores; the result is in schedule order regardless.
pub fn sweep_spectra(
    problem: &ModelProblem,
    config: &SweepConfig,
    base: &Grid,
    cutoff: &CutoffSpec,
) -> Result<Vec<Spectrum>, SweepError> {
    config.validate()?;
    let contour = build_contour(config.theta, problem.r1, config.alpha0)?;
    let h = base.spacing();
    let solve = |epsilon: f64| -> Result<Spectrum, SweepError> {
        let length = config.length_at(base.t_max, h, epsilon);
        let grid = Grid::with_spacing(base.t_min, length, h).map_err(|source| SweepError::Discretize { epsilon, source })?;
        let op = assemble_scaled_operator(problem, &contour, epsilon, cutoff, &grid)
            .map_err(|source| SweepError::Discretize { epsilon, source })?;
        let eig = eig_dense(&op.entries).map_err(|source| SweepError::Eigen { epsilon, source })?;
        Ok(Spectrum {
            epsilon,
            length,
            dim: op.dim(),
            eigenvalues: eig.eigenvalues,
            residual: eig.residual_bound,
        })
    };
    let schedule = &config.epsilon_schedule;
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(schedule.len());
    if workers <= 1 {
        return schedule.iter().map(|&e| solve(e)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<Spectrum, SweepError>>>> = schedule.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&epsilon) = schedule.get(i) else { break };
                *slots[i].lock().expect("slot lock") = Some(solve(epsilon));
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every epsilon solved"))
        .collect()
}

/// Keeps the eigenvalues inside `window`.
pub fn restrict(spectra: &[Spectrum], window: &EnergyWindow) -> Vec<Level> {
    spectra
        .iter()
        .map(|s| Level {
            epsilon: s.epsilon,
            eigenvalues: s.eigenvalues.iter().copied().filter(|z| window.contains(*z)).collect(),
            residual: s.residual,
        })
        .collect()
}

/// Matches, filters, classifies and extrapolates paths through `levels`.
pub fn build_trajectories(levels: &[Level], matching_radius: f64) -> Vec<Trajectory> {
    let mut paths = match_trajectories(levels, matching_radius);
    let Some(smallest) = levels.last().map(|l| l.epsilon) else {
        return paths;
    };
    let partitions: Vec<Partition> = if levels.len() >= 2 {
        (0..levels.len()).map(|i| filter_spurious(levels, i, None)).collect()
    } else {
        Vec::new()
    };
    for t in &mut paths {
        let mut exps = Vec::new();
        let mut branch = 0usize;
        for p in &t.points {
            let Some(li) = levels.iter().position(|l| l.epsilon == p.epsilon) else {
                continue;
            };
            let Some(part) = partitions.get(li) else { continue };
            if let Some(d) = part.detail.iter().find(|d| d.z == p.z) {
                if d.class == SpuriousClass::Branch {
                    branch += 1;
                    exps.extend(d.exponent);
                }
            }
        }
        if 2 * branch > t.points.len() {
            t.status = TrajectoryStatus::Branch;
            exps.sort_by(f64::total_cmp);
            t.branch_exponent = exps.get(exps.len() / 2).copied();
        } else {
            classify(t, smallest);
        }
        if t.status == TrajectoryStatus::Converging {
            t.extrapolation = extrapolate(t).ok();
        }
    }
    paths
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spectra: Vec<Spectrum>,
    pub levels: Vec<Level>,
    pub trajectories: Vec<Trajectory>,
}

/// The CAP sweep: spectra along the schedule, restricted to the window and
/// linked into classified, extrapolated trajectories.
pub fn cap_sweep(
    problem: &ModelProblem,
    config: &SweepConfig,
    base: &Grid,
    cutoff: &CutoffSpec,
) -> Result<SweepResult, SweepError> {
    let spectra = sweep_spectra(problem, config, base, cutoff)?;
    let levels = restrict(&spectra, &config.window);
    let trajectories = build_trajectories(&levels, config.matching_radius);
    Ok(SweepResult {
        spectra,
        levels,
        trajectories,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaInvariance {
    pub max_discrepancy: f64,
    pub pairs: Vec<(C64, C64)>,
    pub unpaired: usize,
}

/// Pairs two equally long lists to minimize the largest distance: exhaustive
/// for short lists, greedy by distance otherwise.
pub fn pair_eigenvalues(a: &[C64], b: &[C64]) -> Vec<(C64, C64)> {
    let n = a.len().min(b.len());
    if a.len() == b.len() && n <= 7 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = (f64::INFINITY, f64::INFINITY, perm.clone());
        permutations(&mut perm, 0, &mut |p| {
            let max = (0..n).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max);
            let sum: f64 = (0..n).map(|i| (a[i] - b[p[i]]).norm()).sum();
            if (max, sum) < (best.0, best.1) {
                best = (max, sum, p.to_vec());
            }
        });
        return (0..n).map(|i| (a[i], b[best.2[i]])).collect();
    }
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            cand.push(((x - y).norm(), i, j));
        }
    }
    cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let (mut ua, mut ub) = (vec![false; a.len()], vec![false; b.len()]);
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            out.push((a[i], b[j]));
        }
    }
    out
}

fn permutations(p: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Compares the window spectra of `P_{eps,theta1}` and `P_{eps,theta2}`.
#[allow(clippy::too_many_arguments)]
pub fn theta_invariance_check(
    problem: &ModelProblem,
    epsilon: f64,
    theta1: f64,
    theta2: f64,
    alpha0: f64,
    window: &EnergyWindow,
    grid: &Grid,
    cutoff: &CutoffSpec,
) -> Result<ThetaInvariance, SweepError> {
    let spectrum = |theta: f64| -> Result<Vec<C64>, SweepError> {
        if !(0.0..MAX_THETA).contains(&theta) {
            return Err(SweepError::InvalidConfig(format!("theta = {theta} outside [0, pi/8)")));
        }
        let contour = build_contour(theta, problem.r1, alpha0)?;
        let op = assemble_scaled_operator(problem, &contour, epsilon, cutoff, grid)
            .map_err(|source| SweepError::Discretize { epsilon, source })?;
        let ev = eig_dense(&op.entries).map_err(|source| SweepError::Eigen { epsilon, source })?;
        Ok(ev.eigenvalues.into_iter().filter(|z| window.contains(*z)).collect())
    };
    let a = spectrum(theta1)?;
    let b = if theta2 == theta1 { a.clone() } else { spectrum(theta2)? };
    if a.len() != b.len() {
        return Err(SweepError::PairingFailed {
            first: a.len(),
            second: b.len(),
        });
    }
    let pairs = pair_eigenvalues(&a, &b);
    let max_discrepancy = pairs.iter().map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok(ThetaInvariance {
        max_discrepancy,
        pairs,
        unpaired: 0,
    })
}

/// A reference resonance: oracle value or, without an oracle, a scaling eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub z: C64,
    pub multiplicity: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceMode {
    Oracle,
    CrossMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskCheck {
    pub reference: Reference,
    /// Non-branch trajectory endpoints at the smallest epsilon inside the disk.
    pub count: usize,
    pub trajectory: Option<usize>,
    /// `|z(eps) - z_j|` along that trajectory.
    pub distances: Vec<f64>,
    pub monotone: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mode: ReferenceMode,
    pub delta: f64,
    pub smallest_epsilon: Option<f64>,
    pub disks: Vec<DiskCheck>,
    /// Eigenvalues in the shrunken window that no disk contains.
    pub stray: Vec<C64>,
    /// Some pair of disks overlaps.
    pub ambiguous_disks: bool,
    pub passed: bool,
}

/// Steps checked for monotone approach at the end of a trajectory.
pub const MONOTONE_STEPS: usize = 3;

/// Checks containment, counts and monotone approach at the smallest epsilon.
pub fn verify_convergence(
    trajectories: &[Trajectory],
    references: &[Reference],
    mode: ReferenceMode,
    delta: f64,
    window: &EnergyWindow,
) -> VerificationReport {
    let smallest = trajectories
        .iter()
        .flat_map(|t| t.points.iter().map(|p| p.epsilon))
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.min(e))));
    let finals: Vec<(usize, C64)> = trajectories
        .iter()
        .filter(|t| t.status != TrajectoryStatus::Branch && Some(t.last().epsilon) == smallest)
        .map(|t| (t.id, t.last().z))
        .collect();
    let mut ambiguous = false;
    for (i, a) in references.iter().enumerate() {
        for b in &references[i + 1..] {
            if (a.z - b.z).norm() < 2.0 * delta {
                ambiguous = true;
            }
        }
    }
    let inner = EnergyWindow::new(
        window.re_min + delta,
        window.re_max - delta,
        window.im_min + delta,
        window.im_max - delta,
    );
    let stray: Vec<C64> = finals
        .iter()
        .map(|f| f.1)
        .filter(|z| inner.contains(*z) && !references.iter().any(|r| (z - r.z).norm() < delta))
        .collect();
    let disks: Vec<DiskCheck> = references
        .iter()
        .map(|r| {
            let inside: Vec<&(usize, C64)> = finals.iter().filter(|f| (f.1 - r.z).norm() < delta).collect();
            let closest = inside
                .iter()
                .min_by(|a, b| (a.1 - r.z).norm().total_cmp(&(b.1 - r.z).norm()))
                .map(|f| f.0);
            let distances: Vec<f64> = closest
                .and_then(|id| trajectories.iter().find(|t| t.id == id))
                .map(|t| t.points.iter().map(|p| (p.z - r.z).norm()).collect())
                .unwrap_or_default();
            let monotone = distances.len() > MONOTONE_STEPS
                && distances[distances.len() - MONOTONE_STEPS - 1..]
                    .windows(2)
                    .all(|w| w[1] <= w[0]);
            let count = inside.len();
            DiskCheck {
                reference: *r,
                count,
                trajectory: closest,
                distances,
                monotone,
                passed: count as i64 == r.multiplicity && monotone,
            }
        })
        .collect();
    let passed = stray.is_empty() && !ambiguous && disks.iter().all(|d| d.passed);
    VerificationReport {
        mode,
        delta,
        smallest_epsilon: smallest,
        disks,
        stray,
        ambiguous_disks: ambiguous,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(window: EnergyWindow) -> SweepConfig {
        SweepConfig {
            window,
            epsilon_schedule: geometric_schedule(1e-1, 1e-3, 5),
            delta: 0.05,
            matching_radius: 0.05,
            theta: 0.0,
            alpha0: 0.4,
            grow_domain: false,
        }
    }

    #[test]
    fn schedule_is_geometric() {
        let s = geometric_schedule(1e-1, 1e-5, 9);
        assert_eq!(s.len(), 9);
        assert_eq!(s[8], 1e-5);
        for w in s.windows(2) {
            assert!((w[1] / w[0] - 10f64.powf(-0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn window_against_string_ray() {
        assert!(window_meets_string_ray(&EnergyWindow::new(0.0, 1.0, -1.0, 0.0)));
        assert!(!window_meets_string_ray(&EnergyWindow::new(3.0, 8.0, -0.15, 0.05)));
        assert!(config(EnergyWindow::new(0.5, 2.0, -1.0, -0.2)).validate().is_err());
        assert!(config(EnergyWindow::new(3.0, 8.0, -0.15, 0.05)).validate().is_ok());
    }

    #[test]
    fn rejects_bad_schedules() {
        let mut c = config(EnergyWindow::new(3.0, 8.0, -0.15, 0.05));
        c.epsilon_schedule = vec![1e-3, 1e-2];
        assert!(c.validate().is_err());
        c.epsilon_schedule = vec![1e-2, 1e-3];
        c.theta = 0.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn domain_grows_only_without_scaling() {
        let mut c = config(EnergyWindow::new(3.0, 8.0, -0.15, 0.05));
        c.grow_domain = true;
        assert_eq!(c.length_at(40.0, 0.1, 1e-1), 40.0);
        let l = c.length_at(40.0, 0.1, 1e-5);
        // Round-trip damping of the fastest wave in the window.
        let k = 8.0f64.hypot(0.15).sqrt();
        let damping = 1e-5 * l.powi(3) / (3.0 * k);
        assert!((damping - ROUND_TRIP_ATTENUATION).abs() < 0.05, "{l} {damping}");
        c.theta = 0.1;
        assert_eq!(c.length_at(40.0, 0.1, 1e-5), 40.0);
    }

    #[test]
    fn pairing_is_exhaustive_for_short_lists() {
        let a = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let b = [C64::new(1.1, 0.0), C64::new(0.1, 0.0)];
        let p = pair_eigenvalues(&a, &b);
        assert!(p.iter().all(|(x, y)| (x - y).norm() < 0.2));
    }

    fn path(id: usize, zs: &[C64], eps: &[f64], status: TrajectoryStatus) -> Trajectory {
        Trajectory {
            id,
            points: zs
                .iter()
                .zip(eps)
                .map(|(z, e)| TrajectoryPoint {
                    epsilon: *e,
                    z: *z,
                    residual: 0.0,
                })
                .collect(),
            status,
            crossing: false,
            extrapolation: None,
            branch_exponent: None,
        }
    }

    #[test]
    fn verification_verdicts() {
        let w = EnergyWindow::new(3.0, 8.0, -0.5, 0.05);
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let r = C64::new(5.0, -0.1);
        let zs: Vec<C64> = eps.iter().map(|e| r + *e).collect();
        let t = vec![path(0, &zs, &eps, TrajectoryStatus::Converging)];
        let refs = [Reference { z: r, multiplicity: 1 }];
        let rep = verify_convergence(&t, &refs, ReferenceMode::Oracle, 0.05, &w);
        assert!(rep.passed, "{rep:?}");
        // Free problem: nothing to find, nothing found.
        assert!(verify_convergence(&[], &[], ReferenceMode::Oracle, 0.05, &w).passed);
        // Oversized disks overlap.
        let refs2 = [refs[0], Reference { z: r + 0.06, multiplicity: 1 }];
        let rep = verify_convergence(&t, &refs2, ReferenceMode::Oracle, 0.05, &w);
        assert!(rep.ambiguous_disks && !rep.passed);
        // A stray eigenvalue away from every disk fails containment.
        let stray: Vec<C64> = eps.iter().map(|_| C64::new(6.5, -0.2)).collect();
        let t2 = vec![t[0].clone(), path(1, &stray, &eps, TrajectoryStatus::Truncated)];
        let rep = verify_convergence(&t2, &refs, ReferenceMode::Oracle, 0.05, &w);
        assert_eq!(rep.stray.len(), 1);
        assert!(!rep.passed);
    }
}
