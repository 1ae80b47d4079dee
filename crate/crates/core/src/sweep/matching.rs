//! Greedy nearest-neighbour continuation of eigenvalues across an
//! epsilon schedule.

use serde::{Deserialize, Serialize};

use crate::linalg::C64;

/// Eigenvalues retained at one epsilon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub epsilon: f64,
    pub eigenvalues: Vec<C64>,
    /// Relative backward error of the eigen-solve.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub epsilon: f64,
    pub z: C64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryStatus {
    Converging,
    Branch,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: C64,
    pub exponent: f64,
    pub fit_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: usize,
    pub points: Vec<TrajectoryPoint>,
    pub status: TrajectoryStatus,
    /// Some step of this path nearly swapped with another path.
    pub crossing: bool,
    pub extrapolation: Option<Extrapolation>,
    /// Median scale exponent of the path's points when classified as a branch.
    pub branch_exponent: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectories are never empty")
    }

    /// Step sizes `|z_{i+1} - z_i|`.
    pub fn steps(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| (w[1].z - w[0].z).norm()).collect()
    }
}

/// Two matches count as a near swap when the swapped assignment costs less
/// than this factor times the chosen one.
const CROSSING_FACTOR: f64 = 1.1;

fn lex(a: C64, b: C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Links eigenvalues of consecutive levels (ordered by decreasing epsilon)
/// into paths. Pairs closer than `matching_radius` are accepted in order of
/// increasing distance, ties broken by the lexicographic order of the
/// endpoints. Every returned path starts as `Truncated`; see [`classify`].
pub fn match_trajectories(levels: &[Level], matching_radius: f64) -> Vec<Trajectory> {
    let mut done: Vec<Trajectory> = Vec::new();
    // Open paths, indexed by the eigenvalue they end at on the previous level.
    let mut open: Vec<(usize, Trajectory)> = Vec::new();
    let mut next_id = 0usize;
    for (li, level) in levels.iter().enumerate() {
        let mut cur: Vec<C64> = level.eigenvalues.clone();
        cur.sort_by(|a, b| lex(*a, *b));
        let point = |z: C64| TrajectoryPoint {
            epsilon: level.epsilon,
            z,
            residual: level.residual,
        };
        if li == 0 {
            for z in cur {
                open.push((
                    0,
                    Trajectory {
                        id: 0,
                        points: vec![point(z)],
                        status: TrajectoryStatus::Truncated,
                        crossing: false,
                        extrapolation: None,
                        branch_exponent: None,
                    },
                ));
            }
            continue;
        }
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (pi, (_, t)) in open.iter().enumerate() {
            let from = t.last().z;
            for (ci, &z) in cur.iter().enumerate() {
                let d = (z - from).norm();
                if d <= matching_radius {
                    pairs.push((d, pi, ci));
                }
            }
        }
        // Open paths and current values are both in lexicographic order, so
        // index order is the documented tie-break.
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut path_to: Vec<Option<usize>> = vec![None; open.len()];
        let mut taken = vec![false; cur.len()];
        for &(_, pi, ci) in &pairs {
            if path_to[pi].is_none() && !taken[ci] {
                path_to[pi] = Some(ci);
                taken[ci] = true;
            }
        }
        // Flag near swaps among accepted matches.
        let accepted: Vec<(usize, usize)> = path_to
            .iter()
            .enumerate()
            .filter_map(|(pi, c)| c.map(|ci| (pi, ci)))
            .collect();
        let mut crossing = vec![false; open.len()];
        for (x, &(p1, c1)) in accepted.iter().enumerate() {
            for &(p2, c2) in &accepted[x + 1..] {
                let (a, b) = (open[p1].1.last().z, open[p2].1.last().z);
                let chosen = (cur[c1] - a).norm() + (cur[c2] - b).norm();
                let swapped = (cur[c2] - a).norm() + (cur[c1] - b).norm();
                if swapped <= CROSSING_FACTOR * chosen {
                    crossing[p1] = true;
                    crossing[p2] = true;
                }
            }
        }
        let mut next_open = Vec::new();
        for (pi, (_, mut t)) in open.drain(..).enumerate() {
            match path_to[pi] {
                Some(ci) => {
                    t.points.push(point(cur[ci]));
                    t.crossing |= crossing[pi];
                    next_open.push((ci, t));
                }
                None => done.push(t),
            }
        }
        for (ci, z) in cur.iter().enumerate() {
            if !taken[ci] {
                next_open.push((
                    ci,
                    Trajectory {
                        id: 0,
                        points: vec![point(*z)],
                        status: TrajectoryStatus::Truncated,
                        crossing: false,
                        extrapolation: None,
                        branch_exponent: None,
                    },
                ));
            }
        }
        next_open.sort_by_key(|(ci, _)| *ci);
        open = next_open;
    }
    done.extend(open.into_iter().map(|(_, t)| t));
    // Stable ids: by starting epsilon (descending), then starting point.
    done.sort_by(|a, b| {
        b.points[0]
            .epsilon
            .total_cmp(&a.points[0].epsilon)
            .then(lex(a.points[0].z, b.points[0].z))
    });
    for t in &mut done {
        t.id = next_id;
        next_id += 1;
    }
    done
}

/// Minimum number of points for a path to be called converging.
pub const MIN_CONVERGING_POINTS: usize = 4;

/// Marks a path `Converging` when it reaches the smallest epsilon, has at
/// least four points, and its last three steps strictly shrink.
pub fn classify(t: &mut Trajectory, smallest_epsilon: f64) {
    if t.status == TrajectoryStatus::Branch {
        return;
    }
    let reaches = t.last().epsilon == smallest_epsilon;
    let steps = t.steps();
    let shrinking = steps.len() >= 3 && steps[steps.len() - 3..].windows(2).all(|w| w[1] < w[0]);
    t.status = if reaches && t.points.len() >= MIN_CONVERGING_POINTS && shrinking {
        TrajectoryStatus::Converging
    } else {
        TrajectoryStatus::Truncated
    };
}
