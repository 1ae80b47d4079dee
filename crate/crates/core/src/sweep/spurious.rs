//! Separating CAP-string eigenvalues from resonance candidates.
//!
//! The string inherited from the rotated oscillator is self-similar: when
//! epsilon shrinks by `r`, every string eigenvalue moves to roughly `r^(1/2)`
//! times its old position. A resonance candidate instead stays put.
//!
//! Near the ray `arg z = -pi/4` the string eigenvalues keep their order by
//! modulus from one level to the next, so the k-th one is continued to the
//! k-th one of the neighbouring levels and the exponent is the slope of
//! `log |z|` against `log eps`. A best-fit scale alone is unreliable there:
//! the string is an arithmetic lattice, and a wrong exponent can map one
//! lattice point onto another. Away from the ray we look for the exponent `q`
//! in `[0, 1]` for which `z r^q` best lands on eigenvalues of the
//! neighbouring levels.

use serde::{Deserialize, Serialize};

use super::matching::Level;
use crate::linalg::C64;

/// Exponents in this closed range mark the string.
pub const BRANCH_EXPONENT_RANGE: (f64, f64) = (0.35, 0.65);
/// Largest relative miss `|z r^q - w| / |z|` that still counts as a match.
pub const SCALE_MATCH_TOL: f64 = 0.05;
/// Displacement under grid refinement above this multiple of the median marks an artifact.
pub const REFINEMENT_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpuriousClass {
    Candidate,
    Branch,
    Artifact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classified {
    pub z: C64,
    pub class: SpuriousClass,
    /// Best scale exponent, when a match was found.
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub candidate: Vec<C64>,
    pub branch: Vec<C64>,
    pub artifact: Vec<C64>,
    /// Per-eigenvalue detail, in input order.
    pub detail: Vec<Classified>,
}

/// Best `(q, relative miss)` for mapping `z` by `z r^q` onto each target
/// list at once, where every target list carries its own ratio `r`. Using
/// two neighbouring levels rules out the aliases of a self-similar lattice,
/// which a single level cannot tell apart.
pub fn scale_exponent(z: C64, targets: &[(f64, &[C64])]) -> Option<(f64, f64)> {
    if targets.is_empty() || targets.iter().any(|t| t.1.is_empty()) || z.norm() == 0.0 {
        return None;
    }
    let miss = |q: f64| {
        targets
            .iter()
            .map(|(r, ws)| {
                let img = z * r.powf(q);
                ws.iter().map(|w| (img - w).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            / z.norm()
    };
    let grid = 400;
    let (mut best_q, mut best) = (0.0, miss(0.0));
    for i in 1..=grid {
        let q = i as f64 / grid as f64;
        let m = miss(q);
        if m < best {
            best = m;
            best_q = q;
        }
    }
    // Golden-section polish inside the bracketing grid cells.
    let (mut a, mut b) = ((best_q - 1.0 / grid as f64).max(0.0), (best_q + 1.0 / grid as f64).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if miss(c) < miss(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let q = 0.5 * (a + b);
    let m = miss(q);
    if m < best {
        best_q = q;
        best = m;
    }
    Some((best_q, best))
}

/// Levels compared against: the next two, or the previous ones near the end.
pub const COMPARISON_LEVELS: usize = 2;
/// Eigenvalues with `|arg z + pi/4|` below this are continued by rank.
pub const STRING_ARG_TOL: f64 = 0.2;

fn on_string_ray(z: C64) -> bool {
    z.norm() > 0.0 && (z.arg() + std::f64::consts::FRAC_PI_4).abs() < STRING_ARG_TOL
}

/// Eigenvalues near the string ray, by increasing modulus.
fn ray_order(zs: &[C64]) -> Vec<C64> {
    let mut v: Vec<C64> = zs.iter().copied().filter(|z| on_string_ray(*z)).collect();
    v.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    v
}

/// Slope of `log |z|` against `log eps` along the rank-`rank` continuation.
fn rank_exponent(here: (f64, C64), others: &[(f64, Vec<C64>)], rank: usize) -> Option<f64> {
    let mut pts = vec![(here.0.ln(), here.1.norm().ln())];
    for (eps, ray) in others {
        if let Some(w) = ray.get(rank) {
            pts.push((eps.ln(), w.norm().ln()));
        }
    }
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Classifies the eigenvalues of `levels[index]` against the next
/// [`COMPARISON_LEVELS`] levels (earlier ones near the end of the schedule). `refined` holds eigenvalues of the
/// same operator on a finer grid, when available.
pub fn filter_spurious(levels: &[Level], index: usize, refined: Option<&[C64]>) -> Partition {
    assert!(levels.len() >= 2, "need two epsilon levels");
    let here = &levels[index];
    let others: Vec<usize> = if index + COMPARISON_LEVELS < levels.len() {
        (index + 1..=index + COMPARISON_LEVELS).collect()
    } else {
        let lo = index.saturating_sub(COMPARISON_LEVELS);
        (lo..levels.len()).filter(|&j| j != index).take(COMPARISON_LEVELS).collect()
    };
    let targets: Vec<(f64, &[C64])> = others
        .iter()
        .map(|&j| (levels[j].epsilon / here.epsilon, levels[j].eigenvalues.as_slice()))
        .collect();
    let here_ray = ray_order(&here.eigenvalues);
    let other_rays: Vec<(f64, Vec<C64>)> = others
        .iter()
        .map(|&j| (levels[j].epsilon, ray_order(&levels[j].eigenvalues)))
        .collect();
    let moved_too_far: Vec<bool> = match refined {
        Some(fine) if !fine.is_empty() && !here.eigenvalues.is_empty() => {
            let shifts: Vec<f64> = here
                .eigenvalues
                .iter()
                .map(|z| fine.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min))
                .collect();
            let mut sorted = shifts.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[sorted.len() / 2];
            shifts.iter().map(|s| *s > REFINEMENT_FACTOR * median && *s > 0.0).collect()
        }
        _ => vec![false; here.eigenvalues.len()],
    };
    let mut out = Partition::default();
    for (i, &z) in here.eigenvalues.iter().enumerate() {
        let by_rank = here_ray
            .iter()
            .position(|w| *w == z)
            .and_then(|rank| rank_exponent((here.epsilon, z), &other_rays, rank))
            .map(|q| (q, 0.0));
        let fit = by_rank.or_else(|| scale_exponent(z, &targets).filter(|(_, miss)| *miss <= SCALE_MATCH_TOL));
        let (class, exponent) = match fit {
            _ if moved_too_far[i] => (SpuriousClass::Artifact, fit.map(|f| f.0)),
            None => (SpuriousClass::Artifact, None),
            Some((q, _)) if (BRANCH_EXPONENT_RANGE.0..=BRANCH_EXPONENT_RANGE.1).contains(&q) => {
                (SpuriousClass::Branch, Some(q))
            }
            Some((q, _)) => (SpuriousClass::Candidate, Some(q)),
        };
        match class {
            SpuriousClass::Candidate => out.candidate.push(z),
            SpuriousClass::Branch => out.branch.push(z),
            SpuriousClass::Artifact => out.artifact.push(z),
        }
        out.detail.push(Classified { z, class, exponent });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn string(eps: f64, n: usize) -> Vec<C64> {
        (0..n)
            .map(|k| C64::from_polar(eps.sqrt() * (2 * k + 1) as f64, -std::f64::consts::FRAC_PI_4))
            .collect()
    }

    #[test]
    fn exact_string_is_branch() {
        let levels: Vec<Level> = [1e-2, 10f64.powf(-2.5), 1e-3]
            .iter()
            .map(|&e| Level {
                epsilon: e,
                eigenvalues: string(e, 8),
                residual: 0.0,
            })
            .collect();
        for i in 0..3 {
            let p = filter_spurious(&levels, i, None);
            // The largest values of a level may have no image in the next one.
            assert!(p.candidate.is_empty(), "{p:?}");
            assert!(p.branch.len() >= 4);
            for d in p.detail.iter().filter(|d| d.class == SpuriousClass::Branch) {
                assert!((d.exponent.unwrap() - 0.5).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fixed_point_is_candidate_and_loner_is_artifact() {
        let z = C64::new(5.0, -0.1);
        let levels = vec![
            Level {
                epsilon: 1e-2,
                eigenvalues: vec![z, C64::new(-3.0, 2.0)],
                residual: 0.0,
            },
            Level {
                epsilon: 1e-3,
                eigenvalues: vec![z + 1e-4],
                residual: 0.0,
            },
        ];
        let p = filter_spurious(&levels, 0, None);
        assert_eq!(p.candidate, vec![z]);
        assert_eq!(p.artifact, vec![C64::new(-3.0, 2.0)]);
    }

    #[test]
    fn refinement_outlier_is_artifact() {
        let zs = vec![C64::new(1.0, -0.1), C64::new(2.0, -0.1), C64::new(3.0, -0.1)];
        let levels = vec![
            Level {
                epsilon: 1e-2,
                eigenvalues: zs.clone(),
                residual: 0.0,
            },
            Level {
                epsilon: 1e-3,
                eigenvalues: zs.clone(),
                residual: 0.0,
            },
        ];
        let fine = vec![C64::new(1.0, -0.1001), C64::new(2.0001, -0.1), C64::new(3.05, -0.1)];
        let p = filter_spurious(&levels, 0, Some(&fine));
        assert_eq!(p.artifact, vec![C64::new(3.0, -0.1)]);
        assert_eq!(p.candidate.len(), 2);
    }
}
