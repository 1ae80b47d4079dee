//! Exact resonances of piecewise-constant potentials.
//!
//! On each constant piece the solution is propagated by the 2x2 matrix
//! `[[cos(kl), sin(kl)/k], [-k sin(kl), cos(kl)]]` with `k^2 = z - V`. All
//! entries are even in the local momentum, so no square-root branch is ever
//! chosen and the outgoing function `W(k)` is entire in `k`. Zeros are
//! counted by the argument principle on rectangles in the `k` plane and
//! polished by Newton's method.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{C64, I, ONE, ZERO};
use crate::model::{Geometry, ModelProblem, PotentialSpec};
use crate::winding::{circle_point, winding_number, WindingFailure};

/// Uniform boundary samples before adaptive refinement.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 1 << 14;
pub const NEWTON_MAX_ITERATIONS: usize = 100;
pub const NEWTON_TOL: f64 = 1e-12;
/// Radius of the circle whose winding certifies a refined zero's multiplicity.
pub const MULTIPLICITY_RADIUS: f64 = 1e-4;
const BOUNDARY_RETRIES: usize = 3;

pub type Transfer = [[C64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("no closed-form oracle: {0}")]
    Unsupported(String),
    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),
    #[error("a zero of W seems to lie on the boundary near k = {near}")]
    BoundaryZeroSuspected { near: C64 },
    #[error("Newton iteration from {seed} did not converge")]
    NewtonDiverged { seed: C64 },
}

/// Axis-aligned rectangle in the momentum plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl KRect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn contains(&self, k: C64) -> bool {
        (self.re_min..=self.re_max).contains(&k.re) && (self.im_min..=self.im_max).contains(&k.im)
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    /// Counterclockwise boundary point at arclength fraction `s`.
    fn boundary_point(&self, s: f64) -> C64 {
        let (w, h) = (self.width(), self.height());
        let per = 2.0 * (w + h);
        let d = s.rem_euclid(1.0) * per;
        if d < w {
            C64::new(self.re_min + d, self.im_min)
        } else if d < w + h {
            C64::new(self.re_max, self.im_min + (d - w))
        } else if d < 2.0 * w + h {
            C64::new(self.re_max - (d - w - h), self.im_max)
        } else {
            C64::new(self.re_min, self.im_max - (d - 2.0 * w - h))
        }
    }

    fn grown(&self, by: f64) -> Self {
        Self::new(self.re_min - by, self.re_max + by, self.im_min - by, self.im_max + by)
    }

    /// Halves along the longer side.
    fn split(&self) -> [Self; 2] {
        if self.width() >= self.height() {
            let m = 0.5 * (self.re_min + self.re_max);
            [
                Self::new(self.re_min, m, self.im_min, self.im_max),
                Self::new(m, self.re_max, self.im_min, self.im_max),
            ]
        } else {
            let m = 0.5 * (self.im_min + self.im_max);
            [
                Self::new(self.re_min, self.re_max, self.im_min, m),
                Self::new(self.re_min, self.re_max, m, self.im_max),
            ]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    /// The rectangle actually integrated over (possibly nudged outward).
    pub rect: KRect,
    pub count: i64,
    pub winding_samples: usize,
    /// Whether the boundary had to be moved off a suspected zero.
    pub perturbed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedZero {
    pub k: C64,
    pub multiplicity: i64,
    pub residual: f64,
    pub iterations: usize,
}

impl RefinedZero {
    pub fn energy(&self) -> C64 {
        self.k * self.k
    }
}

/// Constant pieces `(length, value)` covering the propagation interval.
fn pieces(problem: &ModelProblem) -> Result<(f64, Vec<(f64, f64)>), OracleError> {
    if problem.metric_beta != 0.0 {
        return Err(OracleError::Unsupported("metric perturbation".into()));
    }
    let segs = match &problem.potential {
        PotentialSpec::Zero => Vec::new(),
        PotentialSpec::PiecewiseConstant(s) => s.iter().filter(|s| s.value != 0.0).copied().collect(),
        PotentialSpec::RationalDecay { .. } => {
            return Err(OracleError::Unsupported("rational potential".into()))
        }
    };
    let mut cuts: Vec<f64> = segs.iter().flat_map(|s| [s.x_lo, s.x_hi]).collect();
    let start = match problem.geometry {
        Geometry::HalfLineDirichlet => 0.0,
        Geometry::FullLine => cuts.iter().copied().fold(f64::INFINITY, f64::min).min(0.0),
    };
    if segs.is_empty() {
        // Nothing to cross; propagate over [start, R0] so W stays meaningful.
        return Ok((start, vec![(problem.r0 - start, 0.0)]));
    }
    cuts.push(start);
    cuts.retain(|&x| x >= start);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let out = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let v: f64 = segs.iter().filter(|s| s.x_lo < mid && mid <= s.x_hi).map(|s| s.value).sum();
            (w[1] - w[0], v)
        })
        .collect();
    Ok((start, out))
}

/// `(cos(q l), sin(q l)/q, q sin(q l))` as functions of `q^2`.
fn even_parts(q2: C64, l: f64) -> (C64, C64, C64) {
    let x2 = q2 * (l * l);
    if x2.norm() < 1e-6 {
        // Taylor series to well below rounding for |q l| < 1e-3.
        let c = ONE - x2 / 2.0 + x2 * x2 / 24.0;
        let sinc = ONE - x2 / 6.0 + x2 * x2 / 120.0;
        return (c, sinc * l, q2 * sinc * l);
    }
    let q = q2.sqrt();
    let (s, c) = ((q * l).sin(), (q * l).cos());
    (c, s / q, q * s)
}

/// Propagator for `-u'' + V u = k^2 u` across a piece of length `l`.
pub fn segment_propagator(value: f64, l: f64, k: C64) -> Transfer {
    let (c, s_over_q, q_s) = even_parts(k * k - value, l);
    [[c, s_over_q], [-q_s, c]]
}

fn matmul(a: &Transfer, b: &Transfer) -> Transfer {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Maps `(u, u')` at the left end of the potential's support (the origin on
/// the half-line) to `(u, u')` at its right end `b`.
pub fn transfer_matrix(problem: &ModelProblem, k: C64) -> Result<Transfer, OracleError> {
    let (_, ps) = pieces(problem)?;
    Ok(ps.iter().fold([[ONE, ZERO], [ZERO, ONE]], |acc, &(l, v)| {
        matmul(&segment_propagator(v, l, k), &acc)
    }))
}

/// Propagation from the left end to any `end` beyond it. Past the support
/// the potential vanishes.
pub fn transfer_matrix_to(problem: &ModelProblem, k: C64, end: f64) -> Result<Transfer, OracleError> {
    let (start, ps) = pieces(problem)?;
    let ps = if problem.has_potential() { ps } else { Vec::new() };
    let mut acc = [[ONE, ZERO], [ZERO, ONE]];
    let mut x = start;
    for (l, v) in ps {
        if x >= end {
            break;
        }
        let step = l.min(end - x);
        acc = matmul(&segment_propagator(v, step, k), &acc);
        x += l;
    }
    if end > x {
        acc = matmul(&segment_propagator(0.0, end - x, k), &acc);
    }
    Ok(acc)
}

/// Right end `b` of the propagation interval.
pub fn support_end(problem: &ModelProblem) -> Result<f64, OracleError> {
    let (start, ps) = pieces(problem)?;
    Ok(start + ps.iter().map(|p| p.0).sum::<f64>())
}

/// `W(k) = u'(b) - i k u(b)` for the solution with `u(0) = 0, u'(0) = 1`.
/// On the full line the left data is the outgoing `e^{-ikx}` instead.
pub fn outgoing_condition(problem: &ModelProblem, k: C64) -> Result<C64, OracleError> {
    let t = transfer_matrix(problem, k)?;
    let (u0, du0) = match problem.geometry {
        Geometry::HalfLineDirichlet => (ZERO, ONE),
        Geometry::FullLine => (ONE, -I * k),
    };
    let u = t[0][0] * u0 + t[0][1] * du0;
    let du = t[1][0] * u0 + t[1][1] * du0;
    Ok(du - I * k * u)
}

/// Number of zeros of `W` inside `rect`, by the argument principle.
pub fn count_zeros(problem: &ModelProblem, rect: &KRect) -> Result<ZeroCount, OracleError> {
    count_zeros_with(problem, rect, DEFAULT_BOUNDARY_SAMPLES)
}

pub fn count_zeros_with(problem: &ModelProblem, rect: &KRect, samples: usize) -> Result<ZeroCount, OracleError> {
    if !(rect.re_max > rect.re_min && rect.im_max > rect.im_min) || !rect.re_min.is_finite() || !rect.im_min.is_finite()
    {
        return Err(OracleError::InvalidRectangle(format!("{rect:?} is degenerate")));
    }
    if rect.im_max >= 0.0 {
        return Err(OracleError::InvalidRectangle(format!(
            "Im k must stay negative, got im_max = {}",
            rect.im_max
        )));
    }
    pieces(problem)?;
    let scale = rect.width().max(rect.height());
    let mut current = *rect;
    let mut last_near = rect.center();
    for attempt in 0..=BOUNDARY_RETRIES {
        let r = current;
        let res = winding_number::<OracleError>(|s| outgoing_condition(problem, r.boundary_point(s)), samples, 0.0);
        match res {
            Ok(w) => {
                return Ok(ZeroCount {
                    rect: current,
                    count: w.winding,
                    winding_samples: w.samples,
                    perturbed: attempt > 0,
                })
            }
            Err(WindingFailure::Eval(e)) => return Err(e),
            Err(WindingFailure::Unresolved { s, .. }) => {
                last_near = r.boundary_point(s);
                // Nudge outward by an irrational-looking fraction of the size.
                let by = scale * 1e-5 * (1.0 + 0.618_033_988_75 * attempt as f64);
                current = rect.grown(by);
                if current.im_max >= 0.0 {
                    break;
                }
            }
        }
    }
    Err(OracleError::BoundaryZeroSuspected { near: last_near })
}

/// Newton refinement with a central-difference derivative.
pub fn refine_zero(problem: &ModelProblem, seed: C64) -> Result<RefinedZero, OracleError> {
    let w = |k: C64| outgoing_condition(problem, k);
    let mut k = seed;
    for it in 1..=NEWTON_MAX_ITERATIONS {
        let step = 1e-7 * (1.0 + k.norm());
        let d = (w(k + step)? - w(k - step)?) / (2.0 * step);
        let dk = w(k)? / d;
        if !dk.is_finite() {
            break;
        }
        k -= dk;
        if dk.norm() < NEWTON_TOL * (1.0 + k.norm()).max(1.0) {
            let residual = w(k)?.norm();
            let multiplicity = winding_number::<OracleError>(|s| w(circle_point(k, MULTIPLICITY_RADIUS, s)), 64, 0.0)
                .map_err(|e| match e {
                    WindingFailure::Eval(e) => e,
                    WindingFailure::Unresolved { .. } => OracleError::BoundaryZeroSuspected { near: k },
                })?
                .winding;
            return Ok(RefinedZero {
                k,
                multiplicity,
                residual,
                iterations: it,
            });
        }
    }
    Err(OracleError::NewtonDiverged { seed })
}

/// Smallest rectangle size bisection goes down to before giving up.
const MIN_RECT: f64 = 1e-7;

/// All zeros of `W` in `rect`, each refined and certified.
pub fn find_zeros(problem: &ModelProblem, rect: &KRect) -> Result<Vec<RefinedZero>, OracleError> {
    let mut found: Vec<RefinedZero> = Vec::new();
    let mut stack = vec![*rect];
    while let Some(r) = stack.pop() {
        let count = count_zeros(problem, &r)?;
        if count.count <= 0 {
            continue;
        }
        if count.count == 1 || r.width().max(r.height()) < MIN_RECT {
            if let Ok(z) = refine_zero(problem, r.center()) {
                if count.rect.contains(z.k) && z.multiplicity == count.count {
                    if !found.iter().any(|f| (f.k - z.k).norm() < 1e-9) {
                        found.push(z);
                    }
                    continue;
                }
            }
            if r.width().max(r.height()) < MIN_RECT {
                return Err(OracleError::NewtonDiverged { seed: r.center() });
            }
        }
        stack.extend(r.split());
    }
    found.sort_by(|a, b| a.k.re.total_cmp(&b.k.re).then(a.k.im.total_cmp(&b.k.im)));
    Ok(found)
}

/// Rectangle in energy, `re in [re_min, re_max]`, `im in [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl EnergyWindow {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn contains(&self, z: C64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }
}

/// Closest distance from `z` to the real axis that the k-plane search keeps.
const REAL_AXIS_GAP: f64 = 1e-9;

/// Momentum rectangle covering the principal square roots of a window in the
/// fourth quadrant of the energy plane (`re_min > 0`, `im_max <= 0`).
pub fn momentum_rect(window: &EnergyWindow) -> Result<KRect, OracleError> {
    if !(window.re_min > 0.0 && window.im_max <= 0.0 && window.re_max > window.re_min && window.im_max > window.im_min) {
        return Err(OracleError::InvalidRectangle(format!(
            "energy window {window:?} must lie in Re z > 0, Im z <= 0"
        )));
    }
    // sqrt maps the fourth quadrant conformally; its extremes sit on the corners.
    let corners = [
        C64::new(window.re_min, window.im_min),
        C64::new(window.re_min, window.im_max),
        C64::new(window.re_max, window.im_min),
        C64::new(window.re_max, window.im_max),
    ]
    .map(|z| z.sqrt());
    let re_min = corners.iter().map(|k| k.re).fold(f64::INFINITY, f64::min);
    let re_max = corners.iter().map(|k| k.re).fold(f64::NEG_INFINITY, f64::max);
    let im_min = corners.iter().map(|k| k.im).fold(f64::INFINITY, f64::min);
    let pad = 1e-3 * (re_max - re_min).max(1e-3);
    Ok(KRect::new(
        re_min - pad,
        re_max + pad,
        im_min - pad,
        -REAL_AXIS_GAP,
    ))
}

/// Oracle resonances whose energy lies in `window`.
pub fn find_resonances(problem: &ModelProblem, window: &EnergyWindow) -> Result<Vec<RefinedZero>, OracleError> {
    let rect = momentum_rect(window)?;
    Ok(find_zeros(problem, &rect)?
        .into_iter()
        .filter(|z| window.contains(z.energy()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn barrier() -> ModelProblem {
        ModelProblem::barrier(1.0, 2.0, 10.0, 2.0, 3.0)
    }

    #[test]
    fn free_propagator_matches_closed_form() {
        let k = C64::new(1.3, -0.4);
        let l = 2.5;
        let t = transfer_matrix(&ModelProblem::free_half_line(l, 3.0), k).unwrap();
        let expected = [[(k * l).cos(), (k * l).sin() / k], [-k * (k * l).sin(), (k * l).cos()]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((t[i][j] - expected[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sinc_limit() {
        let v = 4.0;
        let t = segment_propagator(v, 0.7, C64::new(2.0, 0.0));
        assert!((t[0][0] - 1.0).norm() < 1e-15 && (t[0][1] - 0.7).norm() < 1e-15);
        assert!(t[1][0].norm() < 1e-15 && (t[1][1] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn free_outgoing_is_exponential() {
        let p = ModelProblem::free_half_line(2.0, 3.0);
        let k = C64::new(0.8, -0.3);
        let w = outgoing_condition(&p, k).unwrap();
        assert!((w - (-I * k * 2.0).exp()).norm() < 1e-14);
        let c = count_zeros(&p, &KRect::new(0.1, 4.0, -2.0, -0.01)).unwrap();
        assert_eq!(c.count, 0);
    }

    #[test]
    fn barrier_resonance_is_certified() {
        let p = barrier();
        let z = refine_zero(&p, C64::new(2.32, -0.01)).unwrap();
        assert_eq!(z.multiplicity, 1);
        assert!(z.residual < 1e-10);
        assert!(z.energy().im < 0.0);
        assert!((z.k - C64::new(2.31909985, -0.009303105)).norm() < 1e-7);
    }

    #[test]
    fn window_search_finds_the_barrier_resonance() {
        let p = barrier();
        let found = find_resonances(&p, &EnergyWindow::new(5.0, 6.0, -0.5, 0.0)).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].multiplicity, 1);
    }

    #[test]
    fn rejects_upper_half_rectangle() {
        let r = count_zeros(&barrier(), &KRect::new(0.5, 3.5, -1.0, 0.5));
        assert!(matches!(r, Err(OracleError::InvalidRectangle(_))));
    }

    #[test]
    fn unsupported_problems() {
        let mut p = barrier();
        p.metric_beta = 0.2;
        assert!(matches!(transfer_matrix(&p, ONE), Err(OracleError::Unsupported(_))));
    }
}
