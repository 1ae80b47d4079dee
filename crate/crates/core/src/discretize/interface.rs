//! Corrections for stencils that straddle a potential discontinuity.
//!
//! Across a jump `[c]` in the potential, `u` and `u'` stay continuous but
//! `u''`, `u'''` and `u''''` jump by amounts fixed by the equation itself:
//!
//! ```text
//! [u'']      = [c] u / m
//! [u''']     = ([c] u' - 2 m' [u'']) / m
//! m [u'''']  = [c] (u''_+ + u''_- + m' u' / m) - 3 m' [u'''] - 3 m'' [u'']
//! ```
//!
//! The one-sided values are themselves linear functionals of the nodal
//! unknowns (six-point Fornberg weights on each side), so every stencil value
//! taken from the far side can be replaced by the near side's smooth
//! extension, `u_j -/+ sum_k J_k (x_j - s)^k / k!`, without leaving the linear
//! algebra. This keeps the fourth-order rate that a plain stencil loses at a jump.

use super::stencil::fornberg;
use super::{add_entry, DiscretizeError, SparseRow};
use crate::linalg::C64;

const SIDE_NODES: usize = 6;
/// Interfaces must sit this many spacings from each other and from grid ends.
const MIN_SEPARATION: f64 = 7.0;

#[derive(Debug, Clone, Copy)]
pub(super) struct Jump {
    pub position: f64,
    /// `c(s+) - c(s-)`.
    pub jump: f64,
    pub m: f64,
    pub dm: f64,
    pub d2m: f64,
}

pub(super) fn check_spacing(jumps: &[Jump], lo: f64, hi: f64, h: f64) -> Result<(), DiscretizeError> {
    let mut prev = lo;
    for j in jumps {
        if (j.position - prev) < MIN_SEPARATION * h - 1e-9 * h {
            return Err(DiscretizeError::GridTooCoarse(format!(
                "potential jump at {} is within {MIN_SEPARATION} spacings of {prev}",
                j.position
            )));
        }
        prev = j.position;
    }
    if !jumps.is_empty() && (hi - prev) < MIN_SEPARATION * h - 1e-9 * h {
        return Err(DiscretizeError::GridTooCoarse(format!(
            "potential jump at {prev} is within {MIN_SEPARATION} spacings of {hi}"
        )));
    }
    Ok(())
}

type Functional = Vec<(usize, f64)>;

fn combine(terms: &[(f64, &Functional)]) -> Functional {
    let mut out: Functional = Vec::new();
    for &(a, f) in terms {
        if a == 0.0 {
            continue;
        }
        for &(j, w) in f {
            if let Some(e) = out.iter_mut().find(|e| e.0 == j) {
                e.1 += a * w;
            } else {
                out.push((j, a * w));
            }
        }
    }
    out
}

pub(super) fn apply(jump: &Jump, xs: &[f64], rows: &mut [SparseRow]) -> Result<(), DiscretizeError> {
    let last = xs.len() - 1;
    let h = xs[1] - xs[0];
    let s = jump.position;
    let tol = 1e-9 * h;
    // Largest node at or left of s; a node sitting on s belongs to the left side.
    let js = ((s - xs[0] + tol) / h).floor() as usize;
    let aligned = (xs[js] - s).abs() <= tol;
    if js + 1 < SIDE_NODES || js + SIDE_NODES > last {
        return Err(DiscretizeError::GridTooCoarse(format!(
            "potential jump at {s} too close to the grid end"
        )));
    }
    let left: Vec<usize> = (js + 1 - SIDE_NODES..=js).collect();
    let right: Vec<usize> = if aligned {
        (js..js + SIDE_NODES).collect()
    } else {
        (js + 1..=js + SIDE_NODES).collect()
    };
    let wl = fornberg(s, &left.iter().map(|&j| xs[j]).collect::<Vec<_>>(), 2);
    let wr = fornberg(s, &right.iter().map(|&j| xs[j]).collect::<Vec<_>>(), 2);
    let lin = |nodes: &[usize], w: &[f64]| -> Functional { nodes.iter().copied().zip(w.iter().copied()).collect() };
    let u0 = lin(&left, &wl[0]);
    let u1 = lin(&left, &wl[1]);
    let u2m = lin(&left, &wl[2]);
    let u2p = lin(&right, &wr[2]);

    let (c, m, dm, d2m) = (jump.jump, jump.m, jump.dm, jump.d2m);
    let j2 = combine(&[(c / m, &u0)]);
    let j3 = combine(&[(c / m, &u1), (-2.0 * dm / m, &j2)]);
    let j4 = combine(&[
        (c / m, &u2p),
        (c / m, &u2m),
        (c * dm / (m * m), &u1),
        (-3.0 * dm / m, &j3),
        (-3.0 * d2m / m, &j2),
    ]);

    let is_left = |j: usize| xs[j] <= s + tol;
    let lo_row = js.saturating_sub(2).max(1);
    let hi_row = (js + 3).min(last - 1);
    for i in lo_row..=hi_row {
        let r = i - 1;
        let row_left = is_left(i);
        let original = rows[r].clone();
        for (j, coef) in original {
            if is_left(j) == row_left {
                continue;
            }
            let d = xs[j] - s;
            if d.abs() <= tol {
                continue;
            }
            // Far-side value minus the jump part gives the near side's extension.
            let sign = if is_left(j) { 1.0 } else { -1.0 };
            let corr = combine(&[
                (d * d / 2.0, &j2),
                (d * d * d / 6.0, &j3),
                (d * d * d * d / 24.0, &j4),
            ]);
            for (k, w) in corr {
                add_entry(&mut rows[r], k, coef * C64::new(sign * w, 0.0));
            }
        }
    }
    Ok(())
}
