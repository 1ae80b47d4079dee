//! Fits `z(eps) = z0 + c eps^p` to the tail of a path.

use thiserror::Error;

use super::matching::{Extrapolation, Trajectory};
use crate::linalg::C64;

/// Points used for the fit.
pub const FIT_POINTS: usize = 4;
/// Largest spread allowed between exponent estimates from point triples.
pub const MAX_EXPONENT_SPREAD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtrapolationError {
    #[error("need at least {FIT_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("the path does not move; no rate can be fitted")]
    Stationary,
    #[error("exponent estimates from point triples disagree: {estimates:?}")]
    FitUnstable { estimates: Vec<f64> },
}

/// Estimates the rate `p` from the last [`FIT_POINTS`] points, then fits
/// `z0` and `c` by least squares with `p` held fixed.
///
/// Successive differences `z_{i+1} - z_i` of the model are exactly
/// `c (eps_{i+1}^p - eps_i^p)`, so on a geometric schedule their logs are
/// linear in `log eps` with slope `p`. The slope is fitted by least squares.
/// Each consecutive triple also gives its own estimate; they must agree to
/// within [`MAX_EXPONENT_SPREAD`].
pub fn extrapolate(t: &Trajectory) -> Result<Extrapolation, ExtrapolationError> {
    let n = t.points.len();
    if n < FIT_POINTS {
        return Err(ExtrapolationError::TooFewPoints(n));
    }
    let tail = &t.points[n - FIT_POINTS..];
    let eps: Vec<f64> = tail.iter().map(|p| p.epsilon).collect();
    let zs: Vec<C64> = tail.iter().map(|p| p.z).collect();
    let diffs: Vec<f64> = zs.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    if diffs.iter().any(|d| !(*d > 0.0)) {
        return Err(ExtrapolationError::Stationary);
    }
    // Differences are tagged with the larger epsilon of their pair.
    let xs: Vec<f64> = eps[..FIT_POINTS - 1].iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
    let p = slope(&xs, &ys);
    let estimates: Vec<f64> = (0..diffs.len() - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    let lo = estimates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo <= MAX_EXPONENT_SPREAD) || !p.is_finite() || p <= 0.0 {
        return Err(ExtrapolationError::FitUnstable { estimates });
    }
    // Least squares for z = z0 + c * eps^p with basis (1, eps^p).
    let b: Vec<f64> = eps.iter().map(|e| e.powf(p)).collect();
    let m = FIT_POINTS as f64;
    let sb: f64 = b.iter().sum();
    let sbb: f64 = b.iter().map(|x| x * x).sum();
    let sz: C64 = zs.iter().sum();
    let sbz: C64 = zs.iter().zip(&b).map(|(z, x)| *z * *x).sum();
    let det = m * sbb - sb * sb;
    let c = (sbz * m - sz * sb) / det;
    let z0 = (sz - c * sb) / m;
    let fit_residual = zs
        .iter()
        .zip(&b)
        .map(|(z, x)| (*z - z0 - c * *x).norm())
        .fold(0.0, f64::max);
    Ok(Extrapolation {
        limit: z0,
        exponent: p,
        fit_residual,
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
