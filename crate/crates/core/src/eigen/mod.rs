//! Dense eigenvalues and resolvent-based spectral projections.
//!
//! `eig_dense` balances, reduces to Hessenberg form and runs shifted QR.
//! `projection_rank` certifies how many eigenvalues sit inside a circle
//! without trusting the QR output.

pub mod hessenberg;
mod lu;
mod projection;
mod qr;

use thiserror::Error;

use crate::linalg::{CMatrix, C64};

pub use lu::{ShiftedLu, PIVOT_RATIO_FLOOR};
pub use projection::projection_rank;

/// Largest dimension accepted by [`eig_dense`].
pub const MAX_DENSE_DIM: usize = 6000;

/// Total QR sweeps allowed per unit of dimension.
pub const SWEEPS_PER_DIM: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension {0} exceeds the dense limit {MAX_DENSE_DIM}")]
    TooLarge(usize),
    #[error("QR iteration stalled after {sweeps} sweeps with {remaining} eigenvalues left")]
    NoConvergence { sweeps: usize, remaining: usize },
    #[error("A - zI is numerically singular at z = {z} (pivot ratio {pivot_ratio:e})")]
    NearSingular { z: C64, pivot_ratio: f64 },
    #[error("quadrature node {z} is too close to the spectrum (pivot ratio {pivot_ratio:e})")]
    ContourTooClose { z: C64, pivot_ratio: f64 },
    #[error("invalid circle: radius {radius}, {quadrature_points} nodes")]
    BadContour { radius: f64, quadrature_points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub eigenvalues: Vec<C64>,
    /// Relative backward error estimate of the computed Schur form.
    pub residual_bound: f64,
    /// QR sweeps performed.
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub center: C64,
    pub radius: f64,
    pub quadrature_points: usize,
    pub trace_value: C64,
    pub rank: usize,
    pub idempotency_defect: f64,
}

pub fn eig_dense(a: &CMatrix) -> Result<EigenResult, EigenError> {
    if !a.is_square() {
        return Err(EigenError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > MAX_DENSE_DIM {
        return Err(EigenError::TooLarge(n));
    }
    if !a.is_finite() {
        return Err(EigenError::NonFinite);
    }
    let mut h = a.clone();
    hessenberg::balance(&mut h);
    hessenberg::reduce(&mut h);
    let norm = h.norm_fro();
    let mut data = h.into_vec();
    match qr::hessenberg_qr(&mut data, n, SWEEPS_PER_DIM * n.max(1)) {
        Ok(out) => {
            let residual_bound = if norm > 0.0 {
                (out.deflated_mass + n as f64 * f64::EPSILON * norm) / norm
            } else {
                0.0
            };
            Ok(EigenResult {
                eigenvalues: out.eigenvalues,
                residual_bound,
                iterations: out.sweeps,
            })
        }
        Err(f) => Err(EigenError::NoConvergence {
            sweeps: f.sweeps,
            remaining: f.remaining,
        }),
    }
}

/// Solves `(A - zI) x = b` by pivoted LU plus one refinement step.
pub fn resolvent_solve(a: &CMatrix, z: C64, rhs: &[C64]) -> Result<Vec<C64>, EigenError> {
    let lu = ShiftedLu::new(a, z)?;
    Ok(lu.solve(rhs))
}
