//! Riesz projection onto the eigenvalues inside a circle, by trapezoid
//! quadrature of the resolvent applied to random probes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lu::ShiftedLu;
use super::{EigenError, ProjectionResult};
use crate::linalg::{dotc, norm2, CMatrix, C64, ZERO};

const MAX_PROBES: usize = 40;
const PROBE_SEED: u64 = 0x5EED_CAFE;
/// Columns whose norm falls below this (relative to unit probes) after
/// orthogonalization are treated as quadrature noise.
const RANGE_TOL: f64 = 1e-6;

/// Applies the quadrature projector to every column of `x`.
fn apply(
    a: &CMatrix,
    center: C64,
    radius: f64,
    nodes: usize,
    x: &[Vec<C64>],
) -> Result<Vec<Vec<C64>>, EigenError> {
    let n = a.rows();
    let mut out = vec![vec![ZERO; n]; x.len()];
    for m in 0..nodes {
        let phase = C64::from_polar(1.0, 2.0 * PI * (m as f64 + 0.5) / nodes as f64);
        let z = center + radius * phase;
        let lu = ShiftedLu::new(a, z).map_err(|e| match e {
            EigenError::NearSingular { pivot_ratio, .. } => {
                EigenError::ContourTooClose { z, pivot_ratio }
            }
            other => other,
        })?;
        // (1/2πi)∮(z - A)^{-1} dz with dz = i r e^{iφ} dφ gives -(r e^{iφ}/M)(A - z)^{-1}.
        let w = -(radius * phase) / nodes as f64;
        for (col, acc) in x.iter().zip(out.iter_mut()) {
            let y = lu.solve(col);
            for (o, v) in acc.iter_mut().zip(y) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

pub fn projection_rank(
    a: &CMatrix,
    center: C64,
    radius: f64,
    quadrature_points: usize,
) -> Result<ProjectionResult, EigenError> {
    if !a.is_square() {
        return Err(EigenError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !(radius > 0.0) || quadrature_points < 4 {
        return Err(EigenError::BadContour {
            radius,
            quadrature_points,
        });
    }
    let n = a.rows();
    let p = n.min(MAX_PROBES);
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let probes: Vec<Vec<C64>> = (0..p)
        .map(|_| {
            let v: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let s = norm2(&v);
            v.into_iter().map(|z| z / s).collect()
        })
        .collect();

    let images = apply(a, center, radius, quadrature_points, &probes)?;

    // Rank-revealing modified Gram-Schmidt with column pivoting by norm.
    let mut cols = images;
    let mut basis: Vec<Vec<C64>> = Vec::new();
    while let Some((idx, norm)) = cols
        .iter()
        .enumerate()
        .map(|(i, c)| (i, norm2(c)))
        .max_by(|x, y| x.1.total_cmp(&y.1))
    {
        if norm <= RANGE_TOL {
            break;
        }
        let q: Vec<C64> = cols.swap_remove(idx).into_iter().map(|z| z / norm).collect();
        for c in cols.iter_mut() {
            let d = dotc(&q, c);
            for (ci, qi) in c.iter_mut().zip(&q) {
                *ci -= d * qi;
            }
        }
        basis.push(q);
    }

    let r = basis.len();
    if r == 0 {
        return Ok(ProjectionResult {
            center,
            radius,
            quadrature_points,
            trace_value: ZERO,
            rank: 0,
            idempotency_defect: 0.0,
        });
    }
    let pu = apply(a, center, radius, quadrature_points, &basis)?;
    let compressed = CMatrix::from_fn(r, r, |i, j| dotc(&basis[i], &pu[j]));
    let trace_value = compressed.trace();

    // On an invariant range, Π U = U; the defect measures how far it is from that.
    let mut defect = 0.0f64;
    for (u, v) in basis.iter().zip(&pu) {
        let d: f64 = u.iter().zip(v).map(|(x, y)| (y - x).norm_sqr()).sum();
        defect += d;
    }
    let idempotency_defect = defect.sqrt();

    let gram = compressed.adjoint().matmul(&compressed);
    let sv2 = super::eig_dense(&gram)?.eigenvalues;
    let rank = sv2.iter().filter(|l| l.re > 0.25).count();

    Ok(ProjectionResult {
        center,
        radius,
        quadrature_points,
        trace_value,
        rank,
        idempotency_defect,
    })
}
