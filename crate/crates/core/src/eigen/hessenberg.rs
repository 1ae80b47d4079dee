//! Balancing and Householder reduction to upper Hessenberg form.

use crate::linalg::{CMatrix, C64, ONE, ZERO};

/// Diagonal similarity scaling by powers of two (Parlett-Reinsch) that evens out
/// row and column norms. Eigenvalues are unchanged exactly.
pub fn balance(a: &mut CMatrix) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = a.rows();
    if n < 2 {
        return;
    }
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += crate::linalg::cabs1(a[(j, i)]);
                    r += crate::linalg::cabs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= SQRDX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= SQRDX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for z in a.row_mut(i) {
                    *z *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Generates an elementary reflector `H = I - tau [1; v][1; v]^H` with
/// `H^H [alpha; x] = [beta; 0]`, overwriting `alpha` with `beta` and `x` with `v`.
pub fn householder(alpha: &mut C64, x: &mut [C64]) -> C64 {
    let xnorm = crate::linalg::norm2(x);
    if xnorm == 0.0 && alpha.im == 0.0 {
        return ZERO;
    }
    let mag = (alpha.re.hypot(alpha.im)).hypot(xnorm);
    let beta = if alpha.re >= 0.0 { -mag } else { mag };
    let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = ONE / (*alpha - beta);
    for v in x.iter_mut() {
        *v *= scale;
    }
    *alpha = C64::new(beta, 0.0);
    tau
}

/// In-place reduction to upper Hessenberg form by Householder similarities.
/// Entries below the first subdiagonal are set to exactly zero.
pub fn reduce(a: &mut CMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut u = vec![ZERO; n];
    let mut s = vec![ZERO; n];
    for k in 0..n - 2 {
        // Banded inputs leave long runs of exact zeros at the bottom of each
        // column; the reflector only needs to span the nonzero part.
        let last = (k + 1..n).rev().find(|&i| a[(i, k)] != ZERO).unwrap_or(k + 1);
        let len = last - k;
        let mut alpha = a[(k + 1, k)];
        let tail = &mut u[1..len];
        for (i, t) in tail.iter_mut().enumerate() {
            *t = a[(k + 2 + i, k)];
        }
        let tau = householder(&mut alpha, tail);
        if tau == ZERO {
            continue;
        }
        u[0] = ONE;
        let u = &u[..len];
        a[(k + 1, k)] = alpha;
        for i in (k + 2)..=last {
            a[(i, k)] = ZERO;
        }
        let ctau = tau.conj();

        // Left: A[k+1.., k+1..] <- (I - conj(tau) u u^H) A
        let cols = k + 1..n;
        let acc = &mut s[..cols.len()];
        acc.iter_mut().for_each(|z| *z = ZERO);
        for (i, &ui) in u.iter().enumerate() {
            let cu = ui.conj();
            let row = &a.row(k + 1 + i)[cols.clone()];
            for (acc_j, &x) in acc.iter_mut().zip(row) {
                *acc_j += cu * x;
            }
        }
        for (i, &ui) in u.iter().enumerate() {
            let f = ctau * ui;
            let row = &mut a.row_mut(k + 1 + i)[cols.clone()];
            for (x, &acc_j) in row.iter_mut().zip(acc.iter()) {
                *x -= f * acc_j;
            }
        }

        // Right: A[.., k+1..] <- A (I - tau u u^H)
        for r in 0..n {
            let row = &mut a.row_mut(r)[k + 1..=last];
            let mut t = ZERO;
            for (&x, &ui) in row.iter().zip(u) {
                t += x * ui;
            }
            if t == ZERO {
                continue;
            }
            let f = tau * t;
            for (x, &ui) in row.iter_mut().zip(u) {
                *x -= f * ui.conj();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflector_annihilates_tail() {
        let orig = [C64::new(1.0, 2.0), C64::new(-0.5, 0.3), C64::new(2.0, -1.0)];
        let mut alpha = orig[0];
        let mut v = orig[1..].to_vec();
        let tau = householder(&mut alpha, &mut v);
        // H^H x with H = I - tau w w^H, w = [1; v]
        let w = [ONE, v[0], v[1]];
        let wx: C64 = w.iter().zip(&orig).map(|(a, b)| a.conj() * b).sum();
        let out: Vec<C64> = orig
            .iter()
            .zip(&w)
            .map(|(x, wi)| x - tau.conj() * wi * wx)
            .collect();
        assert!((out[0] - alpha).norm() < 1e-14);
        assert!(out[1].norm() < 1e-14 && out[2].norm() < 1e-14);
    }

    #[test]
    fn reduction_preserves_trace_and_zeros_below_subdiagonal() {
        let mut a = CMatrix::from_fn(7, 7, |i, j| {
            C64::new(((i * 7 + j) as f64).sin(), ((i + 3 * j) as f64).cos())
        });
        let tr = a.trace();
        reduce(&mut a);
        for i in 0..7usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(a[(i, j)], ZERO);
            }
        }
        assert!((a.trace() - tr).norm() < 1e-12);
    }
}
