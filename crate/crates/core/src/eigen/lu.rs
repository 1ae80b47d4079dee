//! LU factorization of `A - zI` with partial pivoting, in band storage when the
//! matrix is narrow and dense storage otherwise.

use super::EigenError;
use crate::linalg::{cabs1, norm2, CMatrix, C64, ZERO};

/// Pivot magnitudes below this fraction of max|A - zI| are treated as singular.
pub const PIVOT_RATIO_FLOOR: f64 = 1e-14;

enum Storage {
    Dense(Vec<C64>),
    /// Row `i` holds columns `i - kl ..= i + kl + ku` at offsets `0..width`.
    Band { data: Vec<C64>, kl: usize, ku: usize },
}

/// Factorization of `A - zI`, reusable across right-hand sides.
pub struct ShiftedLu<'a> {
    a: &'a CMatrix,
    z: C64,
    n: usize,
    store: Storage,
    piv: Vec<usize>,
    pivot_ratio: f64,
}

impl<'a> ShiftedLu<'a> {
    pub fn new(a: &'a CMatrix, z: C64) -> Result<Self, EigenError> {
        if !a.is_square() {
            return Err(EigenError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let (kl, ku) = a.bandwidth();
        let mut scale = 0.0f64;
        for i in 0..n {
            for (j, v) in a.row(i).iter().enumerate() {
                let w = if i == j { *v - z } else { *v };
                scale = scale.max(cabs1(w));
            }
        }
        let banded = 3 * (2 * kl + ku + 1) < n;
        let (store, piv, min_pivot) = if banded {
            factor_band(a, z, kl, ku)
        } else {
            factor_dense(a, z)
        };
        let pivot_ratio = if scale > 0.0 { min_pivot / scale } else { 0.0 };
        if !(pivot_ratio >= PIVOT_RATIO_FLOOR) {
            return Err(EigenError::NearSingular { z, pivot_ratio });
        }
        Ok(Self {
            a,
            z,
            n,
            store,
            piv,
            pivot_ratio,
        })
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `(A - zI) x = b` with one step of iterative refinement.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n, "rhs length mismatch");
        let mut x = self.solve_raw(b);
        let r = self.residual(&x, b);
        let dx = self.solve_raw(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        x
    }

    /// `b - (A - zI) x`.
    pub fn residual(&self, x: &[C64], b: &[C64]) -> Vec<C64> {
        let (kl, ku) = match &self.store {
            Storage::Band { kl, ku, .. } => (*kl, *ku),
            Storage::Dense(_) => (self.n, self.n),
        };
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(kl);
                let hi = (i + ku + 1).min(self.n);
                let row = &self.a.row(i)[lo..hi];
                let ax: C64 = row.iter().zip(&x[lo..hi]).map(|(a, v)| a * v).sum();
                b[i] - (ax - self.z * x[i])
            })
            .collect()
    }

    pub fn relative_residual(&self, x: &[C64], b: &[C64]) -> f64 {
        let nb = norm2(b);
        let nr = norm2(&self.residual(x, b));
        if nb == 0.0 {
            nr
        } else {
            nr / nb
        }
    }

    fn solve_raw(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x = b.to_vec();
        match &self.store {
            Storage::Dense(lu) => {
                for k in 0..n {
                    x.swap(k, self.piv[k]);
                    let xk = x[k];
                    if xk != ZERO {
                        for i in (k + 1)..n {
                            x[i] -= lu[i * n + k] * xk;
                        }
                    }
                }
                for k in (0..n).rev() {
                    let row = &lu[k * n..(k + 1) * n];
                    let s: C64 = row[k + 1..].iter().zip(&x[k + 1..]).map(|(a, v)| a * v).sum();
                    x[k] = (x[k] - s) / row[k];
                }
            }
            Storage::Band { data, kl, ku } => {
                let (kl, ku) = (*kl, *ku);
                let w = 2 * kl + ku + 1;
                let at = |i: usize, j: usize| i * w + (j + kl - i);
                for k in 0..n {
                    x.swap(k, self.piv[k]);
                    let xk = x[k];
                    if xk != ZERO {
                        for i in (k + 1)..(k + kl + 1).min(n) {
                            x[i] -= data[at(i, k)] * xk;
                        }
                    }
                }
                for k in (0..n).rev() {
                    let hi = (k + kl + ku + 1).min(n);
                    let mut s = ZERO;
                    for j in (k + 1)..hi {
                        s += data[at(k, j)] * x[j];
                    }
                    x[k] = (x[k] - s) / data[at(k, k)];
                }
            }
        }
        x
    }
}

fn factor_dense(a: &CMatrix, z: C64) -> (Storage, Vec<usize>, f64) {
    let n = a.rows();
    let mut lu = a.shifted(z).into_vec();
    let mut piv = vec![0; n];
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let mut p = k;
        let mut best = cabs1(lu[k * n + k]);
        for i in (k + 1)..n {
            let v = cabs1(lu[i * n + k]);
            if v > best {
                best = v;
                p = i;
            }
        }
        piv[k] = p;
        min_pivot = min_pivot.min(best);
        if best == 0.0 {
            continue;
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
        }
        let pivot = lu[k * n + k];
        let (head, tail) = lu.split_at_mut((k + 1) * n);
        let prow = &head[k * n + k + 1..k * n + n];
        for i in 0..(n - k - 1) {
            let row = &mut tail[i * n..(i + 1) * n];
            let l = row[k] / pivot;
            row[k] = l;
            if l != ZERO {
                for (r, &u) in row[k + 1..].iter_mut().zip(prow) {
                    *r -= l * u;
                }
            }
        }
    }
    (Storage::Dense(lu), piv, min_pivot)
}

fn factor_band(a: &CMatrix, z: C64, kl: usize, ku: usize) -> (Storage, Vec<usize>, f64) {
    let n = a.rows();
    let w = 2 * kl + ku + 1;
    let at = |i: usize, j: usize| i * w + (j + kl - i);
    let mut data = vec![ZERO; n * w];
    for i in 0..n {
        let lo = i.saturating_sub(kl);
        let hi = (i + ku + 1).min(n);
        for j in lo..hi {
            data[at(i, j)] = a[(i, j)];
        }
        data[at(i, i)] -= z;
    }
    let mut piv = vec![0; n];
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let last_row = (k + kl + 1).min(n);
        let mut p = k;
        let mut best = cabs1(data[at(k, k)]);
        for i in (k + 1)..last_row {
            let v = cabs1(data[at(i, k)]);
            if v > best {
                best = v;
                p = i;
            }
        }
        piv[k] = p;
        min_pivot = min_pivot.min(best);
        if best == 0.0 {
            continue;
        }
        let last_col = (k + kl + ku + 1).min(n);
        if p != k {
            for j in k..last_col {
                data.swap(at(k, j), at(p, j));
            }
        }
        let pivot = data[at(k, k)];
        for i in (k + 1)..last_row {
            let l = data[at(i, k)] / pivot;
            data[at(i, k)] = l;
            if l != ZERO {
                for j in (k + 1)..last_col {
                    let u = data[at(k, j)];
                    data[at(i, j)] -= l * u;
                }
            }
        }
    }
    (Storage::Band { data, kl, ku }, piv, min_pivot)
}
