//! Single-shift complex QR iteration on an upper Hessenberg matrix,
//! eigenvalues only. Follows the structure of LAPACK's `zlahqr`: real
//! subdiagonals, Wilkinson shifts, Ahues-Tisseur deflation and exceptional
//! shifts every tenth sweep without progress.

use super::hessenberg::householder;
use crate::linalg::{cabs1, C64, ONE, ZERO};

pub(crate) struct QrOutcome {
    pub eigenvalues: Vec<C64>,
    pub sweeps: usize,
    /// Sum of |h| over subdiagonal entries that were set to zero on deflation.
    pub deflated_mass: f64,
}

pub(crate) struct QrFailure {
    pub sweeps: usize,
    pub remaining: usize,
}

const EXCEPTIONAL_EVERY: usize = 10;
const EXCEPTIONAL_FACTOR: f64 = 0.75;

/// `h` is row-major `n x n` upper Hessenberg and is destroyed.
pub(crate) fn hessenberg_qr(
    h: &mut [C64],
    n: usize,
    sweep_budget: usize,
) -> Result<QrOutcome, QrFailure> {
    let mut w = vec![ZERO; n];
    if n == 0 {
        return Ok(QrOutcome {
            eigenvalues: w,
            sweeps: 0,
            deflated_mass: 0.0,
        });
    }
    if n == 1 {
        w[0] = h[0];
        return Ok(QrOutcome {
            eigenvalues: w,
            sweeps: 0,
            deflated_mass: 0.0,
        });
    }
    let at = |i: usize, j: usize| i * n + j;

    // Rotate each subdiagonal entry onto the positive real axis.
    for i in 1..n {
        let s = h[at(i, i - 1)];
        if s.im != 0.0 {
            let sc = s / cabs1(s);
            let sc = sc.conj() / sc.norm();
            h[at(i, i - 1)] = C64::new(s.norm(), 0.0);
            for z in &mut h[at(i, i)..at(i, n)] {
                *z *= sc;
            }
            let csc = sc.conj();
            for r in 0..=(i + 1).min(n - 1) {
                h[at(r, i)] *= csc;
            }
        }
    }

    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let itmax = 30 * n.max(10);
    let mut sweeps = 0usize;
    let mut deflated_mass = 0.0;
    let mut kdefl = 0usize;
    let mut i = n - 1;
    let mut reflectors: Vec<(C64, f64, C64)> = Vec::with_capacity(n);

    loop {
        let mut l = 0usize;
        let mut split = false;
        for _ in 0..=itmax {
            // Search upward for a negligible subdiagonal entry.
            let mut k = i;
            while k > l {
                let sub = h[at(k, k - 1)];
                if cabs1(sub) <= smlnum {
                    break;
                }
                let mut tst = cabs1(h[at(k - 1, k - 1)]) + cabs1(h[at(k, k)]);
                if tst == 0.0 {
                    if k >= 2 {
                        tst += h[at(k - 1, k - 2)].re.abs();
                    }
                    if k + 1 < n {
                        tst += h[at(k + 1, k)].re.abs();
                    }
                }
                if sub.re.abs() <= ulp * tst {
                    let up = h[at(k - 1, k)];
                    let ab = cabs1(sub).max(cabs1(up));
                    let ba = cabs1(sub).min(cabs1(up));
                    let diff = h[at(k - 1, k - 1)] - h[at(k, k)];
                    let aa = cabs1(h[at(k, k)]).max(cabs1(diff));
                    let bb = cabs1(h[at(k, k)]).min(cabs1(diff));
                    let s = aa + ab;
                    if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                        break;
                    }
                }
                k -= 1;
            }
            l = k;
            if l > 0 {
                deflated_mass += h[at(l, l - 1)].norm();
                h[at(l, l - 1)] = ZERO;
            }
            if l >= i {
                split = true;
                break;
            }
            if sweeps >= sweep_budget {
                return Err(QrFailure {
                    sweeps,
                    remaining: i + 1,
                });
            }
            sweeps += 1;
            kdefl += 1;
            let (i1, i2) = (l, i);

            let t = if kdefl % (2 * EXCEPTIONAL_EVERY) == 0 {
                C64::new(EXCEPTIONAL_FACTOR * h[at(i, i - 1)].re.abs(), 0.0) + h[at(i, i)]
            } else if kdefl % EXCEPTIONAL_EVERY == 0 {
                C64::new(EXCEPTIONAL_FACTOR * h[at(l + 1, l)].re.abs(), 0.0) + h[at(l, l)]
            } else {
                wilkinson_shift(
                    h[at(i - 1, i - 1)],
                    h[at(i - 1, i)],
                    h[at(i, i - 1)],
                    h[at(i, i)],
                )
            };

            // Look for two consecutive small subdiagonals to start the sweep lower.
            let mut m = l;
            let mut v = [ZERO; 2];
            let mut found = false;
            let mut mm = i - 1;
            while mm > l {
                let h11 = h[at(mm, mm)];
                let h22 = h[at(mm + 1, mm + 1)];
                let mut h11s = h11 - t;
                let mut h21 = h[at(mm + 1, mm)].re;
                let s = cabs1(h11s) + h21.abs();
                h11s /= s;
                h21 /= s;
                v = [h11s, C64::new(h21, 0.0)];
                let h10 = h[at(mm, mm - 1)].re;
                if h10.abs() * h21.abs() <= ulp * (cabs1(h11s) * (cabs1(h11) + cabs1(h22))) {
                    m = mm;
                    found = true;
                    break;
                }
                mm -= 1;
            }
            if !found {
                let h11 = h[at(l, l)];
                let mut h11s = h11 - t;
                let mut h21 = h[at(l + 1, l)].re;
                let s = cabs1(h11s) + h21.abs();
                h11s /= s;
                h21 /= s;
                v = [h11s, C64::new(h21, 0.0)];
                m = l;
            }

            // Column updates for rows that no later reflector of this sweep reads
            // are deferred and replayed row by row, which keeps memory access
            // contiguous. Row r is deferred for reflector k whenever k >= r + 2.
            reflectors.clear();
            let mut scaled: Option<C64> = None;
            for k in m..i {
                if k > m {
                    v = [h[at(k, k - 1)], h[at(k + 1, k - 1)]];
                }
                let (head, tail) = v.split_at_mut(1);
                let t1 = householder(&mut head[0], tail);
                if k > m {
                    h[at(k, k - 1)] = v[0];
                    h[at(k + 1, k - 1)] = ZERO;
                }
                let v2 = v[1];
                let t2 = (t1 * v2).re;
                let ct1 = t1.conj();
                let cv2 = v2.conj();
                reflectors.push((t1, t2, cv2));

                {
                    let (upper, lower) = h.split_at_mut(at(k + 1, 0));
                    let rk = &mut upper[at(k, k)..at(k, i2 + 1)];
                    let rk1 = &mut lower[k..=i2];
                    for (a, b) in rk.iter_mut().zip(rk1.iter_mut()) {
                        let sum = ct1 * *a + *b * t2;
                        *a -= sum;
                        *b -= sum * v2;
                    }
                }
                for r in i1.max(k.saturating_sub(1))..=(k + 2).min(i) {
                    let pair = &mut h[at(r, k)..at(r, k + 2)];
                    let sum = t1 * pair[0] + pair[1] * t2;
                    pair[0] -= sum;
                    pair[1] -= sum * cv2;
                }

                if k == m && m > l {
                    let mut temp = ONE - t1;
                    temp /= temp.norm();
                    let ct = temp.conj();
                    h[at(m + 1, m)] *= ct;
                    if m + 2 <= i {
                        h[at(m + 2, m + 1)] *= temp;
                    }
                    // Rows m..=i except m+1 are scaled by temp right of the
                    // diagonal; the same columns are scaled by conj(temp) above it.
                    let in_set = |j: usize| j >= m && j <= i && j != m + 1;
                    for r in i1.max(m - 1)..=i {
                        let row_f = if in_set(r) { temp } else { ONE };
                        for c in (r + 1)..=i2 {
                            let f = if in_set(c) { row_f * ct } else { row_f };
                            if f != ONE {
                                h[at(r, c)] *= f;
                            }
                        }
                    }
                    scaled = Some(ct);
                }
            }
            // Replaying a reflector chain along one row is a serial dependency,
            // so several rows are interleaved to keep the pipeline busy.
            const LANES: usize = 8;
            let mut r0 = i1;
            while r0 < i && m.max(r0 + 2) < i {
                let rows = LANES.min(i - r0);
                let start = m.max(r0 + 2);
                for k in start..i {
                    let (t1, t2, cv2) = reflectors[k - m];
                    for r in r0..r0 + rows {
                        if k < r + 2 {
                            continue;
                        }
                        let base = r * n;
                        let sum = t1 * h[base + k] + h[base + k + 1] * t2;
                        h[base + k] -= sum;
                        h[base + k + 1] -= sum * cv2;
                        if k == m {
                            if let Some(ct) = scaled {
                                for c in m..=i {
                                    if c != m + 1 {
                                        h[base + c] *= ct;
                                    }
                                }
                            }
                        }
                    }
                }
                r0 += rows;
            }

            let temp = h[at(i, i - 1)];
            if temp.im != 0.0 {
                let rtemp = temp.norm();
                h[at(i, i - 1)] = C64::new(rtemp, 0.0);
                let temp = temp / rtemp;
                if i2 > i {
                    let ct = temp.conj();
                    for z in &mut h[at(i, i + 1)..at(i, i2 + 1)] {
                        *z *= ct;
                    }
                }
                for r in i1..i {
                    h[at(r, i)] *= temp;
                }
            }
        }
        if !split {
            return Err(QrFailure {
                sweeps,
                remaining: i + 1,
            });
        }
        w[i] = h[at(i, i)];
        kdefl = 0;
        if l == 0 {
            break;
        }
        i = l - 1;
    }
    Ok(QrOutcome {
        eigenvalues: w,
        sweeps,
        deflated_mass,
    })
}

fn wilkinson_shift(h00: C64, h01: C64, h10: C64, h11: C64) -> C64 {
    let mut t = h11;
    let u = h01.sqrt() * h10.sqrt();
    let mut s = cabs1(u);
    if s != 0.0 {
        let x = 0.5 * (h00 - t);
        let sx = cabs1(x);
        s = s.max(sx);
        let xs = x / s;
        let us = u / s;
        let mut y = s * (xs * xs + us * us).sqrt();
        if sx > 0.0 {
            let xn = x / sx;
            if xn.re * y.re + xn.im * y.im < 0.0 {
                y = -y;
            }
        }
        t -= u * (u / (x + y));
    }
    t
}
