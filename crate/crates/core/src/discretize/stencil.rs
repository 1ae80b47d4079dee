//! Finite-difference weights.

/// Central fourth-order weights for offsets -2..=2.
pub const D2_CENTRAL: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
pub const D1_CENTRAL: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];

/// Fornberg's recursion: `w[k][j]` is the weight of `xs[j]` in the `k`-th
/// derivative at `x0`, for `k = 0..=order`.
pub fn fornberg(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_central_stencils() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg(0.0, &xs, 2);
        for j in 0..5 {
            assert!((w[1][j] - D1_CENTRAL[j]).abs() < 1e-14);
            assert!((w[2][j] - D2_CENTRAL[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn one_sided_weights_are_exact_on_polynomials() {
        let xs: Vec<f64> = (0..6).map(|j| 0.3 * j as f64).collect();
        let x0 = 0.3;
        let w = fornberg(x0, &xs, 2);
        // Exact for degree <= 5.
        let f = |x: f64| x.powi(5) - 2.0 * x.powi(3) + x;
        let d2 = |x: f64| 20.0 * x.powi(3) - 12.0 * x;
        let approx: f64 = xs.iter().zip(&w[2]).map(|(&x, &c)| c * f(x)).sum();
        assert!((approx - d2(x0)).abs() < 1e-10);
    }
}
