use std::f64::consts::FRAC_PI_4;

use capres::discretize::{assemble_davies, Grid};
use capres::eigen::{eig_dense, projection_rank, resolvent_solve, EigenError};
use capres::linalg::{paired_max_distance, CMatrix, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Identity plus a small random perturbation: condition number stays near 1.
fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let scale = 0.3 / n as f64;
    CMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        c(d + scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0))
    })
}

fn inverse(s: &CMatrix) -> CMatrix {
    let n = s.rows();
    let mut inv = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = c(1.0, 0.0);
        // (0 - (-1) I) x = e solves S x = e once S is folded into the matrix.
        let x = resolvent_solve(&s.sub(&CMatrix::identity(n)), c(-1.0, 0.0), &e).unwrap();
        for (i, xi) in x.into_iter().enumerate() {
            inv.row_mut(i)[j] = xi;
        }
    }
    inv
}

#[test]
fn diagonal_and_rotation_examples() {
    let d = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 1.0), c(-3.0, 0.0)]);
    let r = eig_dense(&d).unwrap();
    assert_eq!(r.eigenvalues.len(), 3);
    assert!(paired_max_distance(&r.eigenvalues, &d.diagonal()) < 1e-14);
    assert!(r.residual_bound.is_finite());

    let rot = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]);
    let r = eig_dense(&rot).unwrap();
    assert!(paired_max_distance(&r.eigenvalues, &[c(0.0, 1.0), c(0.0, -1.0)]) < 1e-14);
}

#[test]
fn davies_string_and_its_projection() {
    let grid = Grid::new(-12.0, 12.0, 1600).unwrap();
    let op = assemble_davies(1.0, 0.0, &grid).unwrap();
    let mut zs = eig_dense(&op.entries).unwrap().eigenvalues;
    zs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    for (k, z) in zs.iter().take(6).enumerate() {
        let exact = C64::from_polar((2 * k + 1) as f64, -FRAC_PI_4);
        assert!((z - exact).norm() / exact.norm() < 1e-6, "k = {k}: {z}");
    }
    let p = projection_rank(&op.entries, C64::from_polar(3.0, -FRAC_PI_4), 0.3, 32).unwrap();
    assert_eq!(p.rank, 1);
    assert!((p.trace_value - 1.0).norm() < 0.2 && p.idempotency_defect < 1e-6, "{p:?}");
}

#[test]
fn resolvent_examples() {
    let a = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
    let x = resolvent_solve(&a, c(0.0, 0.0), &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    assert!((x[0] - 1.0).norm() < 1e-15 && (x[1] - 0.5).norm() < 1e-15);

    let b = vec![c(0.3, -1.0), c(2.0, 0.5), c(-1.0, 0.0)];
    let x = resolvent_solve(&CMatrix::zeros(3, 3), c(-1.0, 0.0), &b).unwrap();
    assert_eq!(x, b);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_matrix(&mut rng, 50);
    let b: Vec<C64> = (0..50).map(|_| c(rng.gen(), rng.gen())).collect();
    let z = c(0.0, 10.0);
    let x = resolvent_solve(&a, z, &b).unwrap();
    let r: f64 = a
        .shifted(z)
        .mul_vec(&x)
        .iter()
        .zip(&b)
        .map(|(ax, bi)| (ax - bi).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let bn: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    assert!(r / bn < 1e-10);
    let singular = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
    assert!(matches!(
        resolvent_solve(&singular, c(2.0, 0.0), &[c(1.0, 0.0), c(1.0, 0.0)]),
        Err(EigenError::NearSingular { .. })
    ));
}

#[test]
fn projection_examples_and_errors() {
    let d = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 1.0), c(-3.0, 0.0)]);
    let p = projection_rank(&d, c(2.0, 1.0), 0.5, 32).unwrap();
    assert_eq!(p.rank, 1);
    assert!((p.trace_value - 1.0).norm() < 1e-10);
    assert_eq!(projection_rank(&d, c(10.0, 0.0), 0.5, 32).unwrap().rank, 0);
    // The 4-point rule has nodes at odd multiples of pi/4; put one on the eigenvalue 1.
    let center = c(1.0, 0.0) - C64::from_polar(0.5, FRAC_PI_4);
    assert!(matches!(
        projection_rank(&d, center, 0.5, 4),
        Err(EigenError::ContourTooClose { .. })
    ));
    assert!(matches!(projection_rank(&d, c(0.0, 0.0), -1.0, 32), Err(EigenError::BadContour { .. })));
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(eig_dense(&CMatrix::zeros(2, 3)), Err(EigenError::NotSquare { .. })));
    let mut m = CMatrix::identity(2);
    m.row_mut(0)[1] = c(f64::NAN, 0.0);
    assert_eq!(eig_dense(&m), Err(EigenError::NonFinite));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn similarity_preserves_spectrum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 30);
        let s = well_conditioned(&mut rng, 30);
        let b = inverse(&s).matmul(&a).matmul(&s);
        let ea = eig_dense(&a).unwrap().eigenvalues;
        let eb = eig_dense(&b).unwrap().eigenvalues;
        prop_assert!(paired_max_distance(&ea, &eb) < 1e-8);
    }

    #[test]
    fn eigenvalues_sum_to_trace(seed in any::<u64>(), n in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n);
        let r = eig_dense(&a).unwrap();
        prop_assert_eq!(r.eigenvalues.len(), n);
        let sum: C64 = r.eigenvalues.iter().sum();
        prop_assert!((sum - a.trace()).norm() < 1e-8 * a.norm_fro() * n as f64);
    }

    #[test]
    fn projection_rank_is_additive(seed in any::<u64>(), inside in 1usize..6) {
        // Clusters around -2 and 2; the big circle holds both.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut diag = Vec::new();
        let (mut left, mut right) = (0, 0);
        for k in 0..inside + 4 {
            let side = if rng.gen_bool(0.5) { -2.0 } else { 2.0 };
            let z = if k < inside {
                if side < 0.0 { left += 1 } else { right += 1 }
                c(side + rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4))
            } else {
                c(rng.gen_range(7.0..9.0), rng.gen_range(-1.0..1.0))
            };
            diag.push(z);
        }
        let d = CMatrix::from_diag(&diag);
        let whole = projection_rank(&d, c(0.0, 0.0), 4.0, 64).unwrap().rank;
        let l = projection_rank(&d, c(-2.0, 0.0), 0.9, 64).unwrap().rank;
        let r = projection_rank(&d, c(2.0, 0.0), 0.9, 64).unwrap().rank;
        prop_assert_eq!((l, r), (left, right));
        prop_assert_eq!(whole, l + r);
        prop_assert_eq!(whole, inside);
    }

    #[test]
    fn quadrature_converges(seed in any::<u64>()) {
        // The trapezoid error decays like q^M, q the worst ratio of |z| to the
        // radius (or its inverse). Margins of 0.4 and 2.5 give q^32 < 2e-13.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 12;
        let diag: Vec<C64> = (0..n)
            .map(|k| {
                let r = if k % 2 == 0 { rng.gen_range(0.0..0.4) } else { rng.gen_range(2.5..4.0) };
                C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let s = well_conditioned(&mut rng, n);
        let a = inverse(&s).matmul(&CMatrix::from_diag(&diag)).matmul(&s);
        let t32 = projection_rank(&a, c(0.0, 0.0), 1.0, 32).unwrap().trace_value;
        let t64 = projection_rank(&a, c(0.0, 0.0), 1.0, 64).unwrap().trace_value;
        prop_assert!((t32 - t64).norm() < 1e-8, "{} vs {}", t32, t64);
    }
}
