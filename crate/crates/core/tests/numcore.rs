use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakreg::numcore::*;

fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

// Laplace expansion along the first row; independent of the LU path.
fn det_cofactor(m: &CMatrix) -> C64 {
    let n = m.rows();
    if n == 1 {
        return m[(0, 0)];
    }
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let rows: Vec<usize> = (1..n).collect();
        let cols: Vec<usize> = (0..n).filter(|&k| k != j).collect();
        let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += m[(0, j)] * det_cofactor(&m.submatrix(&rows, &cols)) * sgn;
    }
    acc
}

fn series_exp(m: &CMatrix) -> CMatrix {
    // scaled Taylor series, then squaring
    let s = 8;
    let a = m.scale(C64::new(0.5f64.powi(s), 0.0));
    let mut term = CMatrix::identity(m.rows());
    let mut sum = term.clone();
    for k in 1..40 {
        term = (&term * &a).scale(C64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn det_identity_and_cyclic_example() {
    assert_eq!(det(&CMatrix::identity(3)).unwrap(), C64::new(1.0, 0.0));
    let (d12, d21, d31, d32) = (2.0, -3.0, 0.7, 1.3);
    let m = CMatrix::from_real_rows(&[&[0.0, d12, 0.0], &[d21, 0.0, 0.0], &[d31, d32, 1.0]]);
    assert!((det(&m).unwrap() - C64::new(-d12 * d21, 0.0)).norm() < 1e-14);
}

#[test]
fn det_matches_cofactor_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let m = random_matrix(&mut rng, 5, 5);
        let a = det(&m).unwrap();
        let b = det_cofactor(&m);
        assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-3), "{a} vs {b}");
    }
}

#[test]
fn det_rejects_non_square() {
    assert!(det(&CMatrix::zeros(2, 3)).is_err());
}

#[test]
fn adjugate_closed_forms() {
    let m = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
    let adj = adjugate(&m).unwrap();
    let expect = CMatrix::from_real_rows(&[&[4.0, -2.0], &[-3.0, 1.0]]);
    assert!(adj.max_abs_diff(&expect) < 1e-15);
    assert!(adjugate(&CMatrix::identity(5)).unwrap().max_abs_diff(&CMatrix::identity(5)) < 1e-14);
    // rank one: m adj(m) = 0 and adj(m) itself vanishes for n = 3
    let u = [C64::new(1.0, 0.5), C64::new(-2.0, 0.0), C64::new(0.3, 1.0)];
    let v = [C64::new(0.2, 0.0), C64::new(1.0, -1.0), C64::new(0.0, 2.0)];
    let r1 = CMatrix::from_fn(3, 3, |i, j| u[i] * v[j]);
    let a = adjugate(&r1).unwrap();
    assert!((&r1 * &a).norm_max() < 1e-14);
}

#[test]
fn adjugate_of_large_singular_uses_cofactors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut m = random_matrix(&mut rng, 6, 6);
    let r0 = m.row(0);
    for j in 0..6 {
        m[(5, j)] = r0[j] * 2.0;
    }
    let a = adjugate(&m).unwrap();
    assert!((&m * &a).norm_max() < 1e-12);
    assert!(a.norm_max() > 1e-6);
}

#[test]
fn nullspace_examples() {
    let tol = Tolerance::default();
    let z = nullspace(&CMatrix::zeros(2, 3), tol).unwrap();
    assert_eq!(z.cols(), 3);
    let m = CMatrix::from_real_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]);
    let k = nullspace(&m, tol).unwrap();
    assert_eq!(k.cols(), 2);
    for j in 0..2 {
        let v = k.col(j);
        assert!(v[0].norm() < 1e-15 && v[2].norm() < 1e-15);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_matrix(&mut rng, 3, 2);
    let b = random_matrix(&mut rng, 2, 4);
    let m = &a * &b;
    let k = nullspace(&m, tol).unwrap();
    assert_eq!(k.cols(), 2);
    for j in 0..2 {
        let r = m.mul_vec(&k.col(j));
        assert!(r.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
    }
    assert!(nullspace(&CMatrix::identity(3), tol).is_none());
}

#[test]
fn solve_examples() {
    let rhs = CMatrix::column_vector(&[C64::new(2.0, 0.0), C64::new(4.0, 0.0)]);
    let x = solve(&CMatrix::identity(2), &rhs).unwrap();
    assert!(x.max_abs_diff(&rhs) < 1e-15);
    let d = CMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
    let x = solve(&d, &rhs).unwrap();
    assert!((x[(0, 0)] - 1.0).norm() < 1e-15 && (x[(1, 0)] - 1.0).norm() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = random_matrix(&mut rng, 6, 6);
    let b = random_matrix(&mut rng, 6, 1);
    let x = solve(&m, &b).unwrap();
    let via_adj = (&adjugate(&m).unwrap() * &b).scale(det(&m).unwrap().inv());
    assert!(x.max_abs_diff(&via_adj) < 1e-10 * via_adj.norm_max());
    let sing = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
    assert!(matches!(solve(&sing, &rhs), Err(weakreg::Error::Singular { .. })));
}

#[test]
fn mat_exp_examples() {
    assert!(mat_exp(&CMatrix::zeros(3, 3)).max_abs_diff(&CMatrix::identity(3)) < 1e-16);
    let (a, b) = (C64::new(0.3, 1.0), C64::new(-2.0, 0.5));
    let e = mat_exp(&CMatrix::diag(&[a, b]));
    assert!((e[(0, 0)] - a.exp()).norm() < 1e-13 * a.exp().norm());
    assert!((e[(1, 1)] - b.exp()).norm() < 1e-13 * b.exp().norm());
    assert!(e[(0, 1)].norm() < 1e-15);
    // i N with N^2 = (λ^2 - q^2) I
    for &(lam, q) in &[(3.7, 1.0), (0.4, 1.0), (25.0, 2.0)] {
        let n = CMatrix::from_real_rows(&[&[-lam, q], &[-q, lam]]);
        let rho = C64::new(lam * lam - q * q, 0.0).sqrt();
        let closed = &CMatrix::identity(2).scale(rho.cos()) + &n.scale(C64::i() * rho.sin() / rho);
        let e = mat_exp(&n.scale(C64::i()));
        assert!(e.max_abs_diff(&closed) < 1e-13 * closed.norm_max().max(1.0), "lam={lam}");
        let s = series_exp(&n.scale(C64::i()));
        assert!(s.max_abs_diff(&closed) < 1e-10 * closed.norm_max().max(1.0));
    }
}

#[test]
fn hermitian_eigenvalues_of_known_matrix() {
    let h = CMatrix::from_rows(&[
        vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
        vec![C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
    ]);
    let ev = hermitian_eigenvalues(&h);
    assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
}

fn arb_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| CMatrix::from_fn(n, n, |i, j| C64::new(v[i * n + j].0, v[i * n + j].1)))
}

fn sized_matrix() -> impl Strategy<Value = CMatrix> {
    (1usize..=6).prop_flat_map(arb_matrix)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_algorithm: prop::test_runner::RngAlgorithm::ChaCha, ..ProptestConfig::default() })]

    #[test]
    fn adjugate_identity(m in sized_matrix()) {
        let n = m.rows();
        let d = det(&m).unwrap();
        let lhs = &m * &adjugate(&m).unwrap();
        let rhs = CMatrix::identity(n).scale(d);
        let scale = m.norm_fro().powi(n as i32).max(1e-300);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * scale);
    }

    #[test]
    fn det_is_multiplicative(n in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n, n);
        let b = random_matrix(&mut rng, n, n);
        let lhs = det(&(&a * &b)).unwrap();
        let rhs = det(&a).unwrap() * det(&b).unwrap();
        let scale = (a.norm_fro() * b.norm_fro()).powi(n as i32);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
    }

    #[test]
    fn exp_times_exp_of_negative(m in sized_matrix(), s in 0.1f64..4.0) {
        let m = m.scale(C64::new(s, 0.0));
        let p = &mat_exp(&m) * &mat_exp(&m.scale(C64::new(-1.0, 0.0)));
        prop_assert!(p.max_abs_diff(&CMatrix::identity(m.rows())) < 1e-10);
    }

    #[test]
    fn nullspace_is_orthonormal_kernel(r in 1usize..=3, c in 2usize..=5, k in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank_target = k.min(r).min(c);
        let m = &random_matrix(&mut rng, r, rank_target) * &random_matrix(&mut rng, rank_target, c);
        let tol = Tolerance::default();
        if let Some(v) = nullspace(&m, tol) {
            let thr = tol.threshold(singular_values(&m)[0]);
            for j in 0..v.cols() {
                let res = m.mul_vec(&v.col(j));
                let norm = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(norm <= 10.0 * thr.max(1e-15));
            }
            let g = &v.adjoint() * &v;
            prop_assert!(g.max_abs_diff(&CMatrix::identity(v.cols())) < 1e-12);
        }
    }
}
