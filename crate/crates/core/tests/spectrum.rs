use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64 as C64;
use weakreg::evolve::{gauge_transform, DEFAULT_GAUGE_POINTS};
use weakreg::model::*;
use weakreg::numcore::CMatrix;
use weakreg::presets;
use weakreg::regularity::det_t;
use weakreg::spectrum::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn search(p: &SystemProblem, w: Window) -> SpectrumReport {
    let cf = CharFunction::new(p).unwrap();
    find_eigenvalues(&cf, w, SearchOptions::default()).unwrap()
}

#[test]
fn periodic_closed_form() {
    let p = presets::dirac_periodic();
    let cf = CharFunction::new(&p).unwrap();
    assert_eq!(cf.method(), EvalMethod::ClosedForm);
    for l in [c(0.3, 0.0), c(2.0, -1.0), c(-7.0, 0.5)] {
        let expect = C64::new(2.0, 0.0) - l.cos() * 2.0;
        assert!((cf.delta(l).unwrap() - expect).norm() < 1e-12);
    }
}

#[test]
fn j_minor_form_for_two_by_two() {
    let mut p = presets::dirac_tminus();
    p.blocks = BlockStructure::scalar(&[c(-0.7, 0.2), c(1.3, 0.0)]);
    p.bc = BoundaryPair::new(
        CMatrix::from_rows(&[vec![c(1.0, 0.5), c(-2.0, 0.0)], vec![c(0.3, 0.0), c(0.0, 1.0)]]),
        CMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.4, 0.0)], vec![c(1.5, 0.0), c(-0.2, 0.3)]]),
    )
    .unwrap();
    let j = j_minors(&p.bc).unwrap();
    let es = closed_form_delta0(&p).unwrap();
    assert_eq!(es.terms.len(), 4);
    let b = p.blocks.coord_weights();
    let cf = CharFunction::with_method(&p, EvalMethod::Integrate).unwrap();
    for l in [c(1.0, 0.2), c(-3.0, 0.0)] {
        let i = C64::i();
        let expect = j.j12 + j.j34 * (i * (b[0] + b[1]) * l).exp() + j.j32 * (i * b[0] * l).exp() + j.j14 * (i * b[1] * l).exp();
        assert!((es.eval(l).0 - expect).norm() < 1e-12);
        assert!((cf.delta(l).unwrap() - expect).norm() < 1e-9);
    }
}

#[test]
fn nonreal_case_closed_form() {
    let (h0, h1) = (0.7, 1.9);
    let p = presets::nonreal_weights(h0, h1);
    let cf = CharFunction::new(&p).unwrap();
    for l in [c(0.5, 1.0), c(-2.0, 3.0)] {
        let expect = C64::new(-h1, 0.0) + (C64::i() * C64::i() * l).exp() * h0;
        assert!((cf.delta(l).unwrap() - expect).norm() < 1e-12);
    }
}

#[test]
fn identity_weights_power() {
    let n = 3;
    let p = SystemProblem::new(
        BlockStructure::new(vec![n], vec![c(1.0, 0.0)]).unwrap(),
        PotentialSpec::Zero,
        BoundaryPair::new(CMatrix::identity(n), CMatrix::identity(n).scale(c(-1.0, 0.0))).unwrap(),
    );
    let es = closed_form_delta0(&p).unwrap();
    for l in [c(0.4, 0.1), c(3.0, -0.5)] {
        let expect = (C64::new(1.0, 0.0) - (C64::i() * l).exp()).powu(n as u32);
        assert!((es.eval(l).0 - expect).norm() < 1e-12);
    }
}

#[test]
fn dominant_term_matches_selection_determinant() {
    for p in [presets::ex_n3_cyclic(), presets::ex_vandermonde_n5(), presets::dirac_periodic(), presets::ex_n3_diagonal()] {
        let es = closed_form_delta0(&p).unwrap();
        for k in 0..7 {
            let z = C64::from_polar(1.0, 0.37 + 2.0 * PI * k as f64 / 7.0);
            if p.blocks.weights().iter().any(|b| (z * b).re.abs() < 1e-6) {
                continue;
            }
            let (coef, rate) = es.dominant(z);
            let beta: f64 = p.blocks.coord_weights().iter().map(|b| (-b * z).re).filter(|v| *v > 0.0).sum();
            let dt = det_t(&p.bc, &p.blocks, z).unwrap();
            if (rate - beta).abs() < 1e-12 {
                assert!((coef - dt).norm() < 1e-12);
            } else {
                // the extreme term cancelled, so T_z is singular
                assert!(rate < beta && dt.norm() < 1e-12);
            }
        }
    }
}

#[test]
fn methods_agree() {
    let q = CMatrix::from_rows(&[vec![c(0.5, 0.0), c(1.0, 0.2)], vec![c(-0.3, 0.0), c(0.0, -0.4)]]);
    let mut p = presets::dirac_periodic();
    p.potential = PotentialSpec::Constant(q);
    let a = CharFunction::with_method(&p, EvalMethod::ConstantExp).unwrap();
    let b = CharFunction::with_method(&p, EvalMethod::Integrate).unwrap();
    for l in [c(1.0, 0.0), c(-8.0, 1.0), c(15.0, -0.5)] {
        let (va, vb) = (a.eval(l).unwrap(), b.eval(l).unwrap());
        assert!((va.delta - vb.delta).norm() < 1e-9 * va.scale, "{l}");
        assert!((va.derivative - vb.derivative).norm() < 1e-8 * va.scale, "{l}");
        let pa = a.phi_one(l, 3).unwrap();
        let pb = b.phi_one(l, 3).unwrap();
        for k in 0..4 {
            assert!(pa[k].max_abs_diff(&pb[k]) < 1e-8 * pa[k].norm_max().max(1.0), "order {k}");
        }
    }
    let z = presets::dirac_tminus();
    let a = CharFunction::new(&z).unwrap();
    let b = CharFunction::with_method(&z, EvalMethod::Integrate).unwrap();
    for l in [c(2.0, 0.3), c(-11.0, 0.0)] {
        assert!((a.delta(l).unwrap() - b.delta(l).unwrap()).norm() < 1e-9);
    }
    assert!(CharFunction::with_method(&p, EvalMethod::ClosedForm).is_err());
}

#[test]
fn derivative_central_difference() {
    let mut p = presets::dirac_mirror_bump(257);
    p.bc = presets::dirac_periodic().bc;
    let cf = CharFunction::new(&p).unwrap();
    let l = c(3.3, 0.4);
    let d = cf.eval(l).unwrap().derivative;
    let fd = |h: f64| (cf.delta(l + h).unwrap() - cf.delta(l - h).unwrap()) / (2.0 * h);
    let (e1, e2) = ((fd(1e-2) - d).norm(), (fd(1e-3) - d).norm());
    assert!((e1 / e2).log10() > 1.8, "{e1} {e2}");
}

#[test]
fn degeneracy_examples() {
    let dir = CharFunction::new(&presets::dirac_dirichlet_q0()).unwrap();
    assert!(detect_degenerate(&dir, 1e-12).unwrap().is_degenerate());
    assert!(matches!(find_eigenvalues(&dir, Window::new(-5.0, 5.0, -1.0, 1.0).unwrap(), SearchOptions::default()), Err(weakreg::Error::Degenerate)));
    let per = CharFunction::new(&presets::dirac_periodic()).unwrap();
    assert!(!detect_degenerate(&per, 1e-12).unwrap().is_degenerate());
    assert!((per.delta(c(PI, 0.0)).unwrap() - 4.0).norm() < 1e-12);
    let mut rd = presets::dirac_periodic();
    rd.bc = BoundaryPair::from_real(&[&[1.0, 0.0], &[2.0, 0.0]], &[&[1.0, 1.0], &[2.0, 2.0]]);
    let cf = CharFunction::with_method(&rd, EvalMethod::Integrate);
    // rank-deficient pairs are rejected by validation
    assert!(cf.is_err());
}

#[test]
fn periodic_spectrum() {
    let t = Instant::now();
    let rep = search(&presets::dirac_periodic(), Window::new(-20.0, 20.0, -2.0, 2.0).unwrap());
    assert_eq!(rep.eigenvalues.len(), 7);
    assert_eq!(rep.total_winding, 14);
    assert!(rep.count_consistent);
    for e in &rep.eigenvalues {
        let k = (e.lambda.re / (2.0 * PI)).round();
        assert_eq!(e.multiplicity, 2);
        assert!((e.lambda - c(2.0 * PI * k, 0.0)).norm() < 1e-8, "{}", e.lambda);
    }
    assert!(rep.eigenvalues[0].lambda.norm() < 1e-8);
    assert!(rep.cells.iter().all(|c| c.consistent));
    assert!(t.elapsed().as_secs() < 30);
}

#[test]
fn dirichlet_constant_spectrum() {
    let rep = search(&presets::dirac_dirichlet(1.0), Window::new(-17.0, 17.0, -1.0, 1.0).unwrap());
    let mut expect: Vec<f64> = (1..=5).flat_map(|k| {
        let v = (1.0 + PI * PI * (k * k) as f64).sqrt();
        [v, -v]
    }).collect();
    expect.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    assert_eq!(rep.eigenvalues.len(), 10);
    for e in &rep.eigenvalues {
        assert_eq!(e.multiplicity, 1);
        assert!(expect.iter().any(|v| (e.lambda - c(*v, 0.0)).norm() < 1e-6), "{}", e.lambda);
        assert!(e.residual <= 1e-9 * e.scale);
    }
}

#[test]
fn nonreal_lattice() {
    let rep = search(&presets::nonreal_weights(1.0, 1.0), Window::new(-1.0, 1.0, -20.0, 20.0).unwrap());
    assert_eq!(rep.eigenvalues.len(), 7);
    for e in &rep.eigenvalues {
        let k = (e.lambda.im / (2.0 * PI)).round();
        assert!((e.lambda - c(0.0, 2.0 * PI * k)).norm() < 1e-7);
    }
    // sorted by modulus, then argument
    let mods: Vec<f64> = rep.eigenvalues.iter().map(|e| e.lambda.norm()).collect();
    assert!(mods.windows(2).all(|w| w[0] <= w[1] + 1e-9));
    assert!(rep.eigenvalues[1].lambda.im < 0.0 && rep.eigenvalues[2].lambda.im > 0.0);
}

#[test]
fn basin_stability() {
    let p = presets::dirac_dirichlet(1.0);
    let cf = CharFunction::new(&p).unwrap();
    let rep = find_eigenvalues(&cf, Window::new(-8.0, 8.0, -1.0, 1.0).unwrap(), SearchOptions::default()).unwrap();
    for e in &rep.eigenvalues {
        let (z, m) = refine_from(&cf, e.lambda + c(1e-5, -1e-5), SearchOptions::default()).unwrap().unwrap();
        assert_eq!(m, e.multiplicity);
        assert!((z - e.lambda).norm() < 1e-10);
    }
}

#[test]
fn adjoint_spectrum_is_conjugate() {
    let q = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.5)], vec![c(-0.6, 0.2), c(0.0, 0.0)]]);
    let bc = BoundaryPair::new(
        CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.5, 0.2)], vec![c(0.0, 0.0), c(0.3, 0.0)]]),
        CMatrix::from_rows(&[vec![c(0.2, 0.0), c(0.0, 0.0)], vec![c(0.7, -0.1), c(1.0, 0.0)]]),
    )
    .unwrap();
    let p = SystemProblem::new(BlockStructure::real(&[-1.0, 2.0]), PotentialSpec::Constant(q.clone()), bc);
    let adj_bc = weakreg::regularity::adjoint_bc(&p.bc, &p.blocks).unwrap();
    let adj = SystemProblem::new(p.blocks.adjoint(), PotentialSpec::Constant(q.adjoint()), adj_bc);
    let w = Window::new(-9.0, 9.0, -4.0, 4.0).unwrap();
    let r1 = search(&p, w);
    let wc = Window::new(-9.0, 9.0, -4.0, 4.0).unwrap();
    let r2 = search(&adj, wc);
    assert!(!r1.eigenvalues.is_empty());
    assert_eq!(r1.count(), r2.count());
    for e in &r1.eigenvalues {
        assert!(r2.eigenvalues.iter().any(|f| (f.lambda - e.lambda.conj()).norm() < 1e-6 && f.multiplicity == e.multiplicity), "{}", e.lambda);
    }
}

#[test]
fn gauge_preserves_spectrum() {
    let q = CMatrix::from_real_rows(&[&[1.0, 0.3], &[0.3, 1.0]]);
    let mut p = presets::dirac_dirichlet(0.0);
    p.potential = PotentialSpec::Constant(q);
    p.bc = BoundaryPair::from_real(&[&[1.0, 0.5], &[0.0, 0.0]], &[&[0.0, 0.0], &[0.2, 1.0]]);
    let g = gauge_transform(&p, &(0..DEFAULT_GAUGE_POINTS).map(|k| k as f64 / (DEFAULT_GAUGE_POINTS - 1) as f64).collect::<Vec<_>>()).unwrap();
    let pt = g.transformed(&p);
    let w = Window::new(-10.0, 10.0, -3.0, 3.0).unwrap();
    let r1 = search(&p, w);
    let r2 = search(&pt, w);
    assert_eq!(r1.eigenvalues.len(), r2.eigenvalues.len());
    for (a, b) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
        assert!((a.lambda - b.lambda).norm() < 1e-6, "{} vs {}", a.lambda, b.lambda);
    }
}

#[test]
fn report_outputs() {
    let rep = search(&presets::dirac_tminus(), Window::new(-10.0, 10.0, -1.0, 1.0).unwrap());
    assert_eq!(rep.eigenvalues.len(), 4);
    let csv = rep.to_csv();
    assert!(csv.starts_with("re,im,multiplicity,residual\n"));
    let first = csv.lines().nth(1).unwrap();
    let re: f64 = first.split(',').next().unwrap().parse().unwrap();
    assert_eq!(re, rep.eigenvalues[0].lambda.re);
    let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(v["total_winding"], 4);
}

#[test]
fn auto_window_covers_targets() {
    let cf = CharFunction::new(&presets::dirac_periodic()).unwrap();
    let (w, _) = auto_window(&cf, 3).unwrap();
    assert!(w.contains(c(8.0 * PI - 0.1, 0.0)));
    let rep = find_eigenvalues(&cf, w, SearchOptions::default()).unwrap();
    assert!(rep.count_consistent);
}
