use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use weakreg::grid::Grid;
use weakreg::model::*;
use weakreg::numcore::{adjugate, det, mat_exp, CMatrix};
use weakreg::presets;
use weakreg::rootspace::*;
use weakreg::spectrum::*;
use weakreg::ErrorKind;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn spectrum(p: &SystemProblem, w: [f64; 4]) -> SpectrumReport {
    let cf = CharFunction::new(p).unwrap();
    find_eigenvalues(&cf, Window::new(w[0], w[1], w[2], w[3]).unwrap(), SearchOptions::default()).unwrap()
}

fn chains(p: &SystemProblem, w: [f64; 4], grid: &Grid) -> (SpectrumReport, Vec<RootChain>) {
    let s = spectrum(p, w);
    let ch = build_chains(p, &s, grid).unwrap();
    (s, ch)
}

/// `y1(0) = y1(1)`, `y2(0) + c y1(1) = y2(1)`: double eigenvalues `2πk` with one eigenfunction.
fn jordan_problem(cc: f64) -> SystemProblem {
    let bc = BoundaryPair::from_real(&[&[1.0, 0.0], &[0.0, 1.0]], &[&[-1.0, 0.0], &[cc, -1.0]]);
    SystemProblem::new(BlockStructure::real(&[-1.0, 1.0]), PotentialSpec::Zero, bc)
}

fn rel_dist(u: &GridFunction, v: &GridFunction, w: &[f64]) -> f64 {
    let mut d = u.clone();
    d.axpy(c(-1.0, 0.0), v);
    norm(&d, w) / norm(v, w)
}

/// Distance of `f` from the span of `fs`, relative to `‖f‖`.
fn span_residual(fs: &[&GridFunction], f: &GridFunction, grid: &Grid) -> f64 {
    let probe = Probe { id: "f".into(), f: f.clone() };
    let t = completeness_residuals(fs, &[probe], &[fs.len()], grid).unwrap();
    t.probes[0].residuals[0]
}

#[test]
fn taylor_adjugate_matches_cofactors_and_derivatives() {
    let a0 = CMatrix::from_rows(&[
        vec![c(1.0, 0.2), c(-0.5, 0.0), c(0.3, 1.0)],
        vec![c(0.0, -1.0), c(2.0, 0.0), c(0.7, 0.1)],
        vec![c(1.5, 0.0), c(0.2, -0.3), c(-1.0, 0.0)],
    ]);
    let a1 = CMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 * 0.1 - 0.4, 0.05 * i as f64));
    let a2 = CMatrix::from_fn(3, 3, |i, j| c(0.2 * j as f64, -0.1 * (i + j) as f64));
    let at = |t: C64| {
        let mut m = a0.clone();
        m.axpy(t, &a1);
        m.axpy(t * t, &a2);
        m
    };
    let adj = taylor_adjugate(&[a0.clone(), a1.clone(), a2.clone()], 2);
    assert!(adj[0].max_abs_diff(&adjugate(&a0).unwrap()) < 1e-12);
    // central differences for the first and second Taylor coefficients
    let h = 1e-3;
    let (p, m) = (adjugate(&at(c(h, 0.0))).unwrap(), adjugate(&at(c(-h, 0.0))).unwrap());
    let d1 = (&p - &m).scale(c(0.5 / h, 0.0));
    let d2 = (&(&p + &m) - &adj[0].scale(c(2.0, 0.0))).scale(c(0.5 / (h * h), 0.0));
    assert!(d1.max_abs_diff(&adj[1]) < 1e-5);
    assert!(d2.max_abs_diff(&adj[2]) < 1e-4);
}

#[test]
fn periodic_double_eigenvalues_have_two_eigenfunctions() {
    let grid = Grid::uniform(1001).unwrap();
    let p = presets::dirac_periodic();
    let (s, ch) = chains(&p, [-8.0, 8.0, -2.0, 2.0], &grid);
    assert_eq!(s.eigenvalues.len(), 3);
    assert_eq!(ch.len(), 6);
    for k in [-1i32, 0, 1] {
        let l = 2.0 * PI * k as f64;
        let at: Vec<&RootChain> = ch.iter().filter(|c| (c.lambda - l).norm() < 1e-8).collect();
        assert_eq!(at.len(), 2);
        assert!(at.iter().all(|c| c.chain.len() == 1 && c.multiplicity == 2));
        let fs: Vec<&GridFunction> = at.iter().map(|c| &c.chain[0]).collect();
        let e1 = GridFunction::from_fn(&grid, 2, |x| vec![C64::from_polar(1.0, -l * x), c(0.0, 0.0)]);
        let e2 = GridFunction::from_fn(&grid, 2, |x| vec![c(0.0, 0.0), C64::from_polar(1.0, l * x)]);
        assert!(span_residual(&fs, &e1, &grid) < 1e-8);
        assert!(span_residual(&fs, &e2, &grid) < 1e-8);
    }
}

#[test]
fn simple_eigenvalue_matches_matrix_exponential() {
    let grid = Grid::uniform(801).unwrap();
    let p = presets::dirac_dirichlet(1.0);
    let (s, ch) = chains(&p, [0.0, 5.0, -1.0, 1.0], &grid);
    assert_eq!(s.eigenvalues.len(), 1);
    assert_eq!(ch.len(), 1);
    assert_eq!(ch[0].chain.len(), 1);
    let l = ch[0].lambda;
    assert!((l - (1.0 + PI * PI).sqrt()).norm() < 1e-9);
    let q = p.potential_at(0.0);
    let gen = &CMatrix::diag(&[c(0.0, -1.0), c(0.0, 1.0)]) * &(&CMatrix::identity(2).scale(l) - &q);
    let a = &p.bc.c + &(&p.bc.d * &mat_exp(&gen));
    let v = adjugate(&a).unwrap().col(ch[0].j_index);
    let expect = GridFunction::from_fn(&grid, 2, |x| mat_exp(&gen.scale(c(x, 0.0))).mul_vec(&v));
    assert!(rel_dist(&ch[0].chain[0], &expect, &grid.simpson_weights()) < 1e-10);
}

#[test]
fn chains_satisfy_boundary_conditions_and_equation() {
    let grid = Grid::uniform(2001).unwrap();
    let cases = [
        (presets::dirac_periodic(), [-20.0, 20.0, -2.0, 2.0]),
        (presets::dirac_dirichlet(1.0), [-17.0, 17.0, -1.0, 1.0]),
        (presets::dirac_tminus(), [-20.0, 20.0, -1.0, 1.0]),
        (presets::nonreal_weights(1.0, 1.0), [-1.0, 1.0, -20.0, 20.0]),
        (jordan_problem(0.7), [-10.0, 10.0, -1.0, 1.0]),
    ];
    for (p, w) in cases {
        let (_, ch) = chains(&p, w, &grid);
        for s in summarize(&p, &ch, &grid) {
            assert!(s.bc_residual <= 1e-8, "{s:?}");
            assert!(s.ode_residual <= 1e-7, "{s:?}");
        }
    }
}

#[test]
fn jordan_chain_has_an_associated_function() {
    let grid = Grid::uniform(1001).unwrap();
    let p = jordan_problem(0.7);
    let (s, ch) = chains(&p, [3.0, 9.0, -1.0, 1.0], &grid);
    assert_eq!(s.eigenvalues.len(), 1);
    assert_eq!(s.eigenvalues[0].multiplicity, 2);
    assert_eq!(ch.len(), 1);
    assert_eq!(ch[0].chain.len(), 2);
    let l = ch[0].lambda;
    let r = ode_residual(&p, l, &ch[0].chain[1], Some(&ch[0].chain[0]), &grid);
    assert!(r < 1e-9, "{r}");
    // dropping the lower chain element breaks the relation
    assert!(ode_residual(&p, l, &ch[0].chain[1], None, &grid) > 1e-3);
}

#[test]
fn evaluation_methods_give_the_same_chains() {
    let grid = Grid::uniform(401).unwrap();
    let p = jordan_problem(0.7);
    let w = Window::new(3.0, 9.0, -1.0, 1.0).unwrap();
    let closed = CharFunction::new(&p).unwrap();
    let s = find_eigenvalues(&closed, w, SearchOptions::default()).unwrap();
    let reference = build_chains(&p, &s, &grid).unwrap();
    let ws = grid.simpson_weights();
    for (method, tol) in [(EvalMethod::ConstantExp, 1e-9), (EvalMethod::Integrate, 1e-6)] {
        let mut s2 = s.clone();
        s2.method = method;
        let other = build_chains(&p, &s2, &grid).unwrap();
        assert_eq!(other.len(), reference.len());
        for (a, b) in other.iter().zip(&reference) {
            for (u, v) in a.chain.iter().zip(&b.chain) {
                assert!(rel_dist(u, v, &ws) < tol, "{method:?}");
            }
        }
    }
}

#[test]
fn adjoint_pipeline_pairs_and_gram_is_nonsingular() {
    let grid = Grid::uniform(1001).unwrap();
    let p = presets::dirac_periodic();
    let (s, ch) = chains(&p, [-14.0, 14.0, -2.0, 2.0], &grid);
    let run = adjoint_chains(&p, &s, &grid).unwrap();
    for e in &s.eigenvalues {
        assert!(run.spectrum.eigenvalues.iter().any(|f| (f.lambda - e.lambda.conj()).norm() < 1e-6));
    }
    let m = minimality_metric(&ch, &run.chains, &grid).unwrap();
    for g in &m.clusters {
        assert!((g.sigma_min - 1.0).abs() < 1e-8 && (g.condition - 1.0).abs() < 1e-8, "{g:?}");
    }
    assert!(m.max_cross < 1e-7);

    let p = presets::dirac_dirichlet(1.0);
    let (s, ch) = chains(&p, [-17.0, 17.0, -1.0, 1.0], &grid);
    let run = adjoint_chains(&p, &s, &grid).unwrap();
    let m = minimality_metric(&ch, &run.chains, &grid).unwrap();
    assert!(m.max_cross < 1e-7, "{}", m.max_cross);
    assert!(m.is_minimal(1e-3));
}

#[test]
fn duplicated_root_function_is_flagged() {
    let grid = Grid::uniform(501).unwrap();
    let p = presets::dirac_periodic();
    let (s, mut ch) = chains(&p, [-8.0, 8.0, -2.0, 2.0], &grid);
    let run = adjoint_chains(&p, &s, &grid).unwrap();
    let k = ch.iter().position(|c| c.lambda.norm() < 1e-8).unwrap();
    let copy = ch[k].chain[0].clone();
    let l = ch.iter().rposition(|c| c.lambda == ch[k].lambda).unwrap();
    ch[l].chain[0] = copy;
    let m = minimality_metric(&ch, &run.chains, &grid).unwrap();
    assert!(m.min_sigma < 1e-10);
    assert!(!m.is_minimal(1e-8));
}

#[test]
fn adjoint_of_nonreal_pattern_has_boundary_value_row() {
    let p = presets::nonreal_weights(1.0, 1.0);
    let adj = adjoint_problem(&p).unwrap();
    assert!(!volterra_rows(&adj).is_empty());
    let c = criteria_2x2(&adj).unwrap();
    assert_eq!(c.prediction, Prediction::Incomplete);
    assert_eq!(c.decided_by, Some(VOLTERRA));
}

#[test]
fn residuals_of_functions_in_the_span_vanish() {
    let grid = Grid::uniform(1001).unwrap();
    let p = presets::dirac_dirichlet(1.0);
    let (_, ch) = chains(&p, [-17.0, 17.0, -1.0, 1.0], &grid);
    let fs = root_functions(&ch);
    let mut combo = fs[2].scaled(c(0.5, -1.0));
    combo.axpy(c(2.0, 0.0), fs[4]);
    let probes = vec![Probe { id: "third".into(), f: fs[2].clone() }, Probe { id: "combo".into(), f: combo }];
    let t = completeness_residuals(&fs, &probes, &[1, 2, 3, 4, 5, 6], &grid).unwrap();
    assert!(t.residual("third", 2).unwrap() > 1e-3);
    for n in 3..=6 {
        assert!(t.residual("third", n).unwrap() < 1e-12);
    }
    assert!(t.residual("combo", 4).unwrap() > 1e-3);
    assert!(t.residual("combo", 5).unwrap() < 1e-12);
    assert_eq!(t.ranks, vec![1, 2, 3, 4, 5, 6]);
}

#[test]
fn periodic_polynomial_probe_decays() {
    let grid = Grid::uniform(2001).unwrap();
    let p = presets::dirac_periodic();
    let (_, ch) = chains(&p, [-65.0, 65.0, -2.0, 2.0], &grid);
    let fs = root_functions(&ch);
    assert_eq!(fs.len(), 42);
    let t = completeness_residuals(&fs, &default_probes(&grid, 2, 7), &default_schedule(fs.len()), &grid).unwrap();
    assert!(t.residual("poly", 41).is_none());
    assert!(*t.probes[1].residuals.last().unwrap() < 0.05);
    assert!(t.max_increase() <= 1e-12);
    let csv = t.to_csv();
    assert!(csv.starts_with("N,probe_id,residual\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * t.n_values.len());
}

#[test]
fn step_witness_for_dirichlet_type_conditions() {
    let grid = Grid::uniform(2001).unwrap();
    let p = presets::dirac_dirichlet_q0();
    let w = witness_t_minus(&p).unwrap();
    assert_eq!(w.function.pieces.len(), 1);
    let piece = &w.function.pieces[0];
    assert_eq!(piece.component, 0);
    assert!((piece.a - 0.1).abs() < 1e-12 && piece.b == 1.0);
    let sols = row_solutions(&p, &w, &grid, 50, 50.0, 11).unwrap();
    let refs: Vec<&GridFunction> = sols.iter().collect();
    let d = orthogonality_defects(&w, &refs, &grid).unwrap();
    assert!(d.iter().all(|&v| v < 1e-8), "{d:?}");
}

#[test]
fn step_witness_is_orthogonal_to_root_functions() {
    let grid = Grid::uniform(2001).unwrap();
    let p = presets::dirac_tminus();
    let (_, ch) = chains(&p, [-40.0, 40.0, -1.0, 1.0], &grid);
    let w = witness_t_minus(&p).unwrap();
    let fs = root_functions(&ch);
    assert_eq!(fs.len(), 12);
    let d = orthogonality_defects(&w, &fs, &grid).unwrap();
    assert!(d.iter().all(|&v| v < 1e-8));
    let sols = row_solutions(&p, &w, &grid, 50, 50.0, 3).unwrap();
    let refs: Vec<&GridFunction> = sols.iter().collect();
    assert!(orthogonality_defects(&w, &refs, &grid).unwrap().iter().all(|&v| v < 1e-8));
}

#[test]
fn step_witness_preconditions() {
    let e = witness_t_minus(&presets::dirac_periodic()).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Applicability);
    let e = witness_t_minus(&presets::dirac_dirichlet(1.0)).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Applicability);
    let e = witness_t_minus(&presets::nonreal_weights(1.0, 1.0)).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Applicability);
}

#[test]
fn mirrored_bumps_are_orthogonal_to_kernel_solutions() {
    let grid = Grid::uniform(2001).unwrap();
    let mut general = presets::dirac_mirror();
    // y1(0) = -2 y2(1), y2(0) = -y1(1)/2 keeps Δ ≡ 0
    general.bc = BoundaryPair::from_real(&[&[1.0, 0.0], &[0.0, 1.0]], &[&[0.0, 2.0], &[0.5, 0.0]]);
    for p in [presets::dirac_mirror(), presets::dirac_mirror_bump(1025), general] {
        let w = witness_dirac_degenerate(&p, &grid, None).unwrap();
        assert!(w.self_consistency.unwrap() < 1e-14);
        let ks = kernel_functions(&p, &kernel_lambdas(&p, 50), &grid).unwrap();
        assert_eq!(ks.len(), 50);
        let d = orthogonality_defects(&w, &root_functions(&ks), &grid).unwrap();
        assert!(d.iter().all(|&v| v < 1e-7), "{d:?}");
    }
}

#[test]
fn mirrored_bump_alphas_follow_normal_form() {
    let mut p = presets::dirac_mirror();
    p.bc = BoundaryPair::from_real(&[&[2.0, 0.0], &[1.0, 1.0]], &[&[0.0, 4.0], &[0.5, 2.0]]);
    let [a1, a2] = mirror_alphas(&p).unwrap();
    assert!((a1 - 2.0).norm() < 1e-12 && (a2 - 0.5).norm() < 1e-12);
}

#[test]
fn mirrored_bump_rejects_potential_at_endpoints() {
    let grid = Grid::uniform(1001).unwrap();
    let mut p = presets::dirac_mirror();
    p.potential = PotentialSpec::Constant(CMatrix::from_real_rows(&[&[0.0, 1.0], &[2.0, 0.0]]));
    let c = criteria_2x2(&p).unwrap();
    assert_eq!(c.get(ENDPOINT).unwrap().status, Status::Holds);
    let e = witness_dirac_degenerate(&p, &grid, None).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Applicability);
    assert!(e.to_string().contains("max |P|"));
    let e = witness_dirac_degenerate(&presets::dirac_mirror(), &grid, Some(0.2001)).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Applicability);
}

#[test]
fn criteria_for_reference_problems() {
    let expect = [
        (presets::dirac_periodic(), Prediction::Complete, REGULAR),
        (presets::dirac_dirichlet(1.0), Prediction::Complete, ENDPOINT),
        (presets::dirac_dirichlet_q0(), Prediction::Incomplete, TMINUS),
        (presets::dirac_tminus(), Prediction::Incomplete, TMINUS),
        (presets::dirac_mirror(), Prediction::Incomplete, MIRROR),
        (presets::nonreal_weights(1.0, 1.0), Prediction::CompleteAdjointIncomplete, NONREAL),
    ];
    for (p, pred, by) in expect {
        let c = criteria_2x2(&p).unwrap();
        assert_eq!((c.prediction, c.decided_by), (pred, Some(by)), "{c:?}");
    }
    let c = criteria_2x2(&presets::dirac_dirichlet_q0()).unwrap();
    assert_eq!(c.get(DEGENERATE).unwrap().status, Status::Holds);
    assert_eq!(c.get(VOLTERRA).unwrap().status, Status::Holds);
    let q1 = criteria_2x2(&presets::dirac_dirichlet(1.0)).unwrap();
    let e = q1.get(ENDPOINT).unwrap();
    assert_eq!(e.quantities[0], ("at_zero".to_string(), 1.0));
    assert_eq!(e.quantities[1], ("at_one".to_string(), 1.0));
    assert!(criteria_2x2(&presets::ex_n3_cyclic()).is_err());
}

#[test]
fn endpoint_criterion_carries_over_to_the_adjoint() {
    let q = |a: f64, b: f64| PotentialSpec::Poly {
        coefficients: vec![
            vec![vec![c(0.0, 0.0)], vec![c(a, 0.0), c(0.5, 0.2)]],
            vec![vec![c(b, 0.0), c(-0.3, 0.0)], vec![c(0.0, 0.0)]],
        ],
    };
    let bcs = [
        BoundaryPair::from_real(&[&[1.0, 0.0], &[0.0, 0.0]], &[&[0.0, 0.0], &[1.0, 0.0]]),
        BoundaryPair::from_real(&[&[1.0, 2.0], &[0.0, 0.0]], &[&[0.0, 0.0], &[1.0, -1.0]]),
        BoundaryPair::from_real(&[&[0.0, 1.0], &[1.0, 0.0]], &[&[0.0, 0.0], &[0.0, 3.0]]),
    ];
    let mut checked = 0;
    for bc in bcs {
        for (a, b) in [(1.0, 1.0), (0.5, -2.0), (2.0, 0.3)] {
            let p = SystemProblem::new(BlockStructure::real(&[-1.0, 1.0]), q(a, b), bc.clone());
            let c = criteria_2x2(&p).unwrap();
            if c.get(ENDPOINT).unwrap().status == Status::Holds {
                let adj = criteria_2x2(&adjoint_problem(&p).unwrap()).unwrap();
                assert_eq!(adj.get(ENDPOINT).unwrap().status, Status::Holds, "{p:?}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 6);
}

#[test]
fn partial_mirror_support_is_unclassified() {
    let pts: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
    let values = pts.iter().map(|&x| CMatrix::from_real_rows(&[&[0.0, (x - 0.8).max(0.0)], &[0.0, 0.0]])).collect();
    let mut p = presets::dirac_mirror();
    p.potential = PotentialSpec::Grid { abscissae: pts, values };
    let c = criteria_2x2(&p).unwrap();
    assert_eq!(c.get(MIRROR).unwrap().status, Status::Partial);
    assert_eq!(c.prediction, Prediction::Unclassified);
}

#[test]
fn endpoint_criterion_needs_continuous_samples() {
    let pts: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let values =
        pts.iter().map(|&x| CMatrix::from_real_rows(&[&[0.0, if x < 0.5 { 1.0 } else { 2.0 }], &[1.0, 0.0]])).collect();
    let mut p = presets::dirac_dirichlet(1.0);
    p.potential = PotentialSpec::Grid { abscissae: pts, values };
    let c = criteria_2x2(&p).unwrap();
    assert_eq!(c.get(ENDPOINT).unwrap().status, Status::NotApplicable);
}

#[test]
fn assessment_verdicts() {
    let mut o = CompletenessOptions { grid_points: 1001, ..Default::default() };
    o.window = Some(Window::new(-20.0, 20.0, -2.0, 2.0).unwrap());
    let r = assess(&presets::dirac_periodic(), &o).unwrap().report;
    assert!(r.verdict.starts_with("predicted-complete (birkhoff-regular) + evidence"), "{}", r.verdict);
    assert!(r.witness.is_none());
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["prediction"], "complete");

    o.window = Some(Window::new(-20.0, 20.0, -1.0, 1.0).unwrap());
    let r = assess(&presets::dirac_tminus(), &o).unwrap().report;
    assert_eq!(r.verdict, "certified-incomplete (witness)");
    let w = r.witness.unwrap();
    assert!(w.max_defect < 1e-8 && w.max_solution_defect.unwrap() < 1e-8);
    let t = r.residuals.unwrap();
    assert!(t.probes.iter().find(|p| p.id == "witness").unwrap().residuals.iter().all(|&v| v > 0.9));

    o.window = None;
    let r = assess(&presets::dirac_mirror(), &o).unwrap().report;
    assert!(r.degenerate);
    assert_eq!(r.verdict, "certified-incomplete (witness)");
    assert!(matches!(r.witness.unwrap().witness.kind, WitnessKind::MirroredBump));
}

#[test]
fn piecewise_inner_products_need_aligned_breakpoints() {
    let grid = Grid::uniform(101).unwrap();
    let f = PiecewiseFunction {
        n: 1,
        pieces: vec![Piece { component: 0, a: 0.105, b: 0.5, coef: c(1.0, 0.0), profile: Profile::Constant }],
    };
    let u = GridFunction::from_fn(&grid, 1, |_| vec![c(1.0, 0.0)]);
    assert_eq!(f.inner_with(&u, &grid).unwrap_err().kind(), ErrorKind::Validation);
    let hat = PiecewiseFunction {
        n: 1,
        pieces: vec![Piece { component: 0, a: 0.2, b: 0.6, coef: c(0.0, 2.0), profile: Profile::Hat }],
    };
    // the hat integrates to half its width
    let ip = hat.inner_with(&u, &grid).unwrap();
    assert!((ip - c(0.0, -0.4)).norm() < 1e-10);
    let back: PiecewiseFunction = serde_json::from_str(&serde_json::to_string(&hat).unwrap()).unwrap();
    assert_eq!(back, hat);
}

fn arb_series() -> impl Strategy<Value = Vec<CMatrix>> {
    (2usize..=4, 1usize..=3).prop_flat_map(|(n, k)| {
        prop::collection::vec(prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n), k + 1).prop_map(move |cs| {
            cs.into_iter().map(|v| CMatrix::from_fn(n, n, |i, j| c(v[i * n + j].0, v[i * n + j].1))).collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_algorithm: prop::test_runner::RngAlgorithm::ChaCha, ..ProptestConfig::default() })]

    /// `A(μ) adj(A(μ)) = det A(μ) I` holds coefficient by coefficient.
    #[test]
    fn taylor_adjugate_inverts_up_to_determinant(a in arb_series(), t in -0.3f64..0.3) {
        let k = a.len() - 1;
        let n = a[0].rows();
        let adj = taylor_adjugate(&a, k);
        for p in 0..=k {
            let mut prod = CMatrix::zeros(n, n);
            for q in 0..=p {
                prod = &prod + &(&a[q] * &adj[p - q]);
            }
            let off = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j)
                .map(|(i, j)| prod[(i, j)].norm()).fold(0.0, f64::max);
            prop_assert!(off < 1e-12);
            let diag0 = prod[(0, 0)];
            prop_assert!((0..n).all(|i| (prod[(i, i)] - diag0).norm() < 1e-12));
        }
        // evaluating the truncated series at small μ agrees with det for the polynomial A
        let mu = c(t, 0.0);
        let mut am = CMatrix::zeros(n, n);
        let mut pw = c(1.0, 0.0);
        for m in &a {
            am.axpy(pw, m);
            pw *= mu;
        }
        let d0 = det(&a[0]).unwrap();
        prop_assert!((d0 - (&a[0] * &adj[0])[(0, 0)]).norm() < 1e-12);
        prop_assert!(det(&am).unwrap().is_finite());
    }

    /// Nested spans give nonincreasing residuals for any probe.
    #[test]
    fn residuals_are_monotone(coef in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6), seed in 0u64..1000) {
        let grid = Grid::uniform(201).unwrap();
        let funcs: Vec<GridFunction> = (0..8)
            .map(|k| GridFunction::from_fn(&grid, 2, |x| vec![C64::from_polar(1.0, 2.0 * PI * k as f64 * x), c(x.powi(k), 0.0)]))
            .collect();
        let refs: Vec<&GridFunction> = funcs.iter().collect();
        let mut probes = default_probes(&grid, 2, seed);
        probes.push(Probe {
            id: "random".into(),
            f: GridFunction::from_fn(&grid, 2, |x| vec![c(coef[0].0, coef[0].1) * x.exp(), c(coef[1].0 * x.sin(), coef[1].1)]),
        });
        let t = completeness_residuals(&refs, &probes, &[1, 2, 3, 4, 5, 6, 7, 8], &grid).unwrap();
        prop_assert!(t.max_increase() <= 1e-12);
        prop_assert!(t.probes.iter().all(|p| p.residuals.iter().all(|&r| (0.0..=1.0 + 1e-12).contains(&r))));
    }
}
