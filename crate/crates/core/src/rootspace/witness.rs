//! Explicit functions orthogonal to every root function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::gridfn::{GridFunction, Piece, PiecewiseFunction, Profile};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{JMinors, SystemProblem};
use crate::numcore::{nullspace, solve, CMatrix, Tolerance, C64};
use crate::regularity::selfadjoint_t_pm;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// Step functions built from a boundary row that only sees outgoing values.
    DegenerateRow,
    /// Mirrored bumps near both endpoints.
    MirroredBump,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub function: PiecewiseFunction,
    /// Coefficients `γ_k` of the boundary functional `Σ γ_k y_k(ξ_k)`, for the step witness.
    pub row: Option<Vec<C64>>,
    /// Support half-width near each endpoint, for the bump witness.
    pub epsilon: Option<f64>,
    /// `α_1, α_2` of the normal form `y_1(0) = -α_1 y_2(1)`, `y_2(0) = -α_2 y_1(1)`.
    pub alphas: Option<[C64; 2]>,
    /// Largest violation of the mirror relations between the two components.
    pub self_consistency: Option<f64>,
}

/// Step witness for real weights, `Q = 0` and `det T₋ = 0`.
pub fn witness_t_minus(problem: &SystemProblem) -> Result<Witness> {
    if !problem.potential.is_zero() {
        return Err(Error::Applicability("the step witness needs Q = 0".into()));
    }
    let t = selfadjoint_t_pm(&problem.bc, &problem.blocks)?;
    let tm = &t.t_minus;
    let scale: f64 = (0..tm.cols()).map(|j| tm.col(j).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).product();
    if t.det_minus.norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Applicability(format!("det T- = {} is not zero", t.det_minus)));
    }
    let c = nullspace(&tm.adjoint(), Tolerance::rel(1e-10))
        .ok_or_else(|| Error::Applicability("T- has no left null vector".into()))?
        .col(0);
    let b: Vec<f64> = problem.blocks.coord_weights().iter().map(|v| v.re).collect();
    let n = b.len();
    let ch = CMatrix::column_vector(&c).adjoint();
    let cc = (&ch * &problem.bc.c).row(0);
    let cd = (&ch * &problem.bc.d).row(0);
    let gamma: Vec<C64> = (0..n).map(|k| if b[k] > 0.0 { cc[k] } else { cd[k] }).collect();
    let alpha = 0.9 * b.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let gmax = gamma.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let mut pieces = Vec::new();
    for k in 0..n {
        if gamma[k].norm() <= 1e-14 * gmax {
            continue;
        }
        let len = alpha / b[k].abs();
        let (a, e) = if b[k] > 0.0 { (0.0, len) } else { (1.0 - len, 1.0) };
        pieces.push(Piece { component: k, a, b: e, coef: gamma[k].conj() * b[k].abs(), profile: Profile::Constant });
    }
    Ok(Witness {
        kind: WitnessKind::DegenerateRow,
        function: PiecewiseFunction { n, pieces },
        row: Some(gamma),
        epsilon: None,
        alphas: None,
        self_consistency: None,
    })
}

/// Solutions `Y(x;λ) = (a_k e^{i b_k λ x})` of the `Q = 0` equation whose data satisfy the
/// boundary row of a step witness, for `count` random `λ` in `|λ| ≤ radius`.
pub fn row_solutions(problem: &SystemProblem, witness: &Witness, grid: &Grid, count: usize, radius: f64, seed: u64) -> Result<Vec<GridFunction>> {
    let gamma = witness.row.as_ref().ok_or_else(|| Error::Applicability("witness carries no boundary row".into()))?;
    let b = problem.blocks.coord_weights();
    let n = b.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let lambda = C64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let r: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        // Σ γ_k a_k e^{i b_k λ ξ_k} = 0
        let wv: Vec<C64> = (0..n)
            .map(|k| {
                let xi = if b[k].re > 0.0 { 0.0 } else { 1.0 };
                gamma[k] * (C64::i() * b[k] * lambda * xi).exp()
            })
            .collect();
        // solve for the coefficient with the largest weight; projecting instead loses the
        // constraint to rounding when the weights differ by many orders of magnitude
        let kmax = (0..n).max_by(|&i, &j| wv[i].norm().total_cmp(&wv[j].norm())).unwrap();
        let mut a = r;
        let rest: C64 = (0..n).filter(|&k| k != kmax).map(|k| wv[k] * a[k]).sum();
        a[kmax] = -rest / wv[kmax];
        out.push(GridFunction::from_fn(grid, n, |x| (0..n).map(|k| a[k] * (C64::i() * b[k] * lambda * x).exp()).collect()));
    }
    Ok(out)
}

/// `(α_1, α_2)` from the normal form of a boundary pair with `J14 = J32 = 0`.
pub fn mirror_alphas(problem: &SystemProblem) -> Result<[C64; 2]> {
    if problem.n() != 2 {
        return Err(Error::Applicability("mirror form needs n = 2".into()));
    }
    let bc = &problem.bc;
    let j = |a, b| JMinors::minor(bc, a, b);
    let big = [j(1, 2), j(3, 4), j(1, 3), j(4, 2), j(1, 4), j(3, 2), j(2, 4), j(2, 3)]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let tol = 1e-12 * big;
    if j(1, 4).norm() > tol || j(3, 2).norm() > tol {
        return Err(Error::Applicability(format!("mirror form needs J14 = J32 = 0, got {} and {}", j(1, 4), j(3, 2))));
    }
    if j(1, 3).norm() <= tol || j(4, 2).norm() <= tol {
        return Err(Error::Applicability("mirror form needs J13 J42 != 0".into()));
    }
    let m = solve(&bc.c, &bc.combined())?;
    Ok([m[(0, 3)], m[(1, 2)]])
}

/// `P_1(x) = α_2 Q_12(x) - α_1 Q_21(1-x)`; `P_2(x) = P_1(1-x)`. Also returns the size of the
/// diagonal of `Q` at `x`, which must vanish on the witness support as well.
fn mirror_defect(problem: &SystemProblem, alphas: [C64; 2], x: f64) -> f64 {
    let q = problem.potential_at(x);
    let qm = problem.potential_at(1.0 - x);
    let p1 = alphas[1] * q[(0, 1)] - alphas[0] * qm[(1, 0)];
    p1.norm().max(q[(0, 0)].norm()).max(q[(1, 1)].norm())
}

/// How far the mirror defect vanishes from each endpoint: first grid node (from `0` and from
/// `1`) where it is nonzero, as a distance.
pub fn mirror_clearance(problem: &SystemProblem, alphas: [C64; 2], grid: &Grid) -> (f64, f64, f64) {
    let qmax = grid.x.iter().map(|&x| problem.potential_at(x).norm_max()).fold(0.0, f64::max);
    let tol = 1e-12 * (1.0 + qmax);
    let defect: Vec<f64> = grid.x.iter().map(|&x| mirror_defect(problem, alphas, x)).collect();
    let m = grid.len();
    let from0 = defect.iter().position(|&d| d > tol).map_or(1.0, |i| grid.x[i]);
    let from1 = defect.iter().rposition(|&d| d > tol).map_or(1.0, |i| 1.0 - grid.x[i]);
    let near = defect[..m / 10].iter().chain(&defect[m - m / 10..]).cloned().fold(0.0, f64::max);
    (from0, from1, near)
}

/// Mirrored-bump witness for `n = 2`, `b_2 = -b_1`, mirror-form boundary conditions and a
/// potential that vanishes in the mirror sense near both ends. `epsilon` defaults to the largest
/// grid-aligned value up to 0.25 inside the clear zone.
pub fn witness_dirac_degenerate(problem: &SystemProblem, grid: &Grid, epsilon: Option<f64>) -> Result<Witness> {
    let b = problem.blocks.coord_weights();
    if b.len() != 2 || (b[0] + b[1]).norm() > 1e-12 * b[0].norm() {
        return Err(Error::Applicability("mirrored bumps need n = 2 and b_2 = -b_1".into()));
    }
    let alphas = mirror_alphas(problem)?;
    let (from0, from1, near) = mirror_clearance(problem, alphas, grid);
    let clear = from0.min(from1);
    let h = grid.step();
    let eps = match epsilon {
        Some(e) => {
            if e > clear - h || grid.node_index(e).is_none() {
                return Err(Error::Applicability(format!(
                    "mirror defect is not zero on [0, {e}] and [1 - {e}, 1] (clear up to {clear}, max |P| near ends {near:.3e})"
                )));
            }
            e
        }
        None => {
            let target = 0.25f64.min(0.8 * clear);
            let k = ((target / h).floor() as usize / 4) * 4;
            if k < 4 {
                return Err(Error::Applicability(format!(
                    "mirror defect does not vanish near the endpoints (clear up to {clear:.3e}, max |P| near ends {near:.3e})"
                )));
            }
            grid.x[k]
        }
    };
    let [a1, a2] = alphas;
    let half = C64::new(0.5, 0.0);
    let one = C64::new(1.0, 0.0);
    let hat = |component, a, e, coef| Piece { component, a, b: e, coef, profile: Profile::Hat };
    let function = PiecewiseFunction {
        n: 2,
        pieces: vec![
            hat(0, 0.0, eps, one),
            hat(0, 1.0 - eps, 1.0, half),
            hat(1, 0.0, eps, (one / a2).conj() * half),
            hat(1, 1.0 - eps, 1.0, a1.conj()),
        ],
    };
    let mut sc: f64 = 0.0;
    for &x in grid.x.iter().take_while(|&&x| x <= eps) {
        let f = function.eval(x);
        let g = function.eval(1.0 - x);
        sc = sc.max((f[0] - (one / a1).conj() * g[1]).norm()).max((f[1] - (one / a2).conj() * g[0]).norm());
    }
    Ok(Witness {
        kind: WitnessKind::MirroredBump,
        function,
        row: None,
        epsilon: Some(eps),
        alphas: Some(alphas),
        self_consistency: Some(sc),
    })
}

/// Normalized `|⟨u, f⟩| / (‖u‖ ‖f‖)` for each function.
pub fn orthogonality_defects(witness: &Witness, functions: &[&GridFunction], grid: &Grid) -> Result<Vec<f64>> {
    let w = grid.simpson_weights();
    let fnorm = witness.function.norm(grid)?;
    functions
        .iter()
        .map(|u| {
            let ip = witness.function.inner_with(u, grid)?;
            Ok(ip.norm() / (super::gridfn::norm(u, &w) * fnorm).max(f64::MIN_POSITIVE))
        })
        .collect()
}
