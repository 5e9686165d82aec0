//! Completeness criteria for `2 x 2` systems.

use serde::Serialize;

use super::witness::{mirror_alphas, mirror_clearance};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{JMinors, PotentialSpec, SystemProblem};
use crate::numcore::{rank, solve, CMatrix, Tolerance, C64};
use crate::regularity::{classify, selfadjoint_t_pm, Verdict};
use crate::spectrum::{detect_degenerate, CharFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    Complete,
    /// Primary system complete, adjoint system incomplete.
    CompleteAdjointIncomplete,
    Incomplete,
    Unclassified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Fails,
    /// Holds near one endpoint only.
    Partial,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionEval {
    pub name: &'static str,
    pub status: Status,
    pub quantities: Vec<(String, f64)>,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriteriaReport {
    pub evaluations: Vec<CriterionEval>,
    pub prediction: Prediction,
    pub decided_by: Option<&'static str>,
}

impl CriteriaReport {
    pub fn get(&self, name: &str) -> Option<&CriterionEval> {
        self.evaluations.iter().find(|e| e.name == name)
    }
}

pub const REGULAR: &str = "birkhoff-regular";
pub const ENDPOINT: &str = "endpoint-potential";
pub const NONREAL: &str = "nonreal-ratio-pattern";
pub const VOLTERRA: &str = "volterra-row";
pub const TMINUS: &str = "tminus-singular";
pub const DEGENERATE: &str = "degenerate-determinant";
pub const MIRROR: &str = "mirror-support";

fn eval(name: &'static str, status: Status, quantities: Vec<(&str, f64)>, note: impl Into<String>) -> CriterionEval {
    CriterionEval {
        name,
        status,
        quantities: quantities.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        note: note.into(),
    }
}

fn holds(b: bool) -> Status {
    if b {
        Status::Holds
    } else {
        Status::Fails
    }
}

/// Largest jump between adjacent samples of `Q_12`, `Q_21`; zero for potentials that are
/// continuous by construction.
fn max_offdiag_jump(potential: &PotentialSpec, n: usize) -> f64 {
    match potential {
        PotentialSpec::Grid { abscissae, .. } => abscissae
            .windows(2)
            .map(|w| {
                let (a, b) = (potential.eval_unchecked(w[0], n), potential.eval_unchecked(w[1], n));
                (a[(0, 1)] - b[(0, 1)]).norm().max((a[(1, 0)] - b[(1, 0)]).norm())
            })
            .fold(0.0, f64::max),
        _ => 0.0,
    }
}

fn endpoint_criterion(problem: &SystemProblem, m: &JMinors, tol: f64) -> CriterionEval {
    let b = problem.blocks.coord_weights();
    if !problem.blocks.is_real(1e-14) || !(b[0].re < 0.0 && b[1].re > 0.0) {
        return eval(ENDPOINT, Status::NotApplicable, vec![], "needs real b_1 < 0 < b_2");
    }
    if !problem.potential.has_zero_block_diagonal(&problem.blocks) {
        return eval(ENDPOINT, Status::NotApplicable, vec![], "needs an off-diagonal potential");
    }
    let jump = max_offdiag_jump(&problem.potential, 2);
    if jump >= 1e-3 {
        return eval(ENDPOINT, Status::NotApplicable, vec![("max_jump", jump)], "potential samples are not continuous");
    }
    let (b1, b2) = (b[0], b[1]);
    let (q0, q1) = (problem.potential_at(0.0), problem.potential_at(1.0));
    let c1 = m.j32.norm() + (b1 * m.j13 * q0[(0, 1)] + b2 * m.j42 * q1[(1, 0)]).norm();
    let c2 = m.j14.norm() + (b1 * m.j13 * q1[(0, 1)] + b2 * m.j42 * q0[(1, 0)]).norm();
    eval(ENDPOINT, holds(c1 > tol && c2 > tol), vec![("at_zero", c1), ("at_one", c2), ("max_jump", jump)], "")
}

/// `y_1(0) - h_0 y_2(0) = 0`, `y_1(1) - h_1 y_2(0) = 0` with `h_0 h_1 != 0`, `b_1/b_2` not real.
fn nonreal_criterion(problem: &SystemProblem, m: &JMinors, tol: f64) -> Result<CriterionEval> {
    let b = problem.blocks.coord_weights();
    let ratio = b[0] / b[1];
    if ratio.im.abs() <= 1e-12 * ratio.norm() {
        return Ok(eval(NONREAL, Status::NotApplicable, vec![], "b_1/b_2 is real"));
    }
    let a = problem.bc.combined();
    let col4 = (a[(0, 3)].norm_sqr() + a[(1, 3)].norm_sqr()).sqrt();
    if col4 > tol.sqrt() || m.j13.norm() <= tol {
        return Ok(eval(NONREAL, Status::Fails, vec![("y2_at_one", col4), ("j13", m.j13.norm())], "boundary rows not of the pattern"));
    }
    let s = a.select_cols(&[0, 2]);
    let norm = solve(&s, &a)?;
    let (h0, h1) = (-norm[(0, 1)], -norm[(1, 1)]);
    let ok = h0.norm() > tol.sqrt() && h1.norm() > tol.sqrt();
    Ok(eval(NONREAL, holds(ok), vec![("h0", h0.norm()), ("h1", h1.norm()), ("ratio_im", ratio.im)], format!("h0 = {h0}, h1 = {h1}")))
}

/// Some combination of the rows equals a single boundary value `y_j(0)` or `y_j(1)`.
pub fn volterra_rows(problem: &SystemProblem) -> Vec<usize> {
    let a = problem.bc.combined();
    let n = problem.n();
    (0..2 * n)
        .filter(|&k| {
            let mut e = CMatrix::zeros(1, 2 * n);
            e[(0, k)] = C64::new(1.0, 0.0);
            rank(&a.vstack(&e), Tolerance::default()) == n
        })
        .collect()
}

fn mirror_criterion(problem: &SystemProblem) -> CriterionEval {
    let b = problem.blocks.coord_weights();
    if (b[0] + b[1]).norm() > 1e-12 * b[0].norm() {
        return eval(MIRROR, Status::NotApplicable, vec![], "needs b_2 = -b_1");
    }
    let alphas = match mirror_alphas(problem) {
        Ok(a) => a,
        Err(e) => return eval(MIRROR, Status::NotApplicable, vec![], e.to_string()),
    };
    let grid = Grid::uniform(2001).expect("fixed grid");
    let (from0, from1, near) = mirror_clearance(problem, alphas, &grid);
    let h = grid.step();
    let clear0 = from0 > 2.0 * h;
    let clear1 = from1 > 2.0 * h;
    let status = match (clear0, clear1) {
        (true, true) => Status::Holds,
        (false, false) => Status::Fails,
        _ => Status::Partial,
    };
    eval(MIRROR, status, vec![("clear_from_zero", from0), ("clear_from_one", from1), ("max_defect_near_ends", near)], "")
}

/// Evaluates every criterion and derives a prediction; the first decisive criterion wins, in the
/// order mirror support, singular `T₋`, degeneracy, boundary-value row, regularity, endpoint
/// potential, non-real pattern.
pub fn criteria_2x2(problem: &SystemProblem) -> Result<CriteriaReport> {
    if problem.n() != 2 {
        return Err(Error::Dimension(format!("criteria need n = 2, got {}", problem.n())));
    }
    problem.ensure_valid(Tolerance::default())?;
    let m = crate::model::j_minors(&problem.bc)?;
    let jmax = [m.j12, m.j34, m.j32, m.j13, m.j42, m.j14].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = 1e-12 * jmax;
    let zero_q = problem.potential.is_zero();
    let mut ev = Vec::new();

    ev.push(mirror_criterion(problem));

    ev.push(if !problem.blocks.is_real(1e-14) {
        eval(TMINUS, Status::NotApplicable, vec![], "needs real weights")
    } else if !zero_q {
        eval(TMINUS, Status::NotApplicable, vec![], "needs Q = 0")
    } else {
        let t = selfadjoint_t_pm(&problem.bc, &problem.blocks)?;
        let tm = &t.t_minus;
        let scale: f64 = (0..2).map(|j| tm.col(j).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).product();
        eval(TMINUS, holds(t.det_minus.norm() <= 1e-12 * scale), vec![("det_t_minus", t.det_minus.norm())], "")
    });

    let cf = CharFunction::new(problem)?;
    let deg = detect_degenerate(&cf, 1e-12)?;
    let ratio = match deg {
        crate::spectrum::Degeneracy::Degenerate { max_ratio } => max_ratio,
        crate::spectrum::Degeneracy::NonDegenerate { ratio, .. } => ratio,
    };
    ev.push(eval(DEGENERATE, holds(deg.is_degenerate()), vec![("max_ratio", ratio)], ""));

    let rows = volterra_rows(problem);
    ev.push(if rows.is_empty() {
        eval(VOLTERRA, Status::Fails, vec![], "")
    } else {
        let names: Vec<String> =
            rows.iter().map(|&k| format!("y{}({})", k % 2 + 1, if k < 2 { 0 } else { 1 })).collect();
        if zero_q {
            eval(VOLTERRA, Status::Holds, vec![], format!("rows equivalent to {} = 0", names.join(", ")))
        } else {
            eval(VOLTERRA, Status::NotApplicable, vec![], format!("{} = 0 present but Q != 0", names.join(", ")))
        }
    });

    let reg = classify(&problem.bc, &problem.blocks, Tolerance::default())?;
    ev.push(eval(
        REGULAR,
        holds(reg.verdict == Verdict::Regular),
        vec![("j32_j14", (m.j32 * m.j14).norm())],
        format!("{:?}", reg.verdict),
    ));

    ev.push(endpoint_criterion(problem, &m, tol));
    ev.push(nonreal_criterion(problem, &m, tol)?);

    let status = |name: &str| ev.iter().find(|e| e.name == name).map(|e| e.status);
    let order: [(&'static str, Prediction); 7] = [
        (MIRROR, Prediction::Incomplete),
        (TMINUS, Prediction::Incomplete),
        (DEGENERATE, Prediction::Incomplete),
        (VOLTERRA, Prediction::Incomplete),
        (REGULAR, Prediction::Complete),
        (ENDPOINT, Prediction::Complete),
        (NONREAL, Prediction::CompleteAdjointIncomplete),
    ];
    let mut prediction = Prediction::Unclassified;
    let mut decided_by = None;
    if status(MIRROR) != Some(Status::Partial) {
        for (name, p) in order {
            if status(name) == Some(Status::Holds) {
                prediction = p;
                decided_by = Some(name);
                break;
            }
        }
    }
    Ok(CriteriaReport { evaluations: ev, prediction, decided_by })
}
