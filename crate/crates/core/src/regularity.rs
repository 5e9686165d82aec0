//! Algebraic classification of boundary conditions.
//!
//! `T_z(C,D)` takes column `k` from `C` when `Re(z b_k) > 0` and from `D` when
//! `Re(z b_k) < 0`. Along `λ = i z t` this is the column mix that dominates
//! `det(C + D Φ(1; λ))` as `t → ∞`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::BoundaryPair;
use crate::model::BlockStructure;
use crate::numcore::{det, hermitian_eigenvalues, nullspace, rank, CMatrix, Tolerance, C64};

/// Which sign decides the column source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ColumnRule {
    /// sign of `Re(z b_k)`
    #[default]
    ExponentWeights,
    /// sign of `Re(z / b_k)`, i.e. of the diagonal of `zB`
    ReciprocalWeights,
}

impl ColumnRule {
    fn re(self, z: C64, b: C64) -> f64 {
        match self {
            ColumnRule::ExponentWeights => (z * b).re,
            ColumnRule::ReciprocalWeights => (z * b.conj()).re,
        }
    }

    /// Direction (mod π) of the line where the sign flips.
    fn line_angle(self, b: C64) -> f64 {
        match self {
            ColumnRule::ExponentWeights => PI / 2.0 - b.arg(),
            ColumnRule::ReciprocalWeights => PI / 2.0 + b.arg(),
        }
    }

    fn other(self) -> Self {
        match self {
            ColumnRule::ExponentWeights => ColumnRule::ReciprocalWeights,
            ColumnRule::ReciprocalWeights => ColumnRule::ExponentWeights,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Source {
    FromC,
    FromD,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionMatrix {
    pub z: C64,
    pub picked: Vec<Source>,
    #[serde(skip)]
    pub matrix: CMatrix,
}

fn admissible(blocks: &BlockStructure, z: C64, rule: ColumnRule) -> Result<Vec<f64>> {
    let mut signs = Vec::with_capacity(blocks.r());
    for (j, &b) in blocks.weights().iter().enumerate() {
        let s = rule.re(z, b);
        if s.abs() <= 1e-14 * z.norm() * b.norm() || !s.is_finite() {
            return Err(Error::Admissibility { z, block: j + 1 });
        }
        signs.push(s);
    }
    Ok(signs)
}

pub fn selection_matrix(bc: &BoundaryPair, blocks: &BlockStructure, z: C64) -> Result<SelectionMatrix> {
    selection_matrix_with(bc, blocks, z, ColumnRule::default())
}

pub fn selection_matrix_with(
    bc: &BoundaryPair,
    blocks: &BlockStructure,
    z: C64,
    rule: ColumnRule,
) -> Result<SelectionMatrix> {
    let n = blocks.n();
    if bc.n() != n {
        return Err(Error::Dimension(format!("boundary pair is {}x{}, blocks give n = {n}", bc.n(), bc.n())));
    }
    let signs = admissible(blocks, z, rule)?;
    let mut matrix = CMatrix::zeros(n, n);
    let mut picked = Vec::with_capacity(n);
    for k in 0..n {
        let src = if signs[blocks.block_of(k)] > 0.0 { Source::FromC } else { Source::FromD };
        let from = if src == Source::FromC { &bc.c } else { &bc.d };
        matrix.set_col(k, &from.col(k));
        picked.push(src);
    }
    Ok(SelectionMatrix { z, picked, matrix })
}

pub fn det_t(bc: &BoundaryPair, blocks: &BlockStructure, z: C64) -> Result<C64> {
    det(&selection_matrix(bc, blocks, z)?.matrix)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FanMode {
    Regularity,
    Ordering,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sector {
    /// Open angular interval `(start, end)` of `arg z`, with `end > start`.
    pub start: f64,
    pub end: f64,
    pub z: C64,
    /// Ordering mode: block indices sorted by `Re(i b_j λ)` ascending along `λ = i z t`.
    pub permutation: Option<Vec<usize>>,
}

/// Directions `z` split by the lines where the column picks (or the exponent order) change.
/// The spectral parameter runs along `λ = i z t`, `t > 0`.
#[derive(Clone, Debug, Serialize)]
pub struct SectorFan {
    pub mode: FanMode,
    pub angles: Vec<f64>,
    pub sectors: Vec<Sector>,
}

fn norm_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU - 1e-12 {
        0.0
    } else {
        r
    }
}

fn fan_from_lines(lines: Vec<f64>) -> (Vec<f64>, Vec<(f64, f64)>) {
    let mut angles: Vec<f64> = lines.iter().flat_map(|&t| [norm_angle(t), norm_angle(t + PI)]).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if angles.len() > 1 && (angles[0] + TAU - angles[angles.len() - 1]).abs() < 1e-12 {
        angles.pop();
    }
    if angles.is_empty() {
        return (angles, vec![(0.0, TAU)]);
    }
    let m = angles.len();
    let arcs = (0..m)
        .map(|i| {
            let s = angles[i];
            let e = if i + 1 < m { angles[i + 1] } else { angles[0] + TAU };
            (s, e)
        })
        .collect();
    (angles, arcs)
}

pub fn build_sector_fan(blocks: &BlockStructure, mode: FanMode) -> SectorFan {
    build_sector_fan_with(blocks, mode, ColumnRule::default())
}

pub fn build_sector_fan_with(blocks: &BlockStructure, mode: FanMode, rule: ColumnRule) -> SectorFan {
    let w = blocks.weights();
    let lines: Vec<f64> = match mode {
        FanMode::Regularity => w.iter().map(|&b| rule.line_angle(b)).collect(),
        FanMode::Ordering => {
            let mut l = Vec::new();
            for j in 0..w.len() {
                for k in j + 1..w.len() {
                    l.push(PI / 2.0 - (w[j] - w[k]).arg());
                }
            }
            l
        }
    };
    let (angles, arcs) = fan_from_lines(lines);
    let sectors = arcs
        .into_iter()
        .map(|(s, e)| {
            let z = C64::from_polar(1.0, 0.5 * (s + e));
            let permutation = (mode == FanMode::Ordering).then(|| ordering_at(blocks, z));
            Sector { start: s, end: e, z, permutation }
        })
        .collect();
    SectorFan { mode, angles, sectors }
}

/// Block order by `Re(i b_j λ) = -Re(b_j z)` ascending along `λ = i z t`.
pub fn ordering_at(blocks: &BlockStructure, z: C64) -> Vec<usize> {
    let w = blocks.weights();
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| (-(w[a] * z).re).partial_cmp(&(-(w[b] * z).re)).unwrap());
    idx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    RankDeficient,
    Regular,
    WeaklyRegularOnly,
    NotWeaklyRegular,
}

impl Verdict {
    pub fn is_weakly_regular(self) -> bool {
        matches!(self, Verdict::Regular | Verdict::WeaklyRegularOnly)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorRecord {
    pub start: f64,
    pub end: f64,
    pub z: C64,
    pub det: C64,
    /// `|det T| / (‖C‖_F + ‖D‖_F)^n`
    pub relative: f64,
    pub nonzero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub verdict: Verdict,
    pub rule: ColumnRule,
    pub sectors: Vec<SectorRecord>,
    pub witness: Option<[C64; 3]>,
    pub witness_dets: Option<[C64; 3]>,
    /// The alternative column rule would give a different verdict.
    pub rule_disagreement: bool,
}

pub fn classify(bc: &BoundaryPair, blocks: &BlockStructure, tol: Tolerance) -> Result<RegularityReport> {
    classify_with(bc, blocks, tol, ColumnRule::default())
}

pub fn classify_with(
    bc: &BoundaryPair,
    blocks: &BlockStructure,
    tol: Tolerance,
    rule: ColumnRule,
) -> Result<RegularityReport> {
    let mut rep = classify_core(bc, blocks, tol, rule, false)?;
    let alt = classify_core(bc, blocks, tol, rule.other(), false)?;
    rep.rule_disagreement = alt.verdict != rep.verdict;
    Ok(rep)
}

/// Classification that also runs the triple search for regular conditions.
pub fn classify_exhaustive(bc: &BoundaryPair, blocks: &BlockStructure, tol: Tolerance) -> Result<RegularityReport> {
    classify_core(bc, blocks, tol, ColumnRule::default(), true)
}

fn det_scale(bc: &BoundaryPair) -> f64 {
    (bc.c.norm_fro() + bc.d.norm_fro()).powi(bc.n() as i32)
}

fn classify_core(
    bc: &BoundaryPair,
    blocks: &BlockStructure,
    tol: Tolerance,
    rule: ColumnRule,
    always_search: bool,
) -> Result<RegularityReport> {
    let scale = det_scale(bc);
    let fan = build_sector_fan_with(blocks, FanMode::Regularity, rule);
    let mut sectors = Vec::with_capacity(fan.sectors.len());
    for s in &fan.sectors {
        let d = det(&selection_matrix_with(bc, blocks, s.z, rule)?.matrix)?;
        let relative = if scale > 0.0 { d.norm() / scale } else { 0.0 };
        sectors.push(SectorRecord {
            start: s.start,
            end: s.end,
            z: s.z,
            det: d,
            relative,
            nonzero: d.norm() > tol.threshold(scale),
        });
    }
    let mut rep = RegularityReport {
        verdict: Verdict::NotWeaklyRegular,
        rule,
        sectors,
        witness: None,
        witness_dets: None,
        rule_disagreement: false,
    };
    if rank(&bc.combined(), Tolerance::default()) < bc.n() {
        rep.verdict = Verdict::RankDeficient;
        return Ok(rep);
    }
    let all = rep.sectors.iter().all(|s| s.nonzero);
    if all && !always_search {
        rep.verdict = Verdict::Regular;
        return Ok(rep);
    }
    if let Some((tri, dets)) = find_triple(bc, blocks, &rep.sectors, rule)? {
        rep.witness = Some(tri);
        rep.witness_dets = Some(dets);
        rep.verdict = if all { Verdict::Regular } else { Verdict::WeaklyRegularOnly };
    } else if all {
        // cannot happen for a full fan; keep the algebraic verdict
        rep.verdict = Verdict::Regular;
    }
    Ok(rep)
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Origin strictly inside the triangle, with an orientation tolerance.
pub fn origin_inside(z: [C64; 3], tol: f64) -> bool {
    let o = [cross(z[1] - z[0], -z[0]), cross(z[2] - z[1], -z[1]), cross(z[0] - z[2], -z[2])];
    o.iter().all(|&v| v > tol) || o.iter().all(|&v| v < -tol)
}

fn search(points: &[C64]) -> Option<[C64; 3]> {
    let m = points.len();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let t = [points[a], points[b], points[c]];
                if origin_inside(t, 1e-12) {
                    return Some(t);
                }
            }
        }
    }
    None
}

fn find_triple(
    bc: &BoundaryPair,
    blocks: &BlockStructure,
    sectors: &[SectorRecord],
    rule: ColumnRule,
) -> Result<Option<([C64; 3], [C64; 3])>> {
    let good: Vec<&SectorRecord> = sectors.iter().filter(|s| s.nonzero).collect();
    let reps: Vec<C64> = good.iter().map(|s| s.z).collect();
    // Midpoints first; a wide sector may need points near its edges as well.
    let found = search(&reps).or_else(|| {
        let mut pts = Vec::new();
        for s in &good {
            let w = s.end - s.start;
            for f in [0.5, 0.25, 0.75, 0.01, 0.99, 1e-4, 1.0 - 1e-4] {
                pts.push(C64::from_polar(1.0, s.start + f * w));
            }
        }
        search(&pts)
    });
    match found {
        None => Ok(None),
        Some(t) => {
            let mut dets = [C64::new(0.0, 0.0); 3];
            for (d, &z) in dets.iter_mut().zip(&t) {
                *d = det(&selection_matrix_with(bc, blocks, z, rule)?.matrix)?;
            }
            Ok(Some((t, dets)))
        }
    }
}

/// Number of coordinates with `Re(z b_k) > 0`.
pub fn kappa_plus(blocks: &BlockStructure, z: C64) -> usize {
    blocks.coord_weights().iter().filter(|&&b| (z * b).re > 0.0).count()
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitRecord {
    pub z: C64,
    pub kappa_plus: usize,
    pub matches: bool,
    pub det: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittingReport {
    /// Number of conditions imposed at `x = 0`.
    pub k: usize,
    pub records: Vec<SplitRecord>,
    /// Regularity of separated conditions requires a match in every sector.
    pub regular_possible: bool,
}

pub fn splitting_check(bc: &BoundaryPair, blocks: &BlockStructure) -> Result<SplittingReport> {
    let n = bc.n();
    let scale = bc.c.norm_max().max(bc.d.norm_max());
    let zero = |v: &[C64]| v.iter().all(|z| z.norm() <= 1e-14 * scale);
    let mut k = 0;
    for i in 0..n {
        let (cr, dr) = (bc.c.row(i), bc.d.row(i));
        match (zero(&cr), zero(&dr)) {
            (false, true) => k += 1,
            (true, false) => {}
            (true, true) => return Err(Error::Structure(format!("row {} is zero", i + 1))),
            (false, false) => {
                return Err(Error::Structure(format!("row {} involves both endpoints", i + 1)))
            }
        }
    }
    let fan = build_sector_fan(blocks, FanMode::Regularity);
    let mut records = Vec::new();
    for s in &fan.sectors {
        let kp = kappa_plus(blocks, s.z);
        records.push(SplitRecord { z: s.z, kappa_plus: kp, matches: kp == k, det: det_t(bc, blocks, s.z)? });
    }
    let regular_possible = records.iter().all(|r| r.matches);
    Ok(SplittingReport { k, records, regular_possible })
}

#[derive(Clone, Debug, Serialize)]
pub struct TPlusMinus {
    #[serde(skip)]
    pub t_plus: CMatrix,
    #[serde(skip)]
    pub t_minus: CMatrix,
    pub det_plus: C64,
    pub det_minus: C64,
}

fn require_real(blocks: &BlockStructure) -> Result<Vec<f64>> {
    if !blocks.is_real(1e-14) {
        return Err(Error::Applicability("requires real weights (B = B*)".into()));
    }
    Ok(blocks.coord_weights().iter().map(|b| b.re).collect())
}

/// `T± = C P± + D P∓` with `P±` the projections onto coordinates with `±b_k > 0`.
pub fn selfadjoint_t_pm(bc: &BoundaryPair, blocks: &BlockStructure) -> Result<TPlusMinus> {
    let b = require_real(blocks)?;
    let n = b.len();
    let mut tp = CMatrix::zeros(n, n);
    let mut tm = CMatrix::zeros(n, n);
    for (k, &bk) in b.iter().enumerate() {
        let (pc, pd) = (bc.c.col(k), bc.d.col(k));
        if bk > 0.0 {
            tp.set_col(k, &pc);
            tm.set_col(k, &pd);
        } else {
            tp.set_col(k, &pd);
            tm.set_col(k, &pc);
        }
    }
    Ok(TPlusMinus { det_plus: det(&tp)?, det_minus: det(&tm)?, t_plus: tp, t_minus: tm })
}

fn boundary_form_diag(blocks: &BlockStructure) -> Vec<C64> {
    let w = blocks.coord_weights();
    let b: Vec<C64> = w.iter().map(|x| x.inv()).collect();
    b.iter().cloned().chain(b.iter().map(|x| -x)).collect()
}

/// Adjoint boundary pair: `Ker(C* D*)` is the orthogonal complement of `Ker(C D)` in the
/// form `⟨diag(B, -B) φ, ψ⟩`.
pub fn adjoint_bc(bc: &BoundaryPair, blocks: &BlockStructure) -> Result<BoundaryPair> {
    let n = bc.n();
    let tol = Tolerance::default();
    if rank(&bc.combined(), tol) != n {
        return Err(Error::Maximality);
    }
    let v = nullspace(&bc.combined(), tol).ok_or(Error::Maximality)?;
    if v.cols() != n {
        return Err(Error::Maximality);
    }
    let bt = CMatrix::diag(&boundary_form_diag(blocks));
    let rows = (&bt * &v).adjoint();
    let idx0: Vec<usize> = (0..n).collect();
    let idx1: Vec<usize> = (n..2 * n).collect();
    let all: Vec<usize> = (0..n).collect();
    BoundaryPair::new(rows.submatrix(&all, &idx0), rows.submatrix(&all, &idx1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DissipativityVerdict {
    Dissipative,
    Accumulative,
    Selfadjoint,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct DissipativityReport {
    pub verdict: DissipativityVerdict,
    /// Eigenvalues of `G = V^H diag(B, -B) V`, ascending.
    pub eigenvalues: Vec<f64>,
    pub det_plus: C64,
    pub det_minus: C64,
}

/// Sign of `Im(L y, y)` over the domain for `Q = 0`.
pub fn dissipativity(bc: &BoundaryPair, blocks: &BlockStructure, tol: Tolerance) -> Result<DissipativityReport> {
    require_real(blocks)?;
    let n = bc.n();
    let v = nullspace(&bc.combined(), Tolerance::default()).ok_or(Error::Maximality)?;
    if v.cols() != n {
        return Err(Error::Maximality);
    }
    let bt = CMatrix::diag(&boundary_form_diag(blocks));
    let g = &(&v.adjoint() * &bt) * &v;
    let ev = hermitian_eigenvalues(&g);
    let scale = 1.0 / blocks.min_abs_weight();
    let thr = tol.threshold(scale);
    let verdict = if ev.iter().all(|e| e.abs() <= thr) {
        DissipativityVerdict::Selfadjoint
    } else if ev.iter().all(|&e| e <= thr) {
        DissipativityVerdict::Accumulative
    } else if ev.iter().all(|&e| e >= -thr) {
        DissipativityVerdict::Dissipative
    } else {
        DissipativityVerdict::Neither
    };
    let t = selfadjoint_t_pm(bc, blocks)?;
    Ok(DissipativityReport { verdict, eigenvalues: ev, det_plus: t.det_plus, det_minus: t.det_minus })
}
