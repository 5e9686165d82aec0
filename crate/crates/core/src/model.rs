//! Problem data: block weights, potential and boundary pair.
//!
//! The system is `-i B y' + Q(x) y = λ y` on `[0,1]` with `B = diag(b_j^{-1} I_{n_j})`
//! and boundary condition `C y(0) + D y(1) = 0`. Only the weights `b_j` are stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{rank, CMatrix, Tolerance, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlocks", into = "RawBlocks")]
pub struct BlockStructure {
    sizes: Vec<usize>,
    weights: Vec<C64>,
}

impl BlockStructure {
    /// Checks shape only; content is checked by [`validate`].
    pub fn new(sizes: Vec<usize>, weights: Vec<C64>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() != weights.len() {
            return Err(Error::Validation(format!(
                "{} block sizes but {} weights",
                sizes.len(),
                weights.len()
            )));
        }
        Ok(BlockStructure { sizes, weights })
    }

    /// One coordinate per weight.
    pub fn scalar(weights: &[C64]) -> Self {
        BlockStructure { sizes: vec![1; weights.len()], weights: weights.to_vec() }
    }

    pub fn real(weights: &[f64]) -> Self {
        Self::scalar(&weights.iter().map(|&b| C64::new(b, 0.0)).collect::<Vec<_>>())
    }

    pub fn r(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    /// Block index of coordinate `k`.
    pub fn block_of(&self, k: usize) -> usize {
        let mut acc = 0;
        for (j, &s) in self.sizes.iter().enumerate() {
            acc += s;
            if k < acc {
                return j;
            }
        }
        panic!("coordinate {k} out of range");
    }

    /// `b_{j(k)}` for every coordinate `k`.
    pub fn coord_weights(&self) -> Vec<C64> {
        self.sizes.iter().zip(&self.weights).flat_map(|(&s, &b)| std::iter::repeat(b).take(s)).collect()
    }

    /// Coordinate ranges of each block.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.r());
        let mut start = 0;
        for &s in &self.sizes {
            out.push(start..start + s);
            start += s;
        }
        out
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.weights.iter().all(|b| b.im.abs() <= tol * b.norm())
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.weights.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs_weight(&self) -> f64 {
        self.weights.iter().map(|b| b.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Weights of the adjoint operator: `B*` has diagonal `conj(b_j)^{-1}`.
    pub fn adjoint(&self) -> Self {
        BlockStructure { sizes: self.sizes.clone(), weights: self.weights.iter().map(|b| b.conj()).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub enum PotentialSpec {
    Zero,
    Constant(CMatrix),
    /// Piecewise-linear interpolation between samples.
    Grid { abscissae: Vec<f64>, values: Vec<CMatrix> },
    /// `coefficients[i][j][p]` multiplies `x^p` in entry `(i, j)`.
    Poly { coefficients: Vec<Vec<Vec<C64>>> },
}

impl PotentialSpec {
    pub fn dimension(&self) -> Option<usize> {
        match self {
            PotentialSpec::Zero => None,
            PotentialSpec::Constant(m) => Some(m.rows()),
            PotentialSpec::Grid { values, .. } => values.first().map(|m| m.rows()),
            PotentialSpec::Poly { coefficients } => Some(coefficients.len()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::Constant(m) => m.norm_max() == 0.0,
            PotentialSpec::Grid { values, .. } => values.iter().all(|m| m.norm_max() == 0.0),
            PotentialSpec::Poly { coefficients } => {
                coefficients.iter().flatten().flatten().all(|z| z.norm() == 0.0)
            }
        }
    }

    pub fn eval(&self, x: f64, n: usize) -> Result<CMatrix> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("potential evaluated at x = {x}")));
        }
        Ok(self.eval_unchecked(x, n))
    }

    /// Evaluation without the domain check, clamping x into [0,1].
    pub fn eval_unchecked(&self, x: f64, n: usize) -> CMatrix {
        let x = x.clamp(0.0, 1.0);
        match self {
            PotentialSpec::Zero => CMatrix::zeros(n, n),
            PotentialSpec::Constant(m) => m.clone(),
            PotentialSpec::Grid { abscissae, values } => {
                let k = match abscissae.binary_search_by(|a| a.partial_cmp(&x).unwrap()) {
                    Ok(k) => return values[k].clone(),
                    Err(k) => k.clamp(1, abscissae.len() - 1),
                };
                let (x0, x1) = (abscissae[k - 1], abscissae[k]);
                let t = (x - x0) / (x1 - x0);
                let mut m = values[k - 1].scale(C64::new(1.0 - t, 0.0));
                m.axpy(C64::new(t, 0.0), &values[k]);
                m
            }
            PotentialSpec::Poly { coefficients } => {
                let d = coefficients.len();
                CMatrix::from_fn(d, d, |i, j| {
                    coefficients[i][j].iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
                })
            }
        }
    }

    /// Points where the potential is known exactly (grid nodes), or a uniform sample.
    pub fn sample_points(&self) -> Vec<f64> {
        match self {
            PotentialSpec::Grid { abscissae, .. } => abscissae.clone(),
            _ => (0..=256).map(|k| k as f64 / 256.0).collect(),
        }
    }

    /// Conjugate-transposed potential `Q*`.
    pub fn adjoint(&self) -> Self {
        match self {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::Constant(m) => PotentialSpec::Constant(m.adjoint()),
            PotentialSpec::Grid { abscissae, values } => PotentialSpec::Grid {
                abscissae: abscissae.clone(),
                values: values.iter().map(|m| m.adjoint()).collect(),
            },
            PotentialSpec::Poly { coefficients } => {
                let d = coefficients.len();
                let coefficients = (0..d)
                    .map(|i| (0..d).map(|j| coefficients[j][i].iter().map(|z| z.conj()).collect()).collect())
                    .collect();
                PotentialSpec::Poly { coefficients }
            }
        }
    }

    /// Whether every diagonal block of `Q(x)` vanishes (checked at the sample points).
    pub fn has_zero_block_diagonal(&self, blocks: &BlockStructure) -> bool {
        if matches!(self, PotentialSpec::Zero) {
            return true;
        }
        let n = blocks.n();
        let ranges = blocks.ranges();
        let pts = self.sample_points();
        let scale = pts.iter().map(|&x| self.eval_unchecked(x, n).norm_max()).fold(0.0, f64::max);
        let thr = 1e-13 * scale.max(1e-300);
        pts.iter().all(|&x| {
            let q = self.eval_unchecked(x, n);
            ranges.iter().all(|r| r.clone().all(|i| r.clone().all(|j| q[(i, j)].norm() <= thr)))
        })
    }

    /// The block-diagonal part `Q_1(x)`.
    pub fn block_diagonal_at(&self, x: f64, blocks: &BlockStructure) -> CMatrix {
        let n = blocks.n();
        let q = self.eval_unchecked(x, n);
        let mut out = CMatrix::zeros(n, n);
        for r in blocks.ranges() {
            for i in r.clone() {
                for j in r.clone() {
                    out[(i, j)] = q[(i, j)];
                }
            }
        }
        out
    }

    fn check(&self, n: usize, out: &mut Vec<String>) {
        if let Some(d) = self.dimension() {
            if d != n {
                out.push(format!("potential is {d}x{d} but n = {n}"));
                return;
            }
        }
        match self {
            PotentialSpec::Zero => {}
            PotentialSpec::Constant(m) => {
                if !m.is_square() || !m.is_finite() {
                    out.push("constant potential must be a finite square matrix".into());
                }
            }
            PotentialSpec::Grid { abscissae, values } => {
                if abscissae.len() < 2 || abscissae.len() != values.len() {
                    out.push("grid potential needs >= 2 abscissae, one matrix per abscissa".into());
                    return;
                }
                if abscissae[0] != 0.0 || *abscissae.last().unwrap() != 1.0 {
                    out.push("grid abscissae must start at 0 and end at 1".into());
                }
                if abscissae.windows(2).any(|w| !(w[1] > w[0])) {
                    out.push("grid abscissae must be strictly increasing".into());
                }
                if values.iter().any(|m| !m.is_finite() || m.rows() != n || m.cols() != n) {
                    out.push("grid values must be finite n x n matrices".into());
                }
            }
            PotentialSpec::Poly { coefficients } => {
                if coefficients.iter().any(|row| row.len() != n) {
                    out.push("polynomial potential must have n x n entries".into());
                }
                if coefficients.iter().flatten().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    out.push("polynomial coefficients must be finite".into());
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBc", into = "RawBc")]
pub struct BoundaryPair {
    pub c: CMatrix,
    pub d: CMatrix,
}

impl BoundaryPair {
    pub fn new(c: CMatrix, d: CMatrix) -> Result<Self> {
        if !c.is_square() || c.rows() != d.rows() || c.cols() != d.cols() {
            return Err(Error::Dimension("C and D must be square of equal size".into()));
        }
        Ok(BoundaryPair { c, d })
    }

    pub fn from_real(c: &[&[f64]], d: &[&[f64]]) -> Self {
        Self::new(CMatrix::from_real_rows(c), CMatrix::from_real_rows(d)).expect("consistent sizes")
    }

    pub fn n(&self) -> usize {
        self.c.rows()
    }

    /// The `n x 2n` array `(C D)`.
    pub fn combined(&self) -> CMatrix {
        self.c.hstack(&self.d)
    }

    pub fn is_maximal(&self, tol: Tolerance) -> bool {
        rank(&self.combined(), tol) == self.n()
    }

    /// Row operations `(M C, M D)`.
    pub fn left_multiply(&self, m: &CMatrix) -> Self {
        BoundaryPair { c: m * &self.c, d: m * &self.d }
    }
}

/// The 2x2 minors `J_jk` of the 2x4 array `(C D)` (columns numbered from 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JMinors {
    pub j12: C64,
    pub j34: C64,
    pub j32: C64,
    pub j13: C64,
    pub j42: C64,
    pub j14: C64,
}

impl JMinors {
    /// Any minor, 1-based columns.
    pub fn minor(bc: &BoundaryPair, j: usize, k: usize) -> C64 {
        let a = bc.combined();
        a[(0, j - 1)] * a[(1, k - 1)] - a[(0, k - 1)] * a[(1, j - 1)]
    }
}

pub fn j_minors(bc: &BoundaryPair) -> Result<JMinors> {
    if bc.n() != 2 {
        return Err(Error::Dimension(format!("J-minors need n = 2, got {}", bc.n())));
    }
    let m = |j, k| JMinors::minor(bc, j, k);
    Ok(JMinors { j12: m(1, 2), j34: m(3, 4), j32: m(3, 2), j13: m(1, 3), j42: m(4, 2), j14: m(1, 4) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemProblem {
    pub blocks: BlockStructure,
    pub potential: PotentialSpec,
    pub bc: BoundaryPair,
}

impl SystemProblem {
    pub fn new(blocks: BlockStructure, potential: PotentialSpec, bc: BoundaryPair) -> Self {
        SystemProblem { blocks, potential, bc }
    }

    pub fn n(&self) -> usize {
        self.blocks.n()
    }

    pub fn potential_at(&self, x: f64) -> CMatrix {
        self.potential.eval_unchecked(x, self.n())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    /// Fails with the first violation.
    pub fn ensure_valid(&self, tol: Tolerance) -> Result<()> {
        let rep = validate(self, tol);
        match rep.violations.first() {
            None => Ok(()),
            Some(v) if v.contains("maximality") => Err(Error::Maximality),
            Some(v) => Err(Error::Validation(v.clone())),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub zero_block_diagonal: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(problem: &SystemProblem, tol: Tolerance) -> ValidationReport {
    let mut v = Vec::new();
    let blocks = &problem.blocks;
    let n = blocks.n();
    if blocks.sizes.iter().any(|&s| s == 0) {
        v.push("block sizes must be >= 1".into());
    }
    for (j, b) in blocks.weights.iter().enumerate() {
        if !(b.re.is_finite() && b.im.is_finite()) || b.norm() == 0.0 {
            v.push(format!("weight b_{} must be finite and nonzero", j + 1));
        }
        for (k, c) in blocks.weights.iter().enumerate().skip(j + 1) {
            if b == c {
                v.push(format!("weights b_{} and b_{} must be distinct", j + 1, k + 1));
            }
        }
    }
    problem.potential.check(n, &mut v);
    let bc = &problem.bc;
    if bc.n() != n {
        v.push(format!("boundary matrices are {}x{} but n = {n}", bc.n(), bc.n()));
    } else if !bc.c.is_finite() || !bc.d.is_finite() {
        v.push("boundary matrices must be finite".into());
    } else if !bc.is_maximal(tol) {
        v.push("maximality condition rank(C D) = n violated".into());
    }
    let zero_block_diagonal = v.is_empty() && problem.potential.has_zero_block_diagonal(blocks);
    ValidationReport { violations: v, zero_block_diagonal }
}

pub fn eval_potential(spec: &PotentialSpec, x: f64, n: usize) -> Result<CMatrix> {
    spec.eval(x, n)
}

// ---- JSON representation: complex numbers as [re, im] ----

type Pair = [f64; 2];

fn to_pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn from_pair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn matrix_to_raw(m: &CMatrix) -> Vec<Vec<Pair>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(to_pair).collect()).collect()
}

fn matrix_from_raw(rows: Vec<Vec<Pair>>, what: &str) -> std::result::Result<CMatrix, String> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(format!("{what}: empty matrix"));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(format!("{what}: ragged rows"));
    }
    let rows: Vec<Vec<C64>> = rows.into_iter().map(|r| r.into_iter().map(from_pair).collect()).collect();
    Ok(CMatrix::from_rows(&rows))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlocks {
    sizes: Vec<usize>,
    weights: Vec<Pair>,
}

impl TryFrom<RawBlocks> for BlockStructure {
    type Error = String;
    fn try_from(r: RawBlocks) -> std::result::Result<Self, String> {
        BlockStructure::new(r.sizes, r.weights.into_iter().map(from_pair).collect()).map_err(|e| e.to_string())
    }
}

impl From<BlockStructure> for RawBlocks {
    fn from(b: BlockStructure) -> Self {
        RawBlocks { sizes: b.sizes, weights: b.weights.into_iter().map(to_pair).collect() }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
enum RawPotential {
    Zero,
    Constant { matrix: Vec<Vec<Pair>> },
    Grid { abscissae: Vec<f64>, values: Vec<Vec<Vec<Pair>>> },
    Poly { coefficients: Vec<Vec<Vec<Pair>>> },
}

impl TryFrom<RawPotential> for PotentialSpec {
    type Error = String;
    fn try_from(r: RawPotential) -> std::result::Result<Self, String> {
        Ok(match r {
            RawPotential::Zero => PotentialSpec::Zero,
            RawPotential::Constant { matrix } => PotentialSpec::Constant(matrix_from_raw(matrix, "potential.matrix")?),
            RawPotential::Grid { abscissae, values } => PotentialSpec::Grid {
                abscissae,
                values: values
                    .into_iter()
                    .enumerate()
                    .map(|(k, m)| matrix_from_raw(m, &format!("potential.values[{k}]")))
                    .collect::<std::result::Result<_, _>>()?,
            },
            RawPotential::Poly { coefficients } => PotentialSpec::Poly {
                coefficients: coefficients
                    .into_iter()
                    .map(|row| row.into_iter().map(|e| e.into_iter().map(from_pair).collect()).collect())
                    .collect(),
            },
        })
    }
}

impl From<PotentialSpec> for RawPotential {
    fn from(p: PotentialSpec) -> Self {
        match p {
            PotentialSpec::Zero => RawPotential::Zero,
            PotentialSpec::Constant(m) => RawPotential::Constant { matrix: matrix_to_raw(&m) },
            PotentialSpec::Grid { abscissae, values } => {
                RawPotential::Grid { abscissae, values: values.iter().map(matrix_to_raw).collect() }
            }
            PotentialSpec::Poly { coefficients } => RawPotential::Poly {
                coefficients: coefficients
                    .into_iter()
                    .map(|row| row.into_iter().map(|e| e.into_iter().map(to_pair).collect()).collect())
                    .collect(),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBc {
    #[serde(rename = "C")]
    c: Vec<Vec<Pair>>,
    #[serde(rename = "D")]
    d: Vec<Vec<Pair>>,
}

impl TryFrom<RawBc> for BoundaryPair {
    type Error = String;
    fn try_from(r: RawBc) -> std::result::Result<Self, String> {
        let c = matrix_from_raw(r.c, "bc.C")?;
        let d = matrix_from_raw(r.d, "bc.D")?;
        BoundaryPair::new(c, d).map_err(|e| e.to_string())
    }
}

impl From<BoundaryPair> for RawBc {
    fn from(b: BoundaryPair) -> Self {
        RawBc { c: matrix_to_raw(&b.c), d: matrix_to_raw(&b.d) }
    }
}

/// Serde helpers for complex values and matrices inside reports.
pub mod serde_c64 {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_pair(*z).serialize(s)
    }

    pub fn vec<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|&z| to_pair(z)).collect::<Vec<_>>().serialize(s)
    }

    pub fn matrix<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_raw(m).serialize(s)
    }

    pub fn opt<S: Serializer>(z: &Option<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        z.map(to_pair).serialize(s)
    }
}
