use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::CMatrix;
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };


#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel >= 0.0 && abs >= 0.0) || (rel == 0.0 && abs == 0.0) {
            return Err(Error::Domain(format!("bad tolerance rel={rel} abs={abs}")));
        }
        Ok(Tolerance { rel, abs })
    }

    pub fn rel(rel: f64) -> Self {
        Tolerance { rel, abs: 0.0 }
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.rel * scale + self.abs
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-10, abs: 0.0 }
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!("LU of {}x{} matrix", m.rows(), m.cols())));
        }
        let n = m.rows();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = a[(k, k)];
            if piv == ZERO {
                continue;
            }
            for i in k + 1..n {
                let f = a[(i, k)] / piv;
                a[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
            }
        }
        Ok(Lu { lu: a, perm, sign })
    }

    pub fn det(&self) -> C64 {
        let n = self.lu.rows();
        let mut d = C64::new(self.sign, 0.0);
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Ratio of largest to smallest pivot magnitude; infinite when a pivot is zero.
    pub fn pivot_condition(&self) -> f64 {
        let n = self.lu.rows();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let v = self.lu[(i, i)].norm();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Solves without any singularity check.
    pub fn solve_unchecked(&self, rhs: &CMatrix) -> CMatrix {
        let n = self.lu.rows();
        assert_eq!(rhs.rows(), n);
        let mut x = CMatrix::from_fn(n, rhs.cols(), |i, j| rhs[(self.perm[i], j)]);
        for c in 0..rhs.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        x
    }
}

pub fn det(m: &CMatrix) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("det of {}x{} matrix", m.rows(), m.cols())));
    }
    match m.rows() {
        1 => Ok(m[(0, 0)]),
        2 => Ok(m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]),
        _ => Ok(Lu::new(m)?.det()),
    }
}

/// Solves `m x = rhs`; fails when σ_min/σ_max of `m` falls below `1e-10` (estimated).
pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    solve_with(m, rhs, 1e-10)
}

pub fn solve_with(m: &CMatrix, rhs: &CMatrix, rcond: f64) -> Result<CMatrix> {
    if rhs.rows() != m.rows() {
        return Err(Error::Dimension("rhs rows differ from matrix size".into()));
    }
    let lu = Lu::new(m)?;
    let cond = lu.pivot_condition();
    if !(cond.is_finite() && 1.0 / cond > rcond) {
        return Err(Error::Singular { cond });
    }
    let x = lu.solve_unchecked(rhs);
    // Pivot growth can hide ill-conditioning; confirm with the 1-norm estimate.
    let inv = lu.solve_unchecked(&CMatrix::identity(m.rows()));
    let cond1 = m.norm_1() * inv.norm_1();
    if !(cond1.is_finite() && 1.0 / cond1 > rcond) {
        return Err(Error::Singular { cond: cond1 });
    }
    Ok(x)
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    solve(m, &CMatrix::identity(m.rows()))
}

fn minor(m: &CMatrix, skip_r: usize, skip_c: usize) -> CMatrix {
    let n = m.rows();
    let rows: Vec<usize> = (0..n).filter(|&i| i != skip_r).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| j != skip_c).collect();
    m.submatrix(&rows, &cols)
}

fn adjugate_cofactor(m: &CMatrix) -> CMatrix {
    let n = m.rows();
    if n == 1 {
        return CMatrix::identity(1);
    }
    let mut adj = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let sgn = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // adj(m)[j][i] = cofactor(i, j)
            adj[(j, i)] = det(&minor(m, i, j)).expect("square minor") * sgn;
        }
    }
    adj
}

/// Classical adjoint, `m adj(m) = det(m) I`, defined for singular input.
pub fn adjugate(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("adjugate of {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n <= 4 {
        return Ok(adjugate_cofactor(m));
    }
    let lu = Lu::new(m)?;
    let d = lu.det();
    let hadamard: f64 = (0..n).map(|j| m.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).product();
    if d.norm() > 1e-8 * hadamard && lu.pivot_condition() < 1e8 {
        Ok(lu.solve_unchecked(&CMatrix::identity(n)).scale(d))
    } else {
        Ok(adjugate_cofactor(m))
    }
}

/// One-sided Jacobi SVD. Returns singular values (unsorted, one per column) and `V`.
fn jacobi_svd(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (rows, n) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut v = CMatrix::identity(n);
    // columns below this squared norm are treated as exact zeros (avoids denormal phases)
    let negligible = 1e-36 * m.norm_fro().powi(2);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for i in 0..rows {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ph = gamma / g;
                let rot = |mat: &mut CMatrix, len: usize| {
                    for i in 0..len {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = x * c - y * ph.conj() * s;
                        mat[(i, q)] = x * ph * s + y * c;
                    }
                };
                rot(&mut a, rows);
                rot(&mut v, n);
            }
        }
        if !rotated {
            break;
        }
    }
    let sv = (0..n).map(|j| a.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    (sv, v)
}

/// Singular values in descending order (min(rows, cols) of them).
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let work = if m.rows() < m.cols() { m.adjoint() } else { m.clone() };
    let (mut sv, _) = jacobi_svd(&work);
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn rank(m: &CMatrix, tol: Tolerance) -> usize {
    let sv = singular_values(m);
    let thr = tol.threshold(sv[0]);
    sv.iter().filter(|&&s| s > thr).count()
}

/// Orthonormal basis of the numerical kernel, returned as the columns of a matrix
/// (or `None` when the kernel is trivial).
pub fn nullspace(m: &CMatrix, tol: Tolerance) -> Option<CMatrix> {
    let n = m.cols();
    // Pad short-wide input with zero rows so that every right singular vector is computed.
    let work = if m.rows() < n { m.vstack(&CMatrix::zeros(n - m.rows(), n)) } else { m.clone() };
    let (sv, v) = jacobi_svd(&work);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let thr = tol.threshold(smax);
    let keep: Vec<usize> = (0..n).filter(|&j| sv[j] <= thr).collect();
    if keep.is_empty() {
        None
    } else {
        Some(v.select_cols(&keep))
    }
}

/// Eigenvalues of a Hermitian matrix, ascending (cyclic Jacobi on the real symmetric embedding).
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.rows();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    for _ in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // each eigenvalue appears twice in the embedding
    ev.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
}

