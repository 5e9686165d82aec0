use num_complex::Complex64 as C64;
use serde::Serialize;

use super::fundamental::{propagate, IntegratorOptions};
use crate::error::{Error, Result};
use crate::model::SystemProblem;
use crate::numcore::{det, CMatrix, Lu};
use crate::regularity::det_t;

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticSample {
    pub t: f64,
    pub lambda: C64,
    /// `max |e^{-i b_k λ x} y_jk(x) - δ_jk|` over the shooting nodes.
    pub deviation: f64,
    /// `max |Y(0;λ) - I|`, i.e. how far `P(λ) = Y(0;λ)^{-1}` is from the identity.
    pub p_deviation: f64,
    /// `Δ(λ) e^{-β t}`
    pub scaled_delta: C64,
    pub det_t: C64,
    /// `|Δ e^{-βt} - det T_z| / |det T_z|`
    pub det_rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub z: C64,
    /// `β / t = Σ_{Re(b_k z) < 0} (-b_k z)`
    pub beta_rate: C64,
    pub samples: Vec<AsymptoticSample>,
    /// Deviations nonincreasing after the first sample.
    pub decreasing: bool,
    /// Smallest normalized `|Re((b_j - b_k) z)|` over block pairs.
    pub line_distance: f64,
    pub near_sector_boundary: bool,
}

/// Checks `Y(x;λ) = (e^{i b_k λ x}(δ_jk + o(1)))` along `λ = i z t` by solving, for each `k`,
/// the rescaled boundary value problem that defines the decaying-normalized solution,
/// and compares `Δ(izt) e^{-βt}` with `det T_z(C, D)`.
pub fn check_asymptotics(problem: &SystemProblem, z: C64, ts: &[f64]) -> Result<AsymptoticReport> {
    let blocks = &problem.blocks;
    if !problem.potential.has_zero_block_diagonal(blocks) {
        return Err(Error::Applicability("asymptotic check needs a potential with zero block diagonal".into()));
    }
    let w = blocks.weights();
    let mut line_distance = f64::INFINITY;
    for j in 0..w.len() {
        for k in j + 1..w.len() {
            let d = w[j] - w[k];
            line_distance = line_distance.min(((d * z).re / (d.norm() * z.norm())).abs());
        }
    }
    let cw = blocks.coord_weights();
    let beta_rate: C64 = cw.iter().filter(|b| (*b * z).re < 0.0).map(|b| -b * z).sum();
    let dt = det_t(&problem.bc, blocks, z)?;
    let mut samples = Vec::new();
    for &t in ts {
        let lambda = C64::i() * z * t;
        let b = birkhoff_solutions(problem, lambda)?;
        let (deviation, p_deviation) = (b.deviation, b.p_deviation);
        let scaled_delta = scaled_characteristic(problem, lambda, &b)?;
        samples.push(AsymptoticSample {
            t,
            lambda,
            deviation,
            p_deviation,
            scaled_delta,
            det_t: dt,
            det_rel_error: (scaled_delta - dt).norm() / dt.norm(),
        });
    }
    let decreasing = samples.windows(2).all(|p| p[1].deviation <= p[0].deviation + 1e-14);
    Ok(AsymptoticReport {
        z,
        beta_rate,
        samples,
        decreasing,
        line_distance,
        near_sector_boundary: line_distance < 1e-3,
    })
}

struct Birkhoff {
    deviation: f64,
    p_deviation: f64,
    /// Column `k` holds `z_k(0)` and `z_k(1)`, where `Y_k(x) = z_k(x) e^{μ_k x}`.
    z0: CMatrix,
    z1: CMatrix,
}

/// `Δ(λ) e^{-βt}` without forming `Φ(1;λ)`: with `Y = Φ Y(0)`,
/// `Δ = det(C Y(0) + D Y(1)) / det Y(0)`, and the growing exponentials `e^{μ_k}`
/// (exactly those summing to `βt`) are divided out column by column.
fn scaled_characteristic(problem: &SystemProblem, lambda: C64, b: &Birkhoff) -> Result<C64> {
    let n = problem.n();
    let mu: Vec<C64> = problem.blocks.coord_weights().iter().map(|w| C64::i() * w * lambda).collect();
    let mut m = CMatrix::zeros(n, n);
    let c0 = &problem.bc.c * &b.z0;
    let d1 = &problem.bc.d * &b.z1;
    for k in 0..n {
        let (fc, fd) = if mu[k].re > 0.0 { ((-mu[k]).exp(), C64::new(1.0, 0.0)) } else { (C64::new(1.0, 0.0), mu[k].exp()) };
        for r in 0..n {
            m[(r, k)] = c0[(r, k)] * fc + d1[(r, k)] * fd;
        }
    }
    Ok(det(&m)? / det(&b.z0)?)
}

fn birkhoff_solutions(problem: &SystemProblem, lambda: C64) -> Result<Birkhoff> {
    let n = problem.n();
    let cw = problem.blocks.coord_weights();
    let mu: Vec<C64> = cw.iter().map(|b| C64::i() * b * lambda).collect();
    let rate = lambda.norm() * problem.blocks.max_abs_weight();
    let segs = ((2.0 * rate).ceil() as usize).max(16);
    let nodes: Vec<f64> = (0..=segs).map(|i| i as f64 / segs as f64).collect();
    let mut props = Vec::with_capacity(segs);
    for i in 0..segs {
        let p = propagate(problem, lambda, &[CMatrix::identity(n)], &nodes[i..i + 2], IntegratorOptions::default(), |_, _| {})?;
        props.push(p.into_iter().next().unwrap());
    }
    let h = 1.0 / segs as f64;
    let dim = (segs + 1) * n;
    let mut worst: f64 = 0.0;
    let mut y0 = CMatrix::zeros(n, n);
    let mut y1 = CMatrix::zeros(n, n);
    for k in 0..n {
        let mut a = CMatrix::zeros(dim, dim);
        let mut rhs = CMatrix::zeros(dim, 1);
        let shrink = (-mu[k] * h).exp();
        for i in 0..segs {
            for r in 0..n {
                let row = i * n + r;
                a[(row, (i + 1) * n + r)] = C64::new(1.0, 0.0);
                for c in 0..n {
                    a[(row, i * n + c)] = -props[i][(r, c)] * shrink;
                }
            }
        }
        let base = segs * n;
        for j in 0..n {
            let row = base + j;
            let same_block = problem.blocks.block_of(j) == problem.blocks.block_of(k);
            if j == k {
                a[(row, j)] = C64::new(1.0, 0.0);
                rhs[(row, 0)] = C64::new(1.0, 0.0);
            } else if mu[j].re > mu[k].re && !same_block {
                a[(row, segs * n + j)] = C64::new(1.0, 0.0);
            } else {
                a[(row, j)] = C64::new(1.0, 0.0);
            }
        }
        let sol = Lu::new(&a)?.solve_unchecked(&rhs);
        for i in 0..=segs {
            for j in 0..n {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((sol[(i * n + j, 0)] - target).norm());
            }
        }
        for j in 0..n {
            y0[(j, k)] = sol[(j, 0)];
            y1[(j, k)] = sol[(segs * n + j, 0)];
        }
    }
    let p_dev = (&y0 - &CMatrix::identity(n)).norm_max();
    Ok(Birkhoff { deviation: worst, p_deviation: p_dev, z0: y0, z1: y1 })
}
