use num_complex::Complex64 as C64;

use super::rk::Dopri;
use crate::error::{Error, Result};
use crate::model::{BoundaryPair, PotentialSpec, SystemProblem};
use crate::numcore::{inverse, CMatrix};

pub const DEFAULT_GAUGE_POINTS: usize = 1025;

/// Block-diagonal `W` with `W' = -i B^{-1} Q_1 W`, `W(0) = I`, and the potential
/// `Q̃ = W^{-1}(Q - Q_1) W` it induces.
#[derive(Clone, Debug)]
pub struct GaugeTransform {
    pub grid: Vec<f64>,
    pub w: Vec<CMatrix>,
    pub w1: CMatrix,
    pub q_tilde: PotentialSpec,
    /// `Q_1 ≡ 0`, so `W ≡ I` and `Q̃ = Q`.
    pub trivial: bool,
}

impl GaugeTransform {
    /// The problem `(B, Q̃, C, D W(1))`, isospectral to the original one.
    pub fn transformed(&self, problem: &SystemProblem) -> SystemProblem {
        SystemProblem {
            blocks: problem.blocks.clone(),
            potential: self.q_tilde.clone(),
            bc: BoundaryPair { c: problem.bc.c.clone(), d: &problem.bc.d * &self.w1 },
        }
    }
}

pub fn gauge_transform(problem: &SystemProblem, grid: &[f64]) -> Result<GaugeTransform> {
    let n = problem.n();
    if grid.first() != Some(&0.0) || grid.last() != Some(&1.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("gauge grid must increase from 0 to 1".into()));
    }
    if problem.potential.has_zero_block_diagonal(&problem.blocks) {
        return Ok(GaugeTransform {
            grid: grid.to_vec(),
            w: vec![CMatrix::identity(n); grid.len()],
            w1: CMatrix::identity(n),
            q_tilde: problem.potential.clone(),
            trivial: true,
        });
    }
    let ib: Vec<C64> = problem.blocks.coord_weights().iter().map(|b| C64::i() * b).collect();
    let blocks = &problem.blocks;
    let rhs = |x: f64, y: &[C64], dy: &mut [C64]| {
        let q1 = problem.potential.block_diagonal_at(x, blocks);
        for i in 0..n {
            for c in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..n {
                    acc += q1[(i, l)] * y[l * n + c];
                }
                dy[i * n + c] = -ib[i] * acc;
            }
        }
    };
    let err_norm = |y0: &[C64], y1: &[C64], e: &[C64]| {
        let s = y0.iter().chain(y1).fold(0.0f64, |m, z| m.max(z.norm()));
        e.iter().fold(0.0f64, |m, z| m.max(z.norm())) / (1e-12 * s + 1e-300)
    };
    let qmax = problem.potential.sample_points().iter().map(|&x| problem.potential_at(x).norm_max()).fold(0.0, f64::max);
    let dopri = Dopri {
        max_step: 0.1 / (1.0 + qmax * blocks.max_abs_weight()),
        min_step: 1e-13,
        max_steps: 50_000_000,
    };
    let mut w = Vec::with_capacity(grid.len());
    dopri
        .integrate(rhs, grid, CMatrix::identity(n).as_slice().to_vec(), err_norm, |_, _, y| {
            let mut m = CMatrix::zeros(n, n);
            m.as_mut_slice().copy_from_slice(y);
            w.push(m);
        })
        .map_err(|_| Error::Stiffness { lambda: C64::new(0.0, 0.0) })?;
    let mut values = Vec::with_capacity(grid.len());
    for (k, &x) in grid.iter().enumerate() {
        let q = problem.potential_at(x);
        let q1 = problem.potential.block_diagonal_at(x, blocks);
        let off = &q - &q1;
        let mut qt = &(&inverse(&w[k])? * &off) * &w[k];
        // the block-diagonal of W^{-1} X W vanishes identically for block-diagonal W
        for r in blocks.ranges() {
            for i in r.clone() {
                for j in r.clone() {
                    qt[(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
        values.push(qt);
    }
    let w1 = w.last().unwrap().clone();
    Ok(GaugeTransform {
        grid: grid.to_vec(),
        w,
        w1,
        q_tilde: PotentialSpec::Grid { abscissae: grid.to_vec(), values },
        trivial: false,
    })
}
