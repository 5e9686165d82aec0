use num_complex::Complex64 as C64;

use super::rk::Dopri;
use crate::error::{Error, Result};
use crate::model::{PotentialSpec, SystemProblem};
use crate::numcore::CMatrix;

/// Largest supported number of λ-derivatives carried along with `Φ`.
pub const MAX_ORDER: usize = 4;

#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions {
    pub rtol: f64,
    /// Step cap is `step_factor / (1 + |λ| max|b_j|)`.
    pub step_factor: f64,
    pub max_order: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { rtol: 1e-10, step_factor: 0.1, max_order: MAX_ORDER }
    }
}

/// `Φ^{(p)}(x; λ) = ∂_λ^p Φ(x; λ)` on a grid, `p = 0..=order`.
#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    pub lambda: C64,
    pub order: usize,
    pub grid: Vec<f64>,
    /// `values[i][p]` at `grid[i]`
    pub values: Vec<Vec<CMatrix>>,
}

impl FundamentalSolution {
    pub fn at_end(&self) -> &[CMatrix] {
        self.values.last().expect("nonempty grid")
    }
}

fn pack(ms: &[CMatrix]) -> Vec<C64> {
    ms.iter().flat_map(|m| m.as_slice().iter().copied()).collect()
}

fn unpack(v: &[C64], n: usize, cols: usize) -> Vec<CMatrix> {
    v.chunks(n * cols)
        .map(|ch| {
            let mut m = CMatrix::zeros(n, cols);
            m.as_mut_slice().copy_from_slice(ch);
            m
        })
        .collect()
}

/// Integrates the variational system from `nodes[0]` with initial data `init` (one matrix per
/// derivative order), reporting the state at each node.
pub fn propagate(
    problem: &SystemProblem,
    lambda: C64,
    init: &[CMatrix],
    nodes: &[f64],
    opts: IntegratorOptions,
    mut observe: impl FnMut(usize, Vec<CMatrix>),
) -> Result<Vec<CMatrix>> {
    let n = problem.n();
    let order = init.len() - 1;
    let cols = init[0].cols();
    if order > opts.max_order {
        return Err(Error::Domain(format!("derivative order {order} exceeds cap {}", opts.max_order)));
    }
    let ib: Vec<C64> = problem.blocks.coord_weights().iter().map(|b| C64::i() * b).collect();
    let zero_q = problem.potential.is_zero();
    let block = n * cols;
    let rhs = |x: f64, y: &[C64], dy: &mut [C64]| {
        let q = if zero_q { None } else { Some(problem.potential_at(x)) };
        for p in 0..=order {
            let yp = &y[p * block..(p + 1) * block];
            for i in 0..n {
                for c in 0..cols {
                    let mut acc = lambda * yp[i * cols + c];
                    if let Some(q) = &q {
                        for l in 0..n {
                            acc -= q[(i, l)] * yp[l * cols + c];
                        }
                    }
                    if p > 0 {
                        acc += y[(p - 1) * block + i * cols + c] * p as f64;
                    }
                    dy[p * block + i * cols + c] = ib[i] * acc;
                }
            }
        }
    };
    let rtol = opts.rtol;
    let err_norm = |y0: &[C64], y1: &[C64], e: &[C64]| {
        let mut worst: f64 = 0.0;
        for c in 0..cols {
            let col = |v: &[C64], p: usize| -> f64 {
                (0..n).map(|i| v[p * block + i * cols + c].norm_sqr()).sum::<f64>().sqrt()
            };
            let base = col(y1, 0).max(col(y0, 0));
            for p in 0..=order {
                let sc = rtol * col(y0, p).max(col(y1, p)).max(1e-3 * base) + 1e-300;
                worst = worst.max(col(e, p) / sc);
            }
        }
        worst
    };
    let max_step = opts.step_factor / (1.0 + lambda.norm() * problem.blocks.max_abs_weight());
    let dopri = Dopri { max_step, min_step: 1e-13, max_steps: 50_000_000 };
    // land on the kinks of a piecewise-linear potential so that error control never straddles one
    let (all, user) = match &problem.potential {
        PotentialSpec::Grid { abscissae, .. } => merge_breakpoints(nodes, abscissae),
        _ => (nodes.to_vec(), (0..nodes.len()).map(Some).collect()),
    };
    let out = dopri
        .integrate(rhs, &all, pack(init), err_norm, |i, _x, y| {
            if let Some(k) = user[i] {
                observe(k, unpack(y, n, cols))
            }
        })
        .map_err(|_| Error::Stiffness { lambda })?;
    Ok(unpack(&out, n, cols))
}

/// Sorted union of `nodes` and the breakpoints strictly inside their range, with the index
/// of each user node.
fn merge_breakpoints(nodes: &[f64], breaks: &[f64]) -> (Vec<f64>, Vec<Option<usize>>) {
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    let mut all: Vec<(f64, Option<usize>)> = nodes.iter().enumerate().map(|(i, &x)| (x, Some(i))).collect();
    for &b in breaks {
        if b > lo && b < hi && nodes.iter().all(|&x| (x - b).abs() > 1e-14) {
            all.push((b, None));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.into_iter().unzip()
}

fn initial(n: usize, order: usize) -> Vec<CMatrix> {
    let mut v = vec![CMatrix::identity(n)];
    v.extend((0..order).map(|_| CMatrix::zeros(n, n)));
    v
}

pub fn integrate_fundamental(
    problem: &SystemProblem,
    lambda: C64,
    order: usize,
    grid: &[f64],
) -> Result<FundamentalSolution> {
    integrate_fundamental_with(problem, lambda, order, grid, IntegratorOptions::default())
}

pub fn integrate_fundamental_with(
    problem: &SystemProblem,
    lambda: C64,
    order: usize,
    grid: &[f64],
    opts: IntegratorOptions,
) -> Result<FundamentalSolution> {
    if grid.first() != Some(&0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("grid must start at 0 and increase".into()));
    }
    let n = problem.n();
    let mut values = Vec::with_capacity(grid.len());
    propagate(problem, lambda, &initial(n, order), grid, opts, |_, v| values.push(v))?;
    Ok(FundamentalSolution { lambda, order, grid: grid.to_vec(), values })
}

/// `[Φ(1;λ), ∂_λΦ(1;λ), ..]` up to `order`.
pub fn fundamental_at_one(problem: &SystemProblem, lambda: C64, order: usize) -> Result<Vec<CMatrix>> {
    let n = problem.n();
    propagate(problem, lambda, &initial(n, order), &[0.0, 1.0], IntegratorOptions::default(), |_, _| {})
}
