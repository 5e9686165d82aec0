//! Root-function chains from the adjugate of `A_Φ(λ)`, the adjoint pipeline and Gram checks.

use serde::Serialize;

use super::gridfn::{inner, norm, GridFunction};
use crate::error::{Error, Result};
use crate::evolve::integrate_fundamental;
use crate::grid::Grid;
use crate::model::SystemProblem;
use crate::numcore::{mat_exp, nullspace, singular_values, CMatrix, Tolerance, C64};
use crate::regularity::adjoint_bc;
use crate::spectrum::{
    block_generator, search_eigenvalues, CharFunction, EvalMethod, SearchOptions, SpectrumReport, Window,
};

#[derive(Clone, Debug)]
pub struct RootChain {
    pub lambda: C64,
    /// Algebraic multiplicity of `lambda` (kernel dimension for kernel functions).
    pub multiplicity: usize,
    /// Column of the adjugate the chain came from.
    pub j_index: usize,
    /// Number of leading Taylor coefficients that vanished.
    pub shift: usize,
    /// `u^p` for `p = 0..len`.
    pub chain: Vec<GridFunction>,
    pub norms: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainSummary {
    pub lambda: C64,
    pub multiplicity: usize,
    pub j_index: usize,
    pub shift: usize,
    pub length: usize,
    pub norms: Vec<f64>,
    pub bc_residual: f64,
    pub ode_residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ChainOptions {
    /// Taylor coefficients below `vanish · max norm` count as zero.
    pub vanish: f64,
    /// Gram Schur complement below this (relative) means linear dependence.
    pub independence: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { vanish: 1e-8, independence: 1e-8 }
    }
}

type Series = Vec<C64>;

fn det_series(m: &[Vec<&Series>], len: usize) -> Series {
    let r = m.len();
    let mut dp: Vec<Option<Series>> = vec![None; 1 << r];
    let mut one = vec![C64::new(0.0, 0.0); len];
    one[0] = C64::new(1.0, 0.0);
    dp[0] = Some(one);
    for mask in 0usize..(1 << r) {
        let row = mask.count_ones() as usize;
        if row >= r {
            continue;
        }
        let Some(cur) = dp[mask].take() else { continue };
        for c in 0..r {
            if mask & (1 << c) != 0 {
                continue;
            }
            let sign = if (mask >> (c + 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let a = m[row][c];
            let next = dp[mask | (1 << c)].get_or_insert_with(|| vec![C64::new(0.0, 0.0); len]);
            for (i, ci) in cur.iter().enumerate() {
                if ci.norm() == 0.0 {
                    continue;
                }
                for (j, aj) in a.iter().enumerate().take(len - i) {
                    next[i + j] += *ci * aj * sign;
                }
            }
        }
        dp[mask] = Some(cur);
    }
    dp[(1 << r) - 1].take().unwrap_or_else(|| vec![C64::new(0.0, 0.0); len])
}

/// Taylor coefficients `adj^{[p]}`, `p = 0..=order`, of `adj(A(μ))` from those of `A(μ)`.
pub fn taylor_adjugate(a: &[CMatrix], order: usize) -> Vec<CMatrix> {
    let n = a[0].rows();
    let len = order + 1;
    let zero = C64::new(0.0, 0.0);
    let series: Vec<Vec<Series>> = (0..n)
        .map(|i| (0..n).map(|j| (0..len).map(|p| a.get(p).map_or(zero, |m| m[(i, j)])).collect()).collect())
        .collect();
    let mut out = vec![CMatrix::zeros(n, n); len];
    if n == 1 {
        out[0][(0, 0)] = C64::new(1.0, 0.0);
        return out;
    }
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<&Series>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| &series[r][c]).collect())
                .collect();
            let d = det_series(&minor, len);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            for (p, v) in d.into_iter().enumerate() {
                out[p][(j, i)] = v * sign;
            }
        }
    }
    out
}

/// `Φ^{(p)}(x_i;λ)/p!` for every grid node, `[i][p]`.
pub fn fundamental_taylor_on_grid(cf: &CharFunction, lambda: C64, order: usize, grid: &Grid) -> Result<Vec<Vec<CMatrix>>> {
    let problem = cf.problem();
    let n = problem.n();
    match cf.method() {
        EvalMethod::ClosedForm => {
            let b = problem.blocks.coord_weights();
            Ok(grid
                .x
                .iter()
                .map(|&x| {
                    let mut fact = 1.0;
                    (0..=order)
                        .map(|p| {
                            if p > 0 {
                                fact *= p as f64;
                            }
                            CMatrix::diag(
                                &b.iter()
                                    .map(|bk| {
                                        let ibx = C64::i() * bk * x;
                                        ibx.powu(p as u32) / fact * (ibx * lambda).exp()
                                    })
                                    .collect::<Vec<_>>(),
                            )
                        })
                        .collect()
                })
                .collect())
        }
        EvalMethod::ConstantExp => {
            let g = block_generator(problem, lambda, order);
            let e = mat_exp(&g.scale(C64::new(grid.step(), 0.0)));
            let width = (order + 1) * n;
            let mut row = CMatrix::zeros(n, width);
            for i in 0..n {
                row[(i, i)] = C64::new(1.0, 0.0);
            }
            let rows: Vec<usize> = (0..n).collect();
            let mut out = Vec::with_capacity(grid.len());
            for i in 0..grid.len() {
                if i > 0 {
                    row = &row * &e;
                }
                out.push((0..=order).map(|p| row.submatrix(&rows, &(p * n..(p + 1) * n).collect::<Vec<_>>())).collect());
            }
            Ok(out)
        }
        EvalMethod::Integrate => {
            let sol = integrate_fundamental(problem, lambda, order, &grid.x)?;
            Ok(sol
                .values
                .into_iter()
                .map(|v| {
                    let mut fact = 1.0;
                    v.into_iter()
                        .enumerate()
                        .map(|(p, m)| {
                            if p > 0 {
                                fact *= p as f64;
                            }
                            m.scale(C64::new(1.0 / fact, 0.0))
                        })
                        .collect()
                })
                .collect())
        }
    }
}

/// Incremental Gram–Schmidt basis used to test linear independence.
pub(crate) struct SpanBasis<'a> {
    w: &'a [f64],
    q: Vec<GridFunction>,
    tol: f64,
}

impl<'a> SpanBasis<'a> {
    pub(crate) fn new(w: &'a [f64], tol: f64) -> Self {
        SpanBasis { w, q: Vec::new(), tol }
    }

    /// Component of `f` orthogonal to the basis, two passes.
    pub(crate) fn residual(&self, f: &GridFunction) -> GridFunction {
        let mut v = f.clone();
        for _ in 0..2 {
            for q in &self.q {
                let c = inner(&v, q, self.w);
                v.axpy(-c, q);
            }
        }
        v
    }

    /// Adds `f` when its squared relative residual exceeds the tolerance.
    pub(crate) fn try_add(&mut self, f: &GridFunction) -> bool {
        let nf = norm(f, self.w);
        if nf == 0.0 {
            return false;
        }
        let v = self.residual(f);
        let nv = norm(&v, self.w);
        if (nv / nf).powi(2) <= self.tol {
            return false;
        }
        self.q.push(v.scaled(C64::new(1.0 / nv, 0.0)));
        true
    }

    pub(crate) fn dim(&self) -> usize {
        self.q.len()
    }

    pub(crate) fn basis(&self) -> &[GridFunction] {
        &self.q
    }
}

/// Chains at one eigenvalue of algebraic multiplicity `m`.
pub fn chains_at(cf: &CharFunction, lambda: C64, m: usize, grid: &Grid, opts: ChainOptions) -> Result<Vec<RootChain>> {
    let n = cf.problem().n();
    let order = m - 1;
    let a = cf.a_taylor(lambda, order)?;
    let adj = taylor_adjugate(&a, order);
    let phi = fundamental_taylor_on_grid(cf, lambda, order, grid)?;
    let w = grid.simpson_weights();
    let mut candidates: Vec<(usize, usize, Vec<GridFunction>)> = Vec::new();
    let mut all: Vec<Vec<GridFunction>> = Vec::with_capacity(n);
    let mut all_norms: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let cols: Vec<Vec<C64>> = adj.iter().map(|m| m.col(j)).collect();
        let mut us = Vec::with_capacity(m);
        for p in 0..m {
            let mut u = GridFunction::zeros(grid.len(), n);
            for (i, ph) in phi.iter().enumerate() {
                let dst = u.at_mut(i);
                for q in 0..=p {
                    let v = ph[q].mul_vec(&cols[p - q]);
                    for k in 0..n {
                        dst[k] += v[k];
                    }
                }
            }
            us.push(u);
        }
        all_norms.push(us.iter().map(|u| norm(u, &w)).collect());
        all.push(us);
    }
    let max_norm = all_norms.iter().flatten().cloned().fold(0.0, f64::max);
    if max_norm == 0.0 {
        return Err(Error::Construction(format!("adjugate vanishes to order {m} at λ = {lambda}")));
    }
    for (j, us) in all.into_iter().enumerate() {
        if let Some(s) = all_norms[j].iter().position(|&v| v > opts.vanish * max_norm) {
            candidates.push((j, s, us.into_iter().skip(s).collect()));
        }
    }
    candidates.sort_by(|x, y| y.2.len().cmp(&x.2.len()));
    let mut basis = SpanBasis::new(&w, opts.independence);
    let mut out = Vec::new();
    let mut kept = 0;
    for (j, s, chain) in candidates {
        if kept >= m {
            break;
        }
        let mut len = 0;
        for u in chain.iter().take(m - kept) {
            if !basis.try_add(u) {
                break;
            }
            len += 1;
        }
        if len == 0 {
            continue;
        }
        kept += len;
        let chain: Vec<GridFunction> = chain.into_iter().take(len).collect();
        let norms = chain.iter().map(|u| norm(u, &w)).collect();
        out.push(RootChain { lambda, multiplicity: m, j_index: j, shift: s, chain, norms });
    }
    if kept != m {
        return Err(Error::Construction(format!(
            "at λ = {lambda}: kept {kept} independent root functions, multiplicity is {m} (adjugate column norms {all_norms:?})"
        )));
    }
    Ok(out)
}

/// Chains for every eigenvalue in the report, in report order.
pub fn build_chains(problem: &SystemProblem, spectrum: &SpectrumReport, grid: &Grid) -> Result<Vec<RootChain>> {
    build_chains_with(problem, spectrum, grid, ChainOptions::default())
}

pub fn build_chains_with(
    problem: &SystemProblem,
    spectrum: &SpectrumReport,
    grid: &Grid,
    opts: ChainOptions,
) -> Result<Vec<RootChain>> {
    if spectrum.degenerate {
        return Err(Error::Degenerate);
    }
    let cf = CharFunction::with_method(problem, spectrum.method)?;
    let mut out = Vec::new();
    for e in &spectrum.eigenvalues {
        out.extend(chains_at(&cf, e.lambda, e.multiplicity, grid, opts)?);
    }
    Ok(out)
}

/// Solutions `Φ(x;λ)v` with `v` spanning `Ker A_Φ(λ)`, one length-1 chain per kernel vector.
/// This is what is available when `Δ ≡ 0`.
pub fn kernel_functions(problem: &SystemProblem, lambdas: &[C64], grid: &Grid) -> Result<Vec<RootChain>> {
    let cf = CharFunction::new(problem)?;
    let w = grid.simpson_weights();
    let mut out = Vec::new();
    for &lambda in lambdas {
        let a = cf.a_taylor(lambda, 0)?.remove(0);
        let Some(ker) = nullspace(&a, Tolerance::rel(1e-8)) else { continue };
        let phi = fundamental_taylor_on_grid(&cf, lambda, 0, grid)?;
        for j in 0..ker.cols() {
            let v = ker.col(j);
            let mut u = GridFunction::zeros(grid.len(), problem.n());
            for (i, ph) in phi.iter().enumerate() {
                u.at_mut(i).copy_from_slice(&ph[0].mul_vec(&v));
            }
            let norms = vec![norm(&u, &w)];
            out.push(RootChain { lambda, multiplicity: ker.cols(), j_index: j, shift: 0, chain: vec![u], norms });
        }
    }
    Ok(out)
}

/// Root functions in chain order.
pub fn root_functions(chains: &[RootChain]) -> Vec<&GridFunction> {
    chains.iter().flat_map(|c| c.chain.iter()).collect()
}

/// `‖C u(0) + D u(1)‖ / (‖u‖ ‖(C D)‖_F)`.
pub fn bc_residual(problem: &SystemProblem, u: &GridFunction, grid: &Grid) -> f64 {
    let bc = &problem.bc;
    let r: f64 = {
        let a = bc.c.mul_vec(u.at(0));
        let b = bc.d.mul_vec(u.at(u.points() - 1));
        a.iter().zip(&b).map(|(x, y)| (x + y).norm_sqr()).sum::<f64>().sqrt()
    };
    let un = norm(u, &grid.simpson_weights());
    r / (un * bc.combined().norm_fro()).max(f64::MIN_POSITIVE)
}

/// Relative L² size of `(ℓ - λ)u - prev` on interior nodes, with `ℓ = -i diag(1/b) d/dx + Q`
/// and a sixth-order central difference.
pub fn ode_residual(problem: &SystemProblem, lambda: C64, u: &GridFunction, prev: Option<&GridFunction>, grid: &Grid) -> f64 {
    let n = problem.n();
    let m = grid.len();
    if m < 8 {
        return f64::NAN;
    }
    let h = grid.step();
    let inv_b: Vec<C64> = problem.blocks.coord_weights().iter().map(|b| b.inv()).collect();
    let coef = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    let (mut res, mut size) = (0.0, 0.0);
    for i in 3..m - 3 {
        let q = problem.potential_at(grid.x[i]);
        let qu = q.mul_vec(u.at(i));
        for k in 0..n {
            let mut d = C64::new(0.0, 0.0);
            for (t, c) in coef.iter().enumerate() {
                d += u.at(i + t - 3)[k] * *c;
            }
            d /= 60.0 * h;
            let mut r = -C64::i() * inv_b[k] * d + qu[k] - lambda * u.at(i)[k];
            if let Some(p) = prev {
                r -= p.at(i)[k];
            }
            res += r.norm_sqr();
            size += u.at(i)[k].norm_sqr();
        }
    }
    (res / size).sqrt() / (1.0 + lambda.norm())
}

pub fn summarize(problem: &SystemProblem, chains: &[RootChain], grid: &Grid) -> Vec<ChainSummary> {
    chains
        .iter()
        .map(|c| {
            let bc = c.chain.iter().map(|u| bc_residual(problem, u, grid)).fold(0.0, f64::max);
            let ode = (0..c.chain.len())
                .map(|p| ode_residual(problem, c.lambda, &c.chain[p], p.checked_sub(1).map(|q| &c.chain[q]), grid))
                .fold(0.0, f64::max);
            ChainSummary {
                lambda: c.lambda,
                multiplicity: c.multiplicity,
                j_index: c.j_index,
                shift: c.shift,
                length: c.chain.len(),
                norms: c.norms.clone(),
                bc_residual: bc,
                ode_residual: ode,
            }
        })
        .collect()
}

/// `(conj b, Q*, adjoint boundary pair)`.
pub fn adjoint_problem(problem: &SystemProblem) -> Result<SystemProblem> {
    let bc = adjoint_bc(&problem.bc, &problem.blocks)?;
    Ok(SystemProblem::new(problem.blocks.adjoint(), problem.potential.adjoint(), bc))
}

pub struct AdjointRun {
    pub problem: SystemProblem,
    pub spectrum: SpectrumReport,
    pub chains: Vec<RootChain>,
}

/// Runs the pipeline on the adjoint problem over the conjugate of the window traced for the
/// primary spectrum, and checks that eigenvalues pair up as `μ = conj λ`.
pub fn adjoint_chains(problem: &SystemProblem, primary: &SpectrumReport, grid: &Grid) -> Result<AdjointRun> {
    let adj = adjoint_problem(problem)?;
    let cf = CharFunction::new(&adj)?;
    let window: Window = primary.window.conjugate();
    let spectrum = search_eigenvalues(&cf, window, SearchOptions::default())?;
    for e in &primary.eigenvalues {
        let target = e.lambda.conj();
        let hit = spectrum.eigenvalues.iter().find(|f| (f.lambda - target).norm() <= 1e-6);
        match hit {
            Some(f) if f.multiplicity == e.multiplicity => {}
            Some(f) => {
                return Err(Error::Pairing(format!(
                    "λ = {} has multiplicity {} but its adjoint partner {} has {}",
                    e.lambda, e.multiplicity, f.lambda, f.multiplicity
                )))
            }
            None => return Err(Error::Pairing(format!("no adjoint eigenvalue within 1e-6 of conj({})", e.lambda))),
        }
    }
    if spectrum.count() != primary.count() {
        return Err(Error::Pairing(format!(
            "adjoint window holds {} eigenvalues, primary holds {}",
            spectrum.count(),
            primary.count()
        )));
    }
    let chains = build_chains(&adj, &spectrum, grid)?;
    Ok(AdjointRun { problem: adj, spectrum, chains })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterGram {
    pub lambda: C64,
    pub size: usize,
    pub sigma_min: f64,
    pub condition: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityReport {
    pub clusters: Vec<ClusterGram>,
    /// Largest normalized `|⟨u, v⟩|` between different clusters.
    pub max_cross: f64,
    pub min_sigma: f64,
}

impl MinimalityReport {
    pub fn is_minimal(&self, tol: f64) -> bool {
        self.min_sigma > tol
    }
}

fn clusters(chains: &[RootChain]) -> Vec<(C64, Vec<&GridFunction>)> {
    let mut out: Vec<(C64, Vec<&GridFunction>)> = Vec::new();
    for c in chains {
        match out.iter_mut().find(|(l, _)| *l == c.lambda) {
            Some((_, v)) => v.extend(c.chain.iter()),
            None => out.push((c.lambda, c.chain.iter().collect())),
        }
    }
    out
}

/// Per-cluster Gram matrices `G_k = (⟨u_p, v_q⟩)` of normalized primary and adjoint root functions.
/// A cluster whose two sides differ in size is padded, so it reports `σ_min = 0`.
pub fn minimality_metric(primary: &[RootChain], adjoint: &[RootChain], grid: &Grid) -> Result<MinimalityReport> {
    let w = grid.simpson_weights();
    let pc = clusters(primary);
    let ac = clusters(adjoint);
    let unit = |f: &GridFunction| f.scaled(C64::new(1.0 / norm(f, &w).max(f64::MIN_POSITIVE), 0.0));
    let pu: Vec<Vec<GridFunction>> = pc.iter().map(|(_, fs)| fs.iter().map(|f| unit(f)).collect()).collect();
    let au: Vec<Vec<GridFunction>> = ac.iter().map(|(_, fs)| fs.iter().map(|f| unit(f)).collect()).collect();
    let mut out = Vec::new();
    let mut max_cross: f64 = 0.0;
    for (k, (lambda, _)) in pc.iter().enumerate() {
        let Some(l) = ac.iter().position(|(mu, _)| (*mu - lambda.conj()).norm() <= 1e-6) else {
            return Err(Error::Pairing(format!("no adjoint cluster at conj({lambda})")));
        };
        let size = pu[k].len().max(au[l].len());
        let mut g = CMatrix::zeros(size, size);
        for (p, u) in pu[k].iter().enumerate() {
            for (q, v) in au[l].iter().enumerate() {
                g[(p, q)] = inner(u, v, &w);
            }
        }
        let sv = singular_values(&g);
        let sigma_min = *sv.last().unwrap();
        out.push(ClusterGram { lambda: *lambda, size, sigma_min, condition: sv[0] / sigma_min.max(f64::MIN_POSITIVE) });
        for (l2, vs) in au.iter().enumerate() {
            if l2 == l {
                continue;
            }
            for u in &pu[k] {
                for v in vs {
                    max_cross = max_cross.max(inner(u, v, &w).norm());
                }
            }
        }
    }
    let min_sigma = out.iter().map(|c| c.sigma_min).fold(f64::INFINITY, f64::min);
    Ok(MinimalityReport { clusters: out, max_cross, min_sigma })
}
