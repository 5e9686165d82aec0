use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{propagate, IntegratorOptions};
use crate::model::{PotentialSpec, SystemProblem};
use crate::numcore::{adjugate, det, mat_exp, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMethod {
    /// Exponential sum, `Q = 0` only.
    ClosedForm,
    /// Matrix exponential of a block-bidiagonal generator, constant `Q` only.
    ConstantExp,
    /// Variational ODE integration.
    Integrate,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpTerm {
    pub coefficient: C64,
    /// The term is `coefficient * exp(i λ frequency)`.
    pub frequency: C64,
}

/// `Δ_0(λ) = Σ_S det(T_S) e^{iλ Σ_{k∈S} b_k}`, where `T_S` takes the columns in `S` from `D`.
#[derive(Clone, Debug, Serialize)]
pub struct ExpSum {
    pub terms: Vec<ExpTerm>,
}

impl ExpSum {
    pub fn eval(&self, lambda: C64) -> (C64, C64) {
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for t in &self.terms {
            let e = t.coefficient * (C64::i() * lambda * t.frequency).exp();
            v += e;
            d += e * C64::i() * t.frequency;
        }
        (v, d)
    }

    /// Coefficient of the term that dominates along `λ = i z t`, `t → ∞`, with its rate
    /// `max Re(-z f)`. Several terms sharing the rate are summed.
    pub fn dominant(&self, z: C64) -> (C64, f64) {
        let rate = self.terms.iter().map(|t| (-z * t.frequency).re).fold(f64::NEG_INFINITY, f64::max);
        let scale = self.terms.iter().map(|t| t.frequency.norm()).fold(1.0, f64::max);
        let coef = self
            .terms
            .iter()
            .filter(|t| ((-z * t.frequency).re - rate).abs() <= 1e-12 * scale)
            .map(|t| t.coefficient)
            .sum();
        (coef, rate)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn closed_form_delta0(problem: &SystemProblem) -> Result<ExpSum> {
    if !problem.potential.is_zero() {
        return Err(Error::Applicability("closed form needs Q = 0".into()));
    }
    let n = problem.n();
    if n > 20 {
        return Err(Error::Domain("closed form limited to n <= 20".into()));
    }
    let b = problem.blocks.coord_weights();
    let (c, d) = (&problem.bc.c, &problem.bc.d);
    let wscale = problem.blocks.max_abs_weight();
    let mut terms: Vec<ExpTerm> = Vec::new();
    for mask in 0u32..(1 << n) {
        let t = CMatrix::from_fn(n, n, |i, k| if mask >> k & 1 == 1 { d[(i, k)] } else { c[(i, k)] });
        let coef = det(&t)?;
        let freq: C64 = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| b[k]).sum();
        match terms.iter_mut().find(|e| (e.frequency - freq).norm() <= 1e-12 * wscale) {
            Some(e) => e.coefficient += coef,
            None => terms.push(ExpTerm { coefficient: coef, frequency: freq }),
        }
    }
    let cscale = (c.norm_fro() + d.norm_fro()).powi(n as i32);
    terms.retain(|t| t.coefficient.norm() > 1e-14 * cscale);
    Ok(ExpSum { terms })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharValue {
    pub lambda: C64,
    pub delta: C64,
    pub derivative: C64,
    /// `Π_i (‖c_i‖ + ‖(DΦ(1;λ))_i‖)` over the rows: an upper bound for `|Δ(λ)|` that involves
    /// no cancellation.
    pub scale: f64,
}

/// `Δ(λ) = det(C + D Φ(1;λ))` together with a cached evaluation strategy.
#[derive(Clone, Debug)]
pub struct CharFunction {
    problem: SystemProblem,
    method: EvalMethod,
    closed: Option<ExpSum>,
    opts: IntegratorOptions,
}

impl CharFunction {
    pub fn new(problem: &SystemProblem) -> Result<Self> {
        let method = match problem.potential {
            PotentialSpec::Zero => EvalMethod::ClosedForm,
            PotentialSpec::Constant(_) => EvalMethod::ConstantExp,
            _ => EvalMethod::Integrate,
        };
        Self::with_method(problem, method)
    }

    pub fn with_method(problem: &SystemProblem, method: EvalMethod) -> Result<Self> {
        problem.ensure_valid(Default::default())?;
        let closed = match method {
            EvalMethod::ClosedForm => Some(closed_form_delta0(problem)?),
            EvalMethod::ConstantExp => {
                if !matches!(problem.potential, PotentialSpec::Zero | PotentialSpec::Constant(_)) {
                    return Err(Error::Applicability("matrix exponential needs a constant potential".into()));
                }
                None
            }
            EvalMethod::Integrate => None,
        };
        Ok(CharFunction { problem: problem.clone(), method, closed, opts: IntegratorOptions::default() })
    }

    pub fn problem(&self) -> &SystemProblem {
        &self.problem
    }

    pub fn method(&self) -> EvalMethod {
        self.method
    }

    /// Relative size of evaluation noise in `|Δ|/scale`: zero for the exponential sum,
    /// rounding for the matrix exponential, and the integrator tolerance otherwise.
    pub fn noise_floor(&self) -> f64 {
        match self.method {
            EvalMethod::ClosedForm => 0.0,
            EvalMethod::ConstantExp => 1e-13,
            EvalMethod::Integrate => 100.0 * self.opts.rtol,
        }
    }

    pub fn closed_form(&self) -> Option<&ExpSum> {
        self.closed.as_ref()
    }

    /// `[Φ(1;λ), ∂_λΦ(1;λ), .., ∂_λ^order Φ(1;λ)]`.
    pub fn phi_one(&self, lambda: C64, order: usize) -> Result<Vec<CMatrix>> {
        let n = self.problem.n();
        let b = self.problem.blocks.coord_weights();
        match self.method {
            EvalMethod::ClosedForm => Ok((0..=order)
                .map(|p| {
                    CMatrix::diag(&b.iter().map(|bk| (C64::i() * bk).powu(p as u32) * (C64::i() * bk * lambda).exp()).collect::<Vec<_>>())
                })
                .collect()),
            EvalMethod::ConstantExp => {
                let g = block_generator(&self.problem, lambda, order);
                let e = mat_exp(&g);
                let rows: Vec<usize> = (0..n).collect();
                let mut fact = 1.0;
                Ok((0..=order)
                    .map(|p| {
                        if p > 0 {
                            fact *= p as f64;
                        }
                        let cols: Vec<usize> = (p * n..(p + 1) * n).collect();
                        e.submatrix(&rows, &cols).scale(C64::new(fact, 0.0))
                    })
                    .collect())
            }
            EvalMethod::Integrate => {
                if order > self.opts.max_order {
                    return Err(Error::Domain(format!("derivative order {order} exceeds cap {}", self.opts.max_order)));
                }
                let mut init = vec![CMatrix::identity(n)];
                init.extend((0..order).map(|_| CMatrix::zeros(n, n)));
                propagate(&self.problem, lambda, &init, &[0.0, 1.0], self.opts, |_, _| {})
            }
        }
    }

    /// Taylor coefficients `A_p = D Φ^{(p)}(1;λ)/p!` of `A_Φ(μ) = C + D Φ(1;μ)` at `μ = λ`.
    pub fn a_taylor(&self, lambda: C64, order: usize) -> Result<Vec<CMatrix>> {
        let phi = self.phi_one(lambda, order)?;
        let mut out = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for (p, f) in phi.iter().enumerate() {
            if p > 0 {
                fact *= p as f64;
            }
            let mut a = (&self.problem.bc.d * f).scale(C64::new(1.0 / fact, 0.0));
            if p == 0 {
                a = &a + &self.problem.bc.c;
            }
            out.push(a);
        }
        Ok(out)
    }

    pub fn eval(&self, lambda: C64) -> Result<CharValue> {
        if let Some(es) = &self.closed {
            let (delta, derivative) = es.eval(lambda);
            let b = self.problem.blocks.coord_weights();
            let e: Vec<C64> = b.iter().map(|bk| (C64::i() * bk * lambda).exp()).collect();
            return Ok(CharValue { lambda, delta, derivative, scale: self.row_bound(&CMatrix::diag(&e)) });
        }
        let phi = self.phi_one(lambda, 1)?;
        let a = &self.problem.bc.c + &(&self.problem.bc.d * &phi[0]);
        let delta = det(&a)?;
        let adj = adjugate(&a)?;
        let derivative = (&adj * &(&self.problem.bc.d * &phi[1])).trace();
        Ok(CharValue { lambda, delta, derivative, scale: self.row_bound(&phi[0]) })
    }

    fn row_bound(&self, phi: &CMatrix) -> f64 {
        let (c, d) = (&self.problem.bc.c, &self.problem.bc.d);
        let dphi = d * phi;
        let norm = |m: &CMatrix, i: usize| m.row(i).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        (0..c.rows()).map(|i| norm(c, i) + norm(&dphi, i)).product::<f64>().max(f64::MIN_POSITIVE)
    }

    pub fn delta(&self, lambda: C64) -> Result<C64> {
        Ok(self.eval(lambda)?.delta)
    }
}


pub fn char_det(cf: &CharFunction, lambda: C64) -> Result<(C64, C64)> {
    let v = cf.eval(lambda)?;
    Ok((v.delta, v.derivative))
}

/// Block-bidiagonal generator whose exponential carries `Φ^{(p)}(1;λ)/p!` in its top block row
/// (constant potential only).
pub fn block_generator(problem: &SystemProblem, lambda: C64, order: usize) -> CMatrix {
    let n = problem.n();
    let b = problem.blocks.coord_weights();
    let q = problem.potential_at(0.0);
    let ib = CMatrix::diag(&b.iter().map(|bk| C64::i() * bk).collect::<Vec<_>>());
    let a = &ib * &(&CMatrix::identity(n).scale(lambda) - &q);
    let m = (order + 1) * n;
    let mut g = CMatrix::zeros(m, m);
    for blk in 0..=order {
        for i in 0..n {
            for j in 0..n {
                g[(blk * n + i, blk * n + j)] = a[(i, j)];
            }
            if blk < order {
                g[(blk * n + i, (blk + 1) * n + i)] = ib[(i, i)];
            }
        }
    }
    g
}
