//! Grid-sampled vector functions, piecewise witnesses and Simpson inner products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{simpson_weights_uniform, Grid};
use crate::numcore::C64;

/// `ℂⁿ`-valued samples on a grid, stored point by point.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    n: usize,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(points: usize, n: usize) -> Self {
        GridFunction { n, values: vec![C64::new(0.0, 0.0); points * n] }
    }

    pub fn from_fn(grid: &Grid, n: usize, mut f: impl FnMut(f64) -> Vec<C64>) -> Self {
        let mut values = Vec::with_capacity(grid.len() * n);
        for &x in &grid.x {
            let v = f(x);
            assert_eq!(v.len(), n, "sample has wrong length");
            values.extend(v);
        }
        GridFunction { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.values.len() / self.n
    }

    pub fn at(&self, i: usize) -> &[C64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn at_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn component(&self, k: usize) -> Vec<C64> {
        self.values.iter().skip(k).step_by(self.n).copied().collect()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `self += s · other`
    pub fn axpy(&mut self, s: C64, other: &GridFunction) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: C64) -> GridFunction {
        GridFunction { n: self.n, values: self.values.iter().map(|v| s * v).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `⟨u, v⟩ = ∫ u · conj(v)` with quadrature weights `w` (one per point).
pub fn inner(u: &GridFunction, v: &GridFunction, w: &[f64]) -> C64 {
    let n = u.n;
    let mut acc = C64::new(0.0, 0.0);
    for (i, &wi) in w.iter().enumerate() {
        let mut s = C64::new(0.0, 0.0);
        for k in 0..n {
            s += u.values[i * n + k] * v.values[i * n + k].conj();
        }
        acc += s * wi;
    }
    acc
}

pub fn norm(u: &GridFunction, w: &[f64]) -> f64 {
    let n = u.n;
    w.iter()
        .enumerate()
        .map(|(i, &wi)| wi * u.values[i * n..(i + 1) * n].iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Constant,
    /// `1 - 3s² + 2s³` with `s = |2(x-a)/(b-a) - 1|`: one at the midpoint, C¹ zero at both ends.
    Hat,
}

impl Profile {
    fn eval(self, a: f64, b: f64, x: f64) -> f64 {
        match self {
            Profile::Constant => 1.0,
            Profile::Hat => {
                let s = (2.0 * (x - a) / (b - a) - 1.0).abs().min(1.0);
                1.0 - 3.0 * s * s + 2.0 * s * s * s
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub component: usize,
    pub a: f64,
    pub b: f64,
    #[serde(with = "pair")]
    pub coef: C64,
    pub profile: Profile,
}

/// A vector function that is a sum of `coef · profile` pieces on closed intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    pub n: usize,
    pub pieces: Vec<Piece>,
}

impl PiecewiseFunction {
    pub fn eval(&self, x: f64) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.n];
        for p in &self.pieces {
            if x >= p.a && x <= p.b {
                v[p.component] += p.coef * p.profile.eval(p.a, p.b, x);
            }
        }
        v
    }

    pub fn sample(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(grid, self.n, |x| self.eval(x))
    }

    /// Node range of a piece; its ends must be grid nodes so that each piece is integrated
    /// by its own Simpson rule.
    fn nodes(&self, p: &Piece, grid: &Grid) -> Result<(usize, usize)> {
        match (grid.node_index(p.a), grid.node_index(p.b)) {
            (Some(i), Some(j)) if j > i => Ok((i, j)),
            _ => Err(Error::Domain(format!(
                "piece [{}, {}] does not start and end on nodes of a {}-point grid",
                p.a,
                p.b,
                grid.len()
            ))),
        }
    }

    /// `⟨u, f⟩ = ∫ u · conj(f)`, piece by piece.
    pub fn inner_with(&self, u: &GridFunction, grid: &Grid) -> Result<C64> {
        let h = grid.step();
        let mut acc = C64::new(0.0, 0.0);
        for p in &self.pieces {
            let (i0, i1) = self.nodes(p, grid)?;
            let w = simpson_weights_uniform(i1 - i0 + 1, h);
            for (k, wk) in w.iter().enumerate() {
                let i = i0 + k;
                let f = p.coef * p.profile.eval(p.a, p.b, grid.x[i]);
                acc += u.at(i)[p.component] * f.conj() * *wk;
            }
        }
        Ok(acc)
    }

    /// L² norm; pieces on the same component may overlap.
    pub fn norm(&self, grid: &Grid) -> Result<f64> {
        let mut acc = 0.0;
        for p in &self.pieces {
            let (i0, i1) = self.nodes(p, grid)?;
            let w = simpson_weights_uniform(i1 - i0 + 1, grid.step());
            for (k, wk) in w.iter().enumerate() {
                let x = grid.x[i0 + k];
                let mine = p.coef * p.profile.eval(p.a, p.b, x);
                let total = self.eval(x)[p.component];
                acc += wk * (mine * total.conj()).re;
            }
        }
        Ok(acc.max(0.0).sqrt())
    }
}

mod pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}
