use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::charfn::{CharFunction, CharValue, EvalMethod};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let w = Window { re_min, re_max, im_min, im_max };
        if !(re_min < re_max && im_min < im_max) || ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("empty or non-finite window {w:?}")));
        }
        Ok(w)
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    /// Mirror image under complex conjugation.
    pub fn conjugate(&self) -> Window {
        Window { re_min: self.re_min, re_max: self.re_max, im_min: -self.im_max, im_max: -self.im_min }
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }

    fn grown(&self, d: f64) -> Window {
        Window {
            re_min: self.re_min - d,
            re_max: self.re_max + 0.7 * d,
            im_min: self.im_min - 0.9 * d,
            im_max: self.im_max + 0.8 * d,
        }
    }

    /// Half-open membership used to assign a root to exactly one leaf.
    fn owns(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re < self.re_max && z.im >= self.im_min && z.im < self.im_max
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Newton target `|Δ| ≤ tol · scale`.
    pub tol: f64,
    pub max_cells: usize,
    pub leaf_diameter: f64,
    pub multiplicity_radius: f64,
    pub merge_radius: f64,
    /// Cap on samples per contour piece, as a power of two.
    pub max_edge_depth: u32,
    /// Samples with `|Δ| ≤ zero_floor · scale` are treated as zeros on the contour.
    pub zero_floor: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: 1e-10,
            max_cells: 100_000,
            leaf_diameter: 0.1,
            multiplicity_radius: 1e-3,
            merge_radius: 1e-6,
            max_edge_depth: 14,
            zero_floor: 1e-13,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Eigenvalue {
    pub lambda: C64,
    pub multiplicity: usize,
    /// `|Δ(λ_k)|`
    pub residual: f64,
    /// Row bound of `A_Φ(λ_k)`, see [`CharValue::scale`].
    pub scale: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellRecord {
    pub window: Window,
    pub winding: i64,
    pub depth: usize,
    pub leaf: bool,
    /// Children windings summed to the parent's.
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub requested_window: Window,
    /// Window actually traced, after nudging off near-zeros.
    pub window: Window,
    pub method: EvalMethod,
    pub eigenvalues: Vec<Eigenvalue>,
    pub total_winding: i64,
    pub degenerate: bool,
    /// `Σ m_k` equals the boundary winding.
    pub count_consistent: bool,
    pub budget_exhausted: bool,
    pub evaluations: usize,
    pub cells: Vec<CellRecord>,
    pub notes: Vec<String>,
}

impl SpectrumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `re,im,multiplicity,residual` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,multiplicity,residual\n");
        for e in &self.eigenvalues {
            s.push_str(&format!("{:.16e},{:.16e},{},{:.16e}\n", e.lambda.re, e.lambda.im, e.multiplicity, e.residual));
        }
        s
    }

    pub fn count(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum Degeneracy {
    Degenerate { max_ratio: f64 },
    NonDegenerate { witness: C64, ratio: f64 },
}

impl Degeneracy {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Degeneracy::Degenerate { .. })
    }
}

fn radical_inverse(mut i: u32, base: u32) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Sample points of the degeneracy probe: 32 Halton points in `|λ| ≤ 20` plus 8 per axis.
pub fn degeneracy_probe_points() -> Vec<C64> {
    let mut pts: Vec<C64> = (1..=32)
        .map(|i| C64::from_polar(20.0 * radical_inverse(i, 2).sqrt(), 2.0 * PI * radical_inverse(i, 3)))
        .collect();
    for k in 0..4 {
        let t = 20.0 * (2 * k + 1) as f64 / 8.0;
        pts.extend([C64::new(t, 0.0), C64::new(-t, 0.0), C64::new(0.0, t), C64::new(0.0, -t)]);
    }
    pts
}

/// Degenerate iff `|Δ(λ)| < tol · scale(λ)` at every probe point; `tol` is raised to the
/// evaluation noise floor of the method.
pub fn detect_degenerate(cf: &CharFunction, tol: f64) -> Result<Degeneracy> {
    let tol = tol.max(cf.noise_floor());
    let mut best = (C64::new(0.0, 0.0), -1.0);
    for z in degeneracy_probe_points() {
        let v = cf.eval(z)?;
        let ratio = v.delta.norm() / v.scale;
        if ratio > best.1 {
            best = (z, ratio);
        }
    }
    if best.1 < tol {
        Ok(Degeneracy::Degenerate { max_ratio: best.1 })
    } else {
        Ok(Degeneracy::NonDegenerate { witness: best.0, ratio: best.1 })
    }
}

/// Heuristic search window holding roughly the first `n_target` eigenvalues on each side.
/// Real weights give a horizontal strip whose height grows until `|Δ|/scale` on the
/// horizontal edges clears `1e-3`; other weights give a square.
pub fn auto_window(cf: &CharFunction, n_target: usize) -> Result<(Window, String)> {
    let blocks = &cf.problem().blocks;
    let r = 2.0 * PI * (n_target + 1) as f64 / blocks.min_abs_weight();
    if !blocks.is_real(1e-14) {
        return Ok((Window::new(-r, r, -r, r)?, format!("square window |Re|,|Im| <= {r:.6} for non-real weights")));
    }
    let mut h = 1.0;
    while h < 64.0 {
        let mut worst = f64::INFINITY;
        for k in 0..=64 {
            let x = -r + 2.0 * r * k as f64 / 64.0;
            for y in [h, -h] {
                let v = cf.eval(C64::new(x, y))?;
                worst = worst.min(v.delta.norm() / v.scale);
            }
        }
        if worst > 1e-3 {
            break;
        }
        h *= 2.0;
    }
    let h = 2.0 * h;
    Ok((Window::new(-r, r, -h, h)?, format!("strip |Re| <= {r:.6}, |Im| <= {h}")))
}

fn key(z: C64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

#[derive(Debug)]
enum TraceFail {
    ZeroOnContour(C64),
    Unresolved,
    Eval(Error),
}

impl From<Error> for TraceFail {
    fn from(e: Error) -> Self {
        TraceFail::Eval(e)
    }
}

struct Searcher<'a> {
    cf: &'a CharFunction,
    opts: SearchOptions,
    cache: HashMap<(u64, u64), CharValue>,
    edges: HashMap<((u64, u64), (u64, u64)), f64>,
    evaluations: usize,
}

impl<'a> Searcher<'a> {
    fn eval(&mut self, z: C64) -> Result<CharValue> {
        if let Some(v) = self.cache.get(&key(z)) {
            return Ok(*v);
        }
        let v = self.cf.eval(z)?;
        self.evaluations += 1;
        self.cache.insert(key(z), v);
        Ok(v)
    }

    /// `Δ` and the log-derivative `Δ'/Δ` at `z`.
    fn sample(&mut self, z: C64) -> std::result::Result<(C64, C64), TraceFail> {
        let v = self.eval(z)?;
        if v.delta.norm() <= self.opts.zero_floor * v.scale || !v.delta.is_finite() {
            return Err(TraceFail::ZeroOnContour(z));
        }
        Ok((v.delta, v.derivative / v.delta))
    }

    /// Continuous change of `arg Δ` along `path(t)`, `t ∈ [t0, t1]`; `speed = |path'|`.
    fn track(&mut self, path: &dyn Fn(f64) -> C64, speed: f64, t0: f64, t1: f64) -> std::result::Result<f64, TraceFail> {
        let f0 = self.sample(path(t0))?;
        let f1 = self.sample(path(t1))?;
        self.track_rec(path, speed, (t0, f0), (t1, f1), 0)
    }

    /// A piece is accepted once both halves turn by less than `π/4` in total and
    /// `|Δ'/Δ|` times its length stays below one at the three samples, which keeps
    /// whole turns from hiding between samples.
    fn track_rec(
        &mut self,
        path: &dyn Fn(f64) -> C64,
        speed: f64,
        (t0, f0): (f64, (C64, C64)),
        (t1, f1): (f64, (C64, C64)),
        depth: u32,
    ) -> std::result::Result<f64, TraceFail> {
        let tm = 0.5 * (t0 + t1);
        let fm = self.sample(path(tm))?;
        let d1 = wrap((fm.0 / f0.0).arg());
        let d2 = wrap((f1.0 / fm.0).arg());
        let len = speed * (t1 - t0);
        let g = f0.1.norm().max(fm.1.norm()).max(f1.1.norm());
        if d1.abs() + d2.abs() < 0.25 * PI && g * len < 1.0 {
            return Ok(d1 + d2);
        }
        if depth >= self.opts.max_edge_depth {
            return Err(TraceFail::Unresolved);
        }
        Ok(self.track_rec(path, speed, (t0, f0), (tm, fm), depth + 1)?
            + self.track_rec(path, speed, (tm, fm), (t1, f1), depth + 1)?)
    }

    fn segment(&mut self, a: C64, b: C64) -> std::result::Result<f64, TraceFail> {
        let (ka, kb) = (key(a), key(b));
        let (lo, hi, sign) = if ka <= kb { (a, b, 1.0) } else { (b, a, -1.0) };
        let k = (key(lo), key(hi));
        if let Some(v) = self.edges.get(&k) {
            return Ok(sign * v);
        }
        let v = self.track(&|t| lo + (hi - lo) * t, (hi - lo).norm(), 0.0, 1.0)?;
        self.edges.insert(k, v);
        Ok(sign * v)
    }

    /// Winding of `Δ` around the rectangle, counterclockwise.
    fn winding(&mut self, w: &Window) -> std::result::Result<i64, TraceFail> {
        let c = w.corners();
        let mut total = 0.0;
        for i in 0..4 {
            total += self.segment(c[i], c[(i + 1) % 4])?;
        }
        let turns = total / (2.0 * PI);
        if (turns - turns.round()).abs() > 0.1 {
            return Err(TraceFail::Unresolved);
        }
        Ok(turns.round() as i64)
    }

    fn circle_winding(&mut self, center: C64, r: f64) -> std::result::Result<i64, TraceFail> {
        let path = move |t: f64| center + C64::from_polar(r, t);
        let mut total = 0.0;
        for q in 0..4 {
            let t0 = q as f64 * 0.5 * PI;
            total += self.track(&path, r, t0, t0 + 0.5 * PI)?;
        }
        Ok((total / (2.0 * PI)).round() as i64)
    }

    /// `(1/2πi) ∮ (λ - c)^p Δ'/Δ dλ` for `p = 0..=pmax` by the trapezoid rule on a circle.
    fn moments(&mut self, center: C64, r: f64, k: usize, pmax: usize) -> Result<Vec<C64>> {
        let mut s = vec![C64::new(0.0, 0.0); pmax + 1];
        for j in 0..k {
            let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64);
            let v = self.eval(center + e * r)?;
            let g = v.derivative / v.delta * e * r / k as f64;
            let mut pw = C64::new(1.0, 0.0);
            for sp in s.iter_mut() {
                *sp += g * pw;
                pw *= e * r;
            }
        }
        Ok(s)
    }

    fn newton(&mut self, mut z: C64) -> Result<C64> {
        for _ in 0..60 {
            let v = self.eval(z)?;
            if v.delta == C64::new(0.0, 0.0) || v.derivative == C64::new(0.0, 0.0) {
                break;
            }
            let step = v.delta / v.derivative;
            if !step.is_finite() {
                break;
            }
            z -= step;
            if step.norm() <= 1e-15 * z.norm().max(1.0) {
                break;
            }
        }
        Ok(z)
    }

    /// Center of mass of the roots inside a small circle, `(1/m)(1/2πi)∮ λ Δ'/Δ dλ`.
    fn contour_mean(&mut self, z: C64, m: usize) -> Result<C64> {
        let mut c = z;
        for _ in 0..3 {
            let s = self.moments(c, self.opts.multiplicity_radius, 64, 1)?;
            let shift = s[1] / m as f64;
            c += shift;
            if shift.norm() < 1e-15 * c.norm().max(1.0) {
                break;
            }
        }
        Ok(c)
    }

    fn refine(&mut self, z: C64) -> Result<Option<(C64, usize)>> {
        let r = self.opts.multiplicity_radius;
        let m = match self.circle_winding(z, r) {
            Ok(m) if m >= 1 => m as usize,
            _ => {
                // the estimate was off; polish first and try again
                let z2 = self.newton(z)?;
                match self.circle_winding(z2, r) {
                    Ok(m) if m >= 1 => return self.finish(z2, m as usize).map(Some),
                    _ => return Ok(None),
                }
            }
        };
        self.finish(z, m).map(Some)
    }

    fn finish(&mut self, z: C64, m: usize) -> Result<(C64, usize)> {
        if m == 1 {
            let z2 = self.newton(z)?;
            if (z2 - z).norm() < self.opts.multiplicity_radius {
                return Ok((z2, 1));
            }
            return Ok((self.contour_mean(z, 1)?, 1));
        }
        Ok((self.contour_mean(z, m)?, m))
    }

    fn leaf_roots(&mut self, cell: &Window, w: i64) -> Result<Vec<(C64, usize)>> {
        let center = cell.center();
        let mut radius = 0.6 * cell.diameter();
        let mut estimates = Vec::new();
        for _ in 0..3 {
            let s = self.moments(center, radius, 128, 6)?;
            let count = s[0].re.round();
            if (s[0].re - count).abs() > 0.05 || count < w as f64 || count > 6.0 {
                radius *= 0.9;
                continue;
            }
            estimates = roots_from_power_sums(&s[1..=count as usize]);
            break;
        }
        if estimates.is_empty() {
            estimates.push(center);
        }
        let mut out: Vec<(C64, usize)> = Vec::new();
        for e in estimates {
            let z = center + e;
            if let Some((root, m)) = self.refine(z)? {
                if !cell.owns(root) {
                    continue;
                }
                if out.iter().all(|(o, _)| (o - root).norm() > self.opts.merge_radius) {
                    out.push((root, m));
                }
            }
        }
        Ok(out)
    }
}

/// Roots of the monic polynomial whose roots have the given power sums `p_1..p_k`.
fn roots_from_power_sums(p: &[C64]) -> Vec<C64> {
    let k = p.len();
    // Newton's identities: e_j = (1/j) Σ_{i=1}^{j} (-1)^{i-1} e_{j-i} p_i
    let mut e = vec![C64::new(1.0, 0.0)];
    for j in 1..=k {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=j {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[j - i] * p[i - 1] * sign;
        }
        e.push(acc / j as f64);
    }
    // x^k - e1 x^{k-1} + e2 x^{k-2} - ...
    let coef: Vec<C64> = (0..=k).map(|j| if j % 2 == 0 { e[j] } else { -e[j] }).collect();
    polynomial_roots(&coef)
}

/// Durand–Kerner iteration for a monic polynomial given by `coef[0] x^k + coef[1] x^{k-1} + ..`.
fn polynomial_roots(coef: &[C64]) -> Vec<C64> {
    let k = coef.len() - 1;
    match k {
        0 => return vec![],
        1 => return vec![-coef[1]],
        2 => {
            let disc = (coef[1] * coef[1] - coef[2] * 4.0).sqrt();
            let q = if (-coef[1] + disc).norm() >= (-coef[1] - disc).norm() { (-coef[1] + disc) * 0.5 } else { (-coef[1] - disc) * 0.5 };
            if q.norm() == 0.0 {
                return vec![C64::new(0.0, 0.0); 2];
            }
            return vec![q, coef[2] / q];
        }
        _ => {}
    }
    let bound = 1.0 + coef[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..k).map(|i| seed.powu(i as u32) * bound * 0.5).collect();
    let horner = |x: C64| coef.iter().fold(C64::new(0.0, 0.0), |acc, c| acc * x + c);
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..k {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..k {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                den = C64::new(1e-12, 0.0);
            }
            let step = horner(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    z
}

const SPLITS: [f64; 6] = [0.4937, 0.4571, 0.5319, 0.4213, 0.5683, 0.3877];

fn split(w: &Window, fx: f64, fy: f64) -> [Window; 4] {
    let xm = w.re_min + fx * (w.re_max - w.re_min);
    let ym = w.im_min + fy * (w.im_max - w.im_min);
    [
        Window { re_min: w.re_min, re_max: xm, im_min: w.im_min, im_max: ym },
        Window { re_min: xm, re_max: w.re_max, im_min: w.im_min, im_max: ym },
        Window { re_min: xm, re_max: w.re_max, im_min: ym, im_max: w.im_max },
        Window { re_min: w.re_min, re_max: xm, im_min: ym, im_max: w.im_max },
    ]
}

fn sort_eigenvalues(v: &mut [Eigenvalue]) {
    v.sort_by(|a, b| a.lambda.norm().total_cmp(&b.lambda.norm()));
    let mut start = 0;
    while start < v.len() {
        let mut end = start + 1;
        while end < v.len() && v[end].lambda.norm() - v[end - 1].lambda.norm() <= 1e-9 * v[end].lambda.norm().max(1.0) {
            end += 1;
        }
        v[start..end].sort_by(|a, b| a.lambda.arg().total_cmp(&b.lambda.arg()));
        start = end;
    }
}

/// Argument-principle search that always returns a report; `budget_exhausted` marks partial results.
pub fn search_eigenvalues(cf: &CharFunction, window: Window, opts: SearchOptions) -> Result<SpectrumReport> {
    let mut s = Searcher { cf, opts, cache: HashMap::new(), edges: HashMap::new(), evaluations: 0 };
    let mut notes = Vec::new();
    let mut traced = window;
    let mut total = None;
    for attempt in 0..12 {
        match s.winding(&traced) {
            Ok(w) => {
                total = Some(w);
                break;
            }
            Err(TraceFail::Eval(e)) => return Err(e),
            Err(f) => {
                let d = 1e-3 * window.diameter().max(1.0) * (attempt + 1) as f64;
                let why = match f {
                    TraceFail::ZeroOnContour(z) => format!("|Δ| negligible at {z}"),
                    _ => "phase not resolved".to_string(),
                };
                notes.push(format!("window boundary nudged by {d:.3e}: {why}"));
                traced = window.grown(d);
            }
        }
    }
    let total = total.ok_or_else(|| Error::SearchBudget("could not trace the window boundary".into()))?;
    let mut cells = Vec::new();
    let mut found: Vec<(C64, usize)> = Vec::new();
    let mut stack = vec![(traced, total, 0usize)];
    let mut budget_exhausted = false;
    while let Some((cell, w, depth)) = stack.pop() {
        if cells.len() >= opts.max_cells {
            budget_exhausted = true;
            break;
        }
        if w == 0 {
            cells.push(CellRecord { window: cell, winding: 0, depth, leaf: true, consistent: true });
            continue;
        }
        if w <= 2 && cell.diameter() < opts.leaf_diameter || cell.diameter() < 1e-9 * cell.center().norm().max(1.0) {
            cells.push(CellRecord { window: cell, winding: w, depth, leaf: true, consistent: true });
            found.extend(s.leaf_roots(&cell, w)?);
            continue;
        }
        let mut chosen = None;
        'outer: for &fx in &SPLITS {
            for &fy in &SPLITS {
                let kids = split(&cell, fx, fy);
                let mut ws = [0i64; 4];
                let mut ok = true;
                for (i, k) in kids.iter().enumerate() {
                    match s.winding(k) {
                        Ok(v) => ws[i] = v,
                        Err(TraceFail::Eval(e)) => return Err(e),
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok && ws.iter().sum::<i64>() == w {
                    chosen = Some((kids, ws, true));
                    break 'outer;
                }
                if ok && chosen.is_none() {
                    chosen = Some((kids, ws, false));
                }
            }
        }
        match chosen {
            Some((kids, ws, consistent)) => {
                if !consistent {
                    notes.push(format!("children windings {ws:?} do not sum to {w} in cell {cell:?}"));
                }
                cells.push(CellRecord { window: cell, winding: w, depth, leaf: false, consistent });
                for (k, wk) in kids.into_iter().zip(ws) {
                    stack.push((k, wk, depth + 1));
                }
            }
            None => {
                notes.push(format!("could not subdivide cell {cell:?}; treating it as a leaf"));
                cells.push(CellRecord { window: cell, winding: w, depth, leaf: true, consistent: false });
                found.extend(s.leaf_roots(&cell, w)?);
            }
        }
    }
    // clusters closer than the merge radius become one eigenvalue
    let mut merged: Vec<(C64, usize)> = Vec::new();
    for (z, m) in found {
        if let Some(e) = merged.iter_mut().find(|(o, _)| (*o - z).norm() <= opts.merge_radius) {
            e.1 += m;
        } else {
            merged.push((z, m));
        }
    }
    let mut eigenvalues = Vec::with_capacity(merged.len());
    for (z, m) in merged {
        let v = s.eval(z)?;
        eigenvalues.push(Eigenvalue { lambda: z, multiplicity: m, residual: v.delta.norm(), scale: v.scale });
    }
    sort_eigenvalues(&mut eigenvalues);
    let count: usize = eigenvalues.iter().map(|e| e.multiplicity).sum();
    let count_consistent = count as i64 == total;
    if !count_consistent && !budget_exhausted {
        notes.push(format!("sum of multiplicities {count} differs from boundary winding {total}"));
    }
    Ok(SpectrumReport {
        requested_window: window,
        window: traced,
        method: cf.method(),
        eigenvalues,
        total_winding: total,
        degenerate: false,
        count_consistent,
        budget_exhausted,
        evaluations: s.evaluations,
        cells,
        notes,
    })
}

pub fn find_eigenvalues(cf: &CharFunction, window: Window, opts: SearchOptions) -> Result<SpectrumReport> {
    if detect_degenerate(cf, 1e-12)?.is_degenerate() {
        return Err(Error::Degenerate);
    }
    let rep = search_eigenvalues(cf, window, opts)?;
    if rep.budget_exhausted {
        return Err(Error::SearchBudget(format!(
            "more than {} cells; {} eigenvalues found before stopping",
            opts.max_cells,
            rep.eigenvalues.len()
        )));
    }
    Ok(rep)
}

/// Re-runs the refinement from a perturbed start; used to check Newton basin stability.
pub fn refine_from(cf: &CharFunction, start: C64, opts: SearchOptions) -> Result<Option<(C64, usize)>> {
    let mut s = Searcher { cf, opts, cache: HashMap::new(), edges: HashMap::new(), evaluations: 0 };
    s.refine(start)
}
