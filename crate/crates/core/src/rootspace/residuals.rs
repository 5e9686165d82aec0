//! Least-squares residuals of probe functions against spans of root functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::chains::SpanBasis;
use super::gridfn::{inner, norm, GridFunction};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numcore::C64;

#[derive(Clone, Debug)]
pub struct Probe {
    pub id: String,
    pub f: GridFunction,
}

/// `col(1, 0, ..)`, `col(x(1-x), 0, ..)` and a seeded random trigonometric vector.
pub fn default_probes(grid: &Grid, n: usize, seed: u64) -> Vec<Probe> {
    let first = |v: C64| {
        let mut out = vec![C64::new(0.0, 0.0); n];
        out[0] = v;
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // coefficients of cos(2πmx), sin(2πmx) for m = 1..=4 in every component
    let coefs: Vec<[C64; 8]> = (0..n)
        .map(|_| std::array::from_fn(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    vec![
        Probe { id: "unit".into(), f: GridFunction::from_fn(grid, n, |_| first(C64::new(1.0, 0.0))) },
        Probe { id: "poly".into(), f: GridFunction::from_fn(grid, n, |x| first(C64::new(x * (1.0 - x), 0.0))) },
        Probe {
            id: "trig".into(),
            f: GridFunction::from_fn(grid, n, |x| {
                coefs
                    .iter()
                    .map(|c| {
                        (1..=4)
                            .map(|m| {
                                let t = 2.0 * std::f64::consts::PI * m as f64 * x;
                                c[2 * m - 2] * t.cos() + c[2 * m - 1] * t.sin()
                            })
                            .sum()
                    })
                    .collect()
            }),
        },
    ]
}

/// `1, 5, 10, 20, 30, ..` up to `total`, always ending at `total`.
pub fn default_schedule(total: usize) -> Vec<usize> {
    let mut s: Vec<usize> = [1, 5].into_iter().chain((1..).map(|k| 10 * k).take_while(|&v| v < total)).collect();
    s.retain(|&v| v < total);
    if total > 0 {
        s.push(total);
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeResiduals {
    pub id: String,
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualTable {
    pub n_values: Vec<usize>,
    /// Dimension of the span of the first `N` root functions.
    pub ranks: Vec<usize>,
    pub probes: Vec<ProbeResiduals>,
}

impl ResidualTable {
    /// `N,probe_id,residual` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,probe_id,residual\n");
        for p in &self.probes {
            for (n, r) in self.n_values.iter().zip(&p.residuals) {
                s.push_str(&format!("{n},{},{r:.16e}\n", p.id));
            }
        }
        s
    }

    pub fn residual(&self, probe: &str, n: usize) -> Option<f64> {
        let k = self.n_values.iter().position(|&v| v == n)?;
        self.probes.iter().find(|p| p.id == probe).map(|p| p.residuals[k])
    }

    /// Largest increase between consecutive entries over all probes.
    pub fn max_increase(&self) -> f64 {
        self.probes
            .iter()
            .flat_map(|p| p.residuals.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `r_N = ‖p - P_N p‖ / ‖p‖` with `P_N` the Simpson-weighted orthogonal projection onto the span
/// of the first `N` functions. Spans are nested, so each basis vector is added once.
pub fn completeness_residuals(
    functions: &[&GridFunction],
    probes: &[Probe],
    schedule: &[usize],
    grid: &Grid,
) -> Result<ResidualTable> {
    completeness_residuals_with(functions, probes, schedule, grid, 1e-8)
}

/// As [`completeness_residuals`]; a function whose part outside the current span is below
/// `rank_tol` relative to its norm does not extend the span. Noisy samples need a larger value,
/// otherwise normalized noise enters the basis.
pub fn completeness_residuals_with(
    functions: &[&GridFunction],
    probes: &[Probe],
    schedule: &[usize],
    grid: &Grid,
    rank_tol: f64,
) -> Result<ResidualTable> {
    if functions.is_empty() {
        return Err(Error::Domain("no root functions to project onto".into()));
    }
    let w = grid.simpson_weights();
    let mut schedule: Vec<usize> = schedule.iter().copied().filter(|&v| v >= 1 && v <= functions.len()).collect();
    schedule.sort_unstable();
    schedule.dedup();
    let mut basis = SpanBasis::new(&w, rank_tol * rank_tol);
    let mut rest: Vec<GridFunction> = probes.iter().map(|p| p.f.clone()).collect();
    let pn: Vec<f64> = probes.iter().map(|p| norm(&p.f, &w)).collect();
    let mut table = ResidualTable {
        n_values: Vec::new(),
        ranks: Vec::new(),
        probes: probes.iter().map(|p| ProbeResiduals { id: p.id.clone(), residuals: Vec::new() }).collect(),
    };
    let mut next = 0;
    for (k, f) in functions.iter().enumerate() {
        let before = basis.dim();
        basis.try_add(f);
        if basis.dim() > before {
            let q = &basis.basis()[before];
            for r in rest.iter_mut() {
                let c = inner(r, q, &w);
                r.axpy(-c, q);
            }
        }
        while next < schedule.len() && schedule[next] == k + 1 {
            table.n_values.push(k + 1);
            table.ranks.push(basis.dim());
            for (i, r) in rest.iter().enumerate() {
                table.probes[i].residuals.push(norm(r, &w) / pn[i].max(f64::MIN_POSITIVE));
            }
            next += 1;
        }
    }
    Ok(table)
}
