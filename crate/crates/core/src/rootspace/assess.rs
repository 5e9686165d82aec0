//! End-to-end completeness assessment.

use std::f64::consts::PI;

use serde::Serialize;

use super::chains::{adjoint_chains, build_chains, kernel_functions, minimality_metric, root_functions, summarize};
use super::chains::{ChainSummary, MinimalityReport, RootChain};
use super::criteria::{criteria_2x2, CriteriaReport, Prediction};
use super::residuals::{completeness_residuals_with, default_probes, default_schedule, Probe, ResidualTable};
use super::witness::{orthogonality_defects, row_solutions, witness_dirac_degenerate, witness_t_minus, Witness, WitnessKind};
use crate::error::{Error, ErrorKind, Result};
use crate::grid::Grid;
use crate::model::SystemProblem;
use crate::numcore::C64;
use crate::spectrum::{EvalMethod, auto_window, detect_degenerate, search_eigenvalues, CharFunction, SearchOptions, SpectrumReport, Window};

#[derive(Clone, Debug)]
pub struct CompletenessOptions {
    pub grid_points: usize,
    pub window: Option<Window>,
    /// Eigenvalues per side for the automatic window.
    pub n_target: usize,
    pub schedule: Option<Vec<usize>>,
    pub seed: u64,
    pub with_adjoint: bool,
    /// Sample eigenvalues `π j / (2 max|b|)`, `j = -count/2 .. count/2 - 1`, used when `Δ ≡ 0`.
    pub kernel_count: usize,
    pub search: SearchOptions,
}

impl Default for CompletenessOptions {
    fn default() -> Self {
        CompletenessOptions {
            grid_points: 2001,
            window: None,
            n_target: 20,
            schedule: None,
            seed: 7,
            with_adjoint: false,
            kernel_count: 50,
            search: SearchOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessRecord {
    pub witness: Witness,
    pub norm: f64,
    /// Largest normalized `|⟨u, f⟩|` over the computed root functions.
    pub max_defect: f64,
    pub functions_checked: usize,
    /// Same over random solutions satisfying the boundary row (step witness only).
    pub max_solution_defect: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjointSummary {
    pub eigenvalue_count: Option<usize>,
    pub degenerate: bool,
    pub criteria: Option<CriteriaReport>,
    pub minimality: Option<MinimalityReport>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub verdict: String,
    pub prediction: Prediction,
    pub criteria: Option<CriteriaReport>,
    pub degenerate: bool,
    pub window: Option<Window>,
    pub eigenvalues: Vec<(C64, usize)>,
    pub chains: Vec<ChainSummary>,
    pub residuals: Option<ResidualTable>,
    pub witness: Option<WitnessRecord>,
    pub adjoint: Option<AdjointSummary>,
    pub notes: Vec<String>,
}

impl CompletenessReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything computed along the way, for callers that need the sampled functions.
pub struct Assessment {
    pub report: CompletenessReport,
    pub grid: Grid,
    pub spectrum: Option<SpectrumReport>,
    pub chains: Vec<RootChain>,
    pub witness: Option<Witness>,
}

fn record(problem: &SystemProblem, w: Witness, chains: &[RootChain], grid: &Grid, seed: u64) -> Result<WitnessRecord> {
    let fs = root_functions(chains);
    let defects = orthogonality_defects(&w, &fs, grid)?;
    let max_solution_defect = match w.kind {
        WitnessKind::DegenerateRow => {
            let ys = row_solutions(problem, &w, grid, 50, 50.0, seed)?;
            let refs: Vec<_> = ys.iter().collect();
            Some(orthogonality_defects(&w, &refs, grid)?.into_iter().fold(0.0, f64::max))
        }
        WitnessKind::MirroredBump => None,
    };
    Ok(WitnessRecord {
        norm: w.function.norm(grid)?,
        max_defect: defects.into_iter().fold(0.0, f64::max),
        functions_checked: fs.len(),
        max_solution_defect,
        witness: w,
    })
}

/// Tries the mirrored bumps, then the step witness; applicability failures are recorded as notes.
pub fn find_witness(problem: &SystemProblem, grid: &Grid, notes: &mut Vec<String>) -> Result<Option<Witness>> {
    let attempts: [Box<dyn Fn() -> Result<Witness>>; 2] =
        [Box::new(|| witness_dirac_degenerate(problem, grid, None)), Box::new(|| witness_t_minus(problem))];
    for (name, f) in ["mirrored-bump witness", "step witness"].iter().zip(attempts) {
        match f() {
            Ok(w) => return Ok(Some(w)),
            Err(e) if e.kind() == ErrorKind::Applicability => notes.push(format!("{name}: {e}")),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Span tolerance matched to the sample noise of the evaluation method.
fn rank_tol(cf: &CharFunction) -> f64 {
    match cf.method() {
        EvalMethod::Integrate => 1e-5,
        _ => 1e-8,
    }
}

pub fn kernel_lambdas(problem: &SystemProblem, count: usize) -> Vec<C64> {
    let s = PI / (2.0 * problem.blocks.max_abs_weight());
    let half = (count / 2) as i64;
    (-half..count as i64 - half).map(|j| C64::new(s * j as f64, 0.0)).collect()
}

pub fn assess(problem: &SystemProblem, opts: &CompletenessOptions) -> Result<Assessment> {
    let grid = Grid::uniform(opts.grid_points)?;
    let mut notes = Vec::new();
    let criteria = if problem.n() == 2 { Some(criteria_2x2(problem)?) } else { None };
    let cf = CharFunction::new(problem)?;
    let degenerate = detect_degenerate(&cf, 1e-12)?.is_degenerate();
    let (spectrum, chains, window) = if degenerate {
        notes.push(format!(
            "determinant vanishes identically; root functions sampled as kernel solutions at {} real points",
            opts.kernel_count
        ));
        (None, kernel_functions(problem, &kernel_lambdas(problem, opts.kernel_count), &grid)?, None)
    } else {
        let window = match opts.window {
            Some(w) => w,
            None => {
                let (w, why) = auto_window(&cf, opts.n_target)?;
                notes.push(why);
                w
            }
        };
        let spectrum = search_eigenvalues(&cf, window, opts.search)?;
        notes.extend(spectrum.notes.iter().cloned());
        if spectrum.budget_exhausted {
            notes.push("search budget exhausted; spectrum is partial".into());
        }
        let chains = if spectrum.eigenvalues.is_empty() { Vec::new() } else { build_chains(problem, &spectrum, &grid)? };
        (Some(spectrum), chains, Some(window))
    };

    let witness = find_witness(problem, &grid, &mut notes)?;
    let witness_record = match &witness {
        Some(w) => Some(record(problem, w.clone(), &chains, &grid, opts.seed)?),
        None => None,
    };

    let mut probes: Vec<Probe> = default_probes(&grid, problem.n(), opts.seed);
    if let Some(w) = &witness {
        probes.push(Probe { id: "witness".into(), f: w.function.sample(&grid) });
    }
    let fs = root_functions(&chains);
    let residuals = if fs.is_empty() {
        notes.push("no root functions found in the window".into());
        None
    } else {
        let schedule = opts.schedule.clone().unwrap_or_else(|| default_schedule(fs.len()));
        Some(completeness_residuals_with(&fs, &probes, &schedule, &grid, rank_tol(&cf))?)
    };

    let adjoint = if opts.with_adjoint { Some(adjoint_summary(problem, spectrum.as_ref(), &chains, &grid)) } else { None };

    let prediction = criteria.as_ref().map_or(Prediction::Unclassified, |c| c.prediction);
    let certified = witness_record.as_ref().is_some_and(|r| r.max_defect < 1e-7 && r.max_solution_defect.unwrap_or(0.0) < 1e-7);
    let evidence = residuals.as_ref().and_then(|t| {
        let n = *t.n_values.last()?;
        let r = t.probes.iter().find(|p| p.id == "poly")?.residuals.last().copied()?;
        Some(format!("r_{n}(poly) = {r:.3e}"))
    });
    let by = criteria.as_ref().and_then(|c| c.decided_by).unwrap_or("none");
    let verdict = if certified {
        "certified-incomplete (witness)".to_string()
    } else {
        let ev = evidence.map(|e| format!(" + evidence {e}")).unwrap_or_default();
        match prediction {
            Prediction::Complete => format!("predicted-complete ({by}){ev}"),
            Prediction::CompleteAdjointIncomplete => format!("predicted-complete, adjoint incomplete ({by}){ev}"),
            Prediction::Incomplete => format!("predicted-incomplete ({by}){ev}"),
            Prediction::Unclassified => format!("unclassified{ev}"),
        }
    };

    let report = CompletenessReport {
        verdict,
        prediction,
        criteria,
        degenerate,
        window,
        eigenvalues: spectrum.as_ref().map_or_else(Vec::new, |s| s.eigenvalues.iter().map(|e| (e.lambda, e.multiplicity)).collect()),
        chains: summarize(problem, &chains, &grid),
        residuals,
        witness: witness_record,
        adjoint,
        notes,
    };
    Ok(Assessment { report, grid, spectrum, chains, witness })
}

fn adjoint_summary(problem: &SystemProblem, spectrum: Option<&SpectrumReport>, chains: &[RootChain], grid: &Grid) -> AdjointSummary {
    let mut s = AdjointSummary { eigenvalue_count: None, degenerate: false, criteria: None, minimality: None, notes: Vec::new() };
    let adj = match super::chains::adjoint_problem(problem) {
        Ok(a) => a,
        Err(e) => {
            s.notes.push(format!("adjoint boundary conditions: {e}"));
            return s;
        }
    };
    if adj.n() == 2 {
        match criteria_2x2(&adj) {
            Ok(c) => s.criteria = Some(c),
            Err(e) => s.notes.push(format!("adjoint criteria: {e}")),
        }
    }
    let Some(spectrum) = spectrum else {
        s.notes.push("primary determinant degenerate; adjoint spectrum not paired".into());
        return s;
    };
    match adjoint_chains(problem, spectrum, grid) {
        Ok(run) => {
            s.eigenvalue_count = Some(run.spectrum.count());
            match minimality_metric(chains, &run.chains, grid) {
                Ok(m) => s.minimality = Some(m),
                Err(e) => s.notes.push(format!("minimality: {e}")),
            }
        }
        Err(Error::Degenerate) => s.degenerate = true,
        Err(e) => s.notes.push(format!("adjoint pipeline: {e}")),
    }
    s
}
