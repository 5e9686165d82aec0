use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};
use weakreg::evolve::check_asymptotics;
use weakreg::grid::Grid;
use weakreg::model::{validate, SystemProblem};
use weakreg::numcore::Tolerance;
use weakreg::presets;
use weakreg::regularity::{classify, selfadjoint_t_pm, splitting_check};
use weakreg::rootspace::{
    assess, build_chains, find_witness, kernel_functions, kernel_lambdas, orthogonality_defects, root_functions,
    row_solutions, summarize, CompletenessOptions, ResidualTable, WitnessKind,
};
use weakreg::spectrum::{auto_window, detect_degenerate, search_eigenvalues, CharFunction, SearchOptions, SpectrumReport, Window};
use weakreg::{Error, ErrorKind};

const MAX_GRID: usize = 1_000_000;

#[derive(Parser)]
#[command(name = "weakreg", version, about = "Regularity, spectra and completeness of root functions for first-order two-point problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the boundary conditions (regular / weakly regular / neither).
    Classify(Common),
    /// Find eigenvalues with multiplicities in a rectangular window.
    Spectrum(Common),
    /// Build root-function chains for the eigenvalues in a window.
    Roots(Common),
    /// Criteria verdict plus numerical completeness evidence.
    Complete {
        #[command(flatten)]
        common: Common,
        /// Also run the adjoint problem and the minimality check.
        #[arg(long)]
        adjoint: bool,
    },
    /// Construct an explicit function orthogonal to all root functions, if one applies.
    Witness(Common),
    /// Compare Δ(izt)e^{-βt} with det T_z along a ray.
    Asymptote {
        #[command(flatten)]
        common: Common,
        /// Direction z as re,im.
        #[arg(long, default_value = "1,0", value_parser = parse_complex)]
        z: C64,
        /// Comma-separated values of t.
        #[arg(long, default_value = "10,20,40", value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// List the built-in problems, or print one as JSON.
    Preset {
        /// Preset to print; lists the catalog when omitted.
        name: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Problem description in JSON.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    problem: Option<PathBuf>,
    /// Built-in problem name (see `weakreg preset`).
    #[arg(long)]
    preset: Option<String>,
    /// Search window re_min,re_max,im_min,im_max.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Sample points on [0,1].
    #[arg(long)]
    grid: Option<usize>,
    /// Relative tolerance for rank decisions and Newton refinement.
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for report files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Print the JSON report on stdout.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Print the main table as CSV on stdout.
    #[arg(long)]
    csv: bool,
}

fn parse_window(s: &str) -> Result<Window, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>()?;
    if v.len() != 4 {
        return Err(format!("expected 4 numbers, got {}", v.len()));
    }
    Window::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>()?;
    match v[..] {
        [re] => Ok(C64::new(re, 0.0)),
        [re, im] => Ok(C64::new(re, im)),
        _ => Err("expected re or re,im".into()),
    }
}

/// Failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Validation => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Applicability => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

fn validation(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type Outcome = Result<(), Failure>;

struct Loaded {
    problem: SystemProblem,
    window: Option<Window>,
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let (problem, window) = match (&common.problem, &common.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
            (parse_problem(&text)?, None)
        }
        (None, Some(name)) => {
            let p = presets::find(name).ok_or_else(|| validation(format!("unknown preset {name:?}; run `weakreg preset`")))?;
            (p.problem, p.window.map(|w| Window::new(w[0], w[1], w[2], w[3]).expect("preset window")))
        }
        _ => return Err(validation("give exactly one of --problem and --preset")),
    };
    let rep = validate(&problem, tolerance(common)?);
    if !rep.is_valid() {
        return Err(validation(format!("invalid problem: {}", rep.violations.join("; "))));
    }
    Ok(Loaded { problem, window: common.window.or(window) })
}

/// Parses a problem, naming the offending field on failure.
fn parse_problem(text: &str) -> Result<SystemProblem, Failure> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        validation(format!("malformed problem JSON at field `{path}`: {}", e.inner()))
    })
}

fn tolerance(common: &Common) -> Result<Tolerance, Failure> {
    match common.tol {
        None => Ok(Tolerance::default()),
        Some(t) if t > 0.0 && t < 1.0 => Ok(Tolerance::new(t, 0.0)?),
        Some(t) => Err(validation(format!("--tol must lie in (0, 1), got {t}"))),
    }
}

fn grid(common: &Common, default: usize) -> Result<Grid, Failure> {
    let n = common.grid.unwrap_or(default);
    if !(3..=MAX_GRID).contains(&n) {
        return Err(validation(format!("--grid must lie in 3..={MAX_GRID}, got {n}")));
    }
    Ok(Grid::uniform(n)?)
}

fn search_options(common: &Common) -> SearchOptions {
    let mut o = SearchOptions::default();
    if let Some(t) = common.tol {
        o.tol = t;
    }
    o
}

fn json_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn fmt_c(z: C64) -> String {
    format!("{:.6}{:+.6}i", z.re + 0.0, z.im + 0.0)
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `files` under `--out` and prints either the JSON, the first CSV, or `text`.
fn emit(common: &Common, report: &Value, csvs: &[(&str, String)], text: &str) -> Outcome {
    let json = json_string(report);
    if let Some(dir) = &common.out {
        write_files(dir, &json, csvs)?;
    }
    if common.json {
        println!("{json}");
    } else if common.csv {
        match csvs.first() {
            Some((_, csv)) => print!("{csv}"),
            None => return Err(validation("this command has no CSV table")),
        }
    } else {
        print!("{text}");
    }
    Ok(())
}

fn write_files(dir: &Path, json: &str, csvs: &[(&str, String)]) -> Outcome {
    let io = |e: std::io::Error| validation(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("report.json"), format!("{json}\n")).map_err(io)?;
    for (name, csv) in csvs {
        fs::write(dir.join(name), csv).map_err(io)?;
    }
    Ok(())
}

fn run_classify(common: &Common) -> Outcome {
    let Loaded { problem, .. } = load(common)?;
    let tol = tolerance(common)?;
    let rep = classify(&problem.bc, &problem.blocks, tol)?;
    let mut report = json!({ "regularity": rep });
    // optional extras; inapplicable ones are just left out
    if let Ok(s) = splitting_check(&problem.bc, &problem.blocks) {
        report["splitting"] = json!(s);
    }
    if let Ok(t) = selfadjoint_t_pm(&problem.bc, &problem.blocks) {
        report["t_plus_minus"] = json!(t);
    }
    let mut csv = String::from("sector_start,sector_end,det_re,det_im,relative,nonzero\n");
    for s in &rep.sectors {
        let _ = writeln!(csv, "{},{},{},{},{},{}", fmt_num(s.start), fmt_num(s.end), fmt_num(s.det.re), fmt_num(s.det.im), fmt_num(s.relative), s.nonzero);
    }
    let mut text = format!("verdict: {:?}\n", rep.verdict);
    for s in &rep.sectors {
        let _ = writeln!(text, "  sector [{:.4}, {:.4}]  det T = {}  ({})", s.start, s.end, fmt_c(s.det), if s.nonzero { "nonzero" } else { "zero" });
    }
    emit(common, &report, &[("sectors.csv", csv)], &text)
}

fn spectrum_csv(s: &SpectrumReport) -> String {
    let mut csv = String::from("re,im,multiplicity,residual,scale\n");
    for e in &s.eigenvalues {
        let _ = writeln!(csv, "{},{},{},{},{}", fmt_num(e.lambda.re), fmt_num(e.lambda.im), e.multiplicity, fmt_num(e.residual), fmt_num(e.scale));
    }
    csv
}

/// Runs the search; a degenerate determinant is a numerical failure.
fn spectrum_for(common: &Common, loaded: &Loaded) -> Result<(SpectrumReport, Vec<String>), Failure> {
    let cf = CharFunction::new(&loaded.problem)?;
    if detect_degenerate(&cf, 1e-12)?.is_degenerate() {
        return Err(Failure {
            code: 3,
            message: "characteristic determinant vanishes identically; try `weakreg complete` or `weakreg witness`".into(),
        });
    }
    let mut notes = Vec::new();
    let window = match loaded.window {
        Some(w) => w,
        None => {
            let (w, why) = auto_window(&cf, 20)?;
            notes.push(why);
            w
        }
    };
    Ok((search_eigenvalues(&cf, window, search_options(common))?, notes))
}

fn budget_check(s: &SpectrumReport) -> Outcome {
    if s.budget_exhausted {
        return Err(Failure { code: 3, message: format!("search budget exhausted; {} eigenvalues found before stopping", s.eigenvalues.len()) });
    }
    Ok(())
}

fn run_spectrum(common: &Common) -> Outcome {
    let loaded = load(common)?;
    let (s, notes) = spectrum_for(common, &loaded)?;
    let report = json!({ "spectrum": s, "notes": notes });
    let w = s.window;
    let mut text = format!("window [{}, {}] x [{}, {}]: {} eigenvalues (with multiplicity)\n", w.re_min, w.re_max, w.im_min, w.im_max, s.count());
    for e in &s.eigenvalues {
        let _ = writeln!(text, "  {:+.12} {:+.12}i  m = {}", e.lambda.re + 0.0, e.lambda.im + 0.0, e.multiplicity);
    }
    emit(common, &report, &[("eigenvalues.csv", spectrum_csv(&s))], &text)?;
    budget_check(&s)
}

fn run_roots(common: &Common) -> Outcome {
    let loaded = load(common)?;
    let g = grid(common, 2001)?;
    let (s, notes) = spectrum_for(common, &loaded)?;
    let chains = build_chains(&loaded.problem, &s, &g)?;
    let summaries = summarize(&loaded.problem, &chains, &g);
    let report = json!({ "window": s.window, "grid_points": g.len(), "chains": summaries, "notes": notes });
    let mut csv = String::from("re,im,multiplicity,column,length,bc_residual,ode_residual\n");
    for c in &summaries {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_num(c.lambda.re),
            fmt_num(c.lambda.im),
            c.multiplicity,
            c.j_index,
            c.length,
            fmt_num(c.bc_residual),
            fmt_num(c.ode_residual)
        );
    }
    let mut funcs = String::from("chain,order,component,x,re,im\n");
    for (k, c) in chains.iter().enumerate() {
        for (p, u) in c.chain.iter().enumerate() {
            for comp in 0..u.n() {
                for (i, x) in g.x.iter().enumerate() {
                    let v = u.at(i)[comp];
                    let _ = writeln!(funcs, "{k},{p},{comp},{},{},{}", fmt_num(*x), fmt_num(v.re), fmt_num(v.im));
                }
            }
        }
    }
    let mut text = format!("{} chains, {} root functions\n", chains.len(), root_functions(&chains).len());
    for c in &summaries {
        let _ = writeln!(
            text,
            "  λ = {:+.10} {:+.10}i  m = {}  length {}  bc {:.1e}  ode {:.1e}",
            c.lambda.re + 0.0, c.lambda.im + 0.0, c.multiplicity, c.length, c.bc_residual, c.ode_residual
        );
    }
    emit(common, &report, &[("chains.csv", csv), ("functions.csv", funcs)], &text)?;
    budget_check(&s)
}

fn residuals_text(t: &ResidualTable) -> String {
    let mut text = String::from("  N    ");
    for p in &t.probes {
        let _ = write!(text, "{:>12}", p.id);
    }
    text.push('\n');
    for (k, n) in t.n_values.iter().enumerate() {
        let _ = write!(text, "  {n:<5}");
        for p in &t.probes {
            let _ = write!(text, "{:>12.4e}", p.residuals[k]);
        }
        text.push('\n');
    }
    text
}

fn run_complete(common: &Common, adjoint: bool) -> Outcome {
    let loaded = load(common)?;
    let g = grid(common, 2001)?;
    let opts = CompletenessOptions {
        grid_points: g.len(),
        window: loaded.window,
        seed: common.seed,
        with_adjoint: adjoint,
        search: search_options(common),
        ..CompletenessOptions::default()
    };
    let a = assess(&loaded.problem, &opts)?;
    let r = &a.report;
    let report = serde_json::to_value(r).expect("report serializes");
    let csv = r.residuals.as_ref().map(ResidualTable::to_csv).unwrap_or_else(|| "N,probe_id,residual\n".into());
    let mut text = format!("verdict: {}\n", r.verdict);
    if let Some(c) = &r.criteria {
        for e in &c.evaluations {
            let _ = writeln!(text, "  {:<24} {:?}", e.name, e.status);
        }
    }
    let _ = writeln!(text, "root functions: {}", r.chains.iter().map(|c| c.length).sum::<usize>());
    if let Some(t) = &r.residuals {
        text.push_str(&residuals_text(t));
    }
    for n in &r.notes {
        let _ = writeln!(text, "note: {n}");
    }
    emit(common, &report, &[("residuals.csv", csv)], &text)?;
    match &a.spectrum {
        Some(s) => budget_check(s),
        None => Ok(()),
    }
}

fn run_witness(common: &Common) -> Outcome {
    let loaded = load(common)?;
    let g = grid(common, 2001)?;
    let p = &loaded.problem;
    let mut notes = Vec::new();
    let w = find_witness(p, &g, &mut notes)?
        .ok_or_else(|| Failure { code: 4, message: format!("no witness construction applies: {}", notes.join("; ")) })?;
    // check against the solutions the witness is built to annihilate
    let (label, fs) = match w.kind {
        WitnessKind::DegenerateRow => ("random boundary-row solutions", row_solutions(p, &w, &g, 50, 50.0, common.seed)?),
        WitnessKind::MirroredBump => {
            let ks = kernel_functions(p, &kernel_lambdas(p, 50), &g)?;
            ("kernel solutions", root_functions(&ks).into_iter().cloned().collect())
        }
    };
    let refs: Vec<_> = fs.iter().collect();
    let defects = orthogonality_defects(&w, &refs, &g)?;
    let max = defects.iter().copied().fold(0.0, f64::max);
    let report = json!({
        "witness": w,
        "norm": w.function.norm(&g)?,
        "checked_against": label,
        "functions_checked": defects.len(),
        "max_defect": max,
        "notes": notes,
    });
    let mut csv = String::from("component,a,b,coef_re,coef_im,profile\n");
    for piece in &w.function.pieces {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:?}",
            piece.component,
            fmt_num(piece.a),
            fmt_num(piece.b),
            fmt_num(piece.coef.re),
            fmt_num(piece.coef.im),
            piece.profile
        );
    }
    let mut text = format!("{:?} witness with {} pieces\n", w.kind, w.function.pieces.len());
    for piece in &w.function.pieces {
        let _ = writeln!(text, "  f_{} = {} ({:?}) on [{:.4}, {:.4}]", piece.component + 1, fmt_c(piece.coef), piece.profile, piece.a, piece.b);
    }
    let _ = writeln!(text, "max normalized inner product over {} {label}: {max:.3e}", defects.len());
    emit(common, &report, &[("witness.csv", csv)], &text)
}

fn run_asymptote(common: &Common, z: C64, t: &[f64]) -> Outcome {
    let loaded = load(common)?;
    if t.is_empty() || t.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(validation("--t needs positive values"));
    }
    let rep = check_asymptotics(&loaded.problem, z, t)?;
    let report = json!(rep);
    let mut csv = String::from("t,scaled_delta_re,scaled_delta_im,det_t_re,det_t_im,det_rel_error,deviation\n");
    let mut text = format!("z = {}, beta/t = {}\n", fmt_c(z), fmt_c(rep.beta_rate));
    for s in &rep.samples {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_num(s.t),
            fmt_num(s.scaled_delta.re),
            fmt_num(s.scaled_delta.im),
            fmt_num(s.det_t.re),
            fmt_num(s.det_t.im),
            fmt_num(s.det_rel_error),
            fmt_num(s.deviation)
        );
        let _ = writeln!(text, "  t = {:<6}  Δe^(-βt) = {}  det T_z = {}  rel. error {:.2e}", s.t, fmt_c(s.scaled_delta), fmt_c(s.det_t), s.det_rel_error);
    }
    if rep.near_sector_boundary {
        text.push_str("note: z is close to a sector boundary\n");
    }
    emit(common, &report, &[("asymptote.csv", csv)], &text)
}

fn run_preset(name: Option<&str>, json_out: bool) -> Outcome {
    match name {
        Some(n) => {
            let p = presets::find(n).ok_or_else(|| validation(format!("unknown preset {n:?}")))?;
            println!("{}", p.problem.to_json());
        }
        None if json_out => {
            let list: Vec<Value> = presets::catalog()
                .iter()
                .map(|p| json!({ "name": p.name, "description": p.description, "n": p.problem.n(), "window": p.window }))
                .collect();
            println!("{}", json_string(&Value::Array(list)));
        }
        None => {
            for p in presets::catalog() {
                println!("{:<22} {}", p.name, p.description);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify(c) => run_classify(c),
        Command::Spectrum(c) => run_spectrum(c),
        Command::Roots(c) => run_roots(c),
        Command::Complete { common, adjoint } => run_complete(common, *adjoint),
        Command::Witness(c) => run_witness(c),
        Command::Asymptote { common, z, t } => run_asymptote(common, *z, t),
        Command::Preset { name, json } => run_preset(name.as_deref(), *json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
