//! Command-line front end: argument parsing, dispatch and CSV/JSON output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{
    max_error, nodal_error_1d, nodal_error_2d, run_convergence, run_timing, BenchmarkId,
    ConvergenceTable, Flags, Regime, StudyConfig, TimingReport,
};
use crate::error::Error;
use crate::extrapolate::{extrapolate_spacetime, extrapolate_time, ExtrapolationVariant};
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D, TimeGrid};
use crate::refine1d::{gradient_1d, refine_1d};
use crate::refine2d::refine_2d;
use crate::solver1d::solve_1d;
use crate::solver2d::solve_2d;

/// Header of every convergence CSV.
pub const CONVERGENCE_HEADER: [&str; 8] = [
    "h",
    "tau",
    "error_grid",
    "rate_grid",
    "error_mid",
    "rate_mid",
    "error_grad",
    "rate_grad",
];

/// Marker for a cell with no value.
pub const ABSENT: &str = "*";

#[derive(Debug, Parser)]
#[command(
    name = "hocd",
    version,
    about = "Compact fourth-order heat solvers with Hermite refinement"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One solve, optionally refined; prints every output point.
    Solve(SolveArgs),
    /// Error table over a sequence of halving steps.
    Converge(ConvergeArgs),
    /// Coarse, fine and extrapolated errors for one step pair.
    Extrapolate(ExtrapolateArgs),
    /// Full-resolution solve versus coarse solve plus refinement.
    Timing(TimingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_parser = parse_benchmark)]
    pub benchmark: Option<BenchmarkId>,
    /// Diffusivity (1D problems only).
    #[arg(long, default_value = "1", value_parser = parse_positive)]
    pub c: f64,
    #[arg(long = "T", default_value = "1", value_parser = parse_positive)]
    pub t_end: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Cells per axis.
    #[arg(long = "N")]
    pub n: usize,
    /// Time steps; alternative to `--tau`.
    #[arg(long = "M", conflicts_with = "tau")]
    pub m: Option<usize>,
    #[arg(long, value_parser = parse_positive)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub refine: bool,
    #[arg(long)]
    pub gradient: bool,
    /// Combine with a second solve at half the time step.
    #[arg(long)]
    pub extrapolate: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// fixed-tau, fixed-h, tau=h, tau=h^2 or tau=h/20.
    #[arg(long, value_parser = parse_regime_kind)]
    pub regime: RegimeKind,
    /// Space steps (one per row, or a single value under fixed-h).
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub h: Vec<f64>,
    /// Time steps (a single value under fixed-tau, one per row under fixed-h).
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub tau: Vec<f64>,
    #[arg(long)]
    pub refine: bool,
    #[arg(long)]
    pub gradient: bool,
    #[arg(long)]
    pub extrapolate: bool,
    #[arg(long, default_value = "1")]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExtrapolateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "M", conflicts_with = "tau")]
    pub m: Option<usize>,
    #[arg(long, value_parser = parse_positive)]
    pub tau: Option<f64>,
    #[arg(long, value_enum, default_value = "time")]
    pub variant: VariantArg,
    /// Also report the error at refined points of the extrapolated field.
    #[arg(long)]
    pub refine: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Time,
    SpaceTime,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    #[arg(long, value_parser = parse_benchmark, default_value = "ex41")]
    pub benchmark: BenchmarkId,
    /// Matched output points per axis (odd).
    #[arg(long, default_value = "255")]
    pub points: usize,
    #[arg(long, default_value = "1", value_parser = parse_positive)]
    pub c: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    FixedTau,
    FixedH,
    TauEqH,
    TauEqHSquared,
    TauEqHOver20,
}

impl FromStr for RegimeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed-tau" => Ok(RegimeKind::FixedTau),
            "fixed-h" => Ok(RegimeKind::FixedH),
            "tau=h" => Ok(RegimeKind::TauEqH),
            "tau=h^2" | "tau=h2" => Ok(RegimeKind::TauEqHSquared),
            "tau=h/20" => Ok(RegimeKind::TauEqHOver20),
            _ => Err(format!(
                "unknown regime {s:?} (expected fixed-tau, fixed-h, tau=h, tau=h^2 or tau=h/20)"
            )),
        }
    }
}

fn parse_regime_kind(s: &str) -> Result<RegimeKind, String> {
    s.parse()
}

fn parse_benchmark(s: &str) -> Result<BenchmarkId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A positive number written as a decimal (`1e-5`) or a fraction (`1/64`).
pub fn parse_step(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("not a number: {t:?}"))
    };
    let v = match s.split_once('/') {
        Some((a, b)) => num(a)? / num(b)?,
        None => num(s)?,
    };
    if !v.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(v)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_step(s)?;
    if v <= 0.0 {
        return Err(format!("must be positive: {s:?}"));
    }
    Ok(v)
}

/// Why a run failed; decides the exit status.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Io(std::io::Error),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Singular { .. } | Error::SingularBlock { .. } => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hocd: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => {
            let text = solve(a)?;
            write_output(a.out.output.as_deref(), &text)
        }
        Command::Converge(a) => {
            let table = run_convergence(&study_config(a)?)?;
            let text = match a.out.format {
                Format::Csv => table_to_csv(&table)?,
                Format::Json => to_json(&table)?,
            };
            write_output(a.out.output.as_deref(), &text)
        }
        Command::Extrapolate(a) => {
            let report = extrapolation_report(a)?;
            let text = match a.out.format {
                Format::Csv => extrapolation_to_csv(&report)?,
                Format::Json => to_json(&report)?,
            };
            write_output(a.out.output.as_deref(), &text)
        }
        Command::Timing(a) => {
            let report = run_timing(a.benchmark, a.points, a.c)?;
            let text = match a.out.format {
                Format::Csv => timing_to_csv(&report)?,
                Format::Json => to_json(&report)?,
            };
            write_output(a.out.output.as_deref(), &text)
        }
    }
}

fn resolve_benchmark(p: &ProblemArgs) -> Result<BenchmarkId, CliError> {
    let id = match (p.benchmark, p.dim) {
        (Some(id), _) => id,
        (None, Some(2)) => BenchmarkId::Ex43,
        (None, Some(1) | None) => BenchmarkId::Ex41,
        (None, Some(d)) => return Err(input(format!("dimension must be 1 or 2, got {d}"))),
    };
    if let Some(d) = p.dim {
        if d != id.dim() {
            return Err(input(format!(
                "{id} is a {}D problem, but --dim {d} was given",
                id.dim()
            )));
        }
    }
    if id.dim() == 2 && p.c != 1.0 {
        return Err(input("the 2D problem has unit diffusivity; drop --c"));
    }
    Ok(id)
}

fn time_grid(t_end: f64, m: Option<usize>, tau: Option<f64>) -> Result<TimeGrid, CliError> {
    Ok(match (m, tau) {
        (Some(m), _) => TimeGrid::new(t_end, m)?,
        (None, Some(tau)) => TimeGrid::from_step(t_end, tau)?,
        (None, None) => return Err(input("give the time step with --tau or --M")),
    })
}

/// Maps parsed `converge` flags onto a study.
pub fn study_config(a: &ConvergeArgs) -> Result<StudyConfig, CliError> {
    let benchmark = resolve_benchmark(&a.problem)?;
    let single = |v: &[f64], name: &str| match v {
        [x] => Ok(*x),
        _ => Err(input(format!(
            "this regime takes exactly one --{name} value"
        ))),
    };
    let none = |v: &[f64], name: &str| {
        if v.is_empty() {
            Ok(())
        } else {
            Err(input(format!("--{name} follows from --h in this regime")))
        }
    };
    let (regime, steps) = match a.regime {
        RegimeKind::FixedTau => (
            Regime::FixedTau {
                tau: single(&a.tau, "tau")?,
            },
            a.h.clone(),
        ),
        RegimeKind::FixedH => (
            Regime::FixedH {
                h: single(&a.h, "h")?,
            },
            a.tau.clone(),
        ),
        RegimeKind::TauEqH => (none(&a.tau, "tau").map(|_| Regime::TauEqH)?, a.h.clone()),
        RegimeKind::TauEqHSquared => (
            none(&a.tau, "tau").map(|_| Regime::TauEqHSquared)?,
            a.h.clone(),
        ),
        RegimeKind::TauEqHOver20 => (
            none(&a.tau, "tau").map(|_| Regime::TauEqHOver20)?,
            a.h.clone(),
        ),
    };
    if a.jobs == 0 {
        return Err(input("--jobs must be at least 1"));
    }
    Ok(StudyConfig {
        benchmark,
        regime,
        steps,
        flags: Flags {
            refine: a.refine,
            gradient: a.gradient,
            extrapolate: a.extrapolate,
        },
        c: a.problem.c,
        t_end: a.problem.t_end,
        jobs: a.jobs,
    })
}

/// One output point of a single solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvePoint {
    pub x: f64,
    pub y: Option<f64>,
    pub kind: String,
    pub value: f64,
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub benchmark: BenchmarkId,
    pub n_cells: usize,
    pub tau: f64,
    pub n_steps: usize,
    pub t_end: f64,
    pub extrapolated: bool,
    pub error_grid: f64,
    pub error_mid: Option<f64>,
    pub error_grad: Option<f64>,
    pub points: Vec<SolvePoint>,
}

fn point(x: f64, y: Option<f64>, kind: &str, value: f64, exact: f64) -> SolvePoint {
    SolvePoint {
        x,
        y,
        kind: kind.to_string(),
        value,
        exact,
    }
}

pub fn solve_report(a: &SolveArgs) -> Result<SolveReport, CliError> {
    let id = resolve_benchmark(&a.problem)?;
    let (c, t) = (a.problem.c, a.problem.t_end);
    let time = time_grid(t, a.m, a.tau)?;
    let mut points = Vec::new();
    let (mut error_mid, mut error_grad) = (None, None);
    let error_grid;
    if id.dim() == 1 {
        let grid = Grid1D::unit(a.n)?;
        let problem = id.problem_1d(c)?;
        let mut u = solve_1d(&problem, grid, time)?;
        if a.extrapolate {
            u = extrapolate_time(&u, &solve_1d(&problem, grid, time.halved())?)?;
        }
        let exact = |x: f64| id.exact_1d(c, x, t);
        error_grid = nodal_error_1d(&u, |x, _| exact(x), t)?;
        for (x, &v) in grid.nodes().zip(u.values()) {
            points.push(point(x, None, "node", v, exact(x)));
        }
        let (g1, g2) = (problem.g1(t), problem.g2(t));
        if a.refine {
            let r = refine_1d(&u, g1, g2)?;
            for (x, v) in r.points() {
                points.push(point(x, None, "mid", v, exact(x)));
            }
            error_mid = Some(max_error(r.points().map(|(x, v)| (v, exact(x)))));
        }
        if a.gradient {
            let p = gradient_1d(&u, g1, g2)?;
            let mut worst = Vec::new();
            for (j, &v) in p.indices().zip(p.values()) {
                let x = grid.node_coordinate(j)?;
                let e = id.exact_dx_1d(c, x, t);
                points.push(point(x, None, "grad", v, e));
                worst.push((v, e));
            }
            error_grad = Some(max_error(worst));
        }
    } else {
        let grid = Grid2D::unit_square(a.n)?;
        let problem = id.problem_2d()?;
        let mut u = solve_2d(&problem, grid, time)?;
        if a.extrapolate {
            u = extrapolate_time(&u, &solve_2d(&problem, grid, time.halved())?)?;
        }
        let exact = |x: f64, y: f64| id.exact_2d(x, y, t);
        error_grid = nodal_error_2d(&u, |x, y, _| exact(x, y), t)?;
        let xs: Vec<f64> = grid.x_axis.nodes().collect();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in xs.iter().enumerate() {
                points.push(point(x, Some(y), "node", u.at(i, j), exact(x, y)));
            }
        }
        if a.refine || a.gradient {
            let (g, r) = refine_2d(&u)?;
            let half = |i: usize| 0.5 * (xs[i] + xs[i + 1]);
            if a.refine {
                let mut centres = Vec::new();
                for (i, j, v) in r.x_mid.iter() {
                    points.push(point(
                        half(i),
                        Some(xs[j]),
                        "x-mid",
                        v,
                        exact(half(i), xs[j]),
                    ));
                }
                for (i, j, v) in r.y_mid.iter() {
                    points.push(point(
                        xs[i],
                        Some(half(j)),
                        "y-mid",
                        v,
                        exact(xs[i], half(j)),
                    ));
                }
                for (i, j, v) in r.centers.iter() {
                    let e = exact(half(i), half(j));
                    points.push(point(half(i), Some(half(j)), "center", v, e));
                    centres.push((v, e));
                }
                error_mid = Some(max_error(centres));
            }
            if a.gradient {
                let mut worst = Vec::new();
                for (i, j, v) in g.k_values.iter() {
                    let e = id.exact_dx_2d(xs[i], xs[j], t);
                    points.push(point(xs[i], Some(xs[j]), "grad-x", v, e));
                    worst.push((v, e));
                }
                for (i, j, v) in g.l_values.iter() {
                    let e = id.exact_dy_2d(xs[i], xs[j], t);
                    points.push(point(xs[i], Some(xs[j]), "grad-y", v, e));
                    worst.push((v, e));
                }
                error_grad = Some(max_error(worst));
            }
        }
    }
    Ok(SolveReport {
        benchmark: id,
        n_cells: a.n,
        tau: time.tau(),
        n_steps: time.n_steps(),
        t_end: t,
        extrapolated: a.extrapolate,
        error_grid,
        error_mid,
        error_grad,
        points,
    })
}

fn solve(a: &SolveArgs) -> Result<String, CliError> {
    let report = solve_report(a)?;
    match a.out.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let two_d = report.benchmark.dim() == 2;
            let mut w = csv::Writer::from_writer(Vec::new());
            if two_d {
                w.write_record(["x", "y", "kind", "value", "exact", "error"])?;
            } else {
                w.write_record(["x", "kind", "value", "exact", "error"])?;
            }
            for p in &report.points {
                let mut rec = vec![format_sci(p.x)];
                if let Some(y) = p.y {
                    rec.push(format_sci(y));
                }
                rec.push(p.kind.clone());
                rec.push(format_sci(p.value));
                rec.push(format_sci(p.exact));
                rec.push(format_sci((p.value - p.exact).abs()));
                w.write_record(&rec)?;
            }
            finish_csv(w)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationReport {
    pub benchmark: BenchmarkId,
    pub variant: ExtrapolationVariant,
    pub h: f64,
    pub tau: f64,
    pub error_coarse: f64,
    pub error_fine: f64,
    pub error_extrapolated: f64,
    /// Refined points of the extrapolated field.
    pub error_mid: Option<f64>,
}

pub fn extrapolation_report(a: &ExtrapolateArgs) -> Result<ExtrapolationReport, CliError> {
    let id = resolve_benchmark(&a.problem)?;
    let (c, t) = (a.problem.c, a.problem.t_end);
    let time = time_grid(t, a.m, a.tau)?;
    let variant = match a.variant {
        VariantArg::Time => ExtrapolationVariant::Time,
        VariantArg::SpaceTime => ExtrapolationVariant::SpaceTime,
    };
    let (fine_cells, fine_time) = match variant {
        ExtrapolationVariant::Time => (a.n, time.halved()),
        ExtrapolationVariant::SpaceTime => (2 * a.n, time.halved().halved()),
    };
    let combine_1d = |coarse: &Field1D, fine: &Field1D| match variant {
        ExtrapolationVariant::Time => extrapolate_time(coarse, fine),
        ExtrapolationVariant::SpaceTime => extrapolate_spacetime(coarse, fine),
    };
    let combine_2d = |coarse: &Field2D, fine: &Field2D| match variant {
        ExtrapolationVariant::Time => extrapolate_time(coarse, fine),
        ExtrapolationVariant::SpaceTime => extrapolate_spacetime(coarse, fine),
    };
    let (error_coarse, error_fine, error_extrapolated, error_mid);
    if id.dim() == 1 {
        let problem = id.problem_1d(c)?;
        let exact = |x: f64, t: f64| id.exact_1d(c, x, t);
        let coarse = solve_1d(&problem, Grid1D::unit(a.n)?, time)?;
        let fine = solve_1d(&problem, Grid1D::unit(fine_cells)?, fine_time)?;
        let e = combine_1d(&coarse, &fine)?;
        error_coarse = nodal_error_1d(&coarse, exact, t)?;
        error_fine = nodal_error_1d(&fine, exact, t)?;
        error_extrapolated = nodal_error_1d(&e, exact, t)?;
        error_mid = if a.refine {
            let r = refine_1d(&e, problem.g1(t), problem.g2(t))?;
            Some(max_error(r.points().map(|(x, v)| (v, exact(x, t)))))
        } else {
            None
        };
    } else {
        let problem = id.problem_2d()?;
        let exact = |x: f64, y: f64, t: f64| id.exact_2d(x, y, t);
        let grid = Grid2D::unit_square(a.n)?;
        let coarse = solve_2d(&problem, grid, time)?;
        let fine = solve_2d(&problem, Grid2D::unit_square(fine_cells)?, fine_time)?;
        let e = combine_2d(&coarse, &fine)?;
        error_coarse = nodal_error_2d(&coarse, exact, t)?;
        error_fine = nodal_error_2d(&fine, exact, t)?;
        error_extrapolated = nodal_error_2d(&e, exact, t)?;
        error_mid = if a.refine {
            let (_, r) = refine_2d(&e)?;
            let half = |i: usize| 0.5 * (grid.x_axis.node(i) + grid.x_axis.node(i + 1));
            Some(max_error(
                r.centers
                    .iter()
                    .map(|(i, j, v)| (v, exact(half(i), half(j), t))),
            ))
        } else {
            None
        };
    }
    Ok(ExtrapolationReport {
        benchmark: id,
        variant,
        h: 1.0 / a.n as f64,
        tau: time.tau(),
        error_coarse,
        error_fine,
        error_extrapolated,
        error_mid,
    })
}

/// Five significant digits with a signed three-digit exponent, `8.3491e-007`.
pub fn format_sci(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:03}", exp.abs())
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| ABSENT.to_string(), format_sci)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn table_to_csv(t: &ConvergenceTable) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CONVERGENCE_HEADER)?;
    for r in &t.rows {
        w.write_record([
            format_sci(r.h),
            format_sci(r.tau),
            format_sci(r.error_grid),
            cell(r.rate_grid),
            cell(r.error_mid),
            cell(r.rate_mid),
            cell(r.error_grad),
            cell(r.rate_grad),
        ])?;
    }
    finish_csv(w)
}

fn extrapolation_to_csv(r: &ExtrapolationReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "variant",
        "h",
        "tau",
        "error_coarse",
        "error_fine",
        "error_extrapolated",
        "error_mid",
    ])?;
    let variant = match r.variant {
        ExtrapolationVariant::Time => "time",
        ExtrapolationVariant::SpaceTime => "space-time",
    };
    w.write_record([
        variant.to_string(),
        format_sci(r.h),
        format_sci(r.tau),
        format_sci(r.error_coarse),
        format_sci(r.error_fine),
        format_sci(r.error_extrapolated),
        cell(r.error_mid),
    ])?;
    finish_csv(w)
}

fn timing_to_csv(r: &TimingReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "path",
        "points",
        "n_cells",
        "h",
        "tau",
        "n_steps",
        "output_points",
        "seconds",
        "error",
        "speedup",
    ])?;
    for (name, p) in [("full", &r.full), ("refined", &r.refined)] {
        w.write_record([
            name.to_string(),
            r.points.to_string(),
            p.n_cells.to_string(),
            format_sci(p.h),
            format_sci(p.tau),
            p.n_steps.to_string(),
            p.output_points.to_string(),
            format_sci(p.seconds),
            format_sci(p.error),
            format_sci(r.speedup),
        ])?;
    }
    finish_csv(w)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path` through a temporary file in the same directory, so a
/// failed run leaves nothing behind; `None` means standard output.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
        }
    }
    Ok(())
}
