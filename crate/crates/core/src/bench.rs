//! Manufactured-solution problems, error norms, convergence studies and the
//! coarse-plus-refine timing comparison.
//!
//! Problems live on the unit interval / unit square:
//!
//! ```text
//! ex41  u = exp(-c pi^2 t) sin(pi x)
//! ex42  u = exp(x + c t)
//! ex43  u = exp(-2 pi^2 t) sin(pi x) sin(pi y)      (c = 1 only)
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolate::extrapolate_time;
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D, TimeGrid};
use crate::refine1d::{gradient_1d, refine_1d, MIN_CELLS_1D};
use crate::refine2d::{refine_2d, MIN_CELLS_2D};
use crate::solver1d::{solve_1d, HeatProblem1D};
use crate::solver2d::{solve_2d, HeatProblem2D};

/// Relative slack when checking that a step divides the unit length.
const STEP_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkId {
    Ex41,
    Ex42,
    Ex43,
}

impl BenchmarkId {
    pub fn dim(self) -> usize {
        match self {
            BenchmarkId::Ex43 => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkId::Ex41 => "ex41",
            BenchmarkId::Ex42 => "ex42",
            BenchmarkId::Ex43 => "ex43",
        }
    }

    fn require_dim(self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::config(format!(
                "{} is a {}D problem",
                self.name(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn exact_1d(self, c: f64, x: f64, t: f64) -> f64 {
        match self {
            BenchmarkId::Ex41 => (-c * PI * PI * t).exp() * sin_pi(x),
            _ => (x + c * t).exp(),
        }
    }

    pub fn exact_dx_1d(self, c: f64, x: f64, t: f64) -> f64 {
        match self {
            BenchmarkId::Ex41 => (-c * PI * PI * t).exp() * PI * (PI * x).cos(),
            _ => (x + c * t).exp(),
        }
    }

    pub fn problem_1d(self, c: f64) -> Result<HeatProblem1D> {
        self.require_dim(1)?;
        HeatProblem1D::new(
            c,
            move |x| self.exact_1d(c, x, 0.0),
            move |t| self.exact_1d(c, 0.0, t),
            move |t| self.exact_1d(c, 1.0, t),
        )
    }

    pub fn exact_2d(self, x: f64, y: f64, t: f64) -> f64 {
        (-2.0 * PI * PI * t).exp() * sin_pi(x) * sin_pi(y)
    }

    pub fn exact_dx_2d(self, x: f64, y: f64, t: f64) -> f64 {
        (-2.0 * PI * PI * t).exp() * PI * (PI * x).cos() * sin_pi(y)
    }

    pub fn exact_dy_2d(self, x: f64, y: f64, t: f64) -> f64 {
        self.exact_dx_2d(y, x, t)
    }

    pub fn problem_2d(self) -> Result<HeatProblem2D> {
        self.require_dim(2)?;
        Ok(HeatProblem2D::new(
            move |x, y| self.exact_2d(x, y, 0.0),
            move |y, t| self.exact_2d(0.0, y, t),
            move |y, t| self.exact_2d(1.0, y, t),
            move |x, t| self.exact_2d(x, 0.0, t),
            move |x, t| self.exact_2d(x, 1.0, t),
        ))
    }
}

/// `sin(pi x)` evaluated on the nearer half so mirrored nodes agree exactly.
fn sin_pi(x: f64) -> f64 {
    (PI * x.min(1.0 - x)).sin()
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex41" => Ok(BenchmarkId::Ex41),
            "ex42" => Ok(BenchmarkId::Ex42),
            "ex43" => Ok(BenchmarkId::Ex43),
            _ => Err(Error::config(format!(
                "unknown benchmark {s:?} (expected ex41, ex42 or ex43)"
            ))),
        }
    }
}

/// How `tau` follows from each row's step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Regime {
    /// Rows vary `h`; `tau` is fixed.
    FixedTau {
        tau: f64,
    },
    /// Rows vary `tau`; `h` is fixed.
    FixedH {
        h: f64,
    },
    TauEqH,
    TauEqHSquared,
    TauEqHOver20,
}

impl Regime {
    /// `(h, tau)` for a row whose listed step is `step`.
    pub fn row_steps(&self, step: f64) -> (f64, f64) {
        match *self {
            Regime::FixedTau { tau } => (step, tau),
            Regime::FixedH { h } => (h, step),
            Regime::TauEqH => (step, step),
            Regime::TauEqHSquared => (step, step * step),
            Regime::TauEqHOver20 => (step, step / 20.0),
        }
    }

    /// Regimes that shrink `h` and `tau` together report error ratios
    /// rather than log2 rates.
    pub fn reports_ratios(&self) -> bool {
        matches!(
            self,
            Regime::TauEqH | Regime::TauEqHSquared | Regime::TauEqHOver20
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::FixedTau { .. } => "fixed-tau",
            Regime::FixedH { .. } => "fixed-h",
            Regime::TauEqH => "tau=h",
            Regime::TauEqHSquared => "tau=h^2",
            Regime::TauEqHOver20 => "tau=h/20",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub refine: bool,
    pub gradient: bool,
    pub extrapolate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub benchmark: BenchmarkId,
    pub regime: Regime,
    /// `h` per row, or `tau` per row under [`Regime::FixedH`].
    pub steps: Vec<f64>,
    pub flags: Flags,
    pub c: f64,
    pub t_end: f64,
    /// Worker threads for independent rows.
    pub jobs: usize,
}

impl StudyConfig {
    pub fn new(benchmark: BenchmarkId, regime: Regime, steps: Vec<f64>, flags: Flags) -> Self {
        Self {
            benchmark,
            regime,
            steps,
            flags,
            c: 1.0,
            t_end: 1.0,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub tau: f64,
    pub n_cells: usize,
    pub n_steps: usize,
    pub interior_unknowns: usize,
    pub error_grid: f64,
    pub rate_grid: Option<f64>,
    /// Midpoints (1D) or cell centres (2D).
    pub error_mid: Option<f64>,
    pub rate_mid: Option<f64>,
    pub error_grad: Option<f64>,
    pub rate_grad: Option<f64>,
    /// Nodes together with every refined point.
    pub error_all: f64,
    pub rate_all: Option<f64>,
    /// Supplementary: grid error over the exact solution's max magnitude.
    pub relative_grid: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub benchmark: BenchmarkId,
    pub dim: usize,
    pub regime: Regime,
    pub c: f64,
    pub t_end: f64,
    pub extrapolated: bool,
    /// `rate_*` columns hold error ratios instead of log2 rates.
    pub ratios: bool,
    pub rows: Vec<ConvergenceRow>,
}

/// Largest `|numeric - exact|`; NaN anywhere yields NaN.
pub fn max_error(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let mut worst = 0.0f64;
    for (a, b) in pairs {
        let e = (a - b).abs();
        if e.is_nan() {
            return f64::NAN;
        }
        worst = worst.max(e);
    }
    worst
}

fn check_time(level: f64, at_time: f64) -> Result<()> {
    if (level - at_time).abs() > 1e-12 * at_time.abs().max(1.0) {
        return Err(Error::config(format!(
            "field is at t = {level}, not t = {at_time}"
        )));
    }
    Ok(())
}

/// Nodal max-norm error of a 1D field against `exact(x, t)`.
pub fn nodal_error_1d(u: &Field1D, exact: impl Fn(f64, f64) -> f64, at_time: f64) -> Result<f64> {
    check_time(u.time_level(), at_time)?;
    Ok(max_error(
        u.grid()
            .nodes()
            .zip(u.values())
            .map(|(x, &v)| (v, exact(x, at_time))),
    ))
}

/// Nodal max-norm error of a 2D field against `exact(x, y, t)`.
pub fn nodal_error_2d(
    u: &Field2D,
    exact: impl Fn(f64, f64, f64) -> f64,
    at_time: f64,
) -> Result<f64> {
    check_time(u.time_level(), at_time)?;
    let g = u.grid();
    let xs: Vec<f64> = g.x_axis.nodes().collect();
    let ys: Vec<f64> = g.y_axis.nodes().collect();
    let exact = &exact;
    Ok(max_error(xs.iter().enumerate().flat_map(|(i, &x)| {
        ys.iter()
            .enumerate()
            .map(move |(j, &y)| (u.at(i, j), exact(x, y, at_time)))
    })))
}

/// `log2(e_coarse / e_fine)`; `None` when either error is not positive.
pub fn observed_rate(e_coarse: f64, e_fine: f64) -> Option<f64> {
    error_ratio(e_coarse, e_fine).map(f64::log2)
}

pub fn error_ratio(e_coarse: f64, e_fine: f64) -> Option<f64> {
    let ok = |e: f64| e.is_finite() && e > 0.0;
    (ok(e_coarse) && ok(e_fine)).then(|| e_coarse / e_fine)
}

/// Cell count for step `h` on the unit length.
pub fn cells_for(h: f64) -> Result<usize> {
    if !h.is_finite() || h <= 0.0 || h > 1.0 {
        return Err(Error::config(format!(
            "space step must lie in (0, 1], got {h}"
        )));
    }
    let n = (1.0 / h).round();
    if (n * h - 1.0).abs() > STEP_MATCH {
        return Err(Error::config(format!(
            "space step {h} does not divide [0, 1]"
        )));
    }
    Ok(n as usize)
}

fn check_halving(steps: &[f64]) -> Result<()> {
    if steps.is_empty() {
        return Err(Error::config("a convergence study needs at least one row"));
    }
    for w in steps.windows(2) {
        if (w[0] / w[1] - 2.0).abs() > STEP_MATCH {
            return Err(Error::config(format!(
                "steps must halve row to row, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

struct RowErrors {
    grid: f64,
    mid: Option<f64>,
    grad: Option<f64>,
    all: f64,
    scale: f64,
    n_cells: usize,
    n_steps: usize,
    interior: usize,
}

fn errors_1d(cfg: &StudyConfig, h: f64, tau: f64) -> Result<RowErrors> {
    let id = cfg.benchmark;
    let (c, t) = (cfg.c, cfg.t_end);
    let n = cells_for(h)?;
    let grid = Grid1D::unit(n)?;
    let time = TimeGrid::from_step(t, tau)?;
    let problem = id.problem_1d(c)?;
    let mut u = solve_1d(&problem, grid, time)?;
    if cfg.flags.extrapolate {
        let fine = solve_1d(&problem, grid, time.halved())?;
        u = extrapolate_time(&u, &fine)?;
    }
    let exact = |x: f64, t: f64| id.exact_1d(c, x, t);
    let grid_err = nodal_error_1d(&u, exact, t)?;
    let (g1, g2) = (problem.g1(t), problem.g2(t));
    let big_enough = n >= MIN_CELLS_1D;
    let mid = if cfg.flags.refine && big_enough {
        let r = refine_1d(&u, g1, g2)?;
        Some(max_error(r.points().map(|(x, v)| (v, exact(x, t)))))
    } else {
        None
    };
    let grad = if cfg.flags.gradient && big_enough {
        let p = gradient_1d(&u, g1, g2)?;
        Some(max_error(
            p.indices()
                .zip(p.values())
                .map(|(j, &v)| (v, id.exact_dx_1d(c, grid.node(j), t))),
        ))
    } else {
        None
    };
    let scale = grid.nodes().map(|x| exact(x, t).abs()).fold(0.0, f64::max);
    Ok(RowErrors {
        grid: grid_err,
        mid,
        grad,
        all: grid_err.max(mid.unwrap_or(0.0)),
        scale,
        n_cells: n,
        n_steps: time.n_steps(),
        interior: n - 1,
    })
}

fn errors_2d(cfg: &StudyConfig, h: f64, tau: f64) -> Result<RowErrors> {
    let id = cfg.benchmark;
    if cfg.c != 1.0 {
        return Err(Error::config("the 2D problem has unit diffusivity"));
    }
    let t = cfg.t_end;
    let n = cells_for(h)?;
    let grid = Grid2D::unit_square(n)?;
    let time = TimeGrid::from_step(t, tau)?;
    let problem = id.problem_2d()?;
    let mut u = solve_2d(&problem, grid, time)?;
    if cfg.flags.extrapolate {
        let fine = solve_2d(&problem, grid, time.halved())?;
        u = extrapolate_time(&u, &fine)?;
    }
    let exact = |x: f64, y: f64| id.exact_2d(x, y, t);
    let grid_err = nodal_error_2d(&u, |x, y, _| exact(x, y), t)?;
    let node = |i: usize| grid.x_axis.node(i);
    let half = |i: usize| 0.5 * (node(i) + node(i + 1));
    let wants_refined = cfg.flags.refine || cfg.flags.gradient;
    let (mid, grad, all) = if wants_refined && n >= MIN_CELLS_2D {
        let (g, r) = refine_2d(&u)?;
        let centers = max_error(
            r.centers
                .iter()
                .map(|(i, j, v)| (v, exact(half(i), half(j)))),
        );
        let edges = max_error(
            r.x_mid
                .iter()
                .map(|(i, j, v)| (v, exact(half(i), node(j))))
                .chain(r.y_mid.iter().map(|(i, j, v)| (v, exact(node(i), half(j))))),
        );
        let grad = max_error(
            g.k_values
                .iter()
                .map(|(i, j, v)| (v, id.exact_dx_2d(node(i), node(j), t)))
                .chain(
                    g.l_values
                        .iter()
                        .map(|(i, j, v)| (v, id.exact_dy_2d(node(i), node(j), t))),
                ),
        );
        let all = grid_err.max(centers).max(edges);
        (
            cfg.flags.refine.then_some(centers),
            cfg.flags.gradient.then_some(grad),
            if cfg.flags.refine { all } else { grid_err },
        )
    } else {
        (None, None, grid_err)
    };
    let mut scale = 0.0f64;
    for i in 0..=n {
        for j in 0..=n {
            scale = scale.max(exact(node(i), node(j)).abs());
        }
    }
    Ok(RowErrors {
        grid: grid_err,
        mid,
        grad,
        all,
        scale,
        n_cells: n,
        n_steps: time.n_steps(),
        interior: (n - 1) * (n - 1),
    })
}

fn row_errors(cfg: &StudyConfig, step: f64) -> Result<RowErrors> {
    let (h, tau) = cfg.regime.row_steps(step);
    match cfg.benchmark.dim() {
        1 => errors_1d(cfg, h, tau),
        _ => errors_2d(cfg, h, tau),
    }
}

pub fn run_convergence(cfg: &StudyConfig) -> Result<ConvergenceTable> {
    check_halving(&cfg.steps)?;
    if !cfg.c.is_finite() || cfg.c <= 0.0 {
        return Err(Error::config(format!(
            "diffusivity must be positive, got {}",
            cfg.c
        )));
    }
    let jobs = cfg.jobs.max(1).min(cfg.steps.len());
    let results: Vec<Result<RowErrors>> = if jobs == 1 {
        cfg.steps.iter().map(|&s| row_errors(cfg, s)).collect()
    } else {
        let mut slots: Vec<Option<Result<RowErrors>>> =
            (0..cfg.steps.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|w| {
                    scope.spawn(move || {
                        (w..cfg.steps.len())
                            .step_by(jobs)
                            .map(|k| (k, row_errors(cfg, cfg.steps[k])))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (k, r) in h.join().expect("convergence worker panicked") {
                    slots[k] = Some(r);
                }
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every row computed"))
            .collect()
    };
    let errors = results.into_iter().collect::<Result<Vec<_>>>()?;

    let ratios = cfg.regime.reports_ratios();
    let trend = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) if ratios => error_ratio(a, b),
        (Some(a), Some(b)) => observed_rate(a, b),
        _ => None,
    };
    let rows = errors
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (h, tau) = cfg.regime.row_steps(cfg.steps[k]);
            let next = errors.get(k + 1);
            ConvergenceRow {
                h,
                tau,
                n_cells: e.n_cells,
                n_steps: e.n_steps,
                interior_unknowns: e.interior,
                error_grid: e.grid,
                rate_grid: trend(Some(e.grid), next.map(|n| n.grid)),
                error_mid: e.mid,
                rate_mid: trend(e.mid, next.and_then(|n| n.mid)),
                error_grad: e.grad,
                rate_grad: trend(e.grad, next.and_then(|n| n.grad)),
                error_all: e.all,
                rate_all: trend(Some(e.all), next.map(|n| n.all)),
                relative_grid: (e.scale > 0.0).then(|| e.grid / e.scale),
            }
        })
        .collect();
    Ok(ConvergenceTable {
        benchmark: cfg.benchmark,
        dim: cfg.benchmark.dim(),
        regime: cfg.regime,
        c: cfg.c,
        t_end: cfg.t_end,
        extrapolated: cfg.flags.extrapolate,
        ratios,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTiming {
    pub n_cells: usize,
    pub h: f64,
    pub tau: f64,
    pub n_steps: usize,
    /// Points at which the path reports values.
    pub output_points: usize,
    /// Median wall time of the solve (and refinement), seconds.
    pub seconds: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub benchmark: BenchmarkId,
    pub points: usize,
    pub full: PathTiming,
    pub refined: PathTiming,
    /// `full.seconds / refined.seconds`.
    pub speedup: f64,
}

const TIMING_RUNS: usize = 3;

fn median_seconds(mut run: impl FnMut() -> Result<f64>) -> Result<(f64, f64)> {
    let mut times = Vec::with_capacity(TIMING_RUNS);
    let mut error = 0.0;
    for _ in 0..TIMING_RUNS {
        let start = Instant::now();
        error = run()?;
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok((times[TIMING_RUNS / 2], error))
}

/// Wall time for `points` output points per axis: compact solve on `N = points + 1`
/// cells versus a compact solve on `N = (points + 1)/2` cells followed by midpoint
/// refinement, both with `tau = h^2` up to `T = 1`.
///
/// Only the solve and refinement are timed; errors are evaluated after.
pub fn run_timing(benchmark: BenchmarkId, points: usize, c: f64) -> Result<TimingReport> {
    if points < 7 || points.is_multiple_of(2) {
        return Err(Error::config(format!(
            "matched output points must be odd and at least 7, got {points}"
        )));
    }
    let full_cells = points + 1;
    let coarse_cells = points.div_ceil(2);
    let t_end = 1.0;
    let path = |n: usize, refine: bool| -> Result<PathTiming> {
        let h = 1.0 / n as f64;
        let tau = h * h;
        let time = TimeGrid::new(t_end, n * n)?;
        let (seconds, error, output_points) = match benchmark.dim() {
            1 => {
                let problem = benchmark.problem_1d(c)?;
                let grid = Grid1D::unit(n)?;
                let exact = |x: f64| benchmark.exact_1d(c, x, t_end);
                let mut solved = None;
                let (secs, _) = median_seconds(|| {
                    let u = solve_1d(&problem, grid, time)?;
                    let r = if refine {
                        Some(refine_1d(&u, problem.g1(t_end), problem.g2(t_end))?)
                    } else {
                        None
                    };
                    solved = Some((u, r));
                    Ok(0.0)
                })?;
                let (u, r) = solved.expect("timed run stored its result");
                let mut err = nodal_error_1d(&u, |x, _| exact(x), t_end)?;
                let mut pts = n + 1;
                if let Some(r) = r {
                    err = err.max(max_error(r.points().map(|(x, v)| (v, exact(x)))));
                    pts += r.mid_values().len();
                }
                (secs, err, pts)
            }
            _ => {
                if c != 1.0 {
                    return Err(Error::config("the 2D problem has unit diffusivity"));
                }
                let problem = benchmark.problem_2d()?;
                let grid = Grid2D::unit_square(n)?;
                let mut solved = None;
                let (secs, _) = median_seconds(|| {
                    let u = solve_2d(&problem, grid, time)?;
                    let r = if refine { Some(refine_2d(&u)?.1) } else { None };
                    solved = Some((u, r));
                    Ok(0.0)
                })?;
                let (u, r) = solved.expect("timed run stored its result");
                let exact = |x: f64, y: f64| benchmark.exact_2d(x, y, t_end);
                let mut err = nodal_error_2d(&u, |x, y, _| exact(x, y), t_end)?;
                let mut pts = (n + 1) * (n + 1);
                if let Some(r) = r {
                    let node = |i: usize| grid.x_axis.node(i);
                    let half = |i: usize| 0.5 * (node(i) + node(i + 1));
                    err = err
                        .max(max_error(
                            r.x_mid.iter().map(|(i, j, v)| (v, exact(half(i), node(j)))),
                        ))
                        .max(max_error(
                            r.y_mid.iter().map(|(i, j, v)| (v, exact(node(i), half(j)))),
                        ))
                        .max(max_error(
                            r.centers
                                .iter()
                                .map(|(i, j, v)| (v, exact(half(i), half(j)))),
                        ));
                    pts += r.x_mid.len() + r.y_mid.len() + r.centers.len();
                }
                (secs, err, pts)
            }
        };
        Ok(PathTiming {
            n_cells: n,
            h,
            tau,
            n_steps: time.n_steps(),
            output_points,
            seconds,
            error,
        })
    };
    let full = path(full_cells, false)?;
    let refined = path(coarse_cells, true)?;
    let speedup = full.seconds / refined.seconds;
    Ok(TimingReport {
        benchmark,
        points,
        full,
        refined,
        speedup,
    })
}
