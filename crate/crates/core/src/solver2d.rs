//! Compact fourth-order Crank-Nicolson scheme for `u_t = u_xx + u_yy` on a
//! square mesh.
//!
//! With `r = tau / (2h^2)` the scheme couples the nine-point neighbourhood:
//!
//! ```text
//!             new level            old level
//! centre      (2+10r)/3            (2-10r)/3
//! edge        (1-8r)/12            (1+8r)/12
//! corner      -r/6                 r/6
//! ```
//!
//! Interior unknowns are stacked in y-rows, `x` running fastest, so the step
//! matrix is block tridiagonal: `A1` on the diagonal and `-B1` beside it,
//! with `A2` / `+B2` on the old level.

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D, TimeGrid};
use crate::linalg::{BlockLu, BlockTridiagonal, Tridiagonal};

type EdgeFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `u_t = u_xx + u_yy` on `[a, b] x [c, d]` with `u = phi` at `t = 0` and
/// `g1 .. g4` on `x = a`, `x = b`, `y = c`, `y = d`.
///
/// `g1`, `g2` take `(y, t)`; `g3`, `g4` take `(x, t)`.
pub struct HeatProblem2D {
    phi: EdgeFn,
    g1: EdgeFn,
    g2: EdgeFn,
    g3: EdgeFn,
    g4: EdgeFn,
}

impl HeatProblem2D {
    pub fn new(
        phi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        g1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        g2: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        g3: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        g4: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            phi: Box::new(phi),
            g1: Box::new(g1),
            g2: Box::new(g2),
            g3: Box::new(g3),
            g4: Box::new(g4),
        }
    }

    pub fn phi(&self, x: f64, y: f64) -> f64 {
        (self.phi)(x, y)
    }

    pub fn g1(&self, y: f64, t: f64) -> f64 {
        (self.g1)(y, t)
    }

    pub fn g2(&self, y: f64, t: f64) -> f64 {
        (self.g2)(y, t)
    }

    pub fn g3(&self, x: f64, t: f64) -> f64 {
        (self.g3)(x, t)
    }

    pub fn g4(&self, x: f64, t: f64) -> f64 {
        (self.g4)(x, t)
    }

    /// Boundary values of all four edges at time `t`.
    pub fn edges(&self, grid: &Grid2D, t: f64) -> EdgeSamples {
        let ys: Vec<f64> = grid.y_axis.nodes().collect();
        let xs: Vec<f64> = grid.x_axis.nodes().collect();
        EdgeSamples {
            left: ys.iter().map(|&y| self.g1(y, t)).collect(),
            right: ys.iter().map(|&y| self.g2(y, t)).collect(),
            bottom: xs.iter().map(|&x| self.g3(x, t)).collect(),
            top: xs.iter().map(|&x| self.g4(x, t)).collect(),
        }
    }
}

impl std::fmt::Debug for HeatProblem2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeatProblem2D").finish_non_exhaustive()
    }
}

/// Boundary values at one time level. `left`/`right` run over `j = 0..=N`
/// and own the corners; `bottom`/`top` run over `i = 0..=N` but only their
/// interior entries are read.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
}

impl EdgeSamples {
    pub fn constant(n_cells: usize, v: f64) -> Self {
        let e = vec![v; n_cells + 1];
        Self {
            left: e.clone(),
            right: e.clone(),
            bottom: e.clone(),
            top: e,
        }
    }

    /// Boundary node `(i, j)`; corners come from the left/right edges.
    fn at(&self, n: usize, i: usize, j: usize) -> f64 {
        if i == 0 {
            self.left[j]
        } else if i == n {
            self.right[j]
        } else if j == 0 {
            self.bottom[i]
        } else {
            debug_assert_eq!(j, n);
            self.top[i]
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        for e in [&self.left, &self.right, &self.bottom, &self.top] {
            if e.len() != n + 1 {
                return Err(Error::Dimension {
                    expected: n + 1,
                    got: e.len(),
                });
            }
        }
        Ok(())
    }
}

/// Per-neighbour weights of the nine-point stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilWeights {
    pub centre: f64,
    pub edge: f64,
    pub corner: f64,
}

#[derive(Debug, Clone)]
pub struct Stepper2D {
    grid: Grid2D,
    tau: f64,
    r: f64,
    lhs: BlockTridiagonal,
    rhs_op: BlockTridiagonal,
    lu: BlockLu,
}

pub fn assemble_2d(grid: Grid2D, tau: f64) -> Result<Stepper2D> {
    if !grid.is_square() {
        return Err(Error::config(
            "2D scheme needs equal cell counts and spacings on both axes",
        ));
    }
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::config(format!(
            "time step must be positive, got {tau}"
        )));
    }
    let h = grid.x_axis.h();
    let n = grid.x_axis.n_cells() - 1;
    let r = tau / (2.0 * h * h);
    let a1 = Tridiagonal::symmetric(n, (2.0 + 10.0 * r) / 3.0, (1.0 - 8.0 * r) / 12.0);
    let a2 = Tridiagonal::symmetric(n, (2.0 - 10.0 * r) / 3.0, (1.0 + 8.0 * r) / 12.0);
    let b1 = Tridiagonal::symmetric(n, (8.0 * r - 1.0) / 12.0, r / 6.0);
    let b2 = Tridiagonal::symmetric(n, (8.0 * r + 1.0) / 12.0, r / 6.0);
    let lhs = BlockTridiagonal::new(a1, b1, n, -1.0)?;
    let rhs_op = BlockTridiagonal::new(a2, b2, n, 1.0)?;
    let lu = BlockLu::new(&lhs)?;
    Ok(Stepper2D {
        grid,
        tau,
        r,
        lhs,
        rhs_op,
        lu,
    })
}

impl Stepper2D {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn lhs(&self) -> &BlockTridiagonal {
        &self.lhs
    }

    pub fn rhs_op(&self) -> &BlockTridiagonal {
        &self.rhs_op
    }

    /// Interior unknowns per axis, `N - 1`.
    pub fn n(&self) -> usize {
        self.grid.x_axis.n_cells() - 1
    }

    pub fn new_level_weights(&self) -> StencilWeights {
        let r = self.r;
        StencilWeights {
            centre: (2.0 + 10.0 * r) / 3.0,
            edge: (1.0 - 8.0 * r) / 12.0,
            corner: -r / 6.0,
        }
    }

    pub fn old_level_weights(&self) -> StencilWeights {
        let r = self.r;
        StencilWeights {
            centre: (2.0 - 10.0 * r) / 3.0,
            edge: (1.0 + 8.0 * r) / 12.0,
            corner: r / 6.0,
        }
    }

    /// Known boundary terms of every interior row, in stacked order.
    pub fn boundary_rhs_2d(&self, old: &EdgeSamples, new: &EdgeSamples) -> Result<Vec<f64>> {
        let cells = self.n() + 1;
        old.check(cells)?;
        new.check(cells)?;
        let mut f = vec![0.0; self.n() * self.n()];
        self.add_boundary(&mut f, old, new);
        Ok(f)
    }

    fn add_boundary(&self, f: &mut [f64], old: &EdgeSamples, new: &EdgeSamples) {
        let n = self.n();
        let cells = n + 1;
        let edge_new = (8.0 * self.r - 1.0) / 12.0;
        let edge_old = (8.0 * self.r + 1.0) / 12.0;
        let corner = self.r / 6.0;
        let on_edge = |i: usize, j: usize| i == 0 || j == 0 || i == cells || j == cells;
        for j in 1..=n {
            for i in 1..=n {
                let mut acc = 0.0;
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (bi, bj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                        if !on_edge(bi, bj) {
                            continue;
                        }
                        let (wn, wo) = if di == 0 || dj == 0 {
                            (edge_new, edge_old)
                        } else {
                            (corner, corner)
                        };
                        acc += wn * new.at(cells, bi, bj) + wo * old.at(cells, bi, bj);
                    }
                }
                f[(j - 1) * n + (i - 1)] += acc;
            }
        }
    }

    /// Advances `u_k` (at level `k`) by one step.
    pub fn step_2d(&self, u_k: &Field2D, problem: &HeatProblem2D, k: usize) -> Result<Field2D> {
        if !u_k.grid().same_as(&self.grid) {
            return Err(Error::config("field grid does not match the stepper grid"));
        }
        let mut values = u_k.values().to_vec();
        let mut work = Work::new(self.n());
        let t0 = k as f64 * self.tau;
        let t1 = (k + 1) as f64 * self.tau;
        self.advance(&mut values, &mut work, problem, t0, t1);
        Field2D::new(self.grid, values, t1)
    }

    fn advance(&self, u: &mut [f64], work: &mut Work, problem: &HeatProblem2D, t0: f64, t1: f64) {
        let n = self.n();
        let stride = n + 2;
        let old = problem.edges(&self.grid, t0);
        let new = problem.edges(&self.grid, t1);
        for j in 1..=n {
            for i in 1..=n {
                work.interior[(j - 1) * n + (i - 1)] = u[i * stride + j];
            }
        }
        self.rhs_op.mul_into(&work.interior, &mut work.rhs);
        self.add_boundary(&mut work.rhs, &old, &new);
        self.lu.solve_in_place(&mut work.rhs, &mut work.block);
        for j in 1..=n {
            for i in 1..=n {
                u[i * stride + j] = work.rhs[(j - 1) * n + (i - 1)];
            }
        }
        write_edges(u, n + 1, &new);
    }
}

struct Work {
    interior: Vec<f64>,
    rhs: Vec<f64>,
    block: Vec<f64>,
}

impl Work {
    fn new(n: usize) -> Self {
        Self {
            interior: vec![0.0; n * n],
            rhs: vec![0.0; n * n],
            block: vec![0.0; n],
        }
    }
}

fn write_edges(u: &mut [f64], cells: usize, e: &EdgeSamples) {
    let stride = cells + 1;
    for i in 1..cells {
        u[i * stride] = e.bottom[i];
        u[i * stride + cells] = e.top[i];
    }
    for j in 0..=cells {
        u[j] = e.left[j];
        u[cells * stride + j] = e.right[j];
    }
}

/// Marches from `phi` to `t = T`; the step matrix is factored once.
pub fn solve_2d(problem: &HeatProblem2D, grid: Grid2D, time: TimeGrid) -> Result<Field2D> {
    let stepper = assemble_2d(grid, time.tau())?;
    let mut u = Field2D::sample(grid, |x, y| problem.phi(x, y))?.into_values();
    write_edges(&mut u, grid.x_axis.n_cells(), &problem.edges(&grid, 0.0));
    let mut work = Work::new(stepper.n());
    for k in 0..time.n_steps() {
        stepper.advance(&mut u, &mut work, problem, time.time(k), time.time(k + 1));
    }
    Field2D::new(grid, u, time.t_end())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::linalg::{dense_solve, DenseMatrix};
    use std::f64::consts::PI;

    fn ex43() -> HeatProblem2D {
        let s = |x: f64| (PI * x.min(1.0 - x)).sin();
        HeatProblem2D::new(
            move |x, y| s(x) * s(y),
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
    }

    fn weights_for(r: f64) -> (StencilWeights, StencilWeights) {
        let st = assemble_2d(Grid2D::unit_square(4).unwrap(), 2.0 * r / 16.0).unwrap();
        (st.new_level_weights(), st.old_level_weights())
    }

    /// Full `(N+1)^2` node system with the boundary rows pinned to their
    /// values, built straight from the nine-point stencil and solved densely.
    fn pinned_oracle_step(u: &Field2D, r: f64, new: &EdgeSamples) -> Vec<f64> {
        let cells = u.grid().x_axis.n_cells();
        let stride = cells + 1;
        let total = stride * stride;
        let (wn, wo) = weights_for(r);
        let mut a = vec![vec![0.0; total]; total];
        let mut rhs = vec![0.0; total];
        for i in 0..=cells {
            for j in 0..=cells {
                let row = i * stride + j;
                if i == 0 || j == 0 || i == cells || j == cells {
                    a[row][row] = 1.0;
                    rhs[row] = new.at(cells, i, j);
                    continue;
                }
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let col = ((i as i64 + di) as usize) * stride + (j as i64 + dj) as usize;
                        let pick = |w: StencilWeights| match di.abs() + dj.abs() {
                            0 => w.centre,
                            1 => w.edge,
                            _ => w.corner,
                        };
                        a[row][col] = pick(wn);
                        rhs[row] += pick(wo) * u.values()[col];
                    }
                }
            }
        }
        dense_solve(&DenseMatrix::from_rows(&a).unwrap(), &rhs).unwrap()
    }

    #[test]
    fn block_coefficients() {
        let st = assemble_2d(Grid2D::unit_square(4).unwrap(), 2.0 * 0.125 / 16.0).unwrap();
        assert_eq!(st.r(), 0.125);
        let b1 = st.lhs().off_block();
        assert_eq!(b1.diag()[0], 0.0);
        assert!((b1.upper()[0] - 1.0 / 48.0).abs() < 1e-17);
        assert_eq!(st.lhs().sign_off(), -1.0);

        let st = assemble_2d(Grid2D::unit_square(4).unwrap(), 2.0 * 0.1 / 16.0).unwrap();
        let a1 = st.lhs().diag_block();
        assert!((a1.diag()[1] - 1.0).abs() < 1e-15);
        assert!((a1.lower()[0] - 1.0 / 60.0).abs() < 1e-15);
        let a2 = st.rhs_op().diag_block();
        assert!((a2.diag()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((st.rhs_op().off_block().diag()[0] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn non_square_rejected() {
        let g = Grid2D::new(Grid1D::unit(4).unwrap(), Grid1D::unit(5).unwrap());
        assert!(matches!(assemble_2d(g, 1e-3), Err(Error::Config(_))));
        let g = Grid2D::new(Grid1D::unit(4).unwrap(), Grid1D::new(0.0, 2.0, 4).unwrap());
        assert!(assemble_2d(g, 1e-3).is_err());
        assert!(assemble_2d(Grid2D::unit_square(4).unwrap(), 0.0).is_err());
    }

    #[test]
    fn lhs_matches_stencil_expansion() {
        let cells = 5;
        let st = assemble_2d(Grid2D::unit_square(cells).unwrap(), 2.0 * 0.1 / 25.0).unwrap();
        assert!((st.r() - 0.1).abs() < 1e-15);
        let w = st.new_level_weights();
        let n = cells - 1;
        let dense = st.lhs().to_dense();
        assert_eq!(dense.rows(), 16);
        for j in 1..=n {
            for i in 1..=n {
                let row = (j - 1) * n + (i - 1);
                for jj in 1..=n {
                    for ii in 1..=n {
                        let col = (jj - 1) * n + (ii - 1);
                        let d = (ii as i64 - i as i64).abs() + (jj as i64 - j as i64).abs();
                        let cheb = (ii as i64 - i as i64)
                            .abs()
                            .max((jj as i64 - j as i64).abs());
                        let want = match (cheb, d) {
                            (0, _) => w.centre,
                            (1, 1) => w.edge,
                            (1, 2) => w.corner,
                            _ => 0.0,
                        };
                        assert!((dense[(row, col)] - want).abs() < 1e-15, "({row},{col})");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_boundary_gives_zero_vector() {
        let st = assemble_2d(Grid2D::unit_square(6).unwrap(), 1e-3).unwrap();
        let z = EdgeSamples::constant(6, 0.0);
        assert!(st
            .boundary_rhs_2d(&z, &z)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let short = EdgeSamples::constant(5, 0.0);
        assert!(st.boundary_rhs_2d(&short, &z).is_err());
    }

    #[test]
    fn single_corner_adjacent_sample() {
        let cells = 5;
        let st = assemble_2d(Grid2D::unit_square(cells).unwrap(), 2.0 * 0.1 / 25.0).unwrap();
        let z = EdgeSamples::constant(cells, 0.0);
        // u_{0,2} at the new level touches interior nodes (1,1), (1,2), (1,3)
        let mut new = z.clone();
        new.left[2] = 1.0;
        let f = st.boundary_rhs_2d(&z, &new).unwrap();
        let n = cells - 1;
        let r = st.r();
        for (idx, &v) in f.iter().enumerate() {
            let (i, j) = (idx % n + 1, idx / n + 1);
            let want = match (i, j) {
                (1, 2) => (8.0 * r - 1.0) / 12.0,
                (1, 1) | (1, 3) => r / 6.0,
                _ => 0.0,
            };
            assert!((v - want).abs() < 1e-16, "({i},{j}) {v} {want}");
        }
        // a corner node is read from the left edge only
        let mut new = z.clone();
        new.bottom[0] = 7.0;
        assert!(st
            .boundary_rhs_2d(&z, &new)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        new.left[0] = 1.0;
        let f = st.boundary_rhs_2d(&z, &new).unwrap();
        assert!((f[0] - r / 6.0).abs() < 1e-16);
        assert_eq!(f.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn constant_state_preserved() {
        let v = 2.75;
        let p = HeatProblem2D::new(
            move |_, _| v,
            move |_, _| v,
            move |_, _| v,
            move |_, _| v,
            move |_, _| v,
        );
        let grid = Grid2D::unit_square(7).unwrap();
        let st = assemble_2d(grid, 0.01).unwrap();
        let u = Field2D::sample(grid, |_, _| v).unwrap();
        let next = st.step_2d(&u, &p, 0).unwrap();
        assert!(next.values().iter().all(|&w| (w - v).abs() <= 1e-12));
    }

    #[test]
    fn bilinear_steady_state() {
        let f = |x: f64, y: f64| x * y;
        let p = HeatProblem2D::new(f, |y, _| 0.0 * y, |y, _| y, |x, _| 0.0 * x, |x, _| x);
        let grid = Grid2D::unit_square(8).unwrap();
        let u = solve_2d(&p, grid, TimeGrid::new(0.5, 50).unwrap()).unwrap();
        for i in 0..=8 {
            for j in 0..=8 {
                let (x, y) = (i as f64 / 8.0, j as f64 / 8.0);
                assert!((u.at(i, j) - f(x, y)).abs() <= 1e-12);
            }
        }
        assert_eq!(u.time_level(), 0.5);
    }

    #[test]
    fn zero_stays_zero() {
        let p = HeatProblem2D::new(|_, _| 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0);
        let u = solve_2d(
            &p,
            Grid2D::unit_square(5).unwrap(),
            TimeGrid::new(0.1, 10).unwrap(),
        )
        .unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_step_matches_dense_oracle() {
        for cells in [4, 5] {
            let grid = Grid2D::unit_square(cells).unwrap();
            let st = assemble_2d(grid, 1e-3).unwrap();
            let p = ex43();
            let u0 = Field2D::sample(grid, |x, y| p.phi(x, y)).unwrap();
            let got = st.step_2d(&u0, &p, 0).unwrap();
            let want = pinned_oracle_step(&u0, st.r(), &p.edges(&grid, 1e-3));
            for (a, b) in got.values().iter().zip(&want) {
                assert!((a - b).abs() <= 1e-14, "{a} {b}");
            }
        }
    }

    #[test]
    fn inhomogeneous_boundary_matches_dense_oracle() {
        let g = |x: f64, y: f64, t: f64| (x + 2.0 * y + t).exp();
        let p = HeatProblem2D::new(
            move |x, y| g(x, y, 0.0) + (3.0 * x).sin() * y,
            move |y, t| g(0.0, y, t),
            move |y, t| g(1.0, y, t),
            move |x, t| g(x, 0.0, t) + 0.5 * x * t,
            move |x, t| g(x, 1.0, t) - t,
        );
        let grid = Grid2D::unit_square(5).unwrap();
        let st = assemble_2d(grid, 0.02).unwrap();
        let mut u = Field2D::sample(grid, |x, y| p.phi(x, y)).unwrap();
        let mut vals = u.values().to_vec();
        write_edges(&mut vals, 5, &p.edges(&grid, 0.0));
        u = Field2D::new(grid, vals, 0.0).unwrap();
        let got = st.step_2d(&u, &p, 0).unwrap();
        let want = pinned_oracle_step(&u, st.r(), &p.edges(&grid, 0.02));
        for (a, b) in got.values().iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn transpose_symmetry() {
        let grid = Grid2D::unit_square(8).unwrap();
        let st = assemble_2d(grid, 1e-3).unwrap();
        let p = ex43();
        let mut u = Field2D::sample(grid, |x, y| p.phi(x, y)).unwrap();
        for k in 0..50 {
            u = st.step_2d(&u, &p, k).unwrap();
            for i in 0..=8 {
                for j in 0..=8 {
                    assert!((u.at(i, j) - u.at(j, i)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn decays_like_the_exact_mode() {
        let grid = Grid2D::unit_square(8).unwrap();
        let u = solve_2d(&ex43(), grid, TimeGrid::new(0.1, 100).unwrap()).unwrap();
        let exact = (-2.0 * PI * PI * 0.1f64).exp();
        let err = (u.at(4, 4) - exact).abs();
        assert!(err < 1e-4, "{err}");
    }
}
