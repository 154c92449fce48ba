//! Compact fourth-order Crank-Nicolson scheme for `u_t = c u_xx` on `[a, b]`.
//!
//! Interior rows read
//!
//! ```text
//! (1-s) u^{k+1}_{j-1} + (10+2s) u^{k+1}_j + (1-s) u^{k+1}_{j+1}
//!     = (1+s) u^k_{j-1} + (10-2s) u^k_j + (1+s) u^k_{j+1},   s = 6 c tau / h^2
//! ```
//!
//! and the boundary nodes are prescribed by `g1`, `g2` at every level.

use crate::error::{Error, Result};
use crate::grid::{Field1D, Grid1D, TimeGrid};
use crate::linalg::{Tridiagonal, TridiagonalLu};

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// `u_t = c u_xx`, `u(x, 0) = phi(x)`, `u(a, t) = g1(t)`, `u(b, t) = g2(t)`.
pub struct HeatProblem1D {
    c: f64,
    phi: ScalarFn,
    g1: ScalarFn,
    g2: ScalarFn,
}

impl HeatProblem1D {
    pub fn new(
        c: f64,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::config(format!(
                "diffusivity must be positive, got {c}"
            )));
        }
        Ok(Self {
            c,
            phi: Box::new(phi),
            g1: Box::new(g1),
            g2: Box::new(g2),
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn phi(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    pub fn g1(&self, t: f64) -> f64 {
        (self.g1)(t)
    }

    pub fn g2(&self, t: f64) -> f64 {
        (self.g2)(t)
    }
}

impl std::fmt::Debug for HeatProblem1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeatProblem1D")
            .field("c", &self.c)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub c: f64,
    pub h: f64,
    pub tau: f64,
    /// `6 c tau / h^2`
    pub s: f64,
}

/// Assembled step operator; immutable once built.
#[derive(Debug, Clone)]
pub struct Stepper1D {
    grid: Grid1D,
    params: SchemeParams,
    lhs: Tridiagonal,
    rhs_op: Tridiagonal,
    lu: TridiagonalLu,
}

pub fn assemble_1d(c: f64, grid: Grid1D, tau: f64) -> Result<Stepper1D> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::config(format!(
            "diffusivity must be positive, got {c}"
        )));
    }
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::config(format!(
            "time step must be positive, got {tau}"
        )));
    }
    let h = grid.h();
    let s = 6.0 * c * tau / (h * h);
    let n = grid.n_cells() - 1;
    let lhs = Tridiagonal::symmetric(n, 10.0 + 2.0 * s, 1.0 - s);
    let rhs_op = Tridiagonal::symmetric(n, 10.0 - 2.0 * s, 1.0 + s);
    if !lhs.is_diagonally_dominant() {
        return Err(Error::config(format!(
            "step matrix lost diagonal dominance (s = {s})"
        )));
    }
    let lu = TridiagonalLu::new(&lhs)?;
    Ok(Stepper1D {
        grid,
        params: SchemeParams { c, h, tau, s },
        lhs,
        rhs_op,
        lu,
    })
}

impl Stepper1D {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn lhs(&self) -> &Tridiagonal {
        &self.lhs
    }

    pub fn rhs_op(&self) -> &Tridiagonal {
        &self.rhs_op
    }

    /// Known boundary terms moved to the right-hand side of rows 1 and N-1.
    pub fn boundary_rhs_1d(&self, g1_k: f64, g1_k1: f64, g2_k: f64, g2_k1: f64) -> Vec<f64> {
        let mut f = vec![0.0; self.grid.n_cells() - 1];
        self.add_boundary(&mut f, g1_k, g1_k1, g2_k, g2_k1);
        f
    }

    fn add_boundary(&self, f: &mut [f64], g1_k: f64, g1_k1: f64, g2_k: f64, g2_k1: f64) {
        let s = self.params.s;
        let last = f.len() - 1;
        f[0] += (s - 1.0) * g1_k1 + (s + 1.0) * g1_k;
        f[last] += (s - 1.0) * g2_k1 + (s + 1.0) * g2_k;
    }

    /// Advances `u_k` (at level `k`) by one step.
    pub fn step_1d(&self, u_k: &Field1D, problem: &HeatProblem1D, k: usize) -> Result<Field1D> {
        if !u_k.grid().same_as(&self.grid) {
            return Err(Error::config("field grid does not match the stepper grid"));
        }
        let mut values = u_k.values().to_vec();
        let mut scratch = vec![0.0; self.grid.n_cells() - 1];
        let t1 = (k + 1) as f64 * self.params.tau;
        self.advance(&mut values, &mut scratch, problem, k, t1);
        Field1D::new(self.grid, values, t1)
    }

    /// One step in place. `t1` is the time of the new level.
    fn advance(
        &self,
        u: &mut [f64],
        scratch: &mut [f64],
        problem: &HeatProblem1D,
        k: usize,
        t1: f64,
    ) {
        let t0 = k as f64 * self.params.tau;
        let n = u.len() - 1;
        let (g1_k, g2_k) = (problem.g1(t0), problem.g2(t0));
        let (g1_k1, g2_k1) = (problem.g1(t1), problem.g2(t1));
        self.rhs_op.mul_into(&u[1..n], scratch);
        self.add_boundary(scratch, g1_k, g1_k1, g2_k, g2_k1);
        self.lu.solve_in_place(scratch);
        u[1..n].copy_from_slice(scratch);
        u[0] = g1_k1;
        u[n] = g2_k1;
    }
}

/// Marches from `phi` to `t = T`; the stepper is factored once.
pub fn solve_1d(problem: &HeatProblem1D, grid: Grid1D, time: TimeGrid) -> Result<Field1D> {
    let stepper = assemble_1d(problem.c(), grid, time.tau())?;
    let mut u = Field1D::sample(grid, |x| problem.phi(x))?.into_values();
    u[0] = problem.g1(0.0);
    u[grid.n_cells()] = problem.g2(0.0);
    let mut scratch = vec![0.0; grid.n_cells() - 1];
    for k in 0..time.n_steps() {
        stepper.advance(&mut u, &mut scratch, problem, k, time.time(k + 1));
    }
    Field1D::new(grid, u, time.t_end())
}
