//! Uniform space/time meshes and the grid functions that live on them.
//!
//! Node `i` of a [`Grid1D`] sits at `a + i*h` for `i = 0..=N`. Two-dimensional
//! fields are stored row-major with the **x index as the row**: value `(i, j)`
//! belongs to `(x_i, y_j)` and lives at `values[i * (N_y + 1) + j]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition of `[a, b]` into `n_cells` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_cells: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::config(format!(
                "interval [{a}, {b}] is empty or non-finite"
            )));
        }
        if n_cells < 2 {
            return Err(Error::Size {
                what: "grid",
                min: 2,
                got: n_cells,
            });
        }
        Ok(Self {
            a,
            b,
            n_cells,
            h: (b - a) / n_cells as f64,
        })
    }

    /// `[0, 1]` split into `n_cells` intervals.
    pub fn unit(n_cells: usize) -> Result<Self> {
        Self::new(0.0, 1.0, n_cells)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells `N`; nodes are indexed `0..=N`.
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn node_coordinate(&self, i: usize) -> Result<f64> {
        if i > self.n_cells {
            return Err(Error::Index {
                index: i,
                lo: 0,
                hi: self.n_cells,
            });
        }
        Ok(self.node(i))
    }

    /// Coordinate of `x_{j+1/2}`.
    pub fn midpoint_coordinate(&self, j: usize) -> Result<f64> {
        if j >= self.n_cells {
            return Err(Error::Index {
                index: j,
                lo: 0,
                hi: self.n_cells - 1,
            });
        }
        Ok(0.5 * (self.node(j) + self.node(j + 1)))
    }

    /// Unchecked node coordinate; the last node is pinned to `b`.
    pub(crate) fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.b
        } else {
            self.a + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_cells).map(move |i| self.node(i))
    }

    /// True when `other` covers the same interval with the same cell count.
    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.n_cells == other.n_cells && self.a == other.a && self.b == other.b
    }
}

/// Uniform partition of `[0, T]` into `M` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
    tau: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(Error::config(format!(
                "final time must be positive, got {t_end}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::config("number of time steps must be positive"));
        }
        Ok(Self {
            t_end,
            n_steps,
            tau: t_end / n_steps as f64,
        })
    }

    /// Builds the grid from a step size, which must divide `t_end` into a
    /// whole number of steps (relative slack 1e-9).
    pub fn from_step(t_end: f64, tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::config(format!(
                "time step must be positive, got {tau}"
            )));
        }
        let steps = (t_end / tau).round();
        if steps < 1.0 || ((steps * tau - t_end) / t_end).abs() > 1e-9 {
            return Err(Error::config(format!(
                "time step {tau} does not divide T = {t_end} into whole steps"
            )));
        }
        Self::new(t_end, steps as usize)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Time of level `k`; level `M` is pinned to `T`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            k as f64 * self.tau
        }
    }

    /// Same horizon with the step halved (`2M` steps).
    pub fn halved(&self) -> Self {
        Self {
            t_end: self.t_end,
            n_steps: 2 * self.n_steps,
            tau: self.t_end / (2 * self.n_steps) as f64,
        }
    }
}

/// Tensor-product grid; `x_axis` spacing may differ from `y_axis` spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x_axis: Grid1D,
    pub y_axis: Grid1D,
}

impl Grid2D {
    pub fn new(x_axis: Grid1D, y_axis: Grid1D) -> Self {
        Self { x_axis, y_axis }
    }

    /// Unit square with `n_cells` intervals per axis.
    pub fn unit_square(n_cells: usize) -> Result<Self> {
        let axis = Grid1D::unit(n_cells)?;
        Ok(Self::new(axis, axis))
    }

    /// Equal cell counts and spacings on both axes.
    pub fn is_square(&self) -> bool {
        self.x_axis.n_cells == self.y_axis.n_cells && self.x_axis.h == self.y_axis.h
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x_axis.n_nodes(), self.y_axis.n_nodes())
    }

    pub fn same_as(&self, other: &Grid2D) -> bool {
        self.x_axis.same_as(&other.x_axis) && self.y_axis.same_as(&other.y_axis)
    }
}

/// Nodal values `u_j`, `j = 0..=N`, at one time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field1D {
    grid: Grid1D,
    values: Vec<f64>,
    time_level: f64,
}

impl Field1D {
    pub fn new(grid: Grid1D, values: Vec<f64>, time_level: f64) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::Dimension {
                expected: grid.n_nodes(),
                got: values.len(),
            });
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("node {i}"),
                value: v,
            });
        }
        Ok(Self {
            grid,
            values,
            time_level,
        })
    }

    /// Samples `f` at every node; the result sits at time level 0.
    pub fn sample(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values, 0.0)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time_level(&self) -> f64 {
        self.time_level
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Nodal values `u_{ij}` on a [`Grid2D`], x index major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
    time_level: f64,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>, time_level: f64) -> Result<Self> {
        let (nx, ny) = grid.shape();
        if values.len() != nx * ny {
            return Err(Error::Dimension {
                expected: nx * ny,
                got: values.len(),
            });
        }
        if let Some((k, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("node ({}, {})", k / ny, k % ny),
                value: v,
            });
        }
        Ok(Self {
            grid,
            values,
            time_level,
        })
    }

    pub fn sample(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (nx, ny) = grid.shape();
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let x = grid.x_axis.node(i);
            for j in 0..ny {
                values.push(f(x, grid.y_axis.node(j)));
            }
        }
        Self::new(grid, values, 0.0)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time_level(&self) -> f64 {
        self.time_level
    }

    /// Value at `(x_i, y_j)`. Panics on out-of-range indices.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        let ny = self.grid.y_axis.n_nodes();
        assert!(j < ny, "y index {j} out of range");
        self.values[i * ny + j]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (nx, ny) = self.grid.shape();
        (i < nx && j < ny).then(|| self.values[i * ny + j])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
