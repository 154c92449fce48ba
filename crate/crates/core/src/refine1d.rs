//! Nodal gradients from a collocation quartic and Hermite midpoint refinement.
//!
//! Gradient stencils (`h` the grid spacing):
//!
//! ```text
//! P_j     = [8u_{j+1} - 8u_{j-1} + u_{j-2} - u_{j+2}] / (12h),   j = 2..N-2
//! P_1     = [-2g_1 - 3u_1 + 6u_2 - u_3] / (6h)
//! P_{N-1} = [ 2g_2 + 3u_{N-1} - 6u_{N-2} + u_{N-3}] / (6h)
//! ```
//!
//! Midpoints use the cubic Hermite interpolant on `[x_j, x_{j+1}]`:
//! `u_{j+1/2} = (u_j + u_{j+1})/2 + (h/8)(P_j - P_{j+1})` for `j = 1..N-2`.
//! Composed with the interior gradient this collapses to the six-point rule
//! `(u_{j-2} - 9u_{j-1} + 56u_j + 56u_{j+1} - 9u_{j+2} + u_{j+3}) / 96`.
//! Midpoints of the two boundary cells are not produced.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field1D, Grid1D};

/// Smallest cell count for which every gradient and midpoint formula applies.
pub const MIN_CELLS_1D: usize = 4;

/// Weights of the collapsed interior midpoint rule on
/// `(u_{j-2}, u_{j-1}, u_j, u_{j+1}, u_{j+2}, u_{j+3})`.
pub const INTERIOR_MIDPOINT_WEIGHTS: [f64; 6] = [
    1.0 / 96.0,
    -9.0 / 96.0,
    56.0 / 96.0,
    56.0 / 96.0,
    -9.0 / 96.0,
    1.0 / 96.0,
];

/// `P_j` for `j = 1..=N-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientField1D {
    grid: Grid1D,
    values: Vec<f64>,
    time_level: f64,
}

impl GradientField1D {
    pub fn get(&self, j: usize) -> Result<f64> {
        let n = self.grid.n_cells();
        if j == 0 || j >= n {
            return Err(Error::Index {
                index: j,
                lo: 1,
                hi: n - 1,
            });
        }
        Ok(self.values[j - 1])
    }

    /// Values for `j = 1..=N-1` in order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.grid.n_cells() - 1
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn time_level(&self) -> f64 {
        self.time_level
    }
}

/// `u_{j+1/2}` for `j = 1..=N-2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedField1D {
    grid: Grid1D,
    mid_values: Vec<f64>,
    time_level: f64,
}

impl RefinedField1D {
    pub fn get(&self, j: usize) -> Result<f64> {
        let n = self.grid.n_cells();
        if j == 0 || j + 2 > n {
            return Err(Error::Index {
                index: j,
                lo: 1,
                hi: n - 2,
            });
        }
        Ok(self.mid_values[j - 1])
    }

    pub fn mid_values(&self) -> &[f64] {
        &self.mid_values
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.grid.n_cells() - 2
    }

    /// `(x_{j+1/2}, u_{j+1/2})` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.indices()
            .zip(&self.mid_values)
            .map(|(j, &v)| (0.5 * (self.grid.node(j) + self.grid.node(j + 1)), v))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn time_level(&self) -> f64 {
        self.time_level
    }
}

fn require_cells(what: &'static str, n: usize) -> Result<()> {
    if n < MIN_CELLS_1D {
        return Err(Error::Size {
            what,
            min: MIN_CELLS_1D,
            got: n,
        });
    }
    Ok(())
}

/// Interior five-point derivative at node `j` (needs `2 <= j <= N-2`).
#[inline]
pub(crate) fn five_point_derivative(u: &[f64], j: usize, h: f64) -> f64 {
    (8.0 * u[j + 1] - 8.0 * u[j - 1] + u[j - 2] - u[j + 2]) / (12.0 * h)
}

/// Nodal gradients `P_1..P_{N-1}`; `g1_t`, `g2_t` are the boundary values at
/// the field's time level.
pub fn gradient_1d(u: &Field1D, g1_t: f64, g2_t: f64) -> Result<GradientField1D> {
    let n = u.grid().n_cells();
    require_cells("gradient", n)?;
    let h = u.grid().h();
    let v = u.values();
    let mut values = Vec::with_capacity(n - 1);
    values.push((-2.0 * g1_t - 3.0 * v[1] + 6.0 * v[2] - v[3]) / (6.0 * h));
    values.extend((2..=n - 2).map(|j| five_point_derivative(v, j, h)));
    values.push((2.0 * g2_t + 3.0 * v[n - 1] - 6.0 * v[n - 2] + v[n - 3]) / (6.0 * h));
    Ok(GradientField1D {
        grid: *u.grid(),
        values,
        time_level: u.time_level(),
    })
}

/// Cubic Hermite interpolant on one cell evaluated at its midpoint.
#[inline]
pub fn hermite_midpoint(u_j: f64, u_j1: f64, p_j: f64, p_j1: f64, h: f64) -> f64 {
    0.5 * (u_j + u_j1) + 0.125 * h * (p_j - p_j1)
}

pub fn refine_1d(u: &Field1D, g1_t: f64, g2_t: f64) -> Result<RefinedField1D> {
    let n = u.grid().n_cells();
    require_cells("midpoint refinement", n)?;
    let p = gradient_1d(u, g1_t, g2_t)?;
    let h = u.grid().h();
    let v = u.values();
    let pv = p.values();
    let mid_values = (1..=n - 2)
        .map(|j| hermite_midpoint(v[j], v[j + 1], pv[j - 1], pv[j], h))
        .collect();
    Ok(RefinedField1D {
        grid: *u.grid(),
        mid_values,
        time_level: u.time_level(),
    })
}

/// Same midpoints as [`refine_1d`], evaluated from the collapsed /96 rules
/// instead of composing gradients.
pub fn refine_1d_collapsed(u: &Field1D, g1_t: f64, g2_t: f64) -> Result<RefinedField1D> {
    let n = u.grid().n_cells();
    require_cells("midpoint refinement", n)?;
    let v = u.values();
    let mut mid_values = Vec::with_capacity(n - 2);
    for j in 1..=n - 2 {
        let m = if j == 1 {
            (10.0 * (5.0 * v[1] + 6.0 * v[2] - v[3]) + (v[4] - v[0] - 4.0 * g1_t)) / 96.0
        } else if j == n - 2 {
            (10.0 * (6.0 * v[n - 2] + 5.0 * v[n - 1] - v[n - 3]) + (v[n - 4] - v[n] - 4.0 * g2_t))
                / 96.0
        } else {
            (56.0 * (v[j] + v[j + 1]) - 9.0 * (v[j - 1] + v[j + 2]) + (v[j - 2] + v[j + 3])) / 96.0
        };
        mid_values.push(m);
    }
    Ok(RefinedField1D {
        grid: *u.grid(),
        mid_values,
        time_level: u.time_level(),
    })
}

/// Whether a merged output point is a grid node or a refined midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Node,
    Mid,
}

/// Nodes and midpoints merged in increasing `x`: `N+1` nodes plus `N-2`
/// midpoints, `2N-1` points in all.
pub fn merged_profile(u: &Field1D, mids: &RefinedField1D) -> Vec<(f64, f64, PointKind)> {
    let grid = u.grid();
    let mut out = Vec::with_capacity(2 * grid.n_cells() - 1);
    for (i, (x, &v)) in grid.nodes().zip(u.values()).enumerate() {
        out.push((x, v, PointKind::Node));
        if let Ok(m) = mids.get(i) {
            out.push((0.5 * (x + grid.node(i + 1)), m, PointKind::Mid));
        }
    }
    out
}
