//! Richardson extrapolation of nodal fields.
//!
//! Time: `(4/3) fine - (1/3) coarse` with the fine solve using `tau/2`.
//! Space-time: `(16/15) fine[2j] - (1/15) coarse[j]` with the fine solve on
//! `h/2` and `tau/4`. Both are evaluated as `fine + (fine - coarse)/m`, so
//! equal inputs come back bit-for-bit unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D};

const TIME_MATCH: f64 = 1e-12;

/// A field on a tensor grid that can be combined node by node.
pub trait NodalField: Sized {
    fn nodal_values(&self) -> &[f64];
    fn level(&self) -> f64;
    fn same_grid(&self, other: &Self) -> bool;
    /// Values of `self` at the nodes of `coarse`, when `self`'s grid halves
    /// every spacing of `coarse` over the same domain.
    fn restrict_to(&self, coarse: &Self) -> Option<Vec<f64>>;
    fn with_values(&self, values: Vec<f64>) -> Result<Self>;
}

impl NodalField for Field1D {
    fn nodal_values(&self) -> &[f64] {
        self.values()
    }

    fn level(&self) -> f64 {
        self.time_level()
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.grid().same_as(other.grid())
    }

    fn restrict_to(&self, coarse: &Self) -> Option<Vec<f64>> {
        let (f, c) = (self.grid(), coarse.grid());
        if f.n_cells() != 2 * c.n_cells() || f.a() != c.a() || f.b() != c.b() {
            return None;
        }
        Some(self.values().iter().step_by(2).copied().collect())
    }

    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Field1D::new(*self.grid(), values, self.time_level())
    }
}

impl NodalField for Field2D {
    fn nodal_values(&self) -> &[f64] {
        self.values()
    }

    fn level(&self) -> f64 {
        self.time_level()
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.grid().same_as(other.grid())
    }

    fn restrict_to(&self, coarse: &Self) -> Option<Vec<f64>> {
        let (f, c) = (self.grid(), coarse.grid());
        let halves = |a: &crate::grid::Grid1D, b: &crate::grid::Grid1D| {
            a.n_cells() == 2 * b.n_cells() && a.a() == b.a() && a.b() == b.b()
        };
        if !halves(&f.x_axis, &c.x_axis) || !halves(&f.y_axis, &c.y_axis) {
            return None;
        }
        let (nx, ny) = c.shape();
        let mut out = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                out.push(self.at(2 * i, 2 * j));
            }
        }
        Some(out)
    }

    fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Field2D::new(*self.grid(), values, self.time_level())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtrapolationVariant {
    /// Same grid, `tau` and `tau/2`.
    Time,
    /// `(h, tau)` and `(h/2, tau/4)`.
    SpaceTime,
}

impl ExtrapolationVariant {
    /// `m` in `fine + (fine - coarse)/m`.
    pub fn divisor(self) -> f64 {
        match self {
            ExtrapolationVariant::Time => 3.0,
            ExtrapolationVariant::SpaceTime => 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationPair<F> {
    pub coarse: F,
    pub fine: F,
    pub variant: ExtrapolationVariant,
}

impl<F: NodalField> ExtrapolationPair<F> {
    pub fn new(coarse: F, fine: F, variant: ExtrapolationVariant) -> Self {
        Self {
            coarse,
            fine,
            variant,
        }
    }

    pub fn extrapolate(&self) -> Result<F> {
        match self.variant {
            ExtrapolationVariant::Time => extrapolate_time(&self.coarse, &self.fine),
            ExtrapolationVariant::SpaceTime => extrapolate_spacetime(&self.coarse, &self.fine),
        }
    }
}

fn check_levels(coarse: f64, fine: f64) -> Result<()> {
    if (coarse - fine).abs() > TIME_MATCH * coarse.abs().max(fine.abs()).max(1.0) {
        return Err(Error::config(format!(
            "time levels differ: coarse {coarse}, fine {fine}"
        )));
    }
    Ok(())
}

fn combine(fine: &[f64], coarse: &[f64], divisor: f64) -> Vec<f64> {
    fine.iter()
        .zip(coarse)
        .map(|(&f, &c)| f + (f - c) / divisor)
        .collect()
}

pub fn extrapolate_time<F: NodalField>(coarse: &F, fine: &F) -> Result<F> {
    if !coarse.same_grid(fine) {
        return Err(Error::config("time extrapolation needs identical grids"));
    }
    check_levels(coarse.level(), fine.level())?;
    let values = combine(
        fine.nodal_values(),
        coarse.nodal_values(),
        ExtrapolationVariant::Time.divisor(),
    );
    coarse.with_values(values)
}

/// Result lives on the coarse grid.
pub fn extrapolate_spacetime<F: NodalField>(coarse: &F, fine: &F) -> Result<F> {
    let restricted = fine
        .restrict_to(coarse)
        .ok_or_else(|| Error::config("space-time extrapolation needs the fine grid to halve h"))?;
    check_levels(coarse.level(), fine.level())?;
    let values = combine(
        &restricted,
        coarse.nodal_values(),
        ExtrapolationVariant::SpaceTime.divisor(),
    );
    coarse.with_values(values)
}
