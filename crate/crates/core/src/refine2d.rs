//! Gradients and Hermite refinement on a 2D nodal field.
//!
//! `K_ij` is the five-point x-derivative, defined for `i = 2..N-2`,
//! `j = 1..N-1`; `L_ij` is its y counterpart on the transposed range. No
//! one-sided boundary rows exist, so the refined points stay away from the
//! edges:
//!
//! ```text
//! x_mid(i,j)   i = 2..N-3, j = 1..N-1     at (x_{i+1/2}, y_j)
//! y_mid(i,j)   i = 1..N-1, j = 2..N-3     at (x_i, y_{j+1/2})
//! centre(i,j)  i, j = 2..N-3              at (x_{i+1/2}, y_{j+1/2})
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::refine1d::hermite_midpoint;

/// Smallest cell count for which every 2D formula has a non-empty range.
pub const MIN_CELLS_2D: usize = 5;

/// Values over a rectangular index window `i_lo..=i_hi`, `j_lo..=j_hi`,
/// stored with `j` running fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexedArray2D {
    i_lo: usize,
    i_hi: usize,
    j_lo: usize,
    j_hi: usize,
    values: Vec<f64>,
}

impl IndexedArray2D {
    fn build(
        i_range: (usize, usize),
        j_range: (usize, usize),
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut values = Vec::new();
        for i in i_range.0..=i_range.1 {
            for j in j_range.0..=j_range.1 {
                values.push(f(i, j));
            }
        }
        Self {
            i_lo: i_range.0,
            i_hi: i_range.1,
            j_lo: j_range.0,
            j_hi: j_range.1,
            values,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        if !(self.i_lo..=self.i_hi).contains(&i) {
            return Err(Error::Index {
                index: i,
                lo: self.i_lo,
                hi: self.i_hi,
            });
        }
        if !(self.j_lo..=self.j_hi).contains(&j) {
            return Err(Error::Index {
                index: j,
                lo: self.j_lo,
                hi: self.j_hi,
            });
        }
        Ok(self.at(i, j))
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[(i - self.i_lo) * (self.j_hi - self.j_lo + 1) + (j - self.j_lo)]
    }

    pub fn i_range(&self) -> std::ops::RangeInclusive<usize> {
        self.i_lo..=self.i_hi
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<usize> {
        self.j_lo..=self.j_hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(i, j, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let width = self.j_hi - self.j_lo + 1;
        self.values
            .iter()
            .enumerate()
            .map(move |(n, &v)| (self.i_lo + n / width, self.j_lo + n % width, v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientField2D {
    /// x-derivatives `K_ij`.
    pub k_values: IndexedArray2D,
    /// y-derivatives `L_ij`.
    pub l_values: IndexedArray2D,
    pub time_level: f64,
    shape: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedField2D {
    pub x_mid: IndexedArray2D,
    pub y_mid: IndexedArray2D,
    pub centers: IndexedArray2D,
    pub time_level: f64,
}

fn require_cells(u: &Field2D) -> Result<(usize, usize)> {
    let (nx, ny) = (u.grid().x_axis.n_cells(), u.grid().y_axis.n_cells());
    let n = nx.min(ny);
    if n < MIN_CELLS_2D {
        return Err(Error::Size {
            what: "2D gradients",
            min: MIN_CELLS_2D,
            got: n,
        });
    }
    Ok((nx, ny))
}

pub fn gradient_2d(u: &Field2D) -> Result<GradientField2D> {
    let (nx, ny) = require_cells(u)?;
    let (hx, hy) = (u.grid().x_axis.h(), u.grid().y_axis.h());
    let k_values = IndexedArray2D::build((2, nx - 2), (1, ny - 1), |i, j| {
        (8.0 * u.at(i + 1, j) - 8.0 * u.at(i - 1, j) + u.at(i - 2, j) - u.at(i + 2, j))
            / (12.0 * hx)
    });
    let l_values = IndexedArray2D::build((1, nx - 1), (2, ny - 2), |i, j| {
        (8.0 * u.at(i, j + 1) - 8.0 * u.at(i, j - 1) + u.at(i, j - 2) - u.at(i, j + 2))
            / (12.0 * hy)
    });
    Ok(GradientField2D {
        k_values,
        l_values,
        time_level: u.time_level(),
        shape: (nx, ny),
    })
}

fn check_pair(u: &Field2D, grads: &GradientField2D) -> Result<(usize, usize)> {
    let shape = require_cells(u)?;
    if shape != grads.shape || u.time_level() != grads.time_level {
        return Err(Error::config("gradients were not computed from this field"));
    }
    Ok(shape)
}

/// Midpoints of horizontal and vertical grid edges, `(x_mid, y_mid)`.
pub fn refine_edges_2d(
    u: &Field2D,
    grads: &GradientField2D,
) -> Result<(IndexedArray2D, IndexedArray2D)> {
    let (nx, ny) = check_pair(u, grads)?;
    let (hx, hy) = (u.grid().x_axis.h(), u.grid().y_axis.h());
    let k = &grads.k_values;
    let l = &grads.l_values;
    let x_mid = IndexedArray2D::build((2, nx - 3), (1, ny - 1), |i, j| {
        hermite_midpoint(u.at(i, j), u.at(i + 1, j), k.at(i, j), k.at(i + 1, j), hx)
    });
    let y_mid = IndexedArray2D::build((1, nx - 1), (2, ny - 3), |i, j| {
        hermite_midpoint(u.at(i, j), u.at(i, j + 1), l.at(i, j), l.at(i, j + 1), hy)
    });
    Ok((x_mid, y_mid))
}

/// Cell centres `(x_{i+1/2}, y_{j+1/2})`; needs a square mesh.
pub fn refine_centers_2d(u: &Field2D, grads: &GradientField2D) -> Result<IndexedArray2D> {
    let (nx, ny) = check_pair(u, grads)?;
    if !u.grid().is_square() {
        return Err(Error::config("cell-centre refinement needs equal spacings"));
    }
    let h = u.grid().x_axis.h();
    let k = &grads.k_values;
    let l = &grads.l_values;
    Ok(IndexedArray2D::build((2, nx - 3), (2, ny - 3), |i, j| {
        let mean = 0.25 * (u.at(i, j) + u.at(i, j + 1) + u.at(i + 1, j) + u.at(i + 1, j + 1));
        let dy = l.at(i, j) - l.at(i, j + 1) + l.at(i + 1, j) - l.at(i + 1, j + 1);
        let dx = k.at(i, j) - k.at(i + 1, j) + k.at(i, j + 1) - k.at(i + 1, j + 1);
        mean + h / 16.0 * dy + h / 16.0 * dx
    }))
}

/// Gradients, edge midpoints and centres in one pass.
pub fn refine_2d(u: &Field2D) -> Result<(GradientField2D, RefinedField2D)> {
    let grads = gradient_2d(u)?;
    let (x_mid, y_mid) = refine_edges_2d(u, &grads)?;
    let centers = refine_centers_2d(u, &grads)?;
    let time_level = u.time_level();
    Ok((
        grads,
        RefinedField2D {
            x_mid,
            y_mid,
            centers,
            time_level,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn field(n: usize, f: impl Fn(f64, f64) -> f64) -> Field2D {
        Field2D::sample(Grid2D::unit_square(n).unwrap(), f).unwrap()
    }

    #[test]
    fn ranges_and_size() {
        assert!(matches!(
            gradient_2d(&field(4, |x, _| x)),
            Err(Error::Size { min: 5, got: 4, .. })
        ));
        let g = gradient_2d(&field(8, |x, _| x)).unwrap();
        assert_eq!(g.k_values.i_range(), 2..=6);
        assert_eq!(g.k_values.j_range(), 1..=7);
        assert_eq!(g.l_values.i_range(), 1..=7);
        assert_eq!(g.l_values.j_range(), 2..=6);
        assert!(matches!(
            g.k_values.get(1, 3),
            Err(Error::Index {
                index: 1,
                lo: 2,
                hi: 6
            })
        ));
        assert!(g.k_values.get(2, 0).is_err());
        assert!(g.l_values.get(4, 7).is_err());
        let (_, r) = refine_2d(&field(5, |_, _| 1.0)).unwrap();
        assert_eq!(r.centers.len(), 1);
        assert_eq!(r.centers.get(2, 2).unwrap(), 1.0);
    }

    #[test]
    fn linear_gradients_exact() {
        let g = gradient_2d(&field(8, |x, y| x + 2.0 * y)).unwrap();
        assert!(g.k_values.iter().all(|(_, _, v)| (v - 1.0).abs() < 1e-13));
        assert!(g.l_values.iter().all(|(_, _, v)| (v - 2.0).abs() < 1e-13));
    }

    #[test]
    fn quartic_per_axis_exact() {
        let n = 10;
        let g = gradient_2d(&field(n, |x, y| x.powi(4) * y)).unwrap();
        let h = 1.0 / n as f64;
        for (i, j, v) in g.k_values.iter() {
            let (x, y) = (i as f64 * h, j as f64 * h);
            assert!((v - 4.0 * x.powi(3) * y).abs() < 1e-13);
        }
        let g = gradient_2d(&field(n, |x, y| x * y.powi(4))).unwrap();
        for (i, j, v) in g.l_values.iter() {
            let (x, y) = (i as f64 * h, j as f64 * h);
            assert!((v - 4.0 * x * y.powi(3)).abs() < 1e-13);
        }
    }

    #[test]
    fn constants_and_bilinears_refine_exactly() {
        let (_, r) = refine_2d(&field(7, |_, _| -4.5)).unwrap();
        for a in [&r.x_mid, &r.y_mid, &r.centers] {
            assert!(a.iter().all(|(_, _, v)| (v + 4.5).abs() < 1e-14));
        }
        let n = 9;
        let h = 1.0 / n as f64;
        let (_, r) = refine_2d(&field(n, |x, y| x * y)).unwrap();
        for (i, j, v) in r.centers.iter() {
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            assert!((v - x * y).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_in_x_edges_exact() {
        let n = 12;
        let f = |x: f64, y: f64| x.powi(3) - 2.0 * x + y;
        let u = field(n, f);
        let (_, r) = refine_2d(&u).unwrap();
        let h = 1.0 / n as f64;
        for (i, j, v) in r.x_mid.iter() {
            assert!((v - f((i as f64 + 0.5) * h, j as f64 * h)).abs() < 1e-13);
        }
    }

    #[test]
    fn analytic_midpoints_converge_at_fourth_order() {
        let f = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let (_, r) = refine_2d(&field(n, f)).unwrap();
            let ex = r
                .x_mid
                .iter()
                .map(|(i, j, v)| (v - f((i as f64 + 0.5) * h, j as f64 * h)).abs());
            let ey = r
                .y_mid
                .iter()
                .map(|(i, j, v)| (v - f(i as f64 * h, (j as f64 + 0.5) * h)).abs());
            let ec = r
                .centers
                .iter()
                .map(|(i, j, v)| (v - f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)).abs());
            ex.chain(ey).chain(ec).fold(0.0f64, f64::max)
        };
        let (e16, e32) = (err(16), err(32));
        assert!(e16 < 1e-4);
        let rate = (e16 / e32).log2();
        assert!((3.8..4.3).contains(&rate), "rate {rate}");
    }

    #[test]
    fn centres_transpose_symmetric() {
        let s = |x: f64| (PI * x.min(1.0 - x)).sin();
        let (_, r) = refine_2d(&field(11, |x, y| s(x) * s(y))).unwrap();
        for (i, j, v) in r.centers.iter() {
            assert!((v - r.centers.get(j, i).unwrap()).abs() <= 1e-12);
        }
        for (i, j, v) in r.x_mid.iter() {
            assert!((v - r.y_mid.get(j, i).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn mismatched_gradients_rejected() {
        let a = field(6, |x, _| x);
        let b = field(7, |x, _| x);
        let g = gradient_2d(&b).unwrap();
        assert!(matches!(refine_edges_2d(&a, &g), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn centres_compose_from_one_dimensional_steps(
            n in 5usize..12,
            data in prop::collection::vec(-1.0f64..1.0, 144),
        ) {
            let grid = Grid2D::unit_square(n).unwrap();
            let u = Field2D::new(grid, data[..(n + 1) * (n + 1)].to_vec(), 0.0).unwrap();
            let (g, r) = refine_2d(&u).unwrap();
            let h = grid.x_axis.h();
            let (k, l) = (&g.k_values, &g.l_values);
            let x_row = |i: usize, j: usize| {
                hermite_midpoint(u.at(i, j), u.at(i + 1, j), k.at(i, j), k.at(i + 1, j), h)
            };
            let l_avg = |i: usize, j: usize| 0.5 * (l.at(i, j) + l.at(i + 1, j));
            let scale = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (i, j, v) in r.centers.iter() {
                let composed = hermite_midpoint(
                    x_row(i, j), x_row(i, j + 1), l_avg(i, j), l_avg(i, j + 1), h,
                );
                prop_assert!((v - composed).abs() <= 4.0 * f64::EPSILON * scale);
            }
        }
    }
}
