//! Direct solvers for the systems produced by the compact schemes.
//!
//! * [`thomas_solve`] / [`TridiagonalLu`]: O(n) recursion, no pivoting. The
//!   1D step matrices are strictly diagonally dominant for every mesh ratio.
//! * [`block_thomas_solve`] / [`BlockLu`]: block LU for block-Toeplitz,
//!   block-tridiagonal matrices with tridiagonal blocks. Each eliminated
//!   diagonal block is inverted densely.
//! * [`dense_solve`]: Gaussian elimination with partial pivoting. Used as an
//!   independent oracle by the tests.

use crate::error::{Error, Result};

/// Tridiagonal matrix. `lower[i]` is entry `(i+1, i)`, `upper[i]` is `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::config("tridiagonal matrix must have order >= 1"));
        }
        for band in [&lower, &upper] {
            if band.len() != n - 1 {
                return Err(Error::Dimension {
                    expected: n - 1,
                    got: band.len(),
                });
            }
        }
        Ok(Self { lower, diag, upper })
    }

    /// Constant-band (Toeplitz) matrix of order `n`.
    pub fn toeplitz(n: usize, sub: f64, main: f64, sup: f64) -> Self {
        assert!(n >= 1, "order must be positive");
        Self {
            lower: vec![sub; n - 1],
            diag: vec![main; n],
            upper: vec![sup; n - 1],
        }
    }

    /// Symmetric Toeplitz matrix with `main` on the diagonal and `off` beside it.
    pub fn symmetric(n: usize, main: f64, off: f64) -> Self {
        Self::toeplitz(n, off, main, off)
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Rowwise strict diagonal dominance.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| {
            let mut off = 0.0;
            if i > 0 {
                off += self.lower[i - 1].abs();
            }
            if i + 1 < n {
                off += self.upper[i].abs();
            }
            self.diag[i].abs() > off
        })
    }

    /// `out = self * x`.
    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.order();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let left = if i > 0 {
                self.lower[i - 1] * x[i - 1]
            } else {
                0.0
            };
            let right = if i + 1 < n {
                self.upper[i] * x[i + 1]
            } else {
                0.0
            };
            let acc = self.diag[i] * x[i] + (left + right);
            out[i] = acc;
        }
    }

    /// `out += scale * self * x`.
    pub(crate) fn mul_add_into(&self, scale: f64, x: &[f64], out: &mut [f64]) {
        let n = self.order();
        for i in 0..n {
            let left = if i > 0 {
                self.lower[i - 1] * x[i - 1]
            } else {
                0.0
            };
            let right = if i + 1 < n {
                self.upper[i] * x[i + 1]
            } else {
                0.0
            };
            let acc = self.diag[i] * x[i] + (left + right);
            out[i] += scale * acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.order()];
        self.mul_into(x, &mut out);
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.order();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = self.lower[i];
                m[(i, i + 1)] = self.upper[i];
            }
        }
        m
    }

    /// `self * x` for dense `x` (both order n).
    fn mul_dense(&self, x: &DenseMatrix) -> DenseMatrix {
        let n = self.order();
        let mut out = DenseMatrix::zeros(n, x.cols);
        for r in 0..n {
            for c in 0..x.cols {
                let mut acc = self.diag[r] * x[(r, c)];
                if r > 0 {
                    acc += self.lower[r - 1] * x[(r - 1, c)];
                }
                if r + 1 < n {
                    acc += self.upper[r] * x[(r + 1, c)];
                }
                out[(r, c)] = acc;
            }
        }
        out
    }

    /// `x * self` for dense `x`.
    fn dense_mul(&self, x: &DenseMatrix) -> DenseMatrix {
        let n = self.order();
        let mut out = DenseMatrix::zeros(x.rows, n);
        for r in 0..x.rows {
            for c in 0..n {
                let mut acc = x[(r, c)] * self.diag[c];
                if c > 0 {
                    acc += x[(r, c - 1)] * self.upper[c - 1];
                }
                if c + 1 < n {
                    acc += x[(r, c + 1)] * self.lower[c];
                }
                out[(r, c)] = acc;
            }
        }
        out
    }
}

/// Precomputed Thomas factorization, reusable across right-hand sides.
///
/// Elimination runs from both ends toward a middle row, so a matrix that is
/// symmetric about its anti-diagonal maps mirrored data to bit-for-bit
/// mirrored solutions when the order is odd.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    upper: Vec<f64>,
    twist: usize,
    inv_pivot: Vec<f64>,
    // rows above the twist couple to the next row, rows below to the previous
    coupling: Vec<f64>,
}

impl TridiagonalLu {
    pub fn new(m: &Tridiagonal) -> Result<Self> {
        let n = m.order();
        let twist = n / 2;
        let mut inv_pivot = vec![0.0; n];
        let mut coupling = vec![0.0; n];
        let set_pivot = |i: usize, pivot: f64, inv: &mut Vec<f64>| {
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Singular { row: i });
            }
            inv[i] = 1.0 / pivot;
            Ok(())
        };
        for i in 0..twist {
            let pivot = if i == 0 {
                m.diag[0]
            } else {
                m.diag[i] - m.lower[i - 1] * coupling[i - 1]
            };
            set_pivot(i, pivot, &mut inv_pivot)?;
            coupling[i] = m.upper[i] * inv_pivot[i];
        }
        for i in (twist + 1..n).rev() {
            let pivot = if i == n - 1 {
                m.diag[i]
            } else {
                m.diag[i] - m.upper[i] * coupling[i + 1]
            };
            set_pivot(i, pivot, &mut inv_pivot)?;
            coupling[i] = m.lower[i - 1] * inv_pivot[i];
        }
        let from_above = if twist > 0 {
            m.lower[twist - 1] * coupling[twist - 1]
        } else {
            0.0
        };
        let from_below = if twist + 1 < n {
            m.upper[twist] * coupling[twist + 1]
        } else {
            0.0
        };
        set_pivot(
            twist,
            m.diag[twist] - (from_above + from_below),
            &mut inv_pivot,
        )?;
        Ok(Self {
            lower: m.lower.clone(),
            upper: m.upper.clone(),
            twist,
            inv_pivot,
            coupling,
        })
    }

    pub fn order(&self) -> usize {
        self.inv_pivot.len()
    }

    /// Overwrites `x` (holding the right-hand side) with the solution.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.order();
        assert_eq!(x.len(), n, "rhs length must equal matrix order");
        let m = self.twist;
        for i in 0..m {
            if i > 0 {
                x[i] -= self.lower[i - 1] * x[i - 1];
            }
            x[i] *= self.inv_pivot[i];
        }
        for i in (m + 1..n).rev() {
            if i + 1 < n {
                x[i] -= self.upper[i] * x[i + 1];
            }
            x[i] *= self.inv_pivot[i];
        }
        let from_above = if m > 0 {
            self.lower[m - 1] * x[m - 1]
        } else {
            0.0
        };
        let from_below = if m + 1 < n {
            self.upper[m] * x[m + 1]
        } else {
            0.0
        };
        x[m] = (x[m] - (from_above + from_below)) * self.inv_pivot[m];
        for i in (0..m).rev() {
            x[i] -= self.coupling[i] * x[i + 1];
        }
        for i in m + 1..n {
            x[i] -= self.coupling[i] * x[i - 1];
        }
    }
}

pub fn thomas_solve(m: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.order() {
        return Err(Error::Dimension {
            expected: m.order(),
            got: rhs.len(),
        });
    }
    let lu = TridiagonalLu::new(m)?;
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x);
    Ok(x)
}

/// Block-Toeplitz block-tridiagonal matrix: `diag_block` on every diagonal
/// position and `sign_off * off_block` on both block off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal {
    diag_block: Tridiagonal,
    off_block: Tridiagonal,
    n_blocks: usize,
    sign_off: f64,
}

impl BlockTridiagonal {
    pub fn new(
        diag_block: Tridiagonal,
        off_block: Tridiagonal,
        n_blocks: usize,
        sign_off: f64,
    ) -> Result<Self> {
        if diag_block.order() != off_block.order() {
            return Err(Error::Dimension {
                expected: diag_block.order(),
                got: off_block.order(),
            });
        }
        if n_blocks == 0 {
            return Err(Error::config("block matrix needs at least one block"));
        }
        if sign_off != 1.0 && sign_off != -1.0 {
            return Err(Error::config(format!(
                "off-block sign must be +1 or -1, got {sign_off}"
            )));
        }
        Ok(Self {
            diag_block,
            off_block,
            n_blocks,
            sign_off,
        })
    }

    pub fn diag_block(&self) -> &Tridiagonal {
        &self.diag_block
    }

    pub fn off_block(&self) -> &Tridiagonal {
        &self.off_block
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn sign_off(&self) -> f64 {
        self.sign_off
    }

    pub fn block_order(&self) -> usize {
        self.diag_block.order()
    }

    pub fn order(&self) -> usize {
        self.n_blocks * self.block_order()
    }

    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        let nb = self.block_order();
        for p in 0..self.n_blocks {
            let rows = p * nb..(p + 1) * nb;
            let dst = &mut out[rows.clone()];
            self.diag_block.mul_into(&x[rows], dst);
            if p > 0 {
                self.off_block
                    .mul_add_into(self.sign_off, &x[(p - 1) * nb..p * nb], dst);
            }
            if p + 1 < self.n_blocks {
                self.off_block
                    .mul_add_into(self.sign_off, &x[(p + 1) * nb..(p + 2) * nb], dst);
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.order()];
        self.mul_into(x, &mut out);
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let nb = self.block_order();
        let n = self.order();
        let mut m = DenseMatrix::zeros(n, n);
        let d = self.diag_block.to_dense();
        let o = self.off_block.to_dense();
        for p in 0..self.n_blocks {
            for r in 0..nb {
                for c in 0..nb {
                    m[(p * nb + r, p * nb + c)] = d[(r, c)];
                    if p + 1 < self.n_blocks {
                        m[((p + 1) * nb + r, p * nb + c)] = self.sign_off * o[(r, c)];
                        m[(p * nb + r, (p + 1) * nb + c)] = self.sign_off * o[(r, c)];
                    }
                }
            }
        }
        m
    }
}

/// Block LU factorization of a [`BlockTridiagonal`].
///
/// Stores `G_p = M_p^{-1}` for every eliminated diagonal block
/// `M_p = D - L G_{p-1} U` and the scaled coupling `G_p U`.
#[derive(Debug, Clone)]
pub struct BlockLu {
    off: Tridiagonal,
    inverses: Vec<DenseMatrix>,
    coupling: Vec<DenseMatrix>,
    block_order: usize,
}

impl BlockLu {
    pub fn new(m: &BlockTridiagonal) -> Result<Self> {
        let nb = m.block_order();
        let mut off = m.off_block.clone();
        for v in off
            .lower
            .iter_mut()
            .chain(off.diag.iter_mut())
            .chain(off.upper.iter_mut())
        {
            *v *= m.sign_off;
        }
        let diag = m.diag_block.to_dense();
        let mut inverses = Vec::with_capacity(m.n_blocks);
        let mut coupling = Vec::with_capacity(m.n_blocks.saturating_sub(1));
        for p in 0..m.n_blocks {
            let pivot_block = if p == 0 {
                diag.clone()
            } else {
                let lc = off.mul_dense(&coupling[p - 1]);
                diag.sub(&lc)
            };
            let inv = pivot_block
                .inverse()
                .ok_or(Error::SingularBlock { block: p })?;
            if p + 1 < m.n_blocks {
                coupling.push(off.dense_mul(&inv));
            }
            inverses.push(inv);
        }
        debug_assert!(inverses.iter().all(|g| g.rows == nb));
        Ok(Self {
            off,
            inverses,
            coupling,
            block_order: nb,
        })
    }

    pub fn order(&self) -> usize {
        self.inverses.len() * self.block_order
    }

    /// Solves in place; `scratch` must have the block order as length.
    pub fn solve_in_place(&self, x: &mut [f64], scratch: &mut [f64]) {
        let nb = self.block_order;
        let n_blocks = self.inverses.len();
        assert_eq!(x.len(), nb * n_blocks, "rhs length must equal matrix order");
        assert_eq!(scratch.len(), nb);

        for p in 0..n_blocks {
            let (done, rest) = x.split_at_mut(p * nb);
            let cur = &mut rest[..nb];
            if p > 0 {
                let prev = &done[(p - 1) * nb..];
                self.off.mul_add_into(-1.0, prev, cur);
            }
            self.inverses[p].mul_into(cur, scratch);
            cur.copy_from_slice(scratch);
        }
        for p in (0..n_blocks - 1).rev() {
            let (head, tail) = x.split_at_mut((p + 1) * nb);
            let next = &tail[..nb];
            self.coupling[p].mul_into(next, scratch);
            for (xi, si) in head[p * nb..].iter_mut().zip(scratch.iter()) {
                *xi -= si;
            }
        }
    }

    /// The matrix `x * U` where `U` is the upper coupling block;
    /// `coupling[p]` holds `G_p U`.
    #[cfg(test)]
    fn coupling_block(&self, p: usize) -> &DenseMatrix {
        &self.coupling[p]
    }
}

pub fn block_thomas_solve(m: &BlockTridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.order() {
        return Err(Error::Dimension {
            expected: m.order(),
            got: rhs.len(),
        });
    }
    let lu = BlockLu::new(m)?;
    let mut x = rhs.to_vec();
    let mut scratch = vec![0.0; m.block_order()];
    lu.solve_in_place(&mut x, &mut scratch);
    Ok(x)
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Dimension {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_into(x, &mut out);
        out
    }

    fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Gauss-Jordan inverse with partial pivoting; `None` when singular to
    /// working precision.
    pub fn inverse(&self) -> Option<DenseMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let tiny = f64::EPSILON * n as f64 * self.max_abs();
        let mut a = self.clone();
        let mut inv = DenseMatrix::identity(n);
        for col in 0..n {
            let piv = (col..n).max_by(|&p, &q| a[(p, col)].abs().total_cmp(&a[(q, col)].abs()))?;
            if a[(piv, col)].abs() <= tiny {
                return None;
            }
            a.swap_rows(piv, col);
            inv.swap_rows(piv, col);
            let scale = 1.0 / a[(col, col)];
            a.scale_row(col, scale);
            inv.scale_row(col, scale);
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    if f != 0.0 {
                        a.axpy_row(r, col, -f);
                        inv.axpy_row(r, col, -f);
                    }
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, p: usize, q: usize) {
        if p != q {
            for c in 0..self.cols {
                self.data.swap(p * self.cols + c, q * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: f64) {
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v *= s;
        }
    }

    /// row[dst] += f * row[src]
    fn axpy_row(&mut self, dst: usize, src: usize, f: f64) {
        for c in 0..self.cols {
            let v = self.data[src * self.cols + c];
            self.data[dst * self.cols + c] += f * v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(matrix: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = matrix.rows;
    if matrix.cols != n {
        return Err(Error::Dimension {
            expected: n,
            got: matrix.cols,
        });
    }
    if rhs.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: rhs.len(),
        });
    }
    let tiny = f64::EPSILON * n as f64 * matrix.max_abs();
    let mut a = matrix.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[(p, col)].abs().total_cmp(&a[(q, col)].abs()))
            .expect("non-empty pivot range");
        if a[(piv, col)].abs() <= tiny {
            return Err(Error::Singular { row: col });
        }
        a.swap_rows(piv, col);
        b.swap(piv, col);
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            if f != 0.0 {
                a.axpy_row(r, col, -f);
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| a[(r, c)] * x[c]).sum();
        x[r] = (b[r] - tail) / a[(r, r)];
    }
    Ok(x)
}

#[cfg(test)]
pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(m: &DenseMatrix, x: &[f64], rhs: &[f64]) -> f64 {
        let ax = m.mul_vec(x);
        ax.iter()
            .zip(rhs)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    #[test]
    fn thomas_identity() {
        let m = Tridiagonal::symmetric(3, 1.0, 0.0);
        assert_eq!(
            thomas_solve(&m, &[3.0, -2.0, 7.0]).unwrap(),
            vec![3.0, -2.0, 7.0]
        );
    }

    #[test]
    fn thomas_two_by_two() {
        let m = Tridiagonal::new(vec![1.0], vec![2.0, 2.0], vec![1.0]).unwrap();
        let x = thomas_solve(&m, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn thomas_matches_dense_on_t1() {
        let m = Tridiagonal::symmetric(5, 10.0, 1.0);
        let rhs = vec![1.0; 5];
        let x = thomas_solve(&m, &rhs).unwrap();
        let y = dense_solve(&m.to_dense(), &rhs).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() <= 1e-13);
        }
        assert!(residual(&m.to_dense(), &x, &rhs) <= 1e-12 * 2.0);
    }

    #[test]
    fn thomas_zero_pivot() {
        let m = Tridiagonal::new(vec![1.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(
            thomas_solve(&m, &[1.0, 1.0]),
            Err(Error::Singular { row: 1 })
        );
        let m = Tridiagonal::new(vec![1.0], vec![0.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(
            thomas_solve(&m, &[1.0, 1.0]),
            Err(Error::Singular { row: 0 })
        );
    }

    #[test]
    fn tridiagonal_shape_checks() {
        assert!(Tridiagonal::new(vec![], vec![], vec![]).is_err());
        assert!(Tridiagonal::new(vec![1.0, 2.0], vec![1.0, 1.0], vec![1.0]).is_err());
        assert!(thomas_solve(&Tridiagonal::symmetric(3, 4.0, 1.0), &[1.0]).is_err());
    }

    #[test]
    fn block_single_block_is_thomas() {
        let d = Tridiagonal::symmetric(6, 4.0, -1.0);
        let o = Tridiagonal::symmetric(6, 0.3, 0.1);
        let m = BlockTridiagonal::new(d.clone(), o, 1, -1.0).unwrap();
        let rhs: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let a = block_thomas_solve(&m, &rhs).unwrap();
        let b = thomas_solve(&d, &rhs).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn block_identity() {
        let m = BlockTridiagonal::new(
            Tridiagonal::symmetric(2, 1.0, 0.0),
            Tridiagonal::symmetric(2, 0.0, 0.0),
            2,
            1.0,
        )
        .unwrap();
        assert_eq!(
            block_thomas_solve(&m, &[1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
    }

    #[test]
    fn block_singular_reports_block() {
        // second eliminated block becomes D - O D^{-1} O = 1 - 1 = 0
        let m = BlockTridiagonal::new(
            Tridiagonal::symmetric(1, 1.0, 0.0),
            Tridiagonal::symmetric(1, 1.0, 0.0),
            2,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            BlockLu::new(&m),
            Err(Error::SingularBlock { block: 1 })
        ));
    }

    #[test]
    fn block_coupling_is_inverse_times_upper() {
        let d = Tridiagonal::symmetric(3, 5.0, 1.0);
        let o = Tridiagonal::symmetric(3, 0.5, 0.25);
        let m = BlockTridiagonal::new(d.clone(), o.clone(), 3, -1.0).unwrap();
        let lu = BlockLu::new(&m).unwrap();
        let g0 = d.to_dense().inverse().unwrap();
        let c0 = lu.coupling_block(0);
        let od = o.to_dense();
        for r in 0..3 {
            for c in 0..3 {
                let expect: f64 = (0..3).map(|k| g0[(r, k)] * -od[(k, c)]).sum();
                assert!((c0[(r, c)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dense_examples() {
        let m = DenseMatrix::from_rows(&[vec![5.0]]).unwrap();
        assert_eq!(dense_solve(&m, &[10.0]).unwrap(), vec![2.0]);
        let p = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(dense_solve(&p, &[3.0, -4.0]).unwrap(), vec![-4.0, 3.0]);
        let s = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            dense_solve(&s, &[1.0, 1.0]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn dense_agrees_with_thomas_on_step_matrix() {
        // T1 - s*T2 with c = 1, tau = h^2, N = 8 -> s = 6
        let s = 6.0;
        let m = Tridiagonal::symmetric(7, 10.0 + 2.0 * s, 1.0 - s);
        let rhs: Vec<f64> = (1..=7).map(|i| (i as f64).sin()).collect();
        let x = thomas_solve(&m, &rhs).unwrap();
        let y = dense_solve(&m.to_dense(), &rhs).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() <= 1e-13);
        }
    }

    fn dominant_tridiagonal(n: usize) -> impl Strategy<Value = Tridiagonal> {
        (
            prop::collection::vec(-1.0f64..1.0, n - 1),
            prop::collection::vec(-1.0f64..1.0, n - 1),
            prop::collection::vec(0.1f64..3.0, n),
            prop::collection::vec(prop::bool::ANY, n),
        )
            .prop_map(move |(l, u, margin, neg)| {
                let d = (0..n)
                    .map(|i| {
                        let off = if i > 0 { l[i - 1].abs() } else { 0.0 }
                            + if i + 1 < n { u[i].abs() } else { 0.0 };
                        let v = off + margin[i];
                        if neg[i] {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect();
                Tridiagonal::new(l, d, u).unwrap()
            })
    }

    proptest! {
        #[test]
        fn thomas_agrees_with_dense(
            (m, rhs) in (1usize..=64).prop_flat_map(|n| (
                dominant_tridiagonal(n),
                prop::collection::vec(-1.0f64..1.0, n),
            ))
        ) {
            let x = thomas_solve(&m, &rhs).unwrap();
            let y = dense_solve(&m.to_dense(), &rhs).unwrap();
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-11);
            }
            prop_assert!(residual(&m.to_dense(), &x, &rhs) <= 1e-12 * (1.0 + max_abs(&rhs)));
        }

        #[test]
        fn thomas_recovers_known_solution(
            (m, known) in (1usize..=64).prop_flat_map(|n| (
                dominant_tridiagonal(n),
                prop::collection::vec(-1.0f64..1.0, n),
            ))
        ) {
            let rhs = m.mul_vec(&known);
            let x = thomas_solve(&m, &rhs).unwrap();
            for (a, b) in x.iter().zip(&known) {
                prop_assert!((a - b).abs() <= 1e-11);
            }
        }

        #[test]
        fn block_agrees_with_dense(
            n_blocks in 1usize..=12,
            order in 1usize..=12,
            dd in 4.5f64..8.0,
            doff in -0.5f64..0.5,
            od in -0.5f64..0.5,
            ooff in -0.5f64..0.5,
            sign in prop::bool::ANY,
            seed in prop::collection::vec(-1.0f64..1.0, 144),
        ) {
            let m = BlockTridiagonal::new(
                Tridiagonal::symmetric(order, dd, doff),
                Tridiagonal::symmetric(order, od, ooff),
                n_blocks,
                if sign { 1.0 } else { -1.0 },
            ).unwrap();
            let rhs = &seed[..m.order()];
            let x = block_thomas_solve(&m, rhs).unwrap();
            let dense = m.to_dense();
            let y = dense_solve(&dense, rhs).unwrap();
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            prop_assert!(residual(&dense, &x, rhs) <= 1e-10 * (1.0 + max_abs(rhs)));
            let back = block_thomas_solve(&m, &m.mul_vec(rhs)).unwrap();
            for (a, b) in back.iter().zip(rhs) {
                prop_assert!((a - b).abs() <= 1e-11);
            }
        }
    }
}
