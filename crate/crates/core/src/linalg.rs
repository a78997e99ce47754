//! Small dense matrices and an LU solver.
//!
//! Group blocks are at most a few dozen entries wide, so a row-major `Vec` with
//! partial-pivoting LU is all the linear algebra the design loop needs.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_traits::{Float, Zero};

use crate::{Error, Result, C64};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RMatrix = Matrix<f64>;
pub type CMatrix = Matrix<C64>;

impl<T: Copy + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Copy + Zero>(&self, mut f: impl FnMut(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl RMatrix {
    /// Largest `|a_ij - a_ji|`; zero for symmetric input.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl CMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::zero() })
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{}x{} times {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `self + s * I`.
    pub fn add_scaled_identity(&self, s: C64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] += s;
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|v| v * s)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        Float::sqrt(self.data.iter().map(|v| v.norm_sqr()).sum::<f64>())
    }

    /// `y = A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Inverse via LU with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let lu = Lu::factor(self)?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        let mut col = vec![C64::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = C64::zero());
            col[j] = C64::new(1.0, 0.0);
            lu.solve_in_place(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// LU factorization `PA = LU` of a square complex matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    /// Row swapped with row `k` at elimination step `k`.
    pivots: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "LU of a {}x{} matrix",
                a.rows,
                a.cols
            )));
        }
        let mut lu = Self {
            n: a.rows,
            lu: a.data.clone(),
            pivots: (0..a.rows).collect(),
        };
        lu.refactor()?;
        Ok(lu)
    }

    /// Factors `a` reusing this buffer; `a` must have the same order.
    pub fn factor_into(&mut self, a: &[C64]) -> Result<()> {
        debug_assert_eq!(a.len(), self.n * self.n);
        self.lu.copy_from_slice(a);
        self.refactor()
    }

    /// Workspace for an `n`-by-`n` factorization; call [`Lu::factor_into`] before solving.
    pub fn with_order(n: usize) -> Self {
        Self {
            n,
            lu: vec![C64::zero(); n * n],
            pivots: (0..n).collect(),
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        let scale = self.lu.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 && n > 0 {
            return Err(Error::SingularMatrix);
        }
        let tiny = scale * f64::EPSILON * (n as f64);
        for k in 0..n {
            let mut piv = k;
            let mut best = self.lu[k * n + k].norm();
            for i in k + 1..n {
                let v = self.lu[i * n + k].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularMatrix);
            }
            self.pivots[k] = piv;
            if piv != k {
                for j in 0..n {
                    self.lu.swap(k * n + j, piv * n + j);
                }
            }
            let inv = self.lu[k * n + k].inv();
            for i in k + 1..n {
                let factor = self.lu[i * n + k] * inv;
                self.lu[i * n + k] = factor;
                if factor.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = self.lu[k * n + j];
                    self.lu[i * n + j] -= factor * u;
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`, overwriting `b` with `x`.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for (k, &p) in self.pivots.iter().enumerate() {
            b.swap(k, p);
        }
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * b[j];
            }
            b[i] = acc / self.lu[i * n + i];
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn solve_recovers_known_vector() {
        let a = CMatrix::from_row_major(
            3,
            3,
            vec![
                c(0.0, 1.0),
                c(2.0, 0.0),
                c(1.0, -1.0),
                c(4.0, 0.0),
                c(-1.0, 0.5),
                c(0.0, 0.0),
                c(1.0, 1.0),
                c(0.0, 3.0),
                c(2.0, 0.0),
            ],
        )
        .unwrap();
        let x = vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 1.5)];
        let b = a.mul_vec(&x);
        let got = Lu::factor(&a).unwrap().solve(&b);
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-13);
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = CMatrix::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 * 0.1, if i == j { 2.0 } else { 0.3 }));
        let prod = a.matmul(&a.inverse().unwrap()).unwrap();
        assert!(prod.sub(&CMatrix::identity(4)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMatrix::from_fn(2, 2, |_, _| c(1.0, 1.0));
        assert_eq!(Lu::factor(&a).unwrap_err(), Error::SingularMatrix);
        assert_eq!(Lu::factor(&CMatrix::zeros(3, 3)).unwrap_err(), Error::SingularMatrix);
    }
}
