//! Small dense matrices over a generic [`Scalar`].

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: alloc::vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Build from row-major data. Panics on a length mismatch.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned());
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut b = Self::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                b[(i - r0, j - c0)] = self[(i, j)].clone();
            }
        }
        b
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    /// Rows reordered so that output row `i` is input row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for (i, &src) in perm.iter().enumerate() {
            for j in 0..self.cols {
                out[(i, j)] = self[(src, j)].clone();
            }
        }
        out
    }

    /// Columns reordered so that output column `j` is input column `perm[j]`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, &src) in perm.iter().enumerate() {
                out[(i, j)] = self[(i, src)].clone();
            }
        }
        out
    }

    /// Gaussian elimination with magnitude pivoting.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let piv = match pivot_row(&a, c) {
                Some(p) => p,
                None => return Ok(T::zero()),
            };
            if piv != c {
                a.swap_rows(piv, c);
                det = -det;
            }
            let pv = a[(c, c)].clone();
            det = det * pv.clone();
            for r in c + 1..n {
                if a[(r, c)].is_zero() {
                    continue;
                }
                let factor = a[(r, c)].clone() / pv.clone();
                for j in c..n {
                    let v = a[(r, j)].clone() - factor.clone() * a[(c, j)].clone();
                    a[(r, j)] = v;
                }
            }
        }
        Ok(det)
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let piv = pivot_row(&a, c).ok_or(Error::Singular("matrix inverse"))?;
            a.swap_rows(piv, c);
            inv.swap_rows(piv, c);
            let pv = a[(c, c)].clone();
            for j in 0..n {
                a[(c, j)] = a[(c, j)].clone() / pv.clone();
                inv[(c, j)] = inv[(c, j)].clone() / pv.clone();
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let factor = a[(r, c)].clone();
                for j in 0..n {
                    let v = a[(r, j)].clone() - factor.clone() * a[(c, j)].clone();
                    a[(r, j)] = v;
                    let w = inv[(r, j)].clone() - factor.clone() * inv[(c, j)].clone();
                    inv[(r, j)] = w;
                }
            }
        }
        Ok(inv)
    }

    /// Basis vector `c` with `c' self = 0`, if the rows are dependent (exact backends).
    pub fn left_kernel_vector(&self) -> Option<Vec<T>> {
        // Row-reduce the transpose and read off a null vector.
        let t = self.transpose();
        let (rows, cols) = (t.rows, t.cols);
        let mut a = t;
        let mut pivots: Vec<usize> = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r >= rows {
                break;
            }
            let mut best: Option<usize> = None;
            let mut best_mag = 0.0;
            for i in r..rows {
                if !a[(i, c)].is_zero() && a[(i, c)].magnitude() > best_mag {
                    best_mag = a[(i, c)].magnitude();
                    best = Some(i);
                }
            }
            let Some(p) = best else { continue };
            a.swap_rows(p, r);
            let pv = a[(r, c)].clone();
            for j in 0..cols {
                a[(r, j)] = a[(r, j)].clone() / pv.clone();
            }
            for i in 0..rows {
                if i == r || a[(i, c)].is_zero() {
                    continue;
                }
                let f = a[(i, c)].clone();
                for j in 0..cols {
                    let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                    a[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        let free = (0..cols).find(|c| !pivots.contains(c))?;
        let mut v = alloc::vec![T::zero(); cols];
        v[free] = T::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[(ri, free)].clone();
        }
        Some(v)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.map(|x| x.to_f64())
    }
}

fn pivot_row<T: Scalar>(a: &Mat<T>, c: usize) -> Option<usize> {
    let mut best = None;
    let mut best_mag = -1.0;
    for r in c..a.rows {
        if a[(r, c)].is_zero() {
            continue;
        }
        let m = a[(r, c)].magnitude();
        if m > best_mag {
            best_mag = m;
            best = Some(r);
        }
        if T::EXACT {
            // any nonzero pivot is exact; prefer the first to keep entries small
            break;
        }
    }
    best
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat<f64> {
    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_dmatrix(m: &nalgebra::DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, b| if b.abs() > a { b.abs() } else { a })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn exact_inverse_and_det() {
        let m: Mat<Rational> = Mat::from_rows(&[
            alloc::vec![ratio(1, 1), ratio(1, 4)],
            alloc::vec![ratio(1, 3), ratio(1, 2)],
        ]);
        assert_eq!(m.det().unwrap(), ratio(5, 12));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(2));
    }

    #[test]
    fn left_kernel_of_singular_matrix() {
        let m: Mat<Rational> = Mat::from_rows(&[
            alloc::vec![ratio(1, 1), ratio(0, 1)],
            alloc::vec![ratio(1, 1), ratio(0, 1)],
        ]);
        let c = m.left_kernel_vector().unwrap();
        let row = Mat::from_vec(1, 2, c);
        assert!(row.mul(&m).is_zero());
        assert!(Mat::<Rational>::identity(2).left_kernel_vector().is_none());
    }

    #[test]
    fn singular_inverse_errors() {
        let m: Mat<f64> = Mat::from_rows(&[alloc::vec![1.0, 2.0], alloc::vec![2.0, 4.0]]);
        assert!(m.inverse().is_err());
        assert_eq!(m.det().unwrap(), 0.0);
    }
}
