//! Matrix polynomials `M(z) = M_0 + M_1 z + ... + M_d z^d` and Laurent
//! matrices with a finite range of (possibly negative) powers of z.
//!
//! Both are stored coefficient-major: one dense matrix per power. Entry-major
//! views ([`PolyMat::entries`]) are provided for elimination algorithms that
//! act on individual polynomial entries.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // method resolution needs it only without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::poly::Poly;
use crate::roots::{poly_roots, RootSet};
use crate::scalar::{Rational, Scalar};

/// Polynomial matrix in nonnegative powers of z.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMat<T> {
    rows: usize,
    cols: usize,
    coeffs: Vec<Mat<T>>,
}

/// Matrix with coefficients at powers `low..=low + coeffs.len() - 1` of z.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMat<T> {
    rows: usize,
    cols: usize,
    low: i64,
    coeffs: Vec<Mat<T>>,
}

impl<T: Scalar> PolyMat<T> {
    /// Coefficients by ascending power; trailing zero matrices are dropped.
    pub fn new(rows: usize, cols: usize, mut coeffs: Vec<Mat<T>>) -> Result<Self> {
        if coeffs.iter().any(|c| c.rows() != rows || c.cols() != cols) {
            return Err(Error::DimensionMismatch("coefficient matrices must share dimensions"));
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(Mat::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Mat::zeros(rows, cols));
        }
        Ok(PolyMat { rows, cols, coeffs })
    }

    /// Panicking constructor for literal test data.
    pub fn from_coeffs(coeffs: Vec<Mat<T>>) -> Self {
        let (r, c) = (coeffs[0].rows(), coeffs[0].cols());
        Self::new(r, c, coeffs).expect("consistent coefficient dimensions")
    }

    pub fn constant(m: Mat<T>) -> Self {
        PolyMat { rows: m.rows(), cols: m.cols(), coeffs: alloc::vec![m] }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(Mat::identity(n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(Mat::zeros(rows, cols))
    }

    /// `diag(z^{k_1}, ..., z^{k_n})`
    pub fn diag_monomials(powers: &[usize]) -> Self {
        let n = powers.len();
        let d = powers.iter().copied().max().unwrap_or(0);
        let mut coeffs = alloc::vec![Mat::zeros(n, n); d + 1];
        for (i, &k) in powers.iter().enumerate() {
            coeffs[k][(i, i)] = T::one();
        }
        Self::from_coeffs(coeffs)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    /// True degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
    pub fn coeffs(&self) -> &[Mat<T>] {
        &self.coeffs
    }
    pub fn coeff(&self, k: usize) -> Mat<T> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| Mat::zeros(self.rows, self.cols))
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| c[(i, j)].clone()).collect())
    }

    /// Entry-major view.
    pub fn entries(&self) -> Vec<Vec<Poly<T>>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.entry(i, j)).collect()).collect()
    }

    pub fn from_entries(entries: &[Vec<Poly<T>>]) -> Self {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        let d = entries.iter().flatten().filter_map(Poly::degree).max().unwrap_or(0);
        let mut coeffs = alloc::vec![Mat::zeros(rows, cols); d + 1];
        for (i, row) in entries.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                for (k, c) in p.coeffs().iter().enumerate() {
                    coeffs[k][(i, j)] = c.clone();
                }
            }
        }
        Self::new(rows, cols, coeffs).expect("entries have consistent shape")
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::DimensionMismatch("polynomial matrix sum"));
        }
        let d = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.rows, self.cols, (0..d).map(|k| self.coeff(k).add(&o.coeff(k))).collect())
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::DimensionMismatch("polynomial matrix difference"));
        }
        let d = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.rows, self.cols, (0..d).map(|k| self.coeff(k).sub(&o.coeff(k))).collect())
    }

    /// Coefficient convolution.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch("polynomial matrix product"));
        }
        let mut out = alloc::vec![Mat::zeros(self.rows, o.cols); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(self.rows, o.cols, out)
    }

    /// `self * m` for a constant matrix `m`.
    pub fn mul_const(&self, m: &Mat<T>) -> Result<Self> {
        if self.cols != m.rows() {
            return Err(Error::DimensionMismatch("polynomial matrix times constant"));
        }
        Self::new(self.rows, m.cols(), self.coeffs.iter().map(|c| c.mul(m)).collect())
    }

    /// `m * self` for a constant matrix `m`.
    pub fn const_mul(&self, m: &Mat<T>) -> Result<Self> {
        if m.cols() != self.rows {
            return Err(Error::DimensionMismatch("constant times polynomial matrix"));
        }
        Self::new(m.rows(), self.cols, self.coeffs.iter().map(|c| m.mul(c)).collect())
    }

    pub fn transpose(&self) -> Self {
        PolyMat { rows: self.cols, cols: self.rows, coeffs: self.coeffs.iter().map(Mat::transpose).collect() }
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        PolyMat { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|c| c.permute_rows(perm)).collect() }
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        PolyMat { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|c| c.permute_cols(perm)).collect() }
    }

    pub fn eval(&self, z: Complex64) -> DMatrix<Complex64> {
        self.to_laurent().eval_nonzero_or_poly(z)
    }

    pub fn to_laurent(&self) -> LaurentMat<T> {
        LaurentMat::new(self.rows, self.cols, 0, self.coeffs.clone()).expect("valid shape")
    }

    pub fn to_f64(&self) -> PolyMat<f64> {
        PolyMat::new(self.rows, self.cols, self.coeffs.iter().map(Mat::to_f64).collect()).expect("valid shape")
    }

    /// Per-row maximal power with a nonzero entry (0 for a zero row).
    pub fn row_degrees(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|i| {
                (0..self.coeffs.len())
                    .rev()
                    .find(|&k| self.coeffs[k].row(i).iter().any(|x| !x.is_zero()))
                    .unwrap_or(0)
            })
            .collect()
    }

    /// Row `i` holds row `i`'s coefficient at its row degree.
    pub fn leading_row_matrix(&self) -> Mat<T> {
        let degs = self.row_degrees();
        let mut m = Mat::zeros(self.rows, self.cols);
        for (i, &d) in degs.iter().enumerate() {
            for j in 0..self.cols {
                m[(i, j)] = self.coeffs[d][(i, j)].clone();
            }
        }
        m
    }

    /// Nonsingular leading-row coefficient matrix.
    pub fn is_row_reduced(&self) -> Result<bool> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let l = self.leading_row_matrix();
        let d = l.det()?;
        Ok(!negligible(&d, &l))
    }

    pub fn has_pole_at_infinity(&self) -> bool {
        self.coeffs.len() > 1
    }
}

/// Determinant routine selected by the scalar backend.
pub trait DetPoly: Scalar {
    fn det_poly(m: &PolyMat<Self>) -> Result<Poly<Self>>;
}

impl DetPoly for Rational {
    /// Cofactor expansion over exact polynomial entries.
    fn det_poly(m: &PolyMat<Self>) -> Result<Poly<Self>> {
        if m.rows != m.cols {
            return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
        }
        Ok(cofactor_det(&m.entries()))
    }
}

impl DetPoly for f64 {
    /// Evaluation at `degree * n + 1` roots of unity followed by the inverse DFT.
    fn det_poly(m: &PolyMat<Self>) -> Result<Poly<Self>> {
        if m.rows != m.cols {
            return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
        }
        let n = m.rows;
        if n == 0 {
            return Ok(Poly::one());
        }
        let npts = m.degree() * n + 1;
        let w = core::f64::consts::TAU / npts as f64;
        let vals: Vec<Complex64> = (0..npts)
            .map(|j| {
                let z = Complex64::from_polar(1.0, w * j as f64);
                m.eval(z).determinant()
            })
            .collect();
        let scale = m.coeffs.iter().map(Mat::max_abs).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let tol = 1e-14 * scale.powi(n as i32) * npts as f64;
        let coeffs: Vec<f64> = (0..npts)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in vals.iter().enumerate() {
                    acc += v * Complex64::from_polar(1.0, -w * (j * k) as f64);
                }
                let c = acc.re / npts as f64;
                if c.abs() <= tol {
                    0.0
                } else {
                    c
                }
            })
            .collect();
        Ok(Poly::new(coeffs))
    }
}

impl<T: DetPoly> PolyMat<T> {
    pub fn det_poly(&self) -> Result<Poly<T>> {
        T::det_poly(self)
    }

    /// Roots of `det M(z)` with multiplicities.
    pub fn roots_det(&self) -> Result<RootSet> {
        let d = self.det_poly()?;
        if d.is_zero() {
            return Err(Error::ZeroDeterminant);
        }
        Ok(poly_roots(&d.to_f64()).unwrap_or_default())
    }

    /// Determinant is a nonzero constant.
    pub fn is_unimodular(&self) -> Result<bool> {
        let d = self.det_poly()?;
        Ok(d.degree() == Some(0))
    }
}

fn cofactor_det<T: Scalar>(e: &[Vec<Poly<T>>]) -> Poly<T> {
    let n = e.len();
    match n {
        0 => Poly::one(),
        1 => e[0][0].clone(),
        2 => e[0][0].mul(&e[1][1]).sub(&e[0][1].mul(&e[1][0])),
        _ => {
            let mut acc = Poly::zero();
            for j in 0..n {
                if e[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly<T>>> = e[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, p)| p.clone()).collect())
                    .collect();
                let term = e[0][j].mul(&cofactor_det(&minor));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

fn negligible<T: Scalar>(d: &T, m: &Mat<T>) -> bool {
    if T::EXACT {
        return d.is_zero();
    }
    let mut scale = 1.0;
    for i in 0..m.rows() {
        scale *= m.row(i).iter().map(Scalar::magnitude).fold(0.0, f64::max);
    }
    d.magnitude() <= 1e-12 * scale || scale == 0.0
}

impl<T: Scalar> LaurentMat<T> {
    pub fn new(rows: usize, cols: usize, mut low: i64, mut coeffs: Vec<Mat<T>>) -> Result<Self> {
        if coeffs.iter().any(|c| c.rows() != rows || c.cols() != cols) {
            return Err(Error::DimensionMismatch("coefficient matrices must share dimensions"));
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(Mat::is_zero) {
            coeffs.pop();
        }
        while coeffs.len() > 1 && coeffs[0].is_zero() {
            coeffs.remove(0);
            low += 1;
        }
        if coeffs.is_empty() {
            coeffs.push(Mat::zeros(rows, cols));
        }
        if coeffs.len() == 1 && coeffs[0].is_zero() {
            low = 0;
        }
        Ok(LaurentMat { rows, cols, low, coeffs })
    }

    /// `f_0 + f_1 z^{-1} + ... + f_d z^{-d}` from `[f_0, f_1, ...]`.
    pub fn from_negative_powers(coeffs: Vec<Mat<T>>) -> Self {
        let (r, c) = (coeffs[0].rows(), coeffs[0].cols());
        let d = coeffs.len() as i64 - 1;
        let mut rev = coeffs;
        rev.reverse();
        Self::new(r, c, -d, rev).expect("consistent coefficient dimensions")
    }

    /// `diag(z^{k_1}, ..., z^{k_n})` with signed powers.
    pub fn diag_monomials(powers: &[i64]) -> Self {
        let n = powers.len();
        let lo = powers.iter().copied().min().unwrap_or(0);
        let hi = powers.iter().copied().max().unwrap_or(0);
        let mut coeffs = alloc::vec![Mat::zeros(n, n); (hi - lo + 1) as usize];
        for (i, &k) in powers.iter().enumerate() {
            coeffs[(k - lo) as usize][(i, i)] = T::one();
        }
        Self::new(n, n, lo, coeffs).expect("square")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    /// Lowest power present (`-d⁻`).
    pub fn low(&self) -> i64 {
        self.low
    }
    /// Highest power present (`d⁺`).
    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }
    pub fn coeffs(&self) -> &[Mat<T>] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Coefficient at power `k` of z.
    pub fn coeff(&self, k: i64) -> Mat<T> {
        let idx = k - self.low;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            Mat::zeros(self.rows, self.cols)
        } else {
            self.coeffs[idx as usize].clone()
        }
    }

    /// Coefficients `[c_0, c_1, ...]` of `c_0 + c_1 z^{-1} + ...` when no positive power is present.
    pub fn negative_power_coeffs(&self) -> Vec<Mat<T>> {
        let d = (-self.low).max(0);
        (0..=d).map(|j| self.coeff(-j)).collect()
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch("Laurent matrix product"));
        }
        let mut out = alloc::vec![Mat::zeros(self.rows, o.cols); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(self.rows, o.cols, self.low + o.low, out)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::DimensionMismatch("Laurent matrix sum"));
        }
        let lo = self.low.min(o.low);
        let hi = self.high().max(o.high());
        Self::new(self.rows, self.cols, lo, (lo..=hi).map(|k| self.coeff(k).add(&o.coeff(k))).collect())
    }

    pub fn mul_const(&self, m: &Mat<T>) -> Result<Self> {
        if self.cols != m.rows() {
            return Err(Error::DimensionMismatch("Laurent matrix times constant"));
        }
        Self::new(self.rows, m.cols(), self.low, self.coeffs.iter().map(|c| c.mul(m)).collect())
    }

    pub fn const_mul(&self, m: &Mat<T>) -> Result<Self> {
        if m.cols() != self.rows {
            return Err(Error::DimensionMismatch("constant times Laurent matrix"));
        }
        Self::new(m.rows(), self.cols, self.low, self.coeffs.iter().map(|c| m.mul(c)).collect())
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        LaurentMat {
            rows: self.rows,
            cols: self.cols,
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| c.permute_rows(perm)).collect(),
        }
    }

    /// The product as a polynomial matrix when all negative powers cancel.
    pub fn to_poly(&self) -> Option<PolyMat<T>> {
        if self.low < 0 {
            return None;
        }
        let mut coeffs = alloc::vec![Mat::zeros(self.rows, self.cols); self.low as usize];
        coeffs.extend(self.coeffs.iter().cloned());
        Some(PolyMat::new(self.rows, self.cols, coeffs).expect("valid shape"))
    }

    /// Evaluate at `z`; fails at `z = 0` when negative powers are present.
    pub fn eval(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        if self.low < 0 && z.norm() == 0.0 {
            return Err(Error::NegativePowerAtZero);
        }
        Ok(self.eval_nonzero_or_poly(z))
    }

    fn eval_nonzero_or_poly(&self, z: Complex64) -> DMatrix<Complex64> {
        let mut acc = DMatrix::<Complex64>::zeros(self.rows, self.cols);
        for c in self.coeffs.iter().rev() {
            acc *= z;
            for i in 0..self.rows {
                for j in 0..self.cols {
                    acc[(i, j)] += Complex64::new(c[(i, j)].to_f64(), 0.0);
                }
            }
        }
        if self.low != 0 {
            acc *= z.powi(self.low as i32);
        }
        acc
    }

    pub fn to_f64(&self) -> LaurentMat<f64> {
        LaurentMat::new(self.rows, self.cols, self.low, self.coeffs.iter().map(Mat::to_f64).collect())
            .expect("valid shape")
    }

    /// Some element is unbounded as |z| grows.
    pub fn has_pole_at_infinity(&self) -> bool {
        self.high() > 0
    }
}

impl<T: DetPoly> LaurentMat<T> {
    /// Zero at infinity: without a pole, the limit matrix is singular; with a pole,
    /// some element of the inverse is unbounded as |z| grows.
    pub fn has_zero_at_infinity(&self) -> Result<bool> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        if !self.has_pole_at_infinity() {
            let limit = self.coeff(0);
            let d = limit.det()?;
            return Ok(negligible(&d, &limit));
        }
        // R = z^low M with M polynomial; R^{-1} = z^{-low} adj(M) / det(M)
        let shift = self.low.min(0);
        let m = LaurentMat::new(self.rows, self.cols, self.low - shift, self.coeffs.clone())?
            .to_poly()
            .expect("nonnegative after shift");
        let det = m.det_poly()?;
        let dd = det.degree().ok_or(Error::ZeroDeterminant)? as i64;
        let entries = m.entries();
        let n = self.rows;
        for i in 0..n {
            for j in 0..n {
                let minor: Vec<Vec<Poly<T>>> = (0..n)
                    .filter(|&r| r != j)
                    .map(|r| (0..n).filter(|&c| c != i).map(|c| entries[r][c].clone()).collect())
                    .collect();
                let cof = PolyMat::from_entries(&minor);
                let cd = if n == 1 { Some(0) } else { cof.det_poly()?.degree() };
                if let Some(cd) = cd {
                    if -shift + cd as i64 - dd > 0 {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }
}
