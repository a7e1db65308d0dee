//! Residuals `ε_t(θ) = B^{-1} f(z)^{-1} s(z)^{-1} p(z)^{-1} a(z) y_t` on a
//! finite sample with zero padding at both ends.
//!
//! Each stage is linear in its input, so the same routines carry derivative
//! streams, and their transposes give the adjoint used by the score.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::model::{Dataset, Model};

/// Filter coefficients laid out for the recursions (row-major `n × n` blocks).
#[derive(Clone, Debug)]
pub struct Filter {
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
    pub p0_inv: Vec<f64>,
    pub f0_inv: Vec<f64>,
    pub b_inv: Vec<f64>,
    pub kappas: Vec<usize>,
}

fn flat(m: &Mat<f64>) -> Vec<f64> {
    m.as_slice().to_vec()
}

fn transpose_flat(m: &[f64], n: usize) -> Vec<f64> {
    let mut t = alloc::vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            t[c * n + r] = m[r * n + c];
        }
    }
    t
}

#[inline]
fn matvec_sub(out: &mut [f64], m: &[f64], x: &[f64]) {
    let n = out.len();
    for r in 0..n {
        let row = &m[r * n..(r + 1) * n];
        let mut acc = 0.0;
        for c in 0..n {
            acc += row[c] * x[c];
        }
        out[r] -= acc;
    }
}

#[inline]
fn matvec(m: &[f64], x: &[f64], out: &mut [f64]) {
    let n = out.len();
    for r in 0..n {
        let row = &m[r * n..(r + 1) * n];
        out[r] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

impl Filter {
    pub fn new(model: &Model) -> Result<Self> {
        let p0_inv = model.p[0].inverse().map_err(|_| Error::Singular("p_0"))?;
        let f = model.f();
        let f0_inv = f[0].inverse().map_err(|_| Error::Singular("f_0"))?;
        let b_inv = model.b.inverse().map_err(|_| Error::Singular("B"))?;
        Ok(Filter {
            n: model.n,
            a: model.a.iter().map(flat).collect(),
            p: model.p.iter().map(flat).collect(),
            f: f.iter().map(flat).collect(),
            p0_inv: flat(&p0_inv),
            f0_inv: flat(&f0_inv),
            b_inv: flat(&b_inv),
            kappas: model.kappas.clone(),
        })
    }

    /// Stage 1: `v_t = y_t - Σ a_i y_{t-i}`.
    pub fn ar_stage(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t_len = y.len() / n;
        let mut v = y.to_vec();
        for t in 0..t_len {
            for (i, ai) in self.a.iter().enumerate() {
                if i + 1 > t {
                    break;
                }
                matvec_sub(&mut v[t * n..(t + 1) * n], ai, &y[(t - i - 1) * n..(t - i) * n]);
            }
        }
        v
    }

    /// Stage 2: `p_0 w_t = v_t - Σ_{j≥1} p_j w_{t-j}`, forward in time.
    pub fn p_stage(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t_len = v.len() / n;
        let mut w = alloc::vec![0.0; v.len()];
        let mut rhs = alloc::vec![0.0; n];
        for t in 0..t_len {
            rhs.copy_from_slice(&v[t * n..(t + 1) * n]);
            for j in 1..self.p.len().min(t + 1) {
                matvec_sub(&mut rhs, &self.p[j], &w[(t - j) * n..(t - j + 1) * n]);
            }
            matvec(&self.p0_inv, &rhs, &mut w[t * n..(t + 1) * n]);
        }
        w
    }

    /// Stage 3: `x_{i,t} = w_{i,t+κ_i}`, zero past the end of the sample.
    pub fn shift_stage(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t_len = w.len() / n;
        let mut x = alloc::vec![0.0; w.len()];
        for t in 0..t_len {
            for (i, &k) in self.kappas.iter().enumerate() {
                if t + k < t_len {
                    x[t * n + i] = w[(t + k) * n + i];
                }
            }
        }
        x
    }

    /// Stage 4: `f_0 u_t = x_t - Σ_{j≥1} f_j u_{t+j}`, backward in time.
    pub fn f_stage(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t_len = x.len() / n;
        let mut u = alloc::vec![0.0; x.len()];
        let mut rhs = alloc::vec![0.0; n];
        for t in (0..t_len).rev() {
            rhs.copy_from_slice(&x[t * n..(t + 1) * n]);
            for j in 1..self.f.len() {
                if t + j >= t_len {
                    break;
                }
                matvec_sub(&mut rhs, &self.f[j], &u[(t + j) * n..(t + j + 1) * n]);
            }
            matvec(&self.f0_inv, &rhs, &mut u[t * n..(t + 1) * n]);
        }
        u
    }

    /// `ε_t = B^{-1} u_t`
    pub fn impact_stage(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut e = alloc::vec![0.0; u.len()];
        for (uc, ec) in u.chunks_exact(n).zip(e.chunks_exact_mut(n)) {
            matvec(&self.b_inv, uc, ec);
        }
        e
    }

    /// Transpose of [`Filter::f_stage`].
    pub fn f_stage_adjoint(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t_len = xi.len() / n;
        let f0t = transpose_flat(&self.f0_inv, n);
        let ft: Vec<Vec<f64>> = self.f.iter().map(|m| transpose_flat(m, n)).collect();
        let mut mu = alloc::vec![0.0; xi.len()];
        let mut rhs = alloc::vec![0.0; n];
        for s in 0..t_len {
            rhs.copy_from_slice(&xi[s * n..(s + 1) * n]);
            for j in 1..ft.len().min(s + 1) {
                matvec_sub(&mut rhs, &ft[j], &mu[(s - j) * n..(s - j + 1) * n]);
            }
            matvec(&f0t, &rhs, &mut mu[s * n..(s + 1) * n]);
        }
        mu
    }

    /// Transpose of [`Filter::shift_stage`].
    pub fn shift_stage_adjoint(&self, mu: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t_len = mu.len() / n;
        let mut rho = alloc::vec![0.0; mu.len()];
        for s in 0..t_len {
            for (i, &k) in self.kappas.iter().enumerate() {
                if s >= k {
                    rho[s * n + i] = mu[(s - k) * n + i];
                }
            }
        }
        rho
    }

    /// Transpose of [`Filter::p_stage`].
    pub fn p_stage_adjoint(&self, rho: &[f64]) -> Vec<f64> {
        let n = self.n;
        let t_len = rho.len() / n;
        let p0t = transpose_flat(&self.p0_inv, n);
        let pt: Vec<Vec<f64>> = self.p.iter().map(|m| transpose_flat(m, n)).collect();
        let mut nu = alloc::vec![0.0; rho.len()];
        let mut rhs = alloc::vec![0.0; n];
        for s in (0..t_len).rev() {
            rhs.copy_from_slice(&rho[s * n..(s + 1) * n]);
            for j in 1..pt.len() {
                if s + j >= t_len {
                    break;
                }
                matvec_sub(&mut rhs, &pt[j], &nu[(s + j) * n..(s + j + 1) * n]);
            }
            matvec(&p0t, &rhs, &mut nu[s * n..(s + 1) * n]);
        }
        nu
    }
}

/// Intermediate series of one residual evaluation, each `T × n` row by row.
#[derive(Clone, Debug)]
pub struct ResidualSet {
    pub t: usize,
    pub n: usize,
    /// `a(z) y_t`
    pub v: Vec<f64>,
    /// `p(z)^{-1} v_t`
    pub w: Vec<f64>,
    /// `s(z)^{-1} w_t`
    pub x: Vec<f64>,
    /// `u_t = f(z)^{-1} x_t = B ε_t`
    pub u: Vec<f64>,
    pub eps: Vec<f64>,
}

impl ResidualSet {
    pub fn eps_row(&self, t: usize) -> &[f64] {
        &self.eps[t * self.n..(t + 1) * self.n]
    }
}

/// Residuals of `data` under `model` (validity is the caller's concern).
pub fn residuals_with(filter: &Filter, data: &Dataset) -> ResidualSet {
    let v = filter.ar_stage(&data.values);
    let w = filter.p_stage(&v);
    let x = filter.shift_stage(&w);
    let u = filter.f_stage(&x);
    let eps = filter.impact_stage(&u);
    ResidualSet { t: data.t, n: data.n, v, w, x, u, eps }
}

pub fn residuals(model: &Model, data: &Dataset) -> Result<ResidualSet> {
    if data.n != model.n {
        return Err(Error::DataShape { expected: model.n, got: data.n });
    }
    if !model.validate().all_pass() {
        return Err(Error::InvalidArgument("parameter fails the model conditions".into()));
    }
    Ok(residuals_with(&Filter::new(model)?, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::ShockDensity;
    use crate::model::{Layout, Normalization, SvarmaSpec};

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn sample_model() -> Model {
        let spec = SvarmaSpec::new(2, 1, 2, 0, 1, Normalization::Natural, alloc::vec![ShockDensity::gaussian(); 2])
            .unwrap();
        let layout = Layout::new(&spec);
        let mut m = Model::from_full(&spec, &layout, &layout.expand(&alloc::vec![0.0; layout.n_free()]).unwrap())
            .unwrap();
        m.a[0] = Mat::from_rows(&[alloc::vec![0.5, 0.1], alloc::vec![-0.2, 0.3]]);
        m.p[0][(1, 0)] = 0.4;
        m.p[1] = Mat::from_rows(&[alloc::vec![0.3, 0.0], alloc::vec![0.1, -0.2]]);
        m.p[2][(0, 1)] = 0.1;
        m.g[0] = Mat::from_rows(&[alloc::vec![0.2, -0.3], alloc::vec![1.0, 0.0]]);
        m.g[1] = Mat::from_rows(&[alloc::vec![1.0, 0.0], alloc::vec![0.0, 0.0]]);
        m.g[0][(1, 1)] = 1.0;
        m.g[0][(1, 0)] = 0.0;
        m.b[(0, 1)] = 0.3;
        m
    }

    #[test]
    fn adjoints_are_transposes() {
        let m = sample_model();
        let f = Filter::new(&m).unwrap();
        let t = 13;
        let a: Vec<f64> = (0..2 * t).map(|i| ((i * 7919) % 17) as f64 / 17.0 - 0.5).collect();
        let b: Vec<f64> = (0..2 * t).map(|i| ((i * 104_729) % 23) as f64 / 23.0 - 0.5).collect();
        let tol = 1e-12;
        assert!((dot(&f.f_stage(&a), &b) - dot(&a, &f.f_stage_adjoint(&b))).abs() < tol);
        assert!((dot(&f.p_stage(&a), &b) - dot(&a, &f.p_stage_adjoint(&b))).abs() < tol);
        assert!((dot(&f.shift_stage(&a), &b) - dot(&a, &f.shift_stage_adjoint(&b))).abs() < tol);
    }

    #[test]
    fn white_noise_passes_through() {
        let spec = SvarmaSpec::new(2, 0, 0, 0, 0, Normalization::Natural, alloc::vec![ShockDensity::gaussian(); 2])
            .unwrap();
        let layout = Layout::new(&spec);
        let m = Model::from_free(&spec, &layout, &[0.0, 0.0, 1.0, 1.0]).unwrap();
        let data = Dataset::new(3, 2, alloc::vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let r = residuals(&m, &data).unwrap();
        assert_eq!(r.eps, data.values);
    }
}
