//! Standardised (zero mean, unit variance) shock densities with analytic
//! derivatives in the argument and in the shape parameters.

use alloc::string::ToString;
use alloc::vec::Vec;

#[allow(unused_imports)] // method resolution needs it only without std
use num_traits::Float;
use rand_core::RngCore;
use rand_distr::{Beta, Distribution, StandardNormal, StandardUniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{digamma, ln_beta};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const SQRT2: f64 = core::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Laplace,
    /// Skewed generalised t with `λ = (ℓ, p, q)`.
    Sgt,
}

impl Family {
    pub fn n_params(self) -> usize {
        match self {
            Family::Sgt => 3,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockDensity {
    pub family: Family,
    #[serde(default)]
    pub lambda: Vec<f64>,
}

impl ShockDensity {
    pub fn gaussian() -> Self {
        ShockDensity { family: Family::Gaussian, lambda: Vec::new() }
    }

    pub fn laplace() -> Self {
        ShockDensity { family: Family::Laplace, lambda: Vec::new() }
    }

    pub fn sgt(l: f64, p: f64, q: f64) -> Result<Self> {
        let d = ShockDensity { family: Family::Sgt, lambda: alloc::vec![l, p, q] };
        d.check()?;
        Ok(d)
    }

    /// Same family with new shape parameters.
    pub fn with_lambda(&self, lambda: &[f64]) -> Self {
        ShockDensity { family: self.family, lambda: lambda.to_vec() }
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    pub fn check(&self) -> Result<()> {
        if self.lambda.len() != self.n_params() {
            return Err(Error::InadmissibleDensity(alloc::format!(
                "{:?} takes {} parameters, got {}",
                self.family,
                self.n_params(),
                self.lambda.len()
            )));
        }
        if self.family == Family::Sgt {
            let (l, p, q) = (self.lambda[0], self.lambda[1], self.lambda[2]);
            if !(l > -1.0 && l < 1.0) {
                return Err(Error::InadmissibleDensity(alloc::format!("skewness {l} outside (-1,1)")));
            }
            if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
                return Err(Error::InadmissibleDensity("tail parameters must be positive".to_string()));
            }
            if p * q <= 2.0 {
                return Err(Error::InadmissibleDensity(alloc::format!("p*q = {} <= 2: no variance", p * q)));
            }
        }
        Ok(())
    }

    /// Moment of order `r` is finite.
    pub fn moment_exists(&self, r: u32) -> bool {
        match self.family {
            Family::Sgt => self.lambda[1] * self.lambda[2] > r as f64,
            _ => true,
        }
    }

    pub fn prepare(&self) -> Result<Prepared> {
        self.check()?;
        Ok(match self.family {
            Family::Gaussian => Prepared::Gaussian,
            Family::Laplace => Prepared::Laplace,
            Family::Sgt => Prepared::Sgt(SgtConsts::new(self.lambda[0], self.lambda[1], self.lambda[2])),
        })
    }

    pub fn log_density(&self, x: f64) -> Result<f64> {
        Ok(self.prepare()?.log_density(x))
    }

    pub fn d_dx(&self, x: f64) -> Result<f64> {
        Ok(self.prepare()?.d_dx(x))
    }

    pub fn d_dxx(&self, x: f64) -> Result<f64> {
        Ok(self.prepare()?.d_dxx(x))
    }

    pub fn d_dlambda(&self, x: f64) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; self.n_params()];
        self.prepare()?.d_dlambda(x, &mut out);
        Ok(out)
    }

    pub fn d_dxlambda(&self, x: f64) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; self.n_params()];
        self.prepare()?.d_dxlambda(x, &mut out);
        Ok(out)
    }

    /// Hessian in `λ`, by central differences of the analytic gradient.
    pub fn d_dlambdalambda(&self, x: f64) -> Result<Vec<Vec<f64>>> {
        self.check()?;
        let d = self.n_params();
        let mut h = alloc::vec![alloc::vec![0.0; d]; d];
        for j in 0..d {
            let step = 1e-6 * (1.0 + self.lambda[j].abs());
            let mut up = self.lambda.clone();
            let mut dn = self.lambda.clone();
            up[j] += step;
            dn[j] -= step;
            let gu = self.with_lambda(&up).d_dlambda(x)?;
            let gd = self.with_lambda(&dn).d_dlambda(x)?;
            for i in 0..d {
                h[i][j] = (gu[i] - gd[i]) / (2.0 * step);
            }
        }
        for i in 0..d {
            for j in 0..i {
                let v = 0.5 * (h[i][j] + h[j][i]);
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        Ok(h)
    }

    /// i.i.d. draws with the standardised law.
    pub fn sample<R: RngCore>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        let prep = self.prepare()?;
        let mut out = Vec::with_capacity(count);
        match prep {
            Prepared::Gaussian => {
                for _ in 0..count {
                    out.push(StandardNormal.sample(rng));
                }
            }
            Prepared::Laplace => {
                for _ in 0..count {
                    let u: f64 = StandardUniform.sample(rng);
                    let u = u - 0.5;
                    let s = if u < 0.0 { -1.0 } else { 1.0 };
                    out.push(-s * (1.0 - 2.0 * u.abs()).ln() / SQRT2);
                }
            }
            Prepared::Sgt(c) => {
                let beta = Beta::new(1.0 / c.p, c.q)
                    .map_err(|e| Error::InadmissibleDensity(alloc::format!("beta sampler: {e}")))?;
                for _ in 0..count {
                    let v: f64 = beta.sample(rng);
                    let z = v / (1.0 - v);
                    let u: f64 = StandardUniform.sample(rng);
                    let side = if u < 0.5 * (1.0 + c.l) { 1.0 } else { -1.0 };
                    let y = side * c.h * (1.0 + side * c.l) * z.powf(1.0 / c.p);
                    out.push(y - c.m);
                }
            }
        }
        Ok(out)
    }
}

/// Density with per-parameter constants precomputed, for use in inner loops.
#[derive(Clone, Debug)]
pub enum Prepared {
    Gaussian,
    Laplace,
    Sgt(SgtConsts),
}

/// Constants of the standardised SGT and their derivatives in `(ℓ, p, q)`.
///
/// With `B1 = B(1/p, q)`, `B2 = B(2/p, q-1/p)` and `B3 = B(3/p, q-2/p)`, the
/// scale is `h = D^{-1/2}` with `D = (3ℓ²+1) B3/B1 - 4ℓ² (B2/B1)²`, the
/// centring is `m = 2ℓh B2/B1`, and
/// `log f(x) = ln p - ln 2 - ln h - ln B1 - (1/p+q) ln(1 + (|x+m| / (h(1+ℓ sgn(x+m))))^p)`.
#[derive(Clone, Debug)]
pub struct SgtConsts {
    pub l: f64,
    pub p: f64,
    pub q: f64,
    pub h: f64,
    pub m: f64,
    ln_norm: f64,
    dlnh: [f64; 3],
    dm: [f64; 3],
    dlnb1: [f64; 3],
}

impl SgtConsts {
    pub fn new(l: f64, p: f64, q: f64) -> Self {
        let ip = 1.0 / p;
        let ip2 = ip * ip;
        let lb1 = ln_beta(ip, q);
        let lb2 = ln_beta(2.0 * ip, q - ip);
        let lb3 = ln_beta(3.0 * ip, q - 2.0 * ip);
        let r2 = (lb2 - lb1).exp();
        let r3 = (lb3 - lb1).exp();
        let d = (3.0 * l * l + 1.0) * r3 - 4.0 * l * l * r2 * r2;
        let h = 1.0 / d.sqrt();
        let m = 2.0 * l * h * r2;

        let psi_sum = digamma(q + ip);
        let dlnb1 = [0.0, -ip2 * (digamma(ip) - psi_sum), digamma(q) - psi_sum];
        let psi_b2 = digamma(q - ip);
        let dlnb2 = [0.0, -2.0 * ip2 * digamma(2.0 * ip) + ip2 * psi_b2 + ip2 * psi_sum, psi_b2 - psi_sum];
        let psi_b3 = digamma(q - 2.0 * ip);
        let dlnb3 = [0.0, -3.0 * ip2 * digamma(3.0 * ip) + 2.0 * ip2 * psi_b3 + ip2 * psi_sum, psi_b3 - psi_sum];

        let mut dlnh = [0.0; 3];
        let mut dm = [0.0; 3];
        for j in 0..3 {
            let dlr2 = dlnb2[j] - dlnb1[j];
            let dlr3 = dlnb3[j] - dlnb1[j];
            let dd = if j == 0 {
                6.0 * l * r3 - 8.0 * l * r2 * r2
            } else {
                (3.0 * l * l + 1.0) * r3 * dlr3 - 8.0 * l * l * r2 * r2 * dlr2
            };
            dlnh[j] = -0.5 * dd / d;
            dm[j] = if j == 0 { 2.0 * h * r2 + m * dlnh[0] } else { m * (dlnh[j] + dlr2) };
        }
        let ln_norm = p.ln() - core::f64::consts::LN_2 - h.ln() - lb1;
        SgtConsts { l, p, q, h, m, ln_norm, dlnh, dm, dlnb1 }
    }

    /// `(s, |y|, c, u, A)` at `x`, with `y = x+m` and `c = h(1+ℓs)`.
    #[inline]
    fn parts(&self, x: f64) -> (f64, f64, f64, f64, f64) {
        let y = x + self.m;
        let s = if y < 0.0 { -1.0 } else { 1.0 };
        let ay = y.abs();
        let c = self.h * (1.0 + self.l * s);
        let u = ay / c;
        (s, ay, c, u, u.powf(self.p))
    }

    /// Derivatives of `ln c` and `ln u` in `(ℓ, p, q)`.
    #[inline]
    fn dln(&self, s: f64, ay: f64) -> ([f64; 3], [f64; 3]) {
        let mut dlnc = self.dlnh;
        dlnc[0] += s / (1.0 + self.l * s);
        let mut dlnu = [0.0; 3];
        for j in 0..3 {
            dlnu[j] = if ay > 0.0 { s * self.dm[j] / ay } else { 0.0 } - dlnc[j];
        }
        (dlnc, dlnu)
    }
}

impl Prepared {
    pub fn n_params(&self) -> usize {
        match self {
            Prepared::Sgt(_) => 3,
            _ => 0,
        }
    }

    #[inline]
    pub fn log_density(&self, x: f64) -> f64 {
        match self {
            Prepared::Gaussian => -0.5 * x * x - 0.5 * LN_2PI,
            Prepared::Laplace => -SQRT2 * x.abs() - 0.5 * core::f64::consts::LN_2,
            Prepared::Sgt(c) => {
                let (_, _, _, _, a) = c.parts(x);
                c.ln_norm - (1.0 / c.p + c.q) * a.ln_1p()
            }
        }
    }

    /// `(log f(x), ∂/∂x log f(x))`, plus the `λ`-gradient into `dl` when given.
    /// Shares the transcendental work of the separate methods.
    #[inline]
    pub fn eval(&self, x: f64, dl: Option<&mut [f64]>) -> (f64, f64) {
        let c = match self {
            Prepared::Sgt(c) => c,
            _ => return (self.log_density(x), self.d_dx(x)),
        };
        let y = x + c.m;
        let s = if y < 0.0 { -1.0 } else { 1.0 };
        let ay = y.abs();
        let cc = c.h * (1.0 + c.l * s);
        let u = ay / cc;
        let lnu = if u > 0.0 { u.ln() } else { f64::NEG_INFINITY };
        let a = if u > 0.0 { (c.p * lnu).exp() } else { 0.0 };
        let la = a.ln_1p();
        let w = 1.0 / c.p + c.q;
        let logf = c.ln_norm - w * la;
        let dx = if u == 0.0 {
            if c.p > 1.0 { 0.0 } else { -s * f64::INFINITY }
        } else {
            // u^{p-1} = a / u
            -(1.0 + c.p * c.q) * s * (a / u) / (cc * (1.0 + a))
        };
        if let Some(out) = dl {
            let (_, dlnu) = c.dln(s, ay);
            let frac = a / (1.0 + a);
            let lnu0 = if u > 0.0 { lnu } else { 0.0 };
            out[0] = -c.dlnh[0] - c.dlnb1[0] - w * frac * c.p * dlnu[0];
            out[1] = 1.0 / c.p - c.dlnh[1] - c.dlnb1[1] + la / (c.p * c.p) - w * frac * (c.p * dlnu[1] + lnu0);
            out[2] = -c.dlnh[2] - c.dlnb1[2] - la - w * frac * c.p * dlnu[2];
        }
        (logf, dx)
    }

    /// One-sided (right) derivative at the Laplace kink.
    #[inline]
    pub fn d_dx(&self, x: f64) -> f64 {
        match self {
            Prepared::Gaussian => -x,
            Prepared::Laplace => {
                if x < 0.0 {
                    SQRT2
                } else {
                    -SQRT2
                }
            }
            Prepared::Sgt(c) => {
                let (s, _, cc, u, a) = c.parts(x);
                if u == 0.0 {
                    return if c.p > 1.0 { 0.0 } else { -s * f64::INFINITY };
                }
                -(1.0 + c.p * c.q) * s * u.powf(c.p - 1.0) / (cc * (1.0 + a))
            }
        }
    }

    pub fn d_dxx(&self, x: f64) -> f64 {
        match self {
            Prepared::Gaussian => -1.0,
            Prepared::Laplace => 0.0,
            Prepared::Sgt(c) => {
                let (_, _, cc, u, a) = c.parts(x);
                -(1.0 + c.p * c.q) / (cc * cc) * u.powf(c.p - 2.0) * (c.p - 1.0 - a) / ((1.0 + a) * (1.0 + a))
            }
        }
    }

    /// Gradient of `log f(x)` in `λ`, written into `out`.
    pub fn d_dlambda(&self, x: f64, out: &mut [f64]) {
        let Prepared::Sgt(c) = self else { return };
        let (s, ay, _, u, a) = c.parts(x);
        let (_, dlnu) = c.dln(s, ay);
        let w = 1.0 / c.p + c.q;
        let la = a.ln_1p();
        let frac = a / (1.0 + a);
        let lnu = if u > 0.0 { u.ln() } else { 0.0 };
        for j in 0..3 {
            let dlna = c.p * dlnu[j] + if j == 1 { lnu } else { 0.0 };
            let dw = match j {
                1 => -1.0 / (c.p * c.p),
                2 => 1.0,
                _ => 0.0,
            };
            let dp_term = if j == 1 { 1.0 / c.p } else { 0.0 };
            out[j] = dp_term - c.dlnh[j] - c.dlnb1[j] - dw * la - w * frac * dlna;
        }
    }

    /// Mixed derivative `∂² log f / ∂x ∂λ`, written into `out`.
    pub fn d_dxlambda(&self, x: f64, out: &mut [f64]) {
        let Prepared::Sgt(c) = self else { return };
        let (s, ay, _, u, a) = c.parts(x);
        if u == 0.0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let (dlnc, dlnu) = c.dln(s, ay);
        let k = 1.0 + c.p * c.q;
        let dx = -k * s * u.powf(c.p - 1.0) / (c.h * (1.0 + c.l * s) * (1.0 + a));
        let frac = a / (1.0 + a);
        let lnu = u.ln();
        for j in 0..3 {
            let dlna = c.p * dlnu[j] + if j == 1 { lnu } else { 0.0 };
            let dlng = (c.p - 1.0) * dlnu[j] + if j == 1 { lnu } else { 0.0 } - dlnc[j] - frac * dlna;
            let dlnk = match j {
                1 => c.q / k,
                2 => c.p / k,
                _ => 0.0,
            };
            out[j] = dx * (dlnk + dlng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_at_zero() {
        let g = ShockDensity::gaussian();
        assert!((g.log_density(0.0).unwrap() + 0.918_938_533_204_672_7).abs() < 1e-15);
    }

    #[test]
    fn laplace_slope() {
        let d = ShockDensity::laplace();
        assert_eq!(d.d_dx(1.3).unwrap(), -SQRT2);
        assert_eq!(d.d_dx(-0.2).unwrap(), SQRT2);
    }

    #[test]
    fn sgt_symmetric_at_zero_skew() {
        let d = ShockDensity::sgt(0.0, 2.0, 5.0).unwrap();
        for x in [0.1, 0.7, 2.5] {
            assert!((d.log_density(x).unwrap() - d.log_density(-x).unwrap()).abs() < 1e-14);
        }
        assert!((d.d_dx(1e-12).unwrap() + d.d_dx(-1e-12).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn fused_evaluation_agrees() {
        for d in [ShockDensity::gaussian(), ShockDensity::laplace(), ShockDensity::sgt(0.4, 1.7, 4.0).unwrap()] {
            let p = d.prepare().unwrap();
            for x in [-2.3, -0.4, 0.05, 0.9, 3.1] {
                let mut g = [0.0; 3];
                let (lf, dx) = p.eval(x, Some(&mut g[..p.n_params()]));
                assert!((lf - p.log_density(x)).abs() < 1e-13);
                assert!((dx - p.d_dx(x)).abs() < 1e-12 * (1.0 + dx.abs()));
                let mut h = [0.0; 3];
                p.d_dlambda(x, &mut h[..p.n_params()]);
                for j in 0..p.n_params() {
                    assert!((g[j] - h[j]).abs() < 1e-12 * (1.0 + h[j].abs()), "{x} {j}: {} vs {}", g[j], h[j]);
                }
            }
        }
    }

    #[test]
    fn admissibility() {
        assert!(ShockDensity::sgt(0.0, 2.0, 0.5).is_err());
        assert!(ShockDensity::sgt(1.0, 2.0, 5.0).is_err());
        let d = ShockDensity::sgt(0.0, 1.5, 2.0).unwrap();
        assert!(d.moment_exists(2));
        assert!(!d.moment_exists(3));
        assert!(ShockDensity::gaussian().moment_exists(40));
    }

    #[test]
    fn sgt_derivatives_match_differences() {
        let d = ShockDensity::sgt(0.4, 1.7, 4.0).unwrap();
        for x in [-2.1, -0.4, 0.3, 1.9] {
            let h = 1e-5;
            let num = (d.log_density(x + h).unwrap() - d.log_density(x - h).unwrap()) / (2.0 * h);
            assert!((num - d.d_dx(x).unwrap()).abs() < 1e-7 * (1.0 + num.abs()));
            let g = d.d_dlambda(x).unwrap();
            let gx = d.d_dxlambda(x).unwrap();
            for j in 0..3 {
                let mut up = d.lambda.clone();
                let mut dn = d.lambda.clone();
                up[j] += h;
                dn[j] -= h;
                let (du, dd) = (d.with_lambda(&up), d.with_lambda(&dn));
                let num = (du.log_density(x).unwrap() - dd.log_density(x).unwrap()) / (2.0 * h);
                assert!((num - g[j]).abs() < 1e-7 * (1.0 + num.abs()), "j={j} x={x}: {num} vs {}", g[j]);
                let numx = (du.d_dx(x).unwrap() - dd.d_dx(x).unwrap()) / (2.0 * h);
                assert!((numx - gx[j]).abs() < 1e-6 * (1.0 + numx.abs()), "j={j} x={x}: {numx} vs {}", gx[j]);
            }
        }
    }
}
