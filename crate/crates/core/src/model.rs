//! SVARMA model `a(z) y_t = p(z) s(z) f(z) B ε_t`: structure, parameter
//! packing, validity checks, impulse responses, spectra, simulation and shock
//! identification.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::densities::{Family, ShockDensity};
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::polymat::PolyMat;
use crate::roots::UNIT_CIRCLE_TOL;
use crate::whf::PartialIndices;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `f_0 = I`
    Natural,
    /// `b(0) = I`
    B0Identity,
}

/// Integer structure of the model plus the shock-density families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvarmaSpec {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub indices: PartialIndices,
    pub normalization: Normalization,
    pub densities: Vec<ShockDensity>,
}

impl SvarmaSpec {
    pub fn new(
        n: usize,
        p: usize,
        q: usize,
        kappa: usize,
        k: usize,
        normalization: Normalization,
        densities: Vec<ShockDensity>,
    ) -> Result<Self> {
        let indices = PartialIndices::new(kappa, k, n)?;
        let spec = SvarmaSpec { n, p, q, indices, normalization, densities };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if self.indices.n != self.n {
            return Err(Error::DimensionMismatch("partial indices dimension"));
        }
        self.indices.check_feasible(self.q)?;
        if self.densities.len() != self.n {
            return Err(Error::DimensionMismatch("one density per shock"));
        }
        Ok(())
    }

    pub fn kappa(&self) -> usize {
        self.indices.kappa
    }

    pub fn k(&self) -> usize {
        self.indices.k
    }

    /// Degree bound of `p(z)`.
    pub fn p_degree(&self) -> usize {
        self.q - self.indices.kappa
    }

    pub fn n_lambda(&self) -> usize {
        self.densities.iter().map(ShockDensity::n_params).sum()
    }

    /// Same structure with every density replaced by `family` (default shape values).
    pub fn with_family(&self, family: Family, lambda: &[f64]) -> Self {
        let mut s = self.clone();
        s.densities = (0..self.n).map(|_| ShockDensity { family, lambda: lambda.to_vec() }).collect();
        s
    }
}

/// How a full-coordinate entry of `τ` relates to the free parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slot {
    Free(usize),
    Fixed(f64),
    /// `coef · free[idx]`
    Tied { free: usize, coef: f64 },
}

/// Coordinate map between the full vector `(τ1, τ2, τ3, β, σ, λ)` and the free vector.
///
/// `τ2` always carries `p_0, ..., p_{q-κ}` and `τ3` carries `g_0, ..., g_{κ+1}`,
/// whatever the regime; the zero/one pattern of the canonical factorisation and
/// the normalisation are expressed through the slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub n: usize,
    pub p: usize,
    pub dp: usize,
    pub kappa: usize,
    pub k: usize,
    pub tau: Vec<Slot>,
    pub n_tau_free: usize,
    pub n_lambda: usize,
    /// `τ`-index of the first entry of `a_1`, `p_0` and `g_0`.
    pub a_off: usize,
    pub p_off: usize,
    pub g_off: usize,
}

impl Layout {
    pub fn new(spec: &SvarmaSpec) -> Self {
        let (n, p) = (spec.n, spec.p);
        let (kappa, k) = (spec.indices.kappa, spec.indices.k);
        let dp = spec.p_degree();
        let nn = n * n;
        let a_off = 0;
        let p_off = nn * p;
        let g_off = p_off + nn * (dp + 1);
        let n_tau = g_off + nn * (kappa + 2);
        let mut tau: Vec<Option<Slot>> = alloc::vec![None; n_tau];
        let delta = |r: usize, c: usize| if r == c { 1.0 } else { 0.0 };
        let at = |off: usize, j: usize, r: usize, c: usize| off + j * nn + c * n + r;

        // p_0
        for r in 0..n {
            for c in 0..n {
                let fixed = k == 0 || r < k || c >= k;
                if fixed {
                    tau[at(p_off, 0, r, c)] = Some(Slot::Fixed(delta(r, c)));
                }
            }
        }
        if k > 0 {
            for r in 0..k {
                for c in k..n {
                    tau[at(p_off, 1, r, c)] = Some(Slot::Fixed(0.0));
                }
            }
            for r in 0..n {
                for c in 0..k {
                    tau[at(p_off, dp, r, c)] = Some(Slot::Fixed(0.0));
                }
            }
        }
        // g_{κ+1}: rows k.. are zero
        for r in k..n {
            for c in 0..n {
                tau[at(g_off, kappa + 1, r, c)] = Some(Slot::Fixed(0.0));
            }
        }
        match spec.normalization {
            Normalization::Natural => {
                for r in 0..n {
                    let m = if r < k { kappa + 1 } else { kappa };
                    for c in 0..n {
                        tau[at(g_off, m, r, c)] = Some(Slot::Fixed(delta(r, c)));
                    }
                }
            }
            Normalization::B0Identity => {
                for r in 0..n {
                    for c in 0..n {
                        if r >= k && c < k {
                            continue; // tied below
                        }
                        tau[at(g_off, 0, r, c)] = Some(Slot::Fixed(delta(r, c)));
                    }
                }
            }
        }
        // free numbering in τ order; ties resolved afterwards
        let mut n_free = 0;
        let mut slots: Vec<Slot> = Vec::with_capacity(n_tau);
        let mut free_of = alloc::vec![usize::MAX; n_tau];
        for (i, s) in tau.iter().enumerate() {
            let tied_target = spec.normalization == Normalization::B0Identity && i >= g_off && i < g_off + nn && {
                let e = i - g_off;
                let (r, c) = (e % n, e / n);
                r >= k && c < k
            };
            match s {
                Some(s) => slots.push(*s),
                None if tied_target => slots.push(Slot::Fixed(f64::NAN)),
                None => {
                    free_of[i] = n_free;
                    slots.push(Slot::Free(n_free));
                    n_free += 1;
                }
            }
        }
        if spec.normalization == Normalization::B0Identity {
            for r in k..n {
                for c in 0..k {
                    let src = free_of[at(p_off, 0, r, c)];
                    slots[at(g_off, 0, r, c)] = Slot::Tied { free: src, coef: -1.0 };
                }
            }
        }
        Layout { n, p, dp, kappa, k, tau: slots, n_tau_free: n_free, n_lambda: spec.n_lambda(), a_off, p_off, g_off }
    }

    pub fn n_tau(&self) -> usize {
        self.tau.len()
    }
    pub fn n_beta(&self) -> usize {
        self.n * (self.n - 1)
    }
    pub fn beta_off_full(&self) -> usize {
        self.n_tau()
    }
    pub fn sigma_off_full(&self) -> usize {
        self.n_tau() + self.n_beta()
    }
    pub fn lambda_off_full(&self) -> usize {
        self.sigma_off_full() + self.n
    }
    pub fn n_full(&self) -> usize {
        self.lambda_off_full() + self.n_lambda
    }
    pub fn beta_off_free(&self) -> usize {
        self.n_tau_free
    }
    pub fn sigma_off_free(&self) -> usize {
        self.n_tau_free + self.n_beta()
    }
    pub fn lambda_off_free(&self) -> usize {
        self.sigma_off_free() + self.n
    }
    pub fn n_free(&self) -> usize {
        self.lambda_off_free() + self.n_lambda
    }

    /// Full vector from free coordinates.
    pub fn expand(&self, free: &[f64]) -> Result<Vec<f64>> {
        if free.len() != self.n_free() {
            return Err(Error::ParameterLength { expected: self.n_free(), got: free.len() });
        }
        let mut full = Vec::with_capacity(self.n_full());
        for s in &self.tau {
            full.push(match *s {
                Slot::Free(i) => free[i],
                Slot::Fixed(v) => v,
                Slot::Tied { free: i, coef } => coef * free[i],
            });
        }
        full.extend_from_slice(&free[self.n_tau_free..]);
        Ok(full)
    }

    /// Free coordinates from a full vector, checking every restriction.
    pub fn restrict(&self, full: &[f64]) -> Result<Vec<f64>> {
        if full.len() != self.n_full() {
            return Err(Error::ParameterLength { expected: self.n_full(), got: full.len() });
        }
        let mut free = alloc::vec![0.0; self.n_tau_free];
        for (i, s) in self.tau.iter().enumerate() {
            if let Slot::Free(j) = *s {
                free[j] = full[i];
            }
        }
        for (i, s) in self.tau.iter().enumerate() {
            let target = match *s {
                Slot::Free(_) => continue,
                Slot::Fixed(v) => v,
                Slot::Tied { free: j, coef } => coef * free[j],
            };
            let res = full[i] - target;
            if res.abs() > 1e-10 * (1.0 + target.abs()) {
                return Err(Error::RestrictionViolated { index: i, residual: res });
            }
        }
        free.extend_from_slice(&full[self.n_tau()..]);
        Ok(free)
    }

    /// Chain rule from a full-coordinate gradient to free coordinates.
    pub fn project(&self, full_grad: &[f64]) -> Vec<f64> {
        let mut g = alloc::vec![0.0; self.n_free()];
        for (i, s) in self.tau.iter().enumerate() {
            match *s {
                Slot::Free(j) => g[j] += full_grad[i],
                Slot::Tied { free: j, coef } => g[j] += coef * full_grad[i],
                Slot::Fixed(_) => {}
            }
        }
        g[self.n_tau_free..].copy_from_slice(&full_grad[self.n_tau()..]);
        g
    }

    /// Restrictions `R θ_full = r` (one row per non-free `τ` entry).
    pub fn restrictions(&self) -> (DMatrix<f64>, Vec<f64>) {
        let rows: Vec<(usize, Slot)> =
            self.tau.iter().enumerate().filter(|(_, s)| !matches!(s, Slot::Free(_))).map(|(i, s)| (i, *s)).collect();
        let mut r = DMatrix::zeros(rows.len(), self.n_full());
        let mut rhs = alloc::vec![0.0; rows.len()];
        let tau_of_free: Vec<usize> = {
            let mut v = alloc::vec![0; self.n_tau_free];
            for (i, s) in self.tau.iter().enumerate() {
                if let Slot::Free(j) = *s {
                    v[j] = i;
                }
            }
            v
        };
        for (row, (i, s)) in rows.iter().enumerate() {
            r[(row, *i)] = 1.0;
            match *s {
                Slot::Fixed(v) => rhs[row] = v,
                Slot::Tied { free, coef } => r[(row, tau_of_free[free])] = -coef,
                Slot::Free(_) => unreachable!(),
            }
        }
        (r, rhs)
    }

    /// Which free coordinates belong to `τ`, `β`, `σ`, `λ`.
    pub fn free_block_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.n_free());
        let nn = self.n * self.n;
        let mut names = alloc::vec![String::new(); self.n_tau_free];
        for (i, s) in self.tau.iter().enumerate() {
            if let Slot::Free(j) = *s {
                let (blk, off, base) = if i < self.p_off {
                    ("a", self.a_off, 1)
                } else if i < self.g_off {
                    ("p", self.p_off, 0)
                } else {
                    ("g", self.g_off, 0)
                };
                let e = i - off;
                let (m, rc) = (e / nn, e % nn);
                names[j] = alloc::format!("{blk}{}[{},{}]", m + base, rc % self.n + 1, rc / self.n + 1);
            }
        }
        out.extend(names);
        for c in 0..self.n {
            for r in 0..self.n {
                if r != c {
                    out.push(alloc::format!("B[{},{}]", r + 1, c + 1));
                }
            }
        }
        for i in 0..self.n {
            out.push(alloc::format!("sigma{}", i + 1));
        }
        for i in 0..self.n_lambda {
            out.push(alloc::format!("lambda{}", i + 1));
        }
        out
    }
}

/// Unpacked parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub n: usize,
    /// `a_1, ..., a_p` with `a(z) = I - a_1 z - ... - a_p z^p`.
    pub a: Vec<Mat<f64>>,
    /// `p_0, ..., p_{q-κ}`
    pub p: Vec<Mat<f64>>,
    /// `g_0, ..., g_{κ+1}` with `g(z) = s(z) f(z)`.
    pub g: Vec<Mat<f64>>,
    pub kappas: Vec<usize>,
    /// Unit-diagonal impact matrix.
    pub b: Mat<f64>,
    pub sigma: Vec<f64>,
    /// One density (with its shape parameters) per shock.
    pub densities: Vec<ShockDensity>,
}

fn mat_from_vec_cm(n: usize, v: &[f64]) -> Mat<f64> {
    let mut m = Mat::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            m[(r, c)] = v[c * n + r];
        }
    }
    m
}

fn push_vec_cm(out: &mut Vec<f64>, m: &Mat<f64>) {
    let n = m.rows();
    for c in 0..m.cols() {
        for r in 0..n {
            out.push(m[(r, c)]);
        }
    }
}

impl Model {
    /// Unpack a full-coordinate vector.
    pub fn from_full(spec: &SvarmaSpec, layout: &Layout, full: &[f64]) -> Result<Self> {
        if full.len() != layout.n_full() {
            return Err(Error::ParameterLength { expected: layout.n_full(), got: full.len() });
        }
        let n = spec.n;
        let nn = n * n;
        let a = (0..spec.p).map(|i| mat_from_vec_cm(n, &full[layout.a_off + i * nn..][..nn])).collect();
        let p = (0..=layout.dp).map(|j| mat_from_vec_cm(n, &full[layout.p_off + j * nn..][..nn])).collect();
        let g = (0..=layout.kappa + 1).map(|j| mat_from_vec_cm(n, &full[layout.g_off + j * nn..][..nn])).collect();
        let mut b = Mat::identity(n);
        let mut it = full[layout.beta_off_full()..layout.sigma_off_full()].iter();
        for c in 0..n {
            for r in 0..n {
                if r != c {
                    b[(r, c)] = *it.next().expect("beta length");
                }
            }
        }
        let sigma = full[layout.sigma_off_full()..layout.lambda_off_full()].to_vec();
        let mut lam = &full[layout.lambda_off_full()..];
        let mut densities = Vec::with_capacity(n);
        for d in &spec.densities {
            let m = d.n_params();
            densities.push(d.with_lambda(&lam[..m]));
            lam = &lam[m..];
        }
        Ok(Model { n, a, p, g, kappas: spec.indices.index_vector(), b, sigma, densities })
    }

    /// Valid reference point: `a(z) = I - z^p / 2`, `p = I`, `B = I`, `σ = 1`, and row `i` of
    /// `g` equal to `(z + 1/2)^{κ_i} e_i'` (natural) or `(1 + 2z)^{κ_i} e_i'`
    /// (`b(0) = I`), so every zero of `det b` sits at `-1/2`.
    pub fn reference_point(spec: &SvarmaSpec) -> Self {
        let n = spec.n;
        let kappas = spec.indices.index_vector();
        let dp = spec.p_degree();
        let mut p = alloc::vec![Mat::zeros(n, n); dp + 1];
        p[0] = Mat::identity(n);
        let mut g = alloc::vec![Mat::zeros(n, n); spec.indices.kappa + 2];
        let (c0, c1) = match spec.normalization {
            Normalization::Natural => (0.5, 1.0),
            Normalization::B0Identity => (1.0, 2.0),
        };
        for (i, &ki) in kappas.iter().enumerate() {
            // binomial expansion of (c0 + c1 z)^ki
            let mut coef = 1.0;
            for m in 0..=ki {
                g[m][(i, i)] = coef * c0.powi((ki - m) as i32) * c1.powi(m as i32);
                coef = coef * (ki - m) as f64 / (m + 1) as f64;
            }
        }
        let mut a = alloc::vec![Mat::zeros(n, n); spec.p];
        if let Some(ap) = a.last_mut() {
            *ap = Mat::identity(n).scale(&0.5);
        }
        Model {
            n,
            a,
            p,
            g,
            kappas,
            b: Mat::identity(n),
            sigma: alloc::vec![1.0; n],
            densities: spec.densities.clone(),
        }
    }

    pub fn from_free(spec: &SvarmaSpec, layout: &Layout, free: &[f64]) -> Result<Self> {
        Self::from_full(spec, layout, &layout.expand(free)?)
    }

    pub fn to_full(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for m in self.a.iter().chain(self.p.iter()).chain(self.g.iter()) {
            push_vec_cm(&mut out, m);
        }
        for c in 0..self.n {
            for r in 0..self.n {
                if r != c {
                    out.push(self.b[(r, c)]);
                }
            }
        }
        out.extend_from_slice(&self.sigma);
        for d in &self.densities {
            out.extend_from_slice(&d.lambda);
        }
        out
    }

    /// Free coordinates; fails with the offending entry if a restriction is violated.
    pub fn pack(&self, layout: &Layout) -> Result<Vec<f64>> {
        layout.restrict(&self.to_full())
    }

    pub fn kappa_max(&self) -> usize {
        self.kappas.iter().copied().max().unwrap_or(0)
    }

    /// `f_0, f_1, ...` (coefficients of `z^0, z^{-1}, ...`); row `i` of `f_j` is row `i` of `g_{κ_i - j}`.
    pub fn f(&self) -> Vec<Mat<f64>> {
        let n = self.n;
        let km = self.kappa_max();
        (0..=km)
            .map(|j| {
                let mut m = Mat::zeros(n, n);
                for i in 0..n {
                    if self.kappas[i] >= j {
                        let src = &self.g[self.kappas[i] - j];
                        for c in 0..n {
                            m[(i, c)] = src[(i, c)];
                        }
                    }
                }
                m
            })
            .collect()
    }

    /// `b_0, ..., b_q` of `b(z) = p(z) g(z)`.
    pub fn b_coeffs(&self) -> Vec<Mat<f64>> {
        let n = self.n;
        let deg = self.p.len() + self.g.len() - 2;
        let mut out = alloc::vec![Mat::zeros(n, n); deg + 1];
        for (i, pi) in self.p.iter().enumerate() {
            for (j, gj) in self.g.iter().enumerate() {
                out[i + j] = out[i + j].add(&pi.mul(gj));
            }
        }
        while out.len() > 1 && out.last().is_some_and(|m| m.max_abs() == 0.0) {
            out.pop();
        }
        out
    }

    /// `a(z)` as a polynomial matrix.
    pub fn a_poly(&self) -> PolyMat<f64> {
        let mut c = alloc::vec![Mat::identity(self.n)];
        c.extend(self.a.iter().map(Mat::neg));
        PolyMat::from_coeffs(c)
    }

    pub fn b_poly(&self) -> PolyMat<f64> {
        PolyMat::from_coeffs(self.b_coeffs())
    }

    pub fn p_poly(&self) -> PolyMat<f64> {
        PolyMat::from_coeffs(self.p.clone())
    }

    pub fn sigma_mat(&self) -> Mat<f64> {
        Mat::diag(&self.sigma)
    }

    /// `B Σ`
    pub fn impact(&self) -> Mat<f64> {
        self.b.mul(&self.sigma_mat())
    }

    /// Condition checks; never fails, reports per condition.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let n = self.n;
        let a = self.a_poly();
        let a_roots = a.roots_det().ok();
        rep.stable = a_roots.as_ref().is_some_and(|r| r.count_outside() == r.total());
        let b = self.b_poly();
        let b_roots = b.roots_det().ok();
        rep.no_unit_circle_zeros = b_roots.as_ref().is_some_and(|r| r.on_unit_circle().is_none());
        let want = self.kappas.iter().sum::<usize>();
        rep.inside_count = b_roots.as_ref().is_some_and(|r| r.count_inside() == want);
        rep.p_zeros_outside = self
            .p_poly()
            .roots_det()
            .ok()
            .is_some_and(|r| r.count_outside() == r.total() && r.min_modulus() > 1.0 + UNIT_CIRCLE_TOL);
        let f0 = &self.f()[0];
        rep.f0_nonsingular = f0.det().is_ok_and(|d| d.abs() > 1e-12 * f0.max_abs().powi(n as i32).max(1e-300));
        rep.b_nonsingular = self.b.det().is_ok_and(|d| d.abs() > 1e-12) && self.sigma.iter().all(|&s| s > 0.0);
        rep.coprime = match &a_roots {
            Some(r) => r.roots.iter().all(|root| full_row_rank(&stack_at(&a, &b, root.value))),
            None => false,
        };
        let ap = self.a.last().map(Mat::neg).unwrap_or_else(|| Mat::identity(n));
        let q = self.p.len() + self.g.len() - 3;
        let bq = self.b_coeffs().get(q).cloned().unwrap_or_else(|| Mat::zeros(n, n));
        let mut ends = DMatrix::<Complex64>::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                ends[(i, j)] = Complex64::new(ap[(i, j)], 0.0);
                ends[(i, n + j)] = Complex64::new(bq[(i, j)], 0.0);
            }
        }
        rep.full_rank_ends = full_row_rank(&ends);
        rep
    }

    /// `k_0, ..., k_H` of `a(z)^{-1} b(z) B`.
    pub fn transfer_irf(&self, horizon: usize) -> Result<Vec<Mat<f64>>> {
        if !self.validate().stable {
            return Err(Error::Unstable);
        }
        Ok(self.irf_unchecked(horizon))
    }

    pub(crate) fn irf_unchecked(&self, horizon: usize) -> Vec<Mat<f64>> {
        let bc = self.b_coeffs();
        let mut k: Vec<Mat<f64>> = Vec::with_capacity(horizon + 1);
        for j in 0..=horizon {
            let mut kj = if j < bc.len() { bc[j].mul(&self.b) } else { Mat::zeros(self.n, self.n) };
            for (i, ai) in self.a.iter().enumerate() {
                if i < j {
                    kj = kj.add(&ai.mul(&k[j - i - 1]));
                }
            }
            k.push(kj);
        }
        k
    }

    /// `a(z)^{-1} b(z) B Σ` at a point.
    pub fn transfer_at(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        self.transfer_with_impact(z, &self.impact())
    }

    /// `a(z)^{-1} b(z) M` for an arbitrary impact matrix `M`.
    pub fn transfer_with_impact(&self, z: Complex64, impact: &Mat<f64>) -> Result<DMatrix<Complex64>> {
        let a = self.a_poly().eval(z);
        let b = self.b_poly().eval(z);
        let bs = impact.to_dmatrix().map(|x| Complex64::new(x, 0.0));
        let ainv = a.try_inverse().ok_or(Error::Singular("a(z) on the frequency grid"))?;
        Ok(ainv * b * bs)
    }

    /// Spectral density `(1/2π) K K^H`, `K = a^{-1} b B Σ` at `z = e^{-iω}`.
    pub fn spectral_density(&self, freqs: &[f64]) -> Result<Vec<DMatrix<Complex64>>> {
        self.spectral_density_with_impact(freqs, &self.impact())
    }

    pub fn spectral_density_with_impact(&self, freqs: &[f64], impact: &Mat<f64>) -> Result<Vec<DMatrix<Complex64>>> {
        freqs
            .iter()
            .map(|&w| {
                let k = self.transfer_with_impact(Complex64::from_polar(1.0, -w), impact)?;
                Ok((&k * k.adjoint()).map(|x| x / core::f64::consts::TAU))
            })
            .collect()
    }

    /// Draw a sample path of length `t` after `burn_in` discarded steps, from
    /// zero initial conditions. Returns the data and the shocks `ε_t` (with
    /// scale `σ`) aligned with it.
    pub fn simulate(&self, t: usize, burn_in: usize, seed: u64) -> Result<(Dataset, Vec<f64>)> {
        let n = self.n;
        let rep = self.validate();
        if !rep.stable {
            return Err(Error::Unstable);
        }
        for d in &self.densities {
            if !d.moment_exists(2) {
                return Err(Error::InadmissibleDensity("variance does not exist".into()));
            }
        }
        let total = t + burn_in;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        // one stream per component, drawn in component order
        let draws: Vec<Vec<f64>> =
            self.densities.iter().map(|d| d.sample(total, &mut rng)).collect::<Result<_>>()?;
        let mut eps = alloc::vec![0.0; total * n];
        for s in 0..total {
            for i in 0..n {
                eps[s * n + i] = self.sigma[i] * draws[i][s];
            }
        }
        let bm = self.b.as_slice();
        let mut u = alloc::vec![0.0; total * n];
        for s in 0..total {
            for r in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += bm[r * n + c] * eps[s * n + c];
                }
                u[s * n + r] = acc;
            }
        }
        let bc = self.b_coeffs();
        let mut y = alloc::vec![0.0; total * n];
        for s in 0..total {
            for r in 0..n {
                let mut acc = 0.0;
                for (j, bj) in bc.iter().enumerate() {
                    if j > s {
                        break;
                    }
                    let bj = bj.as_slice();
                    for c in 0..n {
                        acc += bj[r * n + c] * u[(s - j) * n + c];
                    }
                }
                for (i, ai) in self.a.iter().enumerate() {
                    if i + 1 > s {
                        break;
                    }
                    let ai = ai.as_slice();
                    for c in 0..n {
                        acc += ai[r * n + c] * y[(s - i - 1) * n + c];
                    }
                }
                y[s * n + r] = acc;
            }
        }
        let data = Dataset::new(t, n, y[burn_in * n..].to_vec())?;
        Ok((data, eps[burn_in * n..].to_vec()))
    }

    /// Representative of the signed-permutation class of `(B, σ, λ)` chosen by
    /// `scheme`, written with unit-diagonal `B` and positive `σ`. A sign flip
    /// of a shock negates its SGT skewness.
    pub fn canonicalize_shocks(&self, scheme: Scheme) -> Result<Model> {
        let id = identify_b(&self.impact(), scheme)?;
        let fam0 = self.densities[0].family;
        if self.densities.iter().any(|d| d.family != fam0) && id.perm.iter().enumerate().any(|(j, &o)| j != o) {
            return Err(Error::InvalidArgument("cannot permute shocks with different density families".into()));
        }
        let n = self.n;
        let m = self.impact();
        let mut out = self.clone();
        for j in 0..n {
            let src = id.perm[j];
            let d = m[(j, src)];
            if d == 0.0 {
                return Err(Error::SchemeUndefined("zero diagonal after permutation"));
            }
            for r in 0..n {
                out.b[(r, j)] = m[(r, src)] / d;
            }
            out.sigma[j] = d.abs();
            let mut dens = self.densities[src].clone();
            if d < 0.0 && dens.family == Family::Sgt {
                dens.lambda[0] = -dens.lambda[0];
            }
            out.densities[j] = dens;
        }
        Ok(out)
    }
}

fn stack_at(a: &PolyMat<f64>, b: &PolyMat<f64>, z: Complex64) -> DMatrix<Complex64> {
    let n = a.rows();
    let (az, bz) = (a.eval(z), b.eval(z));
    let mut m = DMatrix::zeros(n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&az);
    m.view_mut((0, n), (n, n)).copy_from(&bz);
    m
}

fn full_row_rank(m: &DMatrix<Complex64>) -> bool {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    smax > 0.0 && sv.iter().filter(|&&s| s > 1e-8 * smax).count() == m.nrows()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub stable: bool,
    pub no_unit_circle_zeros: bool,
    pub inside_count: bool,
    pub coprime: bool,
    pub full_rank_ends: bool,
    pub b_nonsingular: bool,
    pub p_zeros_outside: bool,
    pub f0_nonsingular: bool,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.stable
            && self.no_unit_circle_zeros
            && self.inside_count
            && self.coprime
            && self.full_rank_ends
            && self.b_nonsingular
            && self.p_zeros_outside
            && self.f0_nonsingular
    }
}

/// `T × n` observations stored row by row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub t: usize,
    pub n: usize,
    pub values: Vec<f64>,
    #[serde(default)]
    pub names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(t: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != t * n {
            return Err(Error::DataShape { expected: t * n, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite observation".into()));
        }
        Ok(Dataset { t, n, values, names: None })
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.n..(t + 1) * self.n]
    }

    /// Subtract the column means.
    pub fn demeaned(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let mean = (0..self.t).map(|t| self.values[t * self.n + i]).sum::<f64>() / self.t as f64;
            for t in 0..self.t {
                out.values[t * self.n + i] -= mean;
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Unit-norm columns, row-dominance ordering, unit diagonal.
    Lms,
    /// Unit-norm columns, largest entry positive, lexicographic ordering.
    Cb,
}

/// Output of [`identify_b`]: `b = input · P · diag(signs) · diag(σ)^{-1}` where
/// column `j` of `P` selects input column `perm[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Identified {
    pub b: Mat<f64>,
    pub sigma: Vec<f64>,
    pub perm: Vec<usize>,
    pub signs: Vec<f64>,
}

/// Canonical member of the signed-permutation-and-scale class of `m`.
pub fn identify_b(m: &Mat<f64>, scheme: Scheme) -> Result<Identified> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::NotSquare { rows: n, cols: m.cols() });
    }
    if m.det()?.abs() <= 1e-300 {
        return Err(Error::Singular("impact matrix"));
    }
    let mut unit = m.clone();
    let mut norms = alloc::vec![0.0; n];
    for c in 0..n {
        let nrm = (0..n).map(|r| m[(r, c)] * m[(r, c)]).sum::<f64>().sqrt();
        norms[c] = nrm;
        for r in 0..n {
            unit[(r, c)] = m[(r, c)] / nrm;
        }
    }
    match scheme {
        Scheme::Lms => {
            let mut perm = Vec::with_capacity(n);
            let mut left: Vec<usize> = (0..n).collect();
            for row in 0..n {
                let mut best = left[0];
                for &c in &left[1..] {
                    if unit[(row, c)].abs() > unit[(row, best)].abs() {
                        best = c;
                    }
                }
                // strict dominance over the columns placed after this one
                if row + 1 < n
                    && left.iter().any(|&c| c != best && unit[(row, c)].abs() >= unit[(row, best)].abs() * (1.0 - 1e-12))
                {
                    return Err(Error::SchemeUndefined("no column ordering with strictly dominant diagonal"));
                }
                perm.push(best);
                left.retain(|&c| c != best);
            }
            let mut b = Mat::zeros(n, n);
            let mut sigma = alloc::vec![0.0; n];
            let mut signs = alloc::vec![1.0; n];
            for j in 0..n {
                let src = perm[j];
                let d = unit[(j, src)];
                signs[j] = if d < 0.0 { -1.0 } else { 1.0 };
                sigma[j] = norms[src] * d.abs();
                for r in 0..n {
                    b[(r, j)] = unit[(r, src)] / d;
                }
            }
            Ok(Identified { b, sigma, perm, signs })
        }
        Scheme::Cb => {
            let mut signs_by_src = alloc::vec![1.0; n];
            for c in 0..n {
                let mut best = 0;
                for r in 1..n {
                    if unit[(r, c)].abs() > unit[(best, c)].abs() {
                        best = r;
                    }
                }
                if unit[(best, c)] < 0.0 {
                    signs_by_src[c] = -1.0;
                }
            }
            let signed = |c: usize, r: usize| unit[(r, c)] * signs_by_src[c];
            // Largest column first, so diagonally dominant matrices keep their order.
            let mut perm: Vec<usize> = (0..n).collect();
            perm.sort_by(|&x, &y| {
                for r in 0..n {
                    match signed(y, r).partial_cmp(&signed(x, r)) {
                        Some(core::cmp::Ordering::Equal) | None => continue,
                        Some(o) => return o,
                    }
                }
                x.cmp(&y)
            });
            let mut b = Mat::zeros(n, n);
            for (j, &src) in perm.iter().enumerate() {
                for r in 0..n {
                    b[(r, j)] = signed(src, r);
                }
            }
            let signs = perm.iter().map(|&s| signs_by_src[s]).collect();
            let sigma = perm.iter().map(|&s| norms[s]).collect();
            Ok(Identified { b, sigma, perm, signs })
        }
    }
}
