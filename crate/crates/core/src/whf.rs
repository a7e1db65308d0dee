//! Wiener-Hopf factorisation `b(z) = p(z) s(z) f(z)` of a square MA polynomial.
//!
//! `p` has all determinantal zeros outside the closed unit disc, `s(z)` is
//! `diag(z^{κ_1}, ..., z^{κ_n})` with non-increasing partial indices, and `f`
//! is a polynomial in `z^{-1}` with nonsingular constant term whose
//! determinantal zeros lie inside the unit disc.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::poly::Poly;
use crate::polymat::{LaurentMat, PolyMat};
use crate::roots::{poly_roots, UNIT_CIRCLE_TOL};
use crate::scalar::{rationalize, Rational, Scalar};

/// Generic partial indices: `k` entries equal to `κ+1` followed by `n-k` entries equal to `κ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartialIndices {
    pub kappa: usize,
    pub k: usize,
    pub n: usize,
}

impl PartialIndices {
    pub fn new(kappa: usize, k: usize, n: usize) -> Result<Self> {
        if n == 0 || k >= n {
            return Err(Error::InvalidArgument(alloc::format!("k={k} must lie in 0..{n}")));
        }
        Ok(PartialIndices { kappa, k, n })
    }

    pub fn index_vector(&self) -> Vec<usize> {
        (0..self.n).map(|i| if i < self.k { self.kappa + 1 } else { self.kappa }).collect()
    }

    /// `None` unless the vector has the generic pattern.
    pub fn from_index_vector(v: &[usize]) -> Option<Self> {
        let n = v.len();
        let lo = *v.iter().min()?;
        let hi = *v.iter().max()?;
        if hi > lo + 1 || v.windows(2).any(|w| w[0] < w[1]) {
            return None;
        }
        let k = if hi > lo { v.iter().filter(|&&x| x == hi).count() } else { 0 };
        Some(PartialIndices { kappa: lo, k, n })
    }

    /// Number of determinantal zeros inside the unit disc.
    pub fn inside_count(&self) -> usize {
        self.n * self.kappa + self.k
    }

    /// `0 ≤ κ ≤ q-1` with any `k`, or `(κ,k) = (q,0)`.
    pub fn feasible(&self, q: usize) -> bool {
        (q > 0 && self.kappa < q && self.k < self.n) || (self.kappa == q && self.k == 0)
    }

    pub fn check_feasible(&self, q: usize) -> Result<()> {
        if self.feasible(q) {
            Ok(())
        } else {
            Err(Error::InfeasibleIndices { kappa: self.kappa, k: self.k, n: self.n, q })
        }
    }

    /// All feasible regimes for MA order `q`, ordered by inside count.
    pub fn enumerate(n: usize, q: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for kappa in 0..q {
            for k in 0..n {
                out.push(PartialIndices { kappa, k, n });
            }
        }
        out.push(PartialIndices { kappa: q, k: 0, n });
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    Raw,
    Canonical,
    Natural,
    B0Identity,
}

/// Factors of a WHF. The index vector is stored in full so that non-generic
/// factorisations can be represented as well.
#[derive(Clone, Debug, PartialEq)]
pub struct WhfTriple<T> {
    pub p: PolyMat<T>,
    pub indices: Vec<usize>,
    pub f: LaurentMat<T>,
    pub mode: NormalizationMode,
    /// Row order used to make the leading block of `p_0` invertible, when it was not.
    pub row_permutation: Option<Vec<usize>>,
}

impl<T: Scalar> WhfTriple<T> {
    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn partial_indices(&self) -> Option<PartialIndices> {
        PartialIndices::from_index_vector(&self.indices)
    }

    pub fn s(&self) -> PolyMat<T> {
        PolyMat::diag_monomials(&self.indices)
    }

    /// `g(z) = s(z) f(z)`
    pub fn g(&self) -> Result<PolyMat<T>> {
        let powers: Vec<i64> = self.indices.iter().map(|&x| x as i64).collect();
        LaurentMat::diag_monomials(&powers).mul(&self.f)?.to_poly().ok_or(Error::NotPolynomial)
    }

    /// `f_j`, the coefficient of `z^{-j}`.
    pub fn f_coeff(&self, j: usize) -> Mat<T> {
        self.f.coeff(-(j as i64))
    }

    pub fn to_f64(&self) -> WhfTriple<f64> {
        WhfTriple {
            p: self.p.to_f64(),
            indices: self.indices.clone(),
            f: self.f.to_f64(),
            mode: self.mode,
            row_permutation: self.row_permutation.clone(),
        }
    }
}

/// `p s f`; fails if negative powers survive.
pub fn compose<T: Scalar>(t: &WhfTriple<T>) -> Result<PolyMat<T>> {
    t.p.mul(&t.g()?)
}

/// Regime implied by counting determinantal zeros inside the unit disc.
///
/// Correct only for generic `b`; non-generic index vectors (e.g. `(2,0)`) are
/// mapped to the generic pattern with the same sum.
pub fn generic_indices_from_root_count(b: &PolyMat<f64>) -> Result<PartialIndices> {
    let n = b.rows();
    let roots = b.roots_det()?;
    if let Some(m) = roots.on_unit_circle() {
        return Err(Error::UnitCircleRoot { modulus: m });
    }
    let n_in = roots.count_inside();
    PartialIndices::new(n_in / n, n_in % n, n)
}

type Entries = Vec<Vec<Poly<Rational>>>;

fn row_axpy(m: &mut Entries, i: usize, c: &Poly<Rational>, j: usize) {
    for col in 0..m[0].len() {
        let v = m[i][col].add(&c.mul(&m[j][col]));
        m[i][col] = v;
    }
}

fn col_axpy(m: &mut Entries, j: usize, c: &Poly<Rational>, i: usize) {
    for row in m.iter_mut() {
        let v = row[j].add(&c.mul(&row[i]));
        row[j] = v;
    }
}

fn swap_cols(m: &mut Entries, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn identity_entries(n: usize) -> Entries {
    (0..n).map(|i| (0..n).map(|j| if i == j { Poly::one() } else { Poly::zero() }).collect()).collect()
}

/// Monic factor of `d` collecting its roots strictly inside the unit disc, and
/// a unit-circle check. Exact where possible; numeric roots are rationalised
/// and the candidate is accepted only if it divides exactly.
fn inside_factor(d: &Poly<Rational>) -> Result<Poly<Rational>> {
    let one = Rational::from_i64(1);
    let minus_one = Rational::from_i64(-1);
    if d.eval(&one).is_zero() {
        return Err(Error::UnitCircleRoot { modulus: 1.0 });
    }
    if d.eval(&minus_one).is_zero() {
        return Err(Error::UnitCircleRoot { modulus: 1.0 });
    }
    // square-free part has simple roots, which the eigenvalue solver resolves well
    let g = d.gcd(&d.derivative());
    let sf = if g.degree().unwrap_or(0) > 0 { d.div_rem(&g).0 } else { d.clone() };
    let zeros = sf.zero_root_multiplicity();
    let core = Poly::new(sf.coeffs()[zeros..].to_vec());
    let recip_gcd = core.gcd(&core.reciprocal());
    if recip_gcd.degree().unwrap_or(0) > 0 {
        if let Some(rs) = poly_roots(&recip_gcd.to_f64()) {
            if let Some(m) = rs.on_unit_circle() {
                return Err(Error::UnitCircleRoot { modulus: m });
            }
        }
    }
    let roots = poly_roots(&core.to_f64()).unwrap_or_default();
    if let Some(m) = roots.on_unit_circle() {
        return Err(Error::UnitCircleRoot { modulus: m });
    }
    let inside: Vec<Complex64> = roots.expanded().into_iter().filter(|z| z.norm() < 1.0).collect();
    let mut acc = alloc::vec![Complex64::new(1.0, 0.0)];
    for r in &inside {
        let mut next = alloc::vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (i, c) in acc.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        acc = next;
    }
    let mut candidate = None;
    'tol: for (tol, max_den) in [(1e-12, 1_000_000i64), (1e-10, 100_000_000), (1e-8, 1_000_000_000)] {
        let mut coeffs = Vec::with_capacity(acc.len());
        for c in &acc {
            match rationalize(c.re, tol * c.re.abs().max(1.0), max_den) {
                Some(r) => coeffs.push(r),
                None => continue 'tol,
            }
        }
        let h = Poly::new(coeffs);
        if core.div_rem(&h).1.is_zero() {
            candidate = Some(h);
            break;
        }
    }
    let h_core = candidate.ok_or(Error::IrrationalSplit)?;
    let h = h_core.shift(zeros);
    // restore multiplicities
    let mut out = Poly::one();
    let mut rem = d.clone();
    loop {
        let c = rem.gcd(&h);
        if c.degree().unwrap_or(0) == 0 {
            break;
        }
        out = out.mul(&c);
        rem = rem.div_rem(&c).0;
    }
    Ok(out)
}

/// Exact WHF by diagonalising `b` over `Q[z]`, splitting the invariant
/// factors by zero location and row-reducing the unstable part.
pub fn smith_whf_factorize(b: &PolyMat<Rational>) -> Result<WhfTriple<Rational>> {
    let n = b.rows();
    if n != b.cols() {
        return Err(Error::NotSquare { rows: n, cols: b.cols() });
    }
    let det = b.det_poly()?;
    if det.is_zero() {
        return Err(Error::ZeroDeterminant);
    }
    let d_in = inside_factor(&det)?;

    // b = linv · m · rinv with m driven to diagonal form
    let mut m = b.entries();
    let mut linv = identity_entries(n);
    let mut rinv = identity_entries(n);
    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if let Some(dg) = m[i][j].degree() {
                        if best.is_none_or(|(_, _, bd)| dg < bd) {
                            best = Some((i, j, dg));
                        }
                    }
                }
            }
            let (pi, pj, _) = best.ok_or(Error::ZeroDeterminant)?;
            m.swap(t, pi);
            swap_cols(&mut linv, t, pi);
            swap_cols(&mut m, t, pj);
            rinv.swap(t, pj);
            let mut clean = true;
            for i in t + 1..n {
                if m[i][t].is_zero() {
                    continue;
                }
                let (q, r) = m[i][t].div_rem(&m[t][t]);
                row_axpy(&mut m, i, &q.neg(), t);
                col_axpy(&mut linv, t, &q, i);
                clean &= r.is_zero();
            }
            for j in t + 1..n {
                if m[t][j].is_zero() {
                    continue;
                }
                let (q, r) = m[t][j].div_rem(&m[t][t]);
                col_axpy(&mut m, j, &q.neg(), t);
                row_axpy(&mut rinv, t, &q, j);
                clean &= r.is_zero();
            }
            if clean {
                break;
            }
        }
    }

    // split each diagonal entry into stable and unstable parts
    let mut pcur = linv;
    let mut gcur = rinv;
    for t in 0..n {
        let lam = &m[t][t];
        let lam_f = lam.gcd(&d_in);
        let lam_p = lam.div_rem(&lam_f).0;
        for row in pcur.iter_mut() {
            row[t] = row[t].mul(&lam_p);
        }
        for c in gcur[t].iter_mut() {
            *c = c.mul(&lam_f);
        }
    }

    // row-reduce g, compensating in p
    let mut iterations = 0;
    loop {
        let gm = PolyMat::from_entries(&gcur);
        let degs = gm.row_degrees();
        let lead = gm.leading_row_matrix();
        let Some(v) = lead.left_kernel_vector() else { break };
        iterations += 1;
        if iterations > 1000 {
            return Err(Error::Singular("row reduction did not terminate"));
        }
        let istar = (0..n).filter(|&i| !v[i].is_zero()).max_by_key(|&i| (degs[i], core::cmp::Reverse(i))).expect("nonzero kernel vector");
        for i in 0..n {
            if i == istar || v[i].is_zero() {
                continue;
            }
            let c = Poly::monomial(v[i].clone() / v[istar].clone(), degs[istar] - degs[i]);
            row_axpy(&mut gcur, istar, &c, i);
            col_axpy(&mut pcur, i, &c.neg(), istar);
        }
    }

    let g = PolyMat::from_entries(&gcur);
    let degs = g.row_degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| core::cmp::Reverse(degs[i]));
    let g = g.permute_rows(&order);
    let p = PolyMat::from_entries(&pcur).permute_cols(&order);
    let indices: Vec<usize> = order.iter().map(|&i| degs[i]).collect();
    let f = f_from_g(&g, &indices)?;
    Ok(WhfTriple { p, indices, f, mode: NormalizationMode::Raw, row_permutation: None })
}

/// `f = s^{-1} g`
pub fn f_from_g<T: Scalar>(g: &PolyMat<T>, indices: &[usize]) -> Result<LaurentMat<T>> {
    let powers: Vec<i64> = indices.iter().map(|&x| -(x as i64)).collect();
    LaurentMat::diag_monomials(&powers).mul(&g.to_laurent())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return alloc::vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Unique representative of the equivalence class of a generic WHF.
///
/// `k = 0`: `p_0 = I`. `k > 0`: `p_0 = [[I, 0], [*, I]]` and the upper right
/// `k × (n-k)` block of `p_1` is zero. When the leading `k × k` block of `p_0`
/// is singular, rows are reordered by the maximal-determinant minor and the
/// pattern holds for the reordered rows; the order is recorded.
pub fn canonicalize<T: Scalar>(t: &WhfTriple<T>) -> Result<WhfTriple<T>> {
    let pi = t
        .partial_indices()
        .ok_or_else(|| Error::InvalidArgument(alloc::format!("non-generic partial indices {:?}", t.indices)))?;
    let (n, k) = (pi.n, pi.k);
    let p0 = t.p.coeff(0);
    let (u0, perm) = if k == 0 {
        (p0.inverse()?, None)
    } else {
        let lead = p0.block(0, n, 0, k);
        let mut best: Option<(Vec<usize>, f64)> = None;
        for rows in subsets(n, k) {
            let minor = Mat::from_rows(&rows.iter().map(|&r| lead.row(r).to_vec()).collect::<Vec<_>>());
            let d = minor.det()?;
            if d.is_zero() {
                continue;
            }
            let mag = d.magnitude();
            // prefer the natural order whenever it is admissible
            let natural = rows.iter().enumerate().all(|(i, &r)| i == r);
            if natural {
                best = Some((rows, f64::INFINITY));
                break;
            }
            if best.as_ref().is_none_or(|(_, bm)| mag > *bm) {
                best = Some((rows, mag));
            }
        }
        let (rows, _) = best.ok_or(Error::SingularLeadingBlock)?;
        let mut perm = rows.clone();
        perm.extend((0..n).filter(|r| !rows.contains(r)));
        let is_identity = perm.iter().enumerate().all(|(i, &r)| i == r);
        let pp0 = p0.permute_rows(&perm);
        let p11 = pp0.block(0, k, 0, k);
        let p12 = pp0.block(0, k, k, n);
        let p21 = pp0.block(k, n, 0, k);
        let p22 = pp0.block(k, n, k, n);
        let p11i = p11.inverse()?;
        let schur = p22.sub(&p21.mul(&p11i).mul(&p12));
        let mut a = Mat::identity(n);
        a.set_block(0, 0, &p11i);
        let mut bm = Mat::identity(n);
        bm.set_block(0, k, &p12.neg());
        let mut c = Mat::identity(n);
        c.set_block(k, k, &schur.inverse()?);
        (a.mul(&bm).mul(&c), if is_identity { None } else { Some(perm) })
    };
    let p_u0 = t.p.mul_const(&u0)?;
    let mut nmat = Mat::zeros(n, n);
    if k > 0 {
        let rows = perm.clone().unwrap_or_else(|| (0..n).collect());
        let p1 = p_u0.coeff(1).permute_rows(&rows);
        nmat.set_block(0, k, &p1.block(0, k, k, n).neg());
    }
    // U = u0 (I + N z), U^{-1} = (I - N z) u0^{-1}
    let u = PolyMat::from_coeffs(alloc::vec![u0.clone(), u0.mul(&nmat)]);
    let u0inv = u0.inverse()?;
    let uinv = PolyMat::from_coeffs(alloc::vec![u0inv.clone(), nmat.neg().mul(&u0inv)]);
    let p_new = t.p.mul(&u)?;
    let pos: Vec<i64> = t.indices.iter().map(|&x| x as i64).collect();
    let neg: Vec<i64> = pos.iter().map(|x| -x).collect();
    let f_new = LaurentMat::diag_monomials(&neg)
        .mul(&uinv.to_laurent())?
        .mul(&LaurentMat::diag_monomials(&pos))?
        .mul(&t.f)?;
    if f_new.has_pole_at_infinity() {
        return Err(Error::NotPolynomial);
    }
    Ok(WhfTriple {
        p: p_new,
        indices: t.indices.clone(),
        f: f_new,
        mode: NormalizationMode::Canonical,
        row_permutation: perm,
    })
}

/// Fold a constant out of `f` on the right: natural mode uses `f_0`, the
/// `b0_identity` mode uses `b_0 = b(0)`. Returns the new triple and the folded
/// matrix, so that `b(z) = p s f_new · folded`.
pub fn normalize<T: Scalar>(t: &WhfTriple<T>, mode: NormalizationMode) -> Result<(WhfTriple<T>, Mat<T>)> {
    let folded = match mode {
        NormalizationMode::Natural => t.f_coeff(0),
        NormalizationMode::B0Identity => {
            let b0 = compose(t)?.coeff(0);
            if b0.det()?.is_zero() {
                return Err(Error::Singular("b0 (informational delay); b0_identity normalisation undefined"));
            }
            b0
        }
        _ => return Err(Error::InvalidArgument(alloc::format!("{mode:?} is not a normalisation"))),
    };
    let inv = folded.inverse()?;
    let f = t.f.mul_const(&inv)?;
    Ok((WhfTriple { p: t.p.clone(), indices: t.indices.clone(), f, mode, row_permutation: t.row_permutation.clone() }, folded))
}

/// Multiply `b` by a real Blaschke factor that moves the determinantal zero at
/// `alpha` to `1/alpha` while keeping `b(z) b'(1/z)` unchanged.
pub fn blaschke_mirror_real(b: &PolyMat<f64>, alpha: f64) -> Result<PolyMat<f64>> {
    let n = b.rows();
    if n != b.cols() {
        return Err(Error::NotSquare { rows: n, cols: b.cols() });
    }
    if (alpha.abs() - 1.0).abs() <= UNIT_CIRCLE_TOL {
        return Err(Error::UnitCircleRoot { modulus: alpha.abs() });
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("alpha={alpha}")));
    }
    let ba = b.eval(Complex64::new(alpha, 0.0)).map(|c| c.re);
    let scale = b.coeffs().iter().map(Mat::max_abs).fold(0.0, f64::max).max(1.0);
    let svd = ba.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = 1e-8 * smax.max(scale * 1e-8);
    let null = svd.singular_values.iter().filter(|&&s| s <= tol).count();
    if null == 0 {
        return Err(Error::NotARoot(alpha));
    }
    if null > 1 {
        return Err(Error::KernelDimension(null));
    }
    let imin = svd.singular_values.imin();
    let vt = svd.v_t.expect("requested");
    let q: Vec<f64> = (0..n).map(|j| vt[(imin, j)]).collect();
    let qmat = householder_to_last(&q);
    let c = b.mul_const(&Mat::from_dmatrix(&qmat))?;
    // last column of c vanishes at alpha: divide by (z - alpha), multiply by (1 - alpha z)
    let mut cols: Vec<Vec<Poly<f64>>> = c.entries();
    for row in cols.iter_mut() {
        let e = &row[n - 1];
        let quot = synthetic_div(e.coeffs(), alpha);
        row[n - 1] = Poly::new(quot).mul(&Poly::new(alloc::vec![1.0, -alpha]));
    }
    PolyMat::from_entries(&cols).mul_const(&Mat::from_dmatrix(&qmat.transpose()))
}

/// Quotient of `c(z) / (z - a)`, dropping the (near-zero) remainder.
fn synthetic_div(c: &[f64], a: f64) -> Vec<f64> {
    if c.len() <= 1 {
        return Vec::new();
    }
    let d = c.len() - 1;
    let mut q = alloc::vec![0.0; d];
    q[d - 1] = c[d];
    for i in (1..d).rev() {
        q[i - 1] = c[i] + a * q[i];
    }
    q
}

/// Orthogonal matrix whose last column is the unit vector `q`.
fn householder_to_last(q: &[f64]) -> DMatrix<f64> {
    let n = q.len();
    let mut v: Vec<f64> = q.to_vec();
    v[n - 1] -= 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut h = DMatrix::<f64>::identity(n, n);
    if vv < 1e-30 {
        return h;
    }
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] -= 2.0 * v[i] * v[j] / vv;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn q(rows: &[&[(i64, i64)]]) -> Mat<Rational> {
        Mat::from_rows(&rows.iter().map(|r| r.iter().map(|&(a, b)| ratio(a, b)).collect()).collect::<Vec<_>>())
    }

    fn b_eps(eps: Rational) -> PolyMat<Rational> {
        PolyMat::from_entries(&[
            alloc::vec![Poly::monomial(ratio(1, 1), 2), Poly::zero()],
            alloc::vec![Poly::monomial(eps, 1), Poly::one()],
        ])
    }

    #[test]
    fn diag_z_one() {
        let b = PolyMat::<Rational>::diag_monomials(&[1, 0]);
        let t = smith_whf_factorize(&b).unwrap();
        assert_eq!(t.indices, alloc::vec![1, 0]);
        assert_eq!(compose(&t).unwrap(), b);
        let c = canonicalize(&t).unwrap();
        assert_eq!(c.p, PolyMat::identity(2));
        assert_eq!(c.f, LaurentMat::new(2, 2, 0, alloc::vec![Mat::identity(2)]).unwrap());
    }

    #[test]
    fn all_outside() {
        let b = PolyMat::from_coeffs(alloc::vec![Mat::identity(2), Mat::diag(&[ratio(1, 2), ratio(1, 2)])]);
        let t = smith_whf_factorize(&b).unwrap();
        assert_eq!(t.indices, alloc::vec![0, 0]);
        let (c, folded) = normalize(&canonicalize(&t).unwrap(), NormalizationMode::Natural).unwrap();
        assert_eq!(c.p, b);
        assert_eq!(folded, Mat::identity(2));
        assert_eq!(c.f_coeff(0), Mat::identity(2));
    }

    #[test]
    fn b_epsilon_indices() {
        assert_eq!(smith_whf_factorize(&b_eps(ratio(0, 1))).unwrap().indices, alloc::vec![2, 0]);
        let t = smith_whf_factorize(&b_eps(ratio(1, 1000))).unwrap();
        assert_eq!(t.indices, alloc::vec![1, 1]);
        assert_eq!(compose(&t).unwrap(), b_eps(ratio(1, 1000)));
        assert_eq!(
            generic_indices_from_root_count(&b_eps(ratio(0, 1)).to_f64()).unwrap(),
            PartialIndices { kappa: 1, k: 0, n: 2 }
        );
    }

    #[test]
    fn unit_circle_rejected() {
        let b = PolyMat::from_coeffs(alloc::vec![q(&[&[(1, 1)]]), q(&[&[(-1, 1)]])]);
        assert!(matches!(smith_whf_factorize(&b), Err(Error::UnitCircleRoot { .. })));
        // z^2 + 1 has roots +-i
        let b = PolyMat::from_coeffs(alloc::vec![q(&[&[(1, 1)]]), q(&[&[(0, 1)]]), q(&[&[(1, 1)]])]);
        assert!(matches!(smith_whf_factorize(&b), Err(Error::UnitCircleRoot { .. })));
    }

    #[test]
    fn pure_delay_b0_identity_fails() {
        let b = PolyMat::<Rational>::diag_monomials(&[1, 1]);
        let t = canonicalize(&smith_whf_factorize(&b).unwrap()).unwrap();
        assert_eq!(t.partial_indices(), Some(PartialIndices { kappa: 1, k: 0, n: 2 }));
        assert!(normalize(&t, NormalizationMode::B0Identity).is_err());
    }

    #[test]
    fn scalar_mirror() {
        let b = PolyMat::from_coeffs(alloc::vec![Mat::from_rows(&[alloc::vec![1.0]]), Mat::from_rows(&[alloc::vec![2.0]])]);
        let m = blaschke_mirror_real(&b, -0.5).unwrap();
        assert!((m.coeff(0)[(0, 0)].abs() - 2.0).abs() < 1e-12);
        assert!((m.coeff(1)[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(matches!(blaschke_mirror_real(&b, 1.0), Err(Error::UnitCircleRoot { .. })));
        assert!(matches!(blaschke_mirror_real(&b, 0.3), Err(Error::NotARoot(_))));
    }

    #[test]
    fn enumeration_and_feasibility() {
        assert_eq!(PartialIndices::enumerate(2, 0), alloc::vec![PartialIndices { kappa: 0, k: 0, n: 2 }]);
        assert_eq!(PartialIndices::enumerate(2, 3).len(), 7);
        assert!(PartialIndices { kappa: 3, k: 0, n: 2 }.feasible(3));
        assert!(!PartialIndices { kappa: 3, k: 1, n: 2 }.feasible(3));
        assert_eq!(PartialIndices::from_index_vector(&[2, 1]), Some(PartialIndices { kappa: 1, k: 1, n: 2 }));
        assert_eq!(PartialIndices::from_index_vector(&[2, 0]), None);
    }
}
