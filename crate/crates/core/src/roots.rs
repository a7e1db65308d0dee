//! Polynomial roots via companion-matrix eigenvalues.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::poly::Poly;

/// Roots closer than this are merged into one root with multiplicity.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Roots with modulus within this band around 1 are treated as unit-circle roots.
pub const UNIT_CIRCLE_TOL: f64 = 1e-8;
/// Leading coefficients below this fraction of the largest one are treated as zero.
const LEADING_TRIM: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Multiset of complex roots, clustered by [`CLUSTER_TOL`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn total(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn count_inside(&self) -> usize {
        self.roots.iter().filter(|r| r.value.norm() < 1.0 - UNIT_CIRCLE_TOL).map(|r| r.multiplicity).sum()
    }

    pub fn count_outside(&self) -> usize {
        self.roots.iter().filter(|r| r.value.norm() > 1.0 + UNIT_CIRCLE_TOL).map(|r| r.multiplicity).sum()
    }

    pub fn on_unit_circle(&self) -> Option<f64> {
        self.roots.iter().map(|r| r.value.norm()).find(|m| (m - 1.0).abs() <= UNIT_CIRCLE_TOL)
    }

    /// Smallest root modulus (infinity when there are no roots).
    pub fn min_modulus(&self) -> f64 {
        self.roots.iter().map(|r| r.value.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|r| r.value.norm()).fold(0.0, f64::max)
    }

    /// All roots repeated by multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots.iter().flat_map(|r| core::iter::repeat_n(r.value, r.multiplicity)).collect()
    }
}

/// Roots of a real polynomial; `None` for the zero polynomial.
pub fn poly_roots(p: &Poly<f64>) -> Option<RootSet> {
    let c = p.coeffs();
    if c.is_empty() {
        return None;
    }
    let scale = c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut hi = c.len() - 1;
    while hi > 0 && c[hi].abs() <= LEADING_TRIM * scale {
        hi -= 1;
    }
    let lo = c.iter().take_while(|x| **x == 0.0).count();
    let mut raw: Vec<Complex64> = Vec::new();
    raw.extend(core::iter::repeat_n(Complex64::new(0.0, 0.0), lo.min(hi)));
    if hi > lo {
        let core_coeffs = &c[lo..=hi];
        let d = core_coeffs.len() - 1;
        let lead = core_coeffs[d];
        // companion matrix with the normalised coefficients in the last column
        let mut m = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            m[(i, d - 1)] = -core_coeffs[i] / lead;
        }
        let eig = m.complex_eigenvalues();
        let trimmed = Poly::new(core_coeffs.to_vec());
        for z in eig.iter() {
            raw.push(polish(&trimmed, *z));
        }
    }
    Some(cluster(raw))
}

fn polish(p: &Poly<f64>, z0: Complex64) -> Complex64 {
    let dp = p.derivative();
    let mut z = z0;
    let mut res = p.eval_complex(z).norm();
    for _ in 0..3 {
        let d = dp.eval_complex(z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - p.eval_complex(z) / d;
        let r = p.eval_complex(cand).norm();
        if r.is_finite() && r < res {
            z = cand;
            res = r;
        } else {
            break;
        }
    }
    z
}

fn cluster(mut raw: Vec<Complex64>) -> RootSet {
    raw.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(core::cmp::Ordering::Equal));
    let mut roots: Vec<Root> = Vec::new();
    'outer: for z in raw {
        for r in roots.iter_mut() {
            if (r.value - z).norm() <= CLUSTER_TOL {
                let m = r.multiplicity as f64;
                r.value = (r.value * m + z) / (m + 1.0);
                r.multiplicity += 1;
                continue 'outer;
            }
        }
        roots.push(Root { value: z, multiplicity: 1 });
    }
    for r in roots.iter_mut() {
        if r.value.im.abs() <= CLUSTER_TOL {
            r.value.im = 0.0;
        }
    }
    RootSet { roots }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_root_at_zero() {
        let r = poly_roots(&Poly::new(alloc::vec![0.0, 0.0, 1.0])).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert_eq!(r.roots[0].multiplicity, 2);
        assert_eq!(r.roots[0].value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn linear_root() {
        let r = poly_roots(&Poly::new(alloc::vec![1.0, -2.0])).unwrap();
        assert_eq!(r.total(), 1);
        assert!((r.roots[0].value.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_has_no_roots() {
        assert_eq!(poly_roots(&Poly::new(alloc::vec![2.5])).unwrap().total(), 0);
        assert!(poly_roots(&Poly::<f64>::zero()).is_none());
    }

    #[test]
    fn complex_pair_counts() {
        // z^2 + 4 has roots +-2i, both outside
        let r = poly_roots(&Poly::new(alloc::vec![4.0, 0.0, 1.0])).unwrap();
        assert_eq!(r.count_outside(), 2);
        assert_eq!(r.count_inside(), 0);
        assert!(r.on_unit_circle().is_none());
    }
}
