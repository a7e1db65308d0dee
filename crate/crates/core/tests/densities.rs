use statrs::distribution::{ChiSquared, ContinuousCDF};
use svarma_core::densities::ShockDensity;
use svarma_core::special::chi2_sf;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-12, 40)
}

/// Integral over the real line on unit panels, so the origin (where the
/// densities have a kink) is a panel edge and no bump is stepped over.
fn over_line(f: &dyn Fn(f64) -> f64) -> f64 {
    (-80..80).map(|i| integrate(f, i as f64, i as f64 + 1.0)).sum()
}

#[test]
fn shock_densities_are_standardised() {
    for d in [
        ShockDensity::gaussian(),
        ShockDensity::laplace(),
        ShockDensity::sgt(0.5, 2.0, 10.0).unwrap(),
        ShockDensity::sgt(-0.3, 1.5, 6.0).unwrap(),
        ShockDensity::sgt(0.8, 2.0, 10.0).unwrap(),
    ] {
        let pdf = |x: f64| d.log_density(x).unwrap().exp();
        let mass = over_line(&pdf);
        let mean = over_line(&|x| x * pdf(x));
        let var = over_line(&|x| x * x * pdf(x));
        assert!((mass - 1.0).abs() < 1e-8, "{d:?}: mass {mass}");
        assert!(mean.abs() < 1e-8, "{d:?}: mean {mean}");
        assert!((var - 1.0).abs() < 1e-7, "{d:?}: variance {var}");
    }
}

#[test]
fn chi_squared_tail_matches_reference() {
    for k in [1.0, 2.0, 3.0, 8.0, 24.0, 100.0] {
        let reference = ChiSquared::new(k).unwrap();
        for x in [0.01, 0.5, 1.0, 2.5, 8.0, 15.5, 40.0, 130.0] {
            let (ours, theirs) = (chi2_sf(x, k), reference.sf(x));
            assert!((ours / theirs - 1.0).abs() < 1e-9, "k={k} x={x}: {ours} vs {theirs}");
        }
    }
}
