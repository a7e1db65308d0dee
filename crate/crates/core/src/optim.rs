//! Box-constrained minimisers: an adaptive Nelder-Mead simplex and a
//! projected quasi-Newton (BFGS) method with Armijo backtracking.
//!
//! Objectives signal an inadmissible point with `None` (simplex) or `+∞`.

use alloc::vec::Vec;

#[allow(unused_imports)] // method resolution needs it only without std
use num_traits::Float;

#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(dim: usize) -> Self {
        Bounds { lower: alloc::vec![f64::NEG_INFINITY; dim], upper: alloc::vec![f64::INFINITY; dim] }
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead with dimension-adaptive coefficients. `steps[i]` is the
/// initial edge along coordinate `i`; stops when the spread of simplex values
/// falls below `tol`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], bounds: &Bounds, max_iter: usize, tol: f64) -> OptimResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, shrink) =
        if n > 2 { (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf) } else { (1.0, 2.0, 0.5, 0.5) };
    let mut evals = 0;
    let mut eval = |x: &mut Vec<f64>, evals: &mut usize| -> f64 {
        bounds.project(x);
        *evals += 1;
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut start = x0.to_vec();
    let f0 = eval(&mut start, &mut evals);
    let mut simplex: Vec<(Vec<f64>, f64)> = alloc::vec![(start.clone(), f0)];
    for i in 0..n {
        let mut x = start.clone();
        x[i] += steps[i];
        if x[i] > bounds.upper[i] {
            x[i] = start[i] - steps[i];
        }
        let v = eval(&mut x, &mut evals);
        simplex.push((x, v));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if best.is_finite() && worst - best <= tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut centroid = alloc::vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let mut xr = along(alpha);
        let fr = eval(&mut xr, &mut evals);
        if fr < simplex[0].1 {
            let mut xe = along(alpha * gamma);
            let fe = eval(&mut xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (mut xc, fc) = if fr < simplex[n].1 {
            let mut xc = along(alpha * rho);
            let fc = eval(&mut xc, &mut evals);
            (xc, fc)
        } else {
            let mut xc = along(-rho);
            let fc = eval(&mut xc, &mut evals);
            (xc, fc)
        };
        if fc < simplex[n].1.min(fr) {
            bounds.project(&mut xc);
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&x_best) {
                *xi = bi + shrink * (*xi - bi);
            }
            *v = eval(x, &mut evals);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    OptimResult { x, value, iterations, evaluations: evals, converged }
}

/// Settings for [`bfgs_box`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the sup-norm of the projected gradient falls below this.
    pub gtol: f64,
    /// Stop after three consecutive decreases smaller than this.
    pub ftol: f64,
    /// Cap on the sup-norm of a trial step.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { max_iter: 500, gtol: 1e-8, ftol: 1e-12, max_step: 1.0 }
    }
}

fn projected_gradient(x: &[f64], g: &[f64], b: &Bounds) -> Vec<f64> {
    x.iter()
        .zip(g)
        .enumerate()
        .map(|(i, (&xi, &gi))| {
            let at_low = xi <= b.lower[i] && gi > 0.0;
            let at_high = xi >= b.upper[i] && gi < 0.0;
            if at_low || at_high { 0.0 } else { gi }
        })
        .collect()
}

/// Projected BFGS on a box. `fg` returns value and gradient, or `None` when
/// the point is inadmissible (treated as a failed trial step).
pub fn bfgs_box<F>(mut fg: F, x0: &[f64], bounds: &Bounds, opts: BfgsOptions) -> OptimResult
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut evals = 1;
    let Some((mut f, mut g)) = fg(&x).filter(|(v, g)| v.is_finite() && g.iter().all(|d| d.is_finite())) else {
        return OptimResult { x, value: f64::INFINITY, iterations: 0, evaluations: evals, converged: false };
    };
    let identity = || {
        let mut h = alloc::vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = 1.0;
        }
        h
    };
    let mut h = identity();
    let mut fresh = true;
    let mut small_steps = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let pg = projected_gradient(&x, &g, bounds);
        if pg.iter().fold(0.0f64, |m, v| m.max(v.abs())) < opts.gtol {
            converged = true;
            break;
        }
        iterations += 1;
        let free: Vec<bool> = pg.iter().zip(&g).map(|(p, gi)| *p != 0.0 || *gi == 0.0).collect();
        let mut d = alloc::vec![0.0; n];
        for i in 0..n {
            if free[i] {
                d[i] = -(0..n).filter(|&j| free[j]).map(|j| h[i * n + j] * g[j]).sum::<f64>();
            }
        }
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            h = identity();
            fresh = true;
            for i in 0..n {
                d[i] = -pg[i];
            }
        }
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut t = if dmax > opts.max_step { opts.max_step / dmax } else { 1.0 };
        let mut accepted = None;
        for _ in 0..50 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            bounds.project(&mut xn);
            evals += 1;
            if let Some((fnew, gnew)) = fg(&xn) {
                let decrease: f64 = xn.iter().zip(&x).zip(&g).map(|((a, b), gi)| (a - b) * gi).sum();
                if fnew.is_finite() && gnew.iter().all(|v| v.is_finite()) && fnew <= f + 1e-4 * decrease.min(0.0) {
                    accepted = Some((xn, fnew, gnew));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            if fresh {
                break;
            }
            h = identity();
            fresh = true;
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if sy > 1e-12 * ss.sqrt() * yy.sqrt() {
            if fresh {
                let c = sy / yy;
                h.iter_mut().for_each(|v| *v *= c);
                fresh = false;
            }
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let df = f - fnew;
        x = xn;
        f = fnew;
        g = gnew;
        if df < opts.ftol * (1.0 + f.abs()) {
            small_steps += 1;
            if small_steps >= 3 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    OptimResult { x, value: f, iterations, evaluations: evals, converged }
}
