//! Model selection helpers: BIC, the regime grid, residual diagnostics and
//! the long-run rotation of the shocks.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // method resolution needs it only without std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::densities::ShockDensity;
use crate::error::{Error, Result};
use crate::estimate::{fit, OptimSchedule};
use crate::mat::Mat;
use crate::model::{Dataset, Model, Normalization, SvarmaSpec};
use crate::special::chi2_sf;
use crate::whf::PartialIndices;

/// `-2 T L_T + n_free ln T`
pub fn bic(loglik_avg: f64, n_free: usize, t: usize) -> f64 {
    let tf = t as f64;
    -2.0 * tf * loglik_avg + n_free as f64 * tf.ln()
}

/// All estimated parameters: system `n²(p+q)`, off-diagonal `B`, scales, shape parameters.
pub fn n_free(n: usize, p: usize, q: usize, d: usize) -> usize {
    n * n * (p + q) + n * (n - 1) + n + d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridTask {
    pub p: usize,
    pub q: usize,
    pub kappa: usize,
    pub k: usize,
}

/// Every `(p, q, κ, k)` with `p ≤ p_max`, `q ≤ q_max` and a feasible regime,
/// ordered by `p`, then `q`, then `(κ, k)`.
pub fn grid_tasks(n: usize, p_max: usize, q_max: usize) -> Vec<GridTask> {
    let mut out = Vec::new();
    for p in 0..=p_max {
        for q in 0..=q_max {
            for ix in PartialIndices::enumerate(n, q) {
                out.push(GridTask { p, q, kappa: ix.kappa, k: ix.k });
            }
        }
    }
    out
}

/// Seed of grid task `index`, so that results do not depend on scheduling.
pub fn task_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// One fitted cell of the grid. Failed fits keep their row with `error` set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub p: usize,
    pub q: usize,
    pub kappa: usize,
    pub k: usize,
    pub loglik: Option<f64>,
    pub n_free: usize,
    pub bic: Option<f64>,
    pub converged: bool,
    /// Smallest Jarque-Bera p-value over the residual components.
    pub min_jb_p: Option<f64>,
    /// Smallest Ljung-Box p-value over components, absolute values and squares.
    pub min_lb_p: Option<f64>,
    pub error: Option<String>,
}

/// Fit one grid cell with the shock families of `densities`.
pub fn fit_task(
    data: &Dataset,
    task: GridTask,
    densities: &[ShockDensity],
    normalization: Normalization,
    schedule: &OptimSchedule,
    seed: u64,
) -> GridRow {
    let n = data.n;
    let d: usize = densities.iter().map(|x| x.lambda.len()).sum();
    let mut row = GridRow {
        p: task.p,
        q: task.q,
        kappa: task.kappa,
        k: task.k,
        loglik: None,
        n_free: n_free(n, task.p, task.q, d),
        bic: None,
        converged: false,
        min_jb_p: None,
        min_lb_p: None,
        error: None,
    };
    let fitted = SvarmaSpec::new(n, task.p, task.q, task.kappa, task.k, normalization, densities.to_vec())
        .and_then(|spec| fit(&spec, data, schedule, seed));
    match fitted {
        Ok(r) => {
            row.loglik = Some(r.loglik);
            row.n_free = r.n_free;
            row.bic = Some(r.bic);
            row.converged = r.converged;
            if let Some(diag) = &r.diagnostics {
                let min = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
                row.min_jb_p = Some(min(&mut diag.iter().map(|c| c.jarque_bera.p_value)));
                row.min_lb_p = Some(min(&mut diag.iter().flat_map(|c| {
                    [c.ljung_box.p_value, c.ljung_box_abs.p_value, c.ljung_box_sq.p_value]
                })));
            }
        }
        Err(e) => row.error = Some(alloc::format!("{e}")),
    }
    row
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    /// Index of the smallest BIC; ties go to the earlier row.
    pub best: Option<usize>,
}

impl GridResult {
    pub fn new(rows: Vec<GridRow>) -> Self {
        let best = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.bic.filter(|b| b.is_finite()).map(|b| (i, b)))
            .fold(None, |acc: Option<(usize, f64)>, (i, b)| match acc {
                Some((_, bb)) if bb <= b => acc,
                _ => Some((i, b)),
            })
            .map(|(i, _)| i);
        GridResult { rows, best }
    }

    pub fn best_row(&self) -> Option<&GridRow> {
        self.best.map(|i| &self.rows[i])
    }

    /// Rows sharing the orders `(p, q)`; these differ only in the regime.
    pub fn group(&self, p: usize, q: usize) -> impl Iterator<Item = &GridRow> {
        self.rows.iter().filter(move |r| r.p == p && r.q == q)
    }
}

/// Sequential grid over `p ≤ p_max`, `q ≤ q_max` and every regime.
pub fn grid(
    data: &Dataset,
    p_max: usize,
    q_max: usize,
    densities: &[ShockDensity],
    normalization: Normalization,
    schedule: &OptimSchedule,
    seed: u64,
) -> GridResult {
    let rows = grid_tasks(data.n, p_max, q_max)
        .into_iter()
        .enumerate()
        .map(|(i, t)| fit_task(data, t, densities, normalization, schedule, task_seed(seed, i)))
        .collect();
    GridResult::new(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn moments(x: &[f64]) -> Result<(f64, f64)> {
    let t = x.len() as f64;
    let mean = x.iter().sum::<f64>() / t;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t;
    if !(var > 0.0) {
        return Err(Error::ConstantSeries);
    }
    Ok((mean, var))
}

/// `T/6 (S² + (K-3)²/4)` against `χ²(2)`.
pub fn jarque_bera(x: &[f64]) -> Result<TestResult> {
    let (mean, var) = moments(x)?;
    let t = x.len() as f64;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / t;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / t;
    let skew = m3 / var.powf(1.5);
    let kurt = m4 / (var * var);
    let statistic = t / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    Ok(TestResult { statistic, p_value: chi2_sf(statistic, 2.0) })
}

/// `T(T+2) Σ_h ρ̂_h² / (T-h)` against `χ²(lags)`.
pub fn ljung_box(x: &[f64], lags: usize) -> Result<TestResult> {
    let (mean, var) = moments(x)?;
    let t = x.len();
    if lags == 0 || lags >= t {
        return Err(Error::InvalidArgument("lag count must be in 1..T".into()));
    }
    let tf = t as f64;
    let c0 = var * tf;
    let mut statistic = 0.0;
    for h in 1..=lags {
        let ch: f64 = (h..t).map(|s| (x[s] - mean) * (x[s - h] - mean)).sum();
        let rho = ch / c0;
        statistic += rho * rho / (tf - h as f64);
    }
    statistic *= tf * (tf + 2.0);
    Ok(TestResult { statistic, p_value: chi2_sf(statistic, lags as f64) })
}

/// Normality and whiteness tests on one residual component, its absolute value and its square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDiagnostics {
    pub component: usize,
    pub jarque_bera: TestResult,
    pub ljung_box: TestResult,
    pub ljung_box_abs: TestResult,
    pub ljung_box_sq: TestResult,
}

pub const LB_LAGS: usize = 8;

/// Diagnostics for every column of a `T × n` row-major residual array.
pub fn diagnose(residuals: &[f64], n: usize) -> Result<Vec<ComponentDiagnostics>> {
    if n == 0 || residuals.len() % n != 0 {
        return Err(Error::DataShape { expected: n, got: residuals.len() });
    }
    (0..n)
        .map(|i| {
            let col: Vec<f64> = residuals.iter().skip(i).step_by(n).copied().collect();
            let abs: Vec<f64> = col.iter().map(|v| v.abs()).collect();
            let sq: Vec<f64> = col.iter().map(|v| v * v).collect();
            Ok(ComponentDiagnostics {
                component: i,
                jarque_bera: jarque_bera(&col)?,
                ljung_box: ljung_box(&col, LB_LAGS)?,
                ljung_box_abs: ljung_box(&abs, LB_LAGS)?,
                ljung_box_sq: ljung_box(&sq, LB_LAGS)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    /// Orthogonal matrix acting on the shocks.
    pub q: Mat<f64>,
    /// `B Σ Q`
    pub impact: Mat<f64>,
    /// Long-run response `a(1)^{-1} b(1) B Σ Q`.
    pub long_run: Mat<f64>,
    /// Responses to the rotated shocks, `k_j Σ Q` for `j = 0..=horizon`.
    pub irf: Vec<Mat<f64>>,
}

/// Rotate the shocks so that the long-run response of `variable` to `shock` is zero.
pub fn rotate_long_run(model: &Model, shock: usize, variable: usize, horizon: usize) -> Result<Rotation> {
    let n = model.n;
    if shock >= n || variable >= n {
        return Err(Error::InvalidArgument("target index out of range".into()));
    }
    if !model.validate().stable {
        return Err(Error::Unstable);
    }
    let lr = model.transfer_at(num_complex::Complex64::new(1.0, 0.0))?.map(|c| c.re);
    let lr = Mat::from_dmatrix(&lr);
    let row_scale = (0..n).fold(0.0f64, |m, c| m.max(lr[(variable, c)].abs()));
    if row_scale == 0.0 {
        return Err(Error::StructurallyZero);
    }
    let mut q = Mat::identity(n);
    let target = lr[(variable, shock)];
    if target.abs() > 1e-15 * row_scale {
        let partner = (0..n)
            .filter(|&c| c != shock)
            .max_by(|&a, &b| lr[(variable, a)].abs().total_cmp(&lr[(variable, b)].abs()))
            .ok_or(Error::StructurallyZero)?;
        let other = lr[(variable, partner)];
        let r = target.hypot(other);
        let (c, s) = (other / r, -target / r);
        q[(shock, shock)] = c;
        q[(partner, shock)] = s;
        q[(shock, partner)] = -s;
        q[(partner, partner)] = c;
    }
    let impact = model.impact().mul(&q);
    let long_run = lr.mul(&q);
    let sq = model.sigma_mat().mul(&q);
    let irf = model.irf_unchecked(horizon).iter().map(|k| k.mul(&sq)).collect();
    Ok(Rotation { q, impact, long_run, irf })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bic_arithmetic() {
        assert!((bic(-1.0, 10, 100) - (200.0 + 10.0 * 100f64.ln())).abs() < 1e-12);
        assert!(bic(-1.0, 9, 100) < bic(-1.0, 10, 100));
    }

    #[test]
    fn grid_count_bivariate() {
        assert_eq!(grid_tasks(2, 8, 8).len(), 729);
        let q0: Vec<_> = grid_tasks(2, 3, 0);
        assert!(q0.iter().all(|t| t.kappa == 0 && t.k == 0));
        assert_eq!(q0.len(), 4);
    }

    #[test]
    fn best_row_skips_failures_and_keeps_first_tie() {
        let row = |kappa, bic: Option<f64>| GridRow {
            p: 0,
            q: 1,
            kappa,
            k: 0,
            loglik: bic.map(|b| -b),
            n_free: 10,
            bic,
            converged: bic.is_some(),
            min_jb_p: None,
            min_lb_p: None,
            error: if bic.is_none() { Some("failed".into()) } else { None },
        };
        let g = GridResult::new(alloc::vec![row(0, Some(5.0)), row(1, None), row(0, Some(f64::NAN)), row(1, Some(3.0)), row(0, Some(3.0))]);
        assert_eq!(g.best, Some(3));
        assert_eq!(g.group(0, 1).count(), 5);
        assert_eq!(GridResult::new(alloc::vec![row(0, None)]).best, None);
    }

    #[test]
    fn constant_series_rejected() {
        assert!(matches!(jarque_bera(&[1.0; 10]), Err(Error::ConstantSeries)));
        assert!(matches!(ljung_box(&[2.0; 10], 3), Err(Error::ConstantSeries)));
    }

    #[test]
    fn ljung_box_of_alternating_series_is_large() {
        let x: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = ljung_box(&x, 8).unwrap();
        assert!(r.p_value < 1e-10);
    }
}
