//! Staged maximum likelihood: Gaussian, then Laplace, then the target
//! shock family, alternating a simplex search with projected BFGS inside each
//! stage, over several seeded starting points.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // method resolution needs it only without std
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::densities::{Family, ShockDensity};
use crate::error::{Error, Result};
use crate::filtering::{residuals_with, Filter};
use crate::likelihood::{information_and_stderr, loglik, value_and_score};
use crate::mat::Mat;
use crate::model::{Dataset, Layout, Model, Scheme, Slot, SvarmaSpec};
use crate::optim::{bfgs_box, nelder_mead, BfgsOptions, Bounds};
use crate::select::{bic, diagnose, ComponentDiagnostics};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub family: Family,
    /// Iteration cap for each simplex and each quasi-Newton call.
    pub max_iter: usize,
    /// Stop alternating once `L_T` moves by less than this.
    pub tol: f64,
    /// Maximum number of simplex/quasi-Newton alternations.
    pub rounds: usize,
}

impl StageConfig {
    pub fn new(family: Family) -> Self {
        StageConfig { family, max_iter: 500, tol: 1e-8, rounds: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimSchedule {
    pub stages: Vec<StageConfig>,
    pub multistarts: usize,
    /// Standard deviation of the perturbation of the moving-average parameters.
    pub perturbation: f64,
    pub sigma_min: f64,
    /// `|ℓ| ≤ skew_bound`
    pub skew_bound: f64,
    pub tail_p: (f64, f64),
    pub tail_q: (f64, f64),
    /// Shape proposals need `𝔭𝔮 > 2 + tail_margin`.
    pub tail_margin: f64,
    pub scheme: Scheme,
    /// Gradient sup-norm at which quasi-Newton stops.
    pub gtol: f64,
}

impl Default for OptimSchedule {
    fn default() -> Self {
        OptimSchedule {
            stages: alloc::vec![
                StageConfig::new(Family::Gaussian),
                StageConfig::new(Family::Laplace),
                StageConfig::new(Family::Sgt),
            ],
            multistarts: 5,
            perturbation: 0.1,
            sigma_min: 1e-6,
            skew_bound: 1.0 - 1e-3,
            tail_p: (0.2, 50.0),
            tail_q: (0.2, 1000.0),
            tail_margin: 1e-3,
            scheme: Scheme::Cb,
            gtol: 1e-8,
        }
    }
}

impl OptimSchedule {
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.stages.iter().any(|s| !(s.tol > 0.0) || s.rounds == 0) {
            return bad("stage tolerances must be positive and rounds at least one");
        }
        if !(self.skew_bound > 0.0 && self.skew_bound < 1.0) {
            return bad("skewness bound must lie in (0,1)");
        }
        if !(self.sigma_min > 0.0) || !(self.perturbation >= 0.0) || !(self.gtol > 0.0) {
            return bad("scale bound, perturbation and gradient tolerance must be positive");
        }
        if !(self.tail_p.0 > 0.0 && self.tail_p.0 < self.tail_p.1 && self.tail_q.0 > 0.0 && self.tail_q.0 < self.tail_q.1)
        {
            return bad("tail parameter ranges must be positive intervals");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub family: Family,
    pub loglik: f64,
    pub rounds: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    /// Structure with the estimated shape parameters in `densities`.
    pub spec: SvarmaSpec,
    pub t: usize,
    pub theta_hat: Vec<f64>,
    pub names: Vec<String>,
    pub loglik: f64,
    pub score_sup: f64,
    pub stderr: Option<Vec<f64>>,
    /// Asymptotic covariance of the free coordinates (scaled by `T`).
    pub sandwich: Option<Vec<Vec<f64>>>,
    pub stderr_error: Option<String>,
    pub n_free: usize,
    pub bic: f64,
    pub stages: Vec<StageReport>,
    pub converged: bool,
    /// Index of the winning start.
    pub start: usize,
    pub scheme: Scheme,
    pub diagnostics: Option<Vec<ComponentDiagnostics>>,
}

impl EstimationResult {
    pub fn model(&self) -> Result<Model> {
        Model::from_free(&self.spec, &Layout::new(&self.spec), &self.theta_hat)
    }
}

fn rank(f: Family) -> u8 {
    match f {
        Family::Gaussian => 0,
        Family::Laplace => 1,
        Family::Sgt => 2,
    }
}

/// Stage specs in order; the last one carries the target densities.
fn stage_plan(spec: &SvarmaSpec, schedule: &OptimSchedule) -> Vec<(SvarmaSpec, StageConfig)> {
    let target = spec.densities.iter().map(|d| d.family).max_by_key(|f| rank(*f)).unwrap_or(Family::Gaussian);
    let mut plan = Vec::new();
    for cfg in &schedule.stages {
        if rank(cfg.family) < rank(target) {
            plan.push((spec.with_family(cfg.family, &[]), cfg.clone()));
        }
    }
    let last = schedule.stages.iter().find(|c| c.family == target).cloned().unwrap_or_else(|| StageConfig::new(target));
    plan.push((spec.clone(), last));
    plan
}

fn ols(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    x.clone().svd(true, true).solve(y, 1e-12).map_err(|_| Error::Singular("least-squares design"))
}

/// Lagged design `[z_{t-1}', ..., z_{t-m}']` for rows `t = start..T`.
fn lag_block(z: &[f64], n: usize, m: usize, start: usize, t_len: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(t_len - start, n * m);
    for t in start..t_len {
        for l in 1..=m {
            for c in 0..n {
                x[(t - start, (l - 1) * n + c)] = z[(t - l) * n + c];
            }
        }
    }
    x
}

/// Autoregressive coefficients by a long-autoregression residual regression.
pub fn initial_ar(p: usize, q: usize, data: &Dataset) -> Result<Vec<Mat<f64>>> {
    let (n, t_len) = (data.n, data.t);
    if p == 0 {
        return Ok(Vec::new());
    }
    let h = (2 * (t_len as f64).ln().ceil() as usize).max(p + q + 1).min(t_len / 4).max(1);
    let y = &data.values;
    let ymat = |start: usize| DMatrix::from_fn(t_len - start, n, |r, c| y[(r + start) * n + c]);
    let xl = lag_block(y, n, h, h, t_len);
    let coef = ols(&xl, &ymat(h))?;
    let fitted = &xl * &coef;
    let mut e = alloc::vec![0.0; t_len * n];
    for t in h..t_len {
        for c in 0..n {
            e[t * n + c] = y[t * n + c] - fitted[(t - h, c)];
        }
    }
    let start = h + q;
    let xy = lag_block(y, n, p, start, t_len);
    let xe = lag_block(&e, n, q, start, t_len);
    let mut x = DMatrix::zeros(t_len - start, n * (p + q));
    x.view_mut((0, 0), (t_len - start, n * p)).copy_from(&xy);
    if q > 0 {
        x.view_mut((0, n * p), (t_len - start, n * q)).copy_from(&xe);
    }
    let coef = ols(&x, &ymat(start))?;
    let mut a: Vec<Mat<f64>> = (0..p)
        .map(|i| {
            let mut m = Mat::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] = coef[(i * n + c, r)];
                }
            }
            m
        })
        .collect();
    for _ in 0..200 {
        let mut poly = alloc::vec![Mat::identity(n)];
        poly.extend(a.iter().map(Mat::neg));
        let stable = crate::polymat::PolyMat::from_coeffs(poly)
            .roots_det()
            .is_ok_and(|r| r.count_outside() == r.total() && r.min_modulus() > 1.0 + 1e-3);
        if stable {
            break;
        }
        for (i, ai) in a.iter_mut().enumerate() {
            *ai = ai.scale(&0.95f64.powi(i as i32 + 1));
        }
    }
    Ok(a)
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
fn cholesky(m: &Mat<f64>) -> Result<Mat<f64>> {
    nalgebra::Cholesky::new(m.to_dmatrix()).map(|c| Mat::from_dmatrix(&c.l())).ok_or(Error::Singular("residual covariance"))
}

/// Starting model: autoregression from data, moving average at the reference
/// point (perturbed for `start > 0`), impact and scales from the residual covariance.
fn start_model(spec: &SvarmaSpec, a0: &[Mat<f64>], data: &Dataset, schedule: &OptimSchedule, seed: u64, start: usize) -> Option<Model> {
    let layout = Layout::new(spec);
    let base = {
        let mut m = Model::reference_point(spec);
        m.a = a0.to_vec();
        m
    };
    let base_free = base.pack(&layout).ok()?;
    // free τ coordinates of p(z) and g(z)
    let ma_free: Vec<usize> = layout
        .tau
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match *s {
            Slot::Free(j) if i >= layout.p_off => Some(j),
            _ => None,
        })
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ (start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut model = None;
    for attempt in 0..50 {
        let mut free = base_free.clone();
        if start > 0 || attempt > 0 {
            for &j in &ma_free {
                let z: f64 = StandardNormal.sample(&mut rng);
                free[j] += schedule.perturbation * z;
            }
        }
        let m = Model::from_free(spec, &layout, &free).ok()?;
        if m.validate().all_pass() {
            model = Some(m);
            break;
        }
    }
    let mut m = model?;
    let res = residuals_with(&Filter::new(&m).ok()?, data);
    let n = spec.n;
    let mut cov = Mat::zeros(n, n);
    for t in 0..data.t {
        for r in 0..n {
            for c in 0..n {
                cov[(r, c)] += res.u[t * n + r] * res.u[t * n + c] / data.t as f64;
            }
        }
    }
    let l = cholesky(&cov).ok()?;
    for j in 0..n {
        let d = l[(j, j)];
        m.sigma[j] = d.max(schedule.sigma_min);
        for r in 0..n {
            m.b[(r, j)] = l[(r, j)] / d;
        }
    }
    m.validate().all_pass().then_some(m)
}

fn stage_bounds(layout: &Layout, spec: &SvarmaSpec, schedule: &OptimSchedule) -> Bounds {
    let mut b = Bounds::unbounded(layout.n_free());
    for i in 0..spec.n {
        b.lower[layout.sigma_off_free() + i] = schedule.sigma_min;
    }
    let mut off = layout.lambda_off_free();
    for d in &spec.densities {
        if d.family == Family::Sgt {
            b.lower[off] = -schedule.skew_bound;
            b.upper[off] = schedule.skew_bound;
            (b.lower[off + 1], b.upper[off + 1]) = schedule.tail_p;
            (b.lower[off + 2], b.upper[off + 2]) = schedule.tail_q;
        }
        off += d.n_params();
    }
    b
}

fn shapes_ok(layout: &Layout, spec: &SvarmaSpec, x: &[f64], margin: f64) -> bool {
    let mut off = layout.lambda_off_free();
    for d in &spec.densities {
        if d.family == Family::Sgt && x[off + 1] * x[off + 2] <= 2.0 + margin {
            return false;
        }
        off += d.n_params();
    }
    true
}

/// Maximise `L_T` for one stage starting at `x0`; returns the maximiser, its
/// value and a report.
fn run_stage(
    spec: &SvarmaSpec,
    cfg: &StageConfig,
    x0: Vec<f64>,
    data: &Dataset,
    schedule: &OptimSchedule,
) -> (Vec<f64>, f64, StageReport) {
    let layout = Layout::new(spec);
    let bounds = stage_bounds(&layout, spec, schedule);
    let value = |x: &[f64]| -> f64 {
        if !shapes_ok(&layout, spec, x, schedule.tail_margin) {
            return f64::INFINITY;
        }
        Model::from_free(spec, &layout, x).and_then(|m| loglik(&m, data)).map_or(f64::INFINITY, |l| -l.value)
    };
    let value_grad = |x: &[f64]| -> Option<(f64, Vec<f64>)> {
        if !shapes_ok(&layout, spec, x, schedule.tail_margin) {
            return None;
        }
        let (v, g) = value_and_score(spec, &layout, x, data).ok()?;
        Some((-v, g.into_iter().map(|d| -d).collect()))
    };
    let mut x = x0;
    bounds.project(&mut x);
    let mut best = value(&x);
    let mut rounds = 0;
    let mut converged = false;
    while rounds < cfg.rounds {
        rounds += 1;
        let steps: Vec<f64> = x.iter().map(|v| 0.05 * v.abs().max(0.2)).collect();
        let nm = nelder_mead(value, &x, &steps, &bounds, cfg.max_iter, cfg.tol * 1e-2);
        let from = if nm.value < best { nm.x } else { x.clone() };
        let opts = BfgsOptions { max_iter: cfg.max_iter, gtol: schedule.gtol, ftol: 1e-15, max_step: 0.5 };
        let qn = bfgs_box(value_grad, &from, &bounds, opts);
        let (xn, vn) = if qn.value <= nm.value.min(best) { (qn.x, qn.value) } else if nm.value < best { (from, nm.value) } else { (x.clone(), best) };
        let delta = best - vn;
        let stationary = qn.converged && qn.value <= vn;
        x = xn;
        best = vn;
        // A first-order point from quasi-Newton ends the alternation: another
        // simplex pass from there cannot move L_T by more than the tolerance.
        if stationary || (delta.is_finite() && delta.abs() < cfg.tol) {
            converged = true;
            break;
        }
    }
    (x, -best, StageReport { family: cfg.family, loglik: -best, rounds, converged })
}

/// Maximum-likelihood fit of `spec` to `data`.
pub fn fit(spec: &SvarmaSpec, data: &Dataset, schedule: &OptimSchedule, seed: u64) -> Result<EstimationResult> {
    spec.check()?;
    schedule.check()?;
    for d in &spec.densities {
        d.check()?;
    }
    if data.n != spec.n {
        return Err(Error::DataShape { expected: spec.n, got: data.n });
    }
    let layout = Layout::new(spec);
    let needed = layout.n_free() + spec.p + spec.q + 10;
    if data.t < needed {
        return Err(Error::SampleTooShort { t: data.t, needed });
    }
    let a0 = initial_ar(spec.p, spec.q, data)?;
    let plan = stage_plan(spec, schedule);
    let mut best: Option<(f64, Vec<f64>, Vec<StageReport>, usize)> = None;
    for start in 0..schedule.multistarts.max(1) {
        let Some(m0) = start_model(&plan[0].0, &a0, data, schedule, seed, start) else { continue };
        let Ok(mut x) = m0.pack(&Layout::new(&plan[0].0)) else { continue };
        let mut reports = Vec::new();
        let mut value = f64::NEG_INFINITY;
        for (si, (sspec, cfg)) in plan.iter().enumerate() {
            if si > 0 {
                let sl = Layout::new(sspec);
                x.truncate(sl.lambda_off_free());
                for d in &sspec.densities {
                    x.extend_from_slice(&d.lambda);
                }
            }
            let (xn, v, rep) = run_stage(sspec, cfg, x, data, schedule);
            x = xn;
            value = v;
            reports.push(rep);
        }
        if value.is_finite() && best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, x, reports, start));
        }
    }
    let (_, x, stages, start) = best.ok_or(Error::NoValidStart)?;
    let model = Model::from_free(spec, &layout, &x)?;
    let model = model.canonicalize_shocks(schedule.scheme).unwrap_or(model);
    finish(spec, &layout, model, data, stages, start, schedule.scheme)
}

/// Assemble the result at `model` (score, standard errors, BIC, diagnostics).
pub fn finish(
    spec: &SvarmaSpec,
    layout: &Layout,
    model: Model,
    data: &Dataset,
    stages: Vec<StageReport>,
    start: usize,
    scheme: Scheme,
) -> Result<EstimationResult> {
    let mut out_spec = spec.clone();
    out_spec.densities = model.densities.clone();
    let theta = model.pack(layout)?;
    let (value, score) = value_and_score(&out_spec, layout, &theta, data)?;
    let score_sup = score.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (stderr, sandwich, stderr_error) = match information_and_stderr(layout, &model, data) {
        Ok(info) => {
            let idx = free_indices(layout);
            let s = idx.iter().map(|&i| idx.iter().map(|&j| info.sandwich[(i, j)]).collect()).collect();
            (Some(info.stderr), Some(s), None)
        }
        Err(e) => (None, None, Some(alloc::format!("{e}"))),
    };
    let res = residuals_with(&Filter::new(&model)?, data);
    let n = model.n;
    let std_eps: Vec<f64> = res.eps.iter().enumerate().map(|(i, e)| e / model.sigma[i % n]).collect();
    let diagnostics = diagnose(&std_eps, n).ok();
    let n_free = layout.n_free();
    let converged = stages.iter().all(|s| s.converged);
    Ok(EstimationResult {
        spec: out_spec,
        t: data.t,
        theta_hat: theta,
        names: layout.free_block_names(),
        loglik: value,
        score_sup,
        stderr,
        sandwich,
        stderr_error,
        n_free,
        bic: bic(value, n_free, data.t),
        stages,
        converged,
        start,
        scheme,
        diagnostics,
    })
}

/// Full-coordinate index of every free coordinate, in free order.
pub fn free_indices(layout: &Layout) -> Vec<usize> {
    let mut idx = alloc::vec![0; layout.n_tau_free];
    for (i, s) in layout.tau.iter().enumerate() {
        if let Slot::Free(j) = *s {
            idx[j] = i;
        }
    }
    idx.extend(layout.n_tau()..layout.n_full());
    idx
}

/// Default starting shape for a family.
pub fn default_density(family: Family) -> ShockDensity {
    match family {
        Family::Gaussian => ShockDensity::gaussian(),
        Family::Laplace => ShockDensity::laplace(),
        Family::Sgt => ShockDensity { family, lambda: alloc::vec![0.0, 2.0, 10.0] },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Normalization;

    #[test]
    fn stage_plan_truncates_at_target() {
        let s = OptimSchedule::default();
        let spec = SvarmaSpec::new(2, 1, 1, 0, 0, Normalization::Natural, alloc::vec![ShockDensity::laplace(); 2]).unwrap();
        let plan = stage_plan(&spec, &s);
        assert_eq!(plan.iter().map(|p| p.1.family).collect::<Vec<_>>(), alloc::vec![Family::Gaussian, Family::Laplace]);
        assert_eq!(plan[1].0, spec);
    }

    #[test]
    fn recovers_var_coefficients() {
        let spec = SvarmaSpec::new(2, 1, 0, 0, 0, Normalization::Natural, alloc::vec![ShockDensity::gaussian(); 2]).unwrap();
        let mut truth = Model::reference_point(&spec);
        truth.a[0] = Mat::from_rows(&[alloc::vec![0.5, 0.2], alloc::vec![-0.1, 0.3]]);
        truth.b[(1, 0)] = 0.4;
        let (data, _) = truth.simulate(2000, 200, 3).unwrap();
        let sched = OptimSchedule { multistarts: 1, ..OptimSchedule::default() };
        let r = fit(&spec, &data, &sched, 1).unwrap();
        let m = r.model().unwrap();
        assert!(m.a[0].sub(&truth.a[0]).max_abs() < 0.1, "{:?}", m.a[0]);
        assert!(r.score_sup < 1e-5, "score {}", r.score_sup);
    }
}
