//! Approximate log-likelihood, analytic score, outer-product information and
//! the restricted sandwich covariance.
//!
//! `L_T` is the average of
//! `l_t = Σ_i [log f_i(ε_it / σ_i) - log σ_i] - log|det f_0| - log|det B|`
//! and is maximised.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // method resolution needs it only without std
use num_traits::Float;

use crate::densities::Prepared;
use crate::error::{Error, Result};
use crate::filtering::{residuals_with, Filter, ResidualSet};
use crate::model::{Dataset, Layout, Model, SvarmaSpec};

#[derive(Clone, Debug)]
pub struct LikelihoodEval {
    pub value: f64,
    pub per_obs: Vec<f64>,
}

struct Pieces {
    filter: Filter,
    res: ResidualSet,
    value: f64,
    per_obs: Vec<f64>,
    /// Empty unless requested.
    terms: ShockTerms,
}

fn evaluate(model: &Model, data: &Dataset, with_terms: bool) -> Result<Pieces> {
    if data.n != model.n {
        return Err(Error::DataShape { expected: model.n, got: data.n });
    }
    if model.sigma.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument("non-positive scale".into()));
    }
    if !model.validate().all_pass() {
        return Err(Error::InvalidArgument("parameter fails the model conditions".into()));
    }
    let dens: Vec<Prepared> = model.densities.iter().map(|d| d.prepare()).collect::<Result<_>>()?;
    let filter = Filter::new(model)?;
    let res = residuals_with(&filter, data);
    let ln_det_f0 = model.f()[0].det()?.abs().ln();
    let ln_det_b = model.b.det()?.abs().ln();
    let n = model.n;
    let ln_sigma: f64 = model.sigma.iter().map(|s| s.ln()).sum();
    let d: usize = dens.iter().map(Prepared::n_params).sum();
    let mut per_obs = Vec::with_capacity(data.t);
    let mut st = ShockTerms {
        xi: alloc::vec![0.0; if with_terms { data.t * n } else { 0 }],
        ex: alloc::vec![0.0; if with_terms { data.t * n } else { 0 }],
        el: alloc::vec![0.0; if with_terms { data.t * d } else { 0 }],
        d,
    };
    let bi = &filter.b_inv;
    let mut dv = alloc::vec![0.0; n];
    for t in 0..data.t {
        let e = res.eps_row(t);
        let mut l = -ln_sigma - ln_det_f0 - ln_det_b;
        let mut off = 0;
        for i in 0..n {
            let x = e[i] / model.sigma[i];
            if with_terms {
                let m = dens[i].n_params();
                let (lf, g) = dens[i].eval(x, Some(&mut st.el[t * d + off..t * d + off + m]));
                off += m;
                l += lf;
                st.ex[t * n + i] = g;
                dv[i] = g / model.sigma[i];
            } else {
                l += dens[i].log_density(x);
            }
        }
        if with_terms {
            for c in 0..n {
                st.xi[t * n + c] = (0..n).map(|r| bi[r * n + c] * dv[r]).sum();
            }
        }
        per_obs.push(l);
    }
    let value = per_obs.iter().sum::<f64>() / data.t as f64;
    if !value.is_finite() {
        return Err(Error::InvalidArgument("non-finite likelihood".into()));
    }
    Ok(Pieces { filter, res, value, per_obs, terms: st })
}

/// Value and per-observation contributions.
pub fn loglik(model: &Model, data: &Dataset) -> Result<LikelihoodEval> {
    let p = evaluate(model, data, false)?;
    Ok(LikelihoodEval { value: p.value, per_obs: p.per_obs })
}

/// Per-observation quantities shared by the score routines.
struct ShockTerms {
    /// `B^{-T} Σ^{-1} e_{x,t}`, `T × n`
    xi: Vec<f64>,
    /// `e_{x,t}` at the standardised residual, `T × n`
    ex: Vec<f64>,
    /// `e_{λ,t}` stacked over shocks, `T × d`
    el: Vec<f64>,
    d: usize,
}

fn inv_transpose(m: &crate::mat::Mat<f64>) -> Result<crate::mat::Mat<f64>> {
    Ok(m.inverse()?.transpose())
}

/// Which `f_j` entry a full `τ3` coordinate drives, if any.
fn g_to_f(layout: &Layout, kappas: &[usize], idx: usize) -> Option<(usize, usize, usize)> {
    let n = layout.n;
    let e = idx - layout.g_off;
    let (m, rc) = (e / (n * n), e % (n * n));
    let (r, c) = (rc % n, rc / n);
    (kappas[r] >= m).then(|| (kappas[r] - m, r, c))
}

/// Value and gradient of `L_T` in full coordinates (adjoint pass).
pub fn value_and_score_full(layout: &Layout, model: &Model, data: &Dataset) -> Result<(f64, Vec<f64>)> {
    let pc = evaluate(model, data, true)?;
    let st = &pc.terms;
    let n = model.n;
    let nn = n * n;
    let t_len = data.t;
    let tf = t_len as f64;
    let mu = pc.filter.f_stage_adjoint(&st.xi);
    let rho = pc.filter.shift_stage_adjoint(&mu);
    let nu = pc.filter.p_stage_adjoint(&rho);
    let y = &data.values;
    let w = &pc.res.w;
    let u = &pc.res.u;
    let eps = &pc.res.eps;
    let mut g = alloc::vec![0.0; layout.n_full()];
    let cross_back = |lhs: &[f64], rhs: &[f64], lag: usize, r: usize, c: usize| -> f64 {
        (lag..t_len).map(|t| lhs[t * n + r] * rhs[(t - lag) * n + c]).sum::<f64>()
    };
    for i in 0..layout.p {
        for c in 0..n {
            for r in 0..n {
                g[layout.a_off + i * nn + c * n + r] = -cross_back(&nu, y, i + 1, r, c) / tf;
            }
        }
    }
    for j in 0..=layout.dp {
        for c in 0..n {
            for r in 0..n {
                g[layout.p_off + j * nn + c * n + r] = -cross_back(&nu, w, j, r, c) / tf;
            }
        }
    }
    let f0_it = inv_transpose(&model.f()[0])?;
    for idx in layout.g_off..layout.n_tau() {
        if let Some((j, r, c)) = g_to_f(layout, &model.kappas, idx) {
            let s: f64 = (0..t_len.saturating_sub(j)).map(|t| mu[t * n + r] * u[(t + j) * n + c]).sum();
            g[idx] = -s / tf - if j == 0 { f0_it[(r, c)] } else { 0.0 };
        }
    }
    let b_it = inv_transpose(&model.b)?;
    let mut k = layout.beta_off_full();
    for c in 0..n {
        for r in 0..n {
            if r != c {
                g[k] = -cross_back(&st.xi, eps, 0, r, c) / tf - b_it[(r, c)];
                k += 1;
            }
        }
    }
    for i in 0..n {
        let s = model.sigma[i];
        let acc: f64 = (0..t_len).map(|t| -(st.ex[t * n + i] * eps[t * n + i] / s + 1.0) / s).sum();
        g[layout.sigma_off_full() + i] = acc / tf;
    }
    for l in 0..st.d {
        g[layout.lambda_off_full() + l] = (0..t_len).map(|t| st.el[t * st.d + l]).sum::<f64>() / tf;
    }
    Ok((pc.value, g))
}

/// Value and free-coordinate gradient at free parameters.
pub fn value_and_score(spec: &SvarmaSpec, layout: &Layout, free: &[f64], data: &Dataset) -> Result<(f64, Vec<f64>)> {
    let model = Model::from_free(spec, layout, free)?;
    let (v, g) = value_and_score_full(layout, &model, data)?;
    Ok((v, layout.project(&g)))
}

pub fn score(spec: &SvarmaSpec, layout: &Layout, free: &[f64], data: &Dataset) -> Result<Vec<f64>> {
    Ok(value_and_score(spec, layout, free, data)?.1)
}

/// `T × n_full` matrix of per-observation scores `∂l_t/∂θ` (forward pass).
pub fn per_obs_scores_full(layout: &Layout, model: &Model, data: &Dataset) -> Result<DMatrix<f64>> {
    let pc = evaluate(model, data, true)?;
    let st = &pc.terms;
    let n = model.n;
    let nn = n * n;
    let t_len = data.t;
    let mut out = DMatrix::zeros(t_len, layout.n_full());
    let flt = &pc.filter;
    let project = |col: usize, du: &[f64], out: &mut DMatrix<f64>, shift: f64| {
        for t in 0..t_len {
            let xi = &st.xi[t * n..(t + 1) * n];
            out[(t, col)] = xi.iter().zip(&du[t * n..(t + 1) * n]).map(|(a, b)| a * b).sum::<f64>() + shift;
        }
    };
    let lagged = |src: &[f64], lag: usize, r: usize, c: usize| -> Vec<f64> {
        let mut d = alloc::vec![0.0; t_len * n];
        for t in lag..t_len {
            d[t * n + r] = -src[(t - lag) * n + c];
        }
        d
    };
    let through_p = |dv: &[f64]| flt.f_stage(&flt.shift_stage(&flt.p_stage(dv)));
    for i in 0..layout.p {
        for c in 0..n {
            for r in 0..n {
                let du = through_p(&lagged(&data.values, i + 1, r, c));
                project(layout.a_off + i * nn + c * n + r, &du, &mut out, 0.0);
            }
        }
    }
    for j in 0..=layout.dp {
        for c in 0..n {
            for r in 0..n {
                let du = through_p(&lagged(&pc.res.w, j, r, c));
                project(layout.p_off + j * nn + c * n + r, &du, &mut out, 0.0);
            }
        }
    }
    let f0_it = inv_transpose(&model.f()[0])?;
    for idx in layout.g_off..layout.n_tau() {
        if let Some((j, r, c)) = g_to_f(layout, &model.kappas, idx) {
            let mut dx = alloc::vec![0.0; t_len * n];
            for t in 0..t_len.saturating_sub(j) {
                dx[t * n + r] = -pc.res.u[(t + j) * n + c];
            }
            let du = flt.f_stage(&dx);
            project(idx, &du, &mut out, if j == 0 { -f0_it[(r, c)] } else { 0.0 });
        }
    }
    let b_it = inv_transpose(&model.b)?;
    let eps = &pc.res.eps;
    let mut k = layout.beta_off_full();
    for c in 0..n {
        for r in 0..n {
            if r != c {
                for t in 0..t_len {
                    out[(t, k)] = -st.xi[t * n + r] * eps[t * n + c] - b_it[(r, c)];
                }
                k += 1;
            }
        }
    }
    for i in 0..n {
        let s = model.sigma[i];
        for t in 0..t_len {
            out[(t, layout.sigma_off_full() + i)] = -(st.ex[t * n + i] * eps[t * n + i] / s + 1.0) / s;
        }
    }
    for l in 0..st.d {
        for t in 0..t_len {
            out[(t, layout.lambda_off_full() + l)] = st.el[t * st.d + l];
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Information {
    /// Outer-product estimate of `I_0` in full coordinates.
    pub opg: DMatrix<f64>,
    /// Asymptotic covariance of `√T (θ̂ - θ_0)` in full coordinates.
    pub sandwich: DMatrix<f64>,
    pub stderr_full: Vec<f64>,
    /// Standard errors of the free coordinates, in free order.
    pub stderr: Vec<f64>,
}

/// `S = M^{-1} diag(I_0, 0) M^{-1}` with the bordered matrix `M = [[I_0, R'], [R, 0]]`.
pub fn bordered_sandwich(opg: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = opg.nrows();
    let m = r.nrows();
    let mut big = DMatrix::zeros(d + m, d + m);
    big.view_mut((0, 0), (d, d)).copy_from(opg);
    if m > 0 {
        big.view_mut((0, d), (d, m)).copy_from(&r.transpose());
        big.view_mut((d, 0), (m, d)).copy_from(r);
    }
    let sv = big.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if !(smax > 0.0) || sv.min() <= 1e-12 * smax {
        return Err(Error::NearNonIdentifiable);
    }
    let inv = big.try_inverse().ok_or(Error::NearNonIdentifiable)?;
    let mut mid = DMatrix::zeros(d + m, d + m);
    mid.view_mut((0, 0), (d, d)).copy_from(opg);
    let s = &inv * mid * &inv;
    Ok(s.view((0, 0), (d, d)).into_owned())
}

/// Outer-product information, sandwich covariance and standard errors `sqrt(diag(S)/T)`.
pub fn information_and_stderr(layout: &Layout, model: &Model, data: &Dataset) -> Result<Information> {
    let scores = per_obs_scores_full(layout, model, data)?;
    let tf = data.t as f64;
    let opg = scores.transpose() * &scores / tf;
    let (r, _) = layout.restrictions();
    let sandwich = bordered_sandwich(&opg, &r)?;
    let stderr_full: Vec<f64> = (0..layout.n_full()).map(|i| (sandwich[(i, i)].max(0.0) / tf).sqrt()).collect();
    let mut stderr = Vec::with_capacity(layout.n_free());
    let mut tau_of_free = alloc::vec![0; layout.n_tau_free];
    for (i, s) in layout.tau.iter().enumerate() {
        if let crate::model::Slot::Free(j) = *s {
            tau_of_free[j] = i;
        }
    }
    stderr.extend(tau_of_free.iter().map(|&i| stderr_full[i]));
    stderr.extend_from_slice(&stderr_full[layout.n_tau()..]);
    Ok(Information { opg, sandwich, stderr_full, stderr })
}
