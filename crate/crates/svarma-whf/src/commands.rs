//! One function per subcommand. Each reads its input, delegates to the core
//! library and writes its outputs under `config.out`, returning the paths.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use svarma_core::estimate::{fit, EstimationResult};
use svarma_core::filtering::residuals;
use svarma_core::mat::Mat;
use svarma_core::model::{Dataset, Layout, Model, SvarmaSpec};
use svarma_core::polymat::PolyMat;
use svarma_core::scalar::Rational;
use svarma_core::select::{diagnose, fit_task, grid_tasks, rotate_long_run, task_seed, ComponentDiagnostics, GridResult, Rotation};
use svarma_core::whf::{canonicalize, compose, normalize, smith_whf_factorize, NormalizationMode, WhfTriple};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{column_names, read_dataset, read_json, write_dataset, write_json, write_table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Estimate,
    Select,
    Whf,
    Rotate,
    Diagnose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::Select => "select",
            Command::Whf => "whf",
            Command::Rotate => "rotate",
            Command::Diagnose => "diagnose",
        }
    }
}

pub fn run(command: Command, config: &RunConfig) -> Result<Vec<PathBuf>> {
    let out = Path::new(&config.out);
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match command {
        Command::Simulate => cmd_simulate(config),
        Command::Estimate => cmd_estimate(config),
        Command::Select => cmd_select(config),
        Command::Whf => cmd_whf(config),
        Command::Rotate => cmd_rotate(config),
        Command::Diagnose => cmd_diagnose(config),
    }
}

fn load_data(config: &RunConfig) -> Result<Dataset> {
    let data = read_dataset(Path::new(config.data_path()?))?;
    Ok(if config.demean { data.demeaned() } else { data })
}

#[derive(Serialize, Deserialize)]
pub struct TruthFile {
    pub config: RunConfig,
    pub spec: SvarmaSpec,
    pub names: Vec<String>,
    pub theta: Vec<f64>,
}

pub fn cmd_simulate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let spec = config.model()?.spec()?;
    let layout = Layout::new(&spec);
    let model = match &config.simulate.theta {
        Some(theta) => Model::from_free(&spec, &layout, theta)?,
        None => Model::reference_point(&spec),
    };
    if !model.validate().all_pass() {
        return Err(CliError::InvalidConfig(format!("simulate.theta fails the model conditions: {:?}", model.validate())));
    }
    let (data, _) = model.simulate(config.simulate.t, config.simulate.burn_in, config.seed()?)?;
    let out = Path::new(&config.out);
    let data_path = out.join("data.csv");
    write_dataset(&data_path, &data)?;
    let truth_path = out.join("truth.json");
    let truth = TruthFile { config: config.clone(), spec, names: layout.free_block_names(), theta: model.pack(&layout)? };
    write_json(&truth_path, &truth)?;
    Ok(vec![data_path, truth_path])
}

#[derive(Serialize, Deserialize)]
pub struct EstimateFile {
    pub config: RunConfig,
    pub result: EstimationResult,
}

/// Responses to one-standard-deviation shocks, `k_j Σ` (or `k_j Σ Q`), flattened
/// as `h, y1_e1, y1_e2, ...`.
fn irf_rows(irf: &[Mat<f64>]) -> impl Iterator<Item = Vec<f64>> + '_ {
    irf.iter().enumerate().map(|(h, k)| {
        let mut row = vec![h as f64];
        row.extend_from_slice(k.as_slice());
        row
    })
}

fn irf_header(names: &[String]) -> Vec<String> {
    let n = names.len();
    let mut h = vec!["h".to_string()];
    for name in names {
        for j in 0..n {
            h.push(format!("{name}_e{}", j + 1));
        }
    }
    h
}

pub fn cmd_estimate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = load_data(config)?;
    let spec = config.model()?.spec()?;
    let result = fit(&spec, &data, &config.schedule, config.seed()?)?;
    let model = result.model()?;
    let names = column_names(&data);
    let out = Path::new(&config.out);

    let res_path = out.join("residuals.csv");
    let res = residuals(&model, &data)?;
    let header: Vec<String> = (1..=data.n).map(|i| format!("e{i}")).collect();
    let std_eps: Vec<f64> = res.eps.iter().enumerate().map(|(i, e)| e / model.sigma[i % data.n]).collect();
    write_table(&res_path, &header, std_eps.chunks(data.n).map(|c| c.to_vec()))?;

    let irf_path = out.join("irf.csv");
    let sigma = model.sigma_mat();
    let irf: Vec<Mat<f64>> = model.transfer_irf(config.horizon)?.iter().map(|k| k.mul(&sigma)).collect();
    write_table(&irf_path, &irf_header(&names), irf_rows(&irf))?;

    let est_path = out.join("estimate.json");
    write_json(&est_path, &EstimateFile { config: config.clone(), result })?;
    Ok(vec![est_path, res_path, irf_path])
}

#[derive(Serialize, Deserialize)]
pub struct GridFile {
    pub config: RunConfig,
    pub grid: GridResult,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn cmd_select(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = load_data(config)?;
    let mc = config.model()?;
    if mc.densities.len() != data.n {
        return Err(CliError::InvalidConfig(format!("{} densities for {} series", mc.densities.len(), data.n)));
    }
    let seed = config.seed()?;
    let tasks = grid_tasks(data.n, config.select.p_max, config.select.q_max);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count())
        .build()
        .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    let rows = pool.install(|| {
        tasks
            .par_iter()
            .enumerate()
            .map(|(i, &t)| fit_task(&data, t, &mc.densities, mc.normalization, &config.schedule, task_seed(seed, i)))
            .collect::<Vec<_>>()
    });
    let grid = GridResult::new(rows);
    let out = Path::new(&config.out);

    let csv_path = out.join("grid.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::invalid_data(&csv_path, e.to_string()))?;
    let header = ["p", "q", "kappa", "k", "loglik", "n_free", "bic", "converged", "min_jb_p", "min_lb_p", "error"];
    let write_err = |e: csv::Error| CliError::invalid_data(&csv_path, e.to_string());
    w.write_record(header).map_err(write_err)?;
    for r in &grid.rows {
        w.write_record([
            r.p.to_string(),
            r.q.to_string(),
            r.kappa.to_string(),
            r.k.to_string(),
            opt(r.loglik),
            r.n_free.to_string(),
            opt(r.bic),
            r.converged.to_string(),
            opt(r.min_jb_p),
            opt(r.min_lb_p),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(write_err)?;
    }
    w.flush().map_err(|e| CliError::io(&csv_path, e))?;

    let json_path = out.join("grid.json");
    write_json(&json_path, &GridFile { config: config.clone(), grid })?;
    Ok(vec![csv_path, json_path])
}

/// Coefficient file of `cmd_whf`: `b_0, b_1, ...` as rows of exact numbers
/// written either as JSON integers or as strings such as `"-3/4"`.
#[derive(Deserialize)]
struct CoefficientFile {
    coefficients: Vec<Vec<Vec<Value>>>,
}

fn parse_rational(v: &Value) -> Option<Rational> {
    match v {
        Value::String(s) => s.trim().parse().ok(),
        Value::Number(n) => n.as_i64().map(|i| Rational::from_integer(i.into())),
        _ => None,
    }
}

pub fn read_coefficients(path: &Path) -> Result<PolyMat<Rational>> {
    let file: CoefficientFile = read_json(path)?;
    let mut mats = Vec::with_capacity(file.coefficients.len());
    for (j, m) in file.coefficients.iter().enumerate() {
        let rows: Option<Vec<Vec<Rational>>> = m.iter().map(|r| r.iter().map(parse_rational).collect()).collect();
        let rows = rows.ok_or_else(|| CliError::invalid_data(path, format!("coefficient {j}: entries must be exact")))?;
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
            return Err(CliError::invalid_data(path, format!("coefficient {j} is not square")));
        }
        mats.push(Mat::from_rows(&rows));
    }
    let n = mats.first().map(|m| m.rows()).ok_or_else(|| CliError::invalid_data(path, "no coefficients"))?;
    PolyMat::new(n, n, mats).map_err(|e| CliError::invalid_data(path, e.to_string()))
}

fn strings(m: &Mat<Rational>) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect()).collect()
}

#[derive(Serialize, Deserialize)]
pub struct WhfFile {
    pub config: RunConfig,
    pub indices: Vec<usize>,
    pub mode: NormalizationMode,
    pub row_permutation: Option<Vec<usize>>,
    /// `p_0, p_1, ...`
    pub p: Vec<Vec<Vec<String>>>,
    /// `f_0, f_1, ...`, the coefficients of `z^0, z^-1, ...`.
    pub f: Vec<Vec<Vec<String>>>,
    /// Constant folded out of `f` by a normalisation, so that `b = p s f · folded`.
    pub folded: Option<Vec<Vec<String>>>,
    /// Whether the factors multiply back to the input exactly.
    pub reproduces_input: bool,
}

pub fn whf_file(config: &RunConfig, b: &PolyMat<Rational>) -> Result<WhfFile> {
    let raw = smith_whf_factorize(b)?;
    let (t, folded): (WhfTriple<Rational>, Option<Mat<Rational>>) = match config.whf.normalization {
        NormalizationMode::Raw => (raw, None),
        NormalizationMode::Canonical => (canonicalize(&raw)?, None),
        mode => {
            let (t, m) = normalize(&canonicalize(&raw)?, mode)?;
            (t, Some(m))
        }
    };
    let composed = match &folded {
        Some(m) => compose(&t)?.mul_const(m)?,
        None => compose(&t)?,
    };
    Ok(WhfFile {
        config: config.clone(),
        indices: t.indices.clone(),
        mode: t.mode,
        row_permutation: t.row_permutation.clone(),
        p: t.p.coeffs().iter().map(strings).collect(),
        f: t.f.negative_power_coeffs().iter().map(strings).collect(),
        folded: folded.as_ref().map(strings),
        reproduces_input: composed == *b,
    })
}

pub fn cmd_whf(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let b = read_coefficients(Path::new(config.data_path()?))?;
    let path = Path::new(&config.out).join("whf.json");
    write_json(&path, &whf_file(config, &b)?)?;
    Ok(vec![path])
}

#[derive(Serialize, Deserialize)]
pub struct RotateFile {
    pub config: RunConfig,
    pub rotation: Rotation,
}

pub fn cmd_rotate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let est: EstimateFile = read_json(Path::new(config.data_path()?))?;
    let model = est.result.model()?;
    let rotation = rotate_long_run(&model, config.rotate.shock, config.rotate.variable, config.horizon)?;
    let out = Path::new(&config.out);
    let names: Vec<String> = (1..=model.n).map(|i| format!("y{i}")).collect();
    let irf_path = out.join("irf_rotated.csv");
    write_table(&irf_path, &irf_header(&names), irf_rows(&rotation.irf))?;
    let path = out.join("rotate.json");
    write_json(&path, &RotateFile { config: config.clone(), rotation })?;
    Ok(vec![path, irf_path])
}

#[derive(Serialize, Deserialize)]
pub struct DiagnoseFile {
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub diagnostics: Vec<ComponentDiagnostics>,
}

pub fn cmd_diagnose(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = read_dataset(Path::new(config.data_path()?))?;
    let diagnostics = diagnose(&data.values, data.n)?;
    let path = Path::new(&config.out).join("diagnostics.json");
    write_json(&path, &DiagnoseFile { config: config.clone(), columns: column_names(&data), diagnostics })?;
    Ok(vec![path])
}
