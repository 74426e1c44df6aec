//! Parameter sweeps over graph families, CSV/JSON reports and log-log fits.
//!
//! The CSV has a `# generated ...` comment line followed by a fixed header
//! and one row per grid point. Floats are written with 17 significant
//! digits. Wall-clock times only go to the JSON report, so rerunning a sweep
//! reproduces the CSV byte for byte apart from the comment line.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cg_prime::{run_cg_prime_with, DEFAULT_C};
use crate::chain::ensure_lazy;
use crate::error::{Error, Result};
use crate::graphs::{generate, FamilySpec};
use crate::hitting::{extended_hitting_time, hitting_time, monte_carlo_hitting_time};
use crate::interpolated::{run_phase_random, Mode, PhaseRandomConfig};
use crate::spectral::discriminant;

pub const WORKERS_ENV: &str = "QWALK_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Hitting,
    CgPrime,
    Interpolated,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Hitting => "hitting",
            Algorithm::CgPrime => "cg_prime",
            Algorithm::Interpolated => "interpolated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Complete,
    Cycle,
    Torus,
    Hypercube,
    Rook,
    WeightedRook,
    RandomReversible,
}

/// A family with one free size parameter.
///
/// `size` means: n for complete, cycle and random_reversible; the side
/// length for torus (dimension `d`, default 2); the dimension for
/// hypercube; n1 for rook (n2 defaults to n1); the total node count for
/// weighted_rook, split as (size / n2) x n2 with n2 = 4 and p = size^(-1/2)
/// unless given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTemplate {
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_prob: Option<f64>,
}

impl FamilyTemplate {
    pub fn new(family: FamilyKind) -> Self {
        Self { family, d: None, n2: None, p: None, seed: None, edge_prob: None }
    }

    pub fn instantiate(&self, size: usize) -> Result<FamilySpec> {
        Ok(match self.family {
            FamilyKind::Complete => FamilySpec::Complete { n: size },
            FamilyKind::Cycle => FamilySpec::Cycle { n: size },
            FamilyKind::Torus => FamilySpec::Torus { d: self.d.unwrap_or(2), side: size },
            FamilyKind::Hypercube => FamilySpec::Hypercube { d: size },
            FamilyKind::Rook => FamilySpec::Rook { n1: size, n2: self.n2.unwrap_or(size) },
            FamilyKind::WeightedRook => {
                let n2 = self.n2.unwrap_or(4);
                if n2 == 0 || !size.is_multiple_of(n2) {
                    return Err(Error::BadParams(format!("size {size} is not a multiple of n2 = {n2}")));
                }
                let p = self.p.unwrap_or(1.0 / (size as f64).sqrt());
                FamilySpec::WeightedRook { n1: size / n2, n2, p }
            }
            FamilyKind::RandomReversible => FamilySpec::RandomReversible {
                n: size,
                seed: self.seed.unwrap_or(0),
                edge_prob: self.edge_prob.unwrap_or(0.5),
            },
        })
    }
}

fn default_marked() -> Vec<usize> {
    vec![0]
}
fn default_c() -> f64 {
    DEFAULT_C
}
fn default_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: FamilyTemplate,
    pub sizes: Vec<usize>,
    pub algorithm: Algorithm,
    #[serde(default = "default_marked")]
    pub marked: Vec<usize>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_eps")]
    pub epsilon_precision: f64,
    /// Monte-Carlo trajectories (hitting) or sampled times (interpolated);
    /// 0 disables sampling.
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// CSV path; the JSON report goes next to it as `<stem>.report.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(family: FamilyTemplate, sizes: Vec<usize>, algorithm: Algorithm) -> Self {
        Self {
            family,
            sizes,
            algorithm,
            marked: default_marked(),
            c: DEFAULT_C,
            epsilon_precision: default_eps(),
            samples: 0,
            seed: 0,
            workers: None,
            output: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub size: usize,
    pub n: usize,
    pub family: String,
    pub algorithm: String,
    pub p_m: Option<f64>,
    pub gap: Option<f64>,
    pub ht: Option<f64>,
    pub ht_plus: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mu: Option<f64>,
    pub epsilon_overlap: Option<f64>,
    pub coupling_norm_formula: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub nu_final: Option<f64>,
    pub nu_predicted: Option<f64>,
    pub condition_ratio: Option<f64>,
    pub condition_ok: Option<bool>,
    pub s_star: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub success_probability: Option<f64>,
    pub success_stderr: Option<f64>,
    pub dephasing_error: Option<f64>,
    pub alpha_n_sq: Option<f64>,
    pub error: String,
    pub wall_seconds: f64,
}

/// CSV columns in order. `wall_seconds` is deliberately absent.
pub const CSV_COLUMNS: [&str; 26] = [
    "size",
    "n",
    "family",
    "algorithm",
    "p_m",
    "gap",
    "ht",
    "ht_plus",
    "mc_estimate",
    "mc_stderr",
    "mu",
    "epsilon_overlap",
    "coupling_norm_formula",
    "t1",
    "t2",
    "nu_final",
    "nu_predicted",
    "condition_ratio",
    "condition_ok",
    "s_star",
    "T",
    "success_probability",
    "success_stderr",
    "dephasing_error",
    "alpha_n_sq",
    "error",
];

fn fmt_f(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

impl SweepRow {
    /// Numeric value of a column, by its CSV name.
    pub fn value(&self, column: &str) -> Option<f64> {
        match column {
            "size" => Some(self.size as f64),
            "n" => Some(self.n as f64),
            "p_m" => self.p_m,
            "gap" => self.gap,
            "ht" => self.ht,
            "ht_plus" => self.ht_plus,
            "mc_estimate" => self.mc_estimate,
            "mc_stderr" => self.mc_stderr,
            "mu" => self.mu,
            "epsilon_overlap" => self.epsilon_overlap,
            "coupling_norm_formula" => self.coupling_norm_formula,
            "t1" => self.t1,
            "t2" => self.t2,
            "nu_final" => self.nu_final,
            "nu_predicted" => self.nu_predicted,
            "condition_ratio" => self.condition_ratio,
            "s_star" => self.s_star,
            "T" | "t" => self.t,
            "success_probability" => self.success_probability,
            "success_stderr" => self.success_stderr,
            "dephasing_error" => self.dephasing_error,
            "alpha_n_sq" => self.alpha_n_sq,
            "wall_seconds" => Some(self.wall_seconds),
            _ => None,
        }
    }

    fn record(&self) -> Vec<String> {
        CSV_COLUMNS
            .iter()
            .map(|&c| match c {
                "size" => self.size.to_string(),
                "n" => self.n.to_string(),
                "family" => self.family.clone(),
                "algorithm" => self.algorithm.clone(),
                "condition_ok" => self.condition_ok.map(|b| b.to_string()).unwrap_or_default(),
                "error" => self.error.clone(),
                other => fmt_f(self.value(other)),
            })
            .collect()
    }
}

fn run_point(cfg: &SweepConfig, size: usize) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow { size, algorithm: cfg.algorithm.name().into(), ..Default::default() };
    if let Err(e) = fill_row(cfg, size, &mut row) {
        row.error = e.to_string();
    }
    row.wall_seconds = start.elapsed().as_secs_f64();
    row
}

fn fill_row(cfg: &SweepConfig, size: usize, row: &mut SweepRow) -> Result<()> {
    let spec = cfg.family.instantiate(size)?;
    row.family = spec.label();
    let chain = ensure_lazy(&generate(&spec)?).with_marked(&cfg.marked)?;
    row.n = chain.n();
    row.p_m = Some(chain.p_m());
    match cfg.algorithm {
        Algorithm::Hitting => {
            row.gap = Some(discriminant(&chain, 0.0)?.gap);
            row.ht = Some(hitting_time(&chain)?);
            row.ht_plus = Some(extended_hitting_time(&chain)?);
            if cfg.samples > 0 {
                let (m, se) = monte_carlo_hitting_time(&chain, cfg.samples, cfg.seed)?;
                row.mc_estimate = Some(m);
                row.mc_stderr = Some(se);
            }
        }
        Algorithm::CgPrime => {
            let w = *chain.marked().first().ok_or(Error::EmptyMarkedSet)?;
            let r = run_cg_prime_with(&chain, w, cfg.c)?;
            let d = &r.diagnostics;
            row.gap = Some(d.gap);
            row.mu = Some(d.mu);
            row.epsilon_overlap = Some(d.epsilon_overlap);
            row.coupling_norm_formula = Some(d.coupling_norm_formula);
            row.t1 = Some(r.t1);
            row.t2 = Some(r.t2);
            row.nu_final = Some(r.nu_final);
            row.nu_predicted = Some(r.nu_predicted);
            row.condition_ratio = Some(d.condition_ratio);
            row.condition_ok = Some(r.condition_ok);
        }
        Algorithm::Interpolated => {
            row.gap = Some(discriminant(&chain, 0.0)?.gap);
            let pr = PhaseRandomConfig {
                epsilon_precision: cfg.epsilon_precision,
                t: None,
                mode: if cfg.samples > 0 { Mode::Sampled } else { Mode::ExactAverage },
                samples: cfg.samples,
                seed: cfg.seed,
            };
            let r = run_phase_random(&chain, &pr)?;
            row.ht_plus = Some(r.ht_plus);
            row.s_star = Some(r.s_star);
            row.t = Some(r.t);
            row.success_probability = Some(r.success_probability);
            row.success_stderr = r.success_stderr;
            row.dephasing_error = Some(r.dephasing_error);
            row.alpha_n_sq = Some(r.alpha_n_sq);
        }
    }
    Ok(())
}

/// Worker count from the config, else `QWALK_WORKERS`, else rayon's default.
pub fn resolve_workers(configured: Option<usize>) -> Option<usize> {
    configured.or_else(|| std::env::var(WORKERS_ENV).ok()?.trim().parse().ok()).filter(|&w| w > 0)
}

/// Runs every grid point (in parallel), recording per-point failures in the
/// `error` column. Writes CSV and JSON when `output` is set.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.sizes.is_empty() {
        return Err(Error::BadParams("sweep grid is empty".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = resolve_workers(cfg.workers) {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::BadParams(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| cfg.sizes.par_iter().map(|&s| run_point(cfg, s)).collect());
    if let Some(out) = &cfg.output {
        write_csv(out, &rows)?;
        write_json(&report_path(out), cfg, &rows)?;
    }
    Ok(rows)
}

/// `runs/a.csv` -> `runs/a.report.json`.
pub fn report_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("report.json")
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .expect("csv output is utf-8");
    Ok(format!("# generated unix={stamp}\n{body}"))
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    std::fs::write(path, csv_string(rows)?)?;
    Ok(())
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a SweepConfig,
    rows: &'a [SweepRow],
}

pub fn write_json(path: &Path, cfg: &SweepConfig, rows: &[SweepRow]) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&Report { config: cfg, rows })?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares of log y against log x.
pub fn fit_xy(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(Error::BadParams("x and y lengths differ".into()));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(xs.len()));
    }
    if let Some(&v) = xs.iter().chain(ys).find(|&&v| !(v > 0.0)) {
        return Err(Error::NonPositiveValue(v));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::BadParams("all x values are equal".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit { exponent, intercept, r_squared, points: xs.len() })
}

/// Fits two columns of sweep rows; rows missing either value are skipped.
pub fn fit_scaling(rows: &[SweepRow], x_field: &str, y_field: &str) -> Result<ScalingFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| Some((r.value(x_field)?, r.value(y_field)?))).unzip();
    fit_xy(&xs, &ys)
}

/// Reads two numeric columns from a sweep CSV (comment lines start with #).
pub fn read_csv_columns(path: impl AsRef<Path>, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::BadParams(format!("no column named {name:?}")))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in reader.records() {
        let rec = rec?;
        let (Some(a), Some(b)) = (rec.get(ix), rec.get(iy)) else { continue };
        if a.is_empty() || b.is_empty() {
            continue;
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::BadParams(format!("not a number: {s:?}")));
        xs.push(parse(a)?);
        ys.push(parse(b)?);
    }
    Ok((xs, ys))
}

pub fn fit_csv(path: impl AsRef<Path>, x: &str, y: &str) -> Result<ScalingFit> {
    let (xs, ys) = read_csv_columns(path, x, y)?;
    fit_xy(&xs, &ys)
}
