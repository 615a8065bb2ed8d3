use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::method::{run_method, Method};
use crate::error::{Error, Result};
use crate::options::SolverOptions;
use crate::rng::{hash_str, hash_words};
use crate::synth::{Dataset, NoiseKind, NoiseSpec};
use crate::tensor::{frobenius_distance, Mode, Tensor3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessConfig {
    pub dataset: Dataset,
    /// Seed of the clean tensor `X`.
    pub data_seed: u64,
    pub noise: Vec<NoiseKind>,
    pub sigmas: Vec<f64>,
    pub ranks: Vec<usize>,
    pub runs: usize,
    pub methods: Vec<Method>,
    /// Slice mode for the NMF baselines; defaults to the dataset's time mode.
    pub slice_mode: Option<Mode>,
    /// Root of every noise and solver seed.
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        RobustnessConfig {
            dataset: Dataset::Emergence,
            data_seed: 0,
            noise: vec![NoiseKind::LowRank { rank_n: 1 }, NoiseKind::LowRank { rank_n: 2 }, NoiseKind::Dense],
            sigmas: vec![1e-3, 1e-2, 1e-1, 1.0],
            ranks: (1..=10).collect(),
            runs: 50,
            methods: Method::ALL.to_vec(),
            slice_mode: None,
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

impl RobustnessConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidOptions(format!("robustness config: {msg}")));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.ranks.is_empty() || self.ranks.contains(&0) {
            return bad("ranks must be a nonempty list of positive integers");
        }
        if self.noise.is_empty() || self.sigmas.is_empty() || self.methods.is_empty() {
            return bad("noise, sigmas and methods must be nonempty");
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return bad(&format!("sigma {s} is not positive"));
        }
        self.solver.validate()
    }

    pub fn slice_mode(&self) -> Mode {
        self.slice_mode.unwrap_or_else(|| self.dataset.time_mode())
    }

    /// Seed of the noise tensor for `run`. It ignores `σ` and the rank, so all
    /// cells of one run see the same noise pattern up to scale.
    pub fn noise_seed(&self, kind: NoiseKind, run: usize) -> u64 {
        hash_words(&[self.seed, hash_str(&kind.label()), run as u64])
    }

    pub fn solver_seed(&self, kind: NoiseKind, sigma_index: usize, method: Method, rank: usize, run: usize) -> u64 {
        hash_words(&[
            self.seed,
            hash_str(&kind.label()),
            sigma_index as u64,
            hash_str(method.name()),
            rank as u64,
            run as u64,
        ])
    }
}

/// One decomposition of one noisy tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub noise: NoiseKind,
    pub sigma: f64,
    pub rank: usize,
    pub method: Method,
    pub run: usize,
    /// `‖X − T̂‖_F` against the clean tensor; `None` if the solver failed.
    pub error: Option<f64>,
    pub noise_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub noise: NoiseKind,
    pub sigma: f64,
    pub rank: usize,
    pub method: Method,
    pub median_error: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub config: RobustnessConfig,
    pub x_norm: f64,
    /// Ordered by noise kind, σ, rank, method, run as listed in the config.
    pub runs: Vec<RunRecord>,
    pub cells: Vec<CellSummary>,
}

/// Middle value of the sorted sample, or the mean of the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

impl RobustnessReport {
    pub fn cell(&self, noise: NoiseKind, sigma: f64, rank: usize, method: Method) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.noise == noise && c.sigma == sigma && c.rank == rank && c.method == method)
    }

    pub fn median_error(&self, noise: NoiseKind, sigma: f64, rank: usize, method: Method) -> Option<f64> {
        self.cell(noise, sigma, rank, method).and_then(|c| c.median_error)
    }

    /// `‖N‖_F` of every run for a noise setting, by run index.
    pub fn noise_norms(&self, noise: NoiseKind, sigma: f64) -> Vec<f64> {
        let mut v: Vec<(usize, f64)> =
            self.runs.iter().filter(|r| r.noise == noise && r.sigma == sigma).map(|r| (r.run, r.noise_norm)).collect();
        v.sort_by_key(|&(run, _)| run);
        v.dedup_by_key(|&mut (run, _)| run);
        v.into_iter().map(|(_, n)| n).collect()
    }
}

/// Adds noise to the clean dataset for every `(kind, σ, rank, method, run)`
/// and records the denoising error of each decomposition.
pub fn robustness_sweep(cfg: &RobustnessConfig) -> Result<RobustnessReport> {
    cfg.validate()?;
    let x = cfg.dataset.generate(cfg.data_seed)?;
    robustness_sweep_on(cfg, &x)
}

/// [`robustness_sweep`] on a caller-supplied clean tensor.
pub fn robustness_sweep_on(cfg: &RobustnessConfig, x: &Tensor3) -> Result<RobustnessReport> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &noise in &cfg.noise {
        for (si, &sigma) in cfg.sigmas.iter().enumerate() {
            for &rank in &cfg.ranks {
                for &method in &cfg.methods {
                    for run in 0..cfg.runs {
                        jobs.push((noise, si, sigma, rank, method, run));
                    }
                }
            }
        }
    }
    let slice_mode = cfg.slice_mode();
    let runs = jobs
        .into_par_iter()
        .map(|(noise, si, sigma, rank, method, run)| -> Result<RunRecord> {
            let n = NoiseSpec { kind: noise, sigma, seed: cfg.noise_seed(noise, run) }.generate(x.shape())?;
            let t = x.add(&n)?;
            let opts = cfg.solver.with_seed(cfg.solver_seed(noise, si, method, rank, run));
            let error = match run_method(&t, method, rank, Some(slice_mode), &opts) {
                Ok(dec) => Some(frobenius_distance(x, &dec.reconstruct())?),
                Err(e) => {
                    log::warn!("{method} r={rank} {noise} sigma={sigma} run {run} failed: {e}");
                    None
                }
            };
            Ok(RunRecord { noise, sigma, rank, method, run, error, noise_norm: n.frobenius_norm() })
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = runs
        .chunks(cfg.runs)
        .map(|chunk| {
            let ok: Vec<f64> = chunk.iter().filter_map(|r| r.error).collect();
            let first = &chunk[0];
            CellSummary {
                noise: first.noise,
                sigma: first.sigma,
                rank: first.rank,
                method: first.method,
                median_error: median(&ok),
                failures: chunk.len() - ok.len(),
            }
        })
        .collect();
    Ok(RobustnessReport { config: cfg.clone(), x_norm: x.frobenius_norm(), runs, cells })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|e| e.to_string()).unwrap_or_default()
}

/// File name of the summary CSV for one noise setting.
pub fn summary_file_name(noise: NoiseKind, sigma: f64) -> String {
    format!("summary_{}_sigma{}.csv", noise.label(), sigma)
}

/// Writes `summary_<kind>_sigma<σ>.csv` (`rank,method,median_error`) per noise
/// setting and `runs.csv` with every run. Failed runs leave the error field empty.
pub fn write_report(report: &RobustnessReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg = &report.config;
    for &noise in &cfg.noise {
        for &sigma in &cfg.sigmas {
            let mut s = String::from("rank,method,median_error\n");
            for c in report.cells.iter().filter(|c| c.noise == noise && c.sigma == sigma) {
                writeln!(s, "{},{},{}", c.rank, c.method, fmt_opt(c.median_error)).expect("write to string");
            }
            let path = dir.join(summary_file_name(noise, sigma));
            fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
        }
    }
    let mut s = String::from("noise_kind,sigma,rank,method,run,error,noise_norm,x_norm\n");
    for r in &report.runs {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.noise,
            r.sigma,
            r.rank,
            r.method,
            r.run,
            fmt_opt(r.error),
            r.noise_norm,
            report.x_norm
        )
        .expect("write to string");
    }
    let path = dir.join("runs.csv");
    fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report)?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}
