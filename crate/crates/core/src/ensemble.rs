//! Disorder ensembles, fidelity-vs-W curves, the `lg(W/Δ)` collapse and gap
//! scans.
//!
//! Samples run on a bounded rayon pool. Every sample's seed depends only on
//! `(master_seed, w_index, sample_index)` and results are reduced in that
//! order, so output is bit-identical for any worker count.

use serde::{Deserialize, Serialize};

use crate::dynamics::EvolutionConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::bulk_edge_gap;
use crate::model::{derive_seed, sample_disorder, ChainSpec};
use crate::protocols::{protocol_gap, transfer_with_gap, Protocol};

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_W_STEPS: usize = 21;

pub const SEED_RULE: &str =
    "seed = splitmix64(splitmix64(master ^ splitmix64(w_index)) ^ sample_index); offsets from ChaCha8 seeded via seed_from_u64(seed)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub protocol: Protocol,
    pub chain: ChainSpec,
    pub omega: f64,
    pub w_grid: Vec<f64>,
    pub samples: usize,
    pub master_seed: u64,
    pub dt: f64,
    /// Keep every sample's fidelity in the result.
    pub keep_samples: bool,
}

impl EnsembleSpec {
    pub fn new(protocol: Protocol, chain: ChainSpec, omega: f64, w_grid: Vec<f64>) -> Self {
        Self {
            protocol,
            chain,
            omega,
            w_grid,
            samples: DEFAULT_SAMPLES,
            master_seed: 0,
            dt: crate::dynamics::DEFAULT_DT,
            keep_samples: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be >= 1".into()));
        }
        if self.w_grid.is_empty() {
            return Err(Error::InvalidArgument("empty W grid".into()));
        }
        if let Some(w) = self.w_grid.iter().find(|w| **w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("W must be >= 0, got {w}")));
        }
        self.protocol.check(&self.chain)
    }
}

/// Default W grid: 21 points over `[0, 1]` (p = 2) or `[0, 0.5]` (p = 3).
pub fn default_w_grid(protocol: Protocol) -> Vec<f64> {
    let w_max = match protocol {
        Protocol::SingleQubit => 1.0,
        Protocol::BellPair(_) => 0.5,
    };
    crate::hamiltonian::linspace(0.0, w_max, DEFAULT_W_STEPS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePoint {
    pub w: f64,
    pub mean_fidelity: f64,
    pub std_dev: f64,
    pub samples: usize,
    pub max_norm_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_fidelities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub spec: EnsembleSpec,
    /// Clean-chain bulk–edge gap over the protocol's sweep.
    pub gap: f64,
    pub seed_rule: String,
    pub points: Vec<EnsemblePoint>,
}

/// Mean and sample standard deviation, accumulated in order and shifted by
/// the first value (identical inputs give exactly that value and zero spread).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let shift = values[0];
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for v in values {
        let d = v - shift;
        s1 += d;
        s2 += d * d;
    }
    let mean = shift + s1 / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = ((s2 - s1 * s1 / n as f64) / (n - 1) as f64).max(0.0);
    (mean, var.sqrt())
}

/// Runs all samples on `workers` threads (`None`: rayon's default).
pub fn run_ensemble(spec: &EnsembleSpec, workers: Option<usize>) -> Result<EnsembleResult> {
    spec.validate()?;
    let gap = protocol_gap(spec.protocol, &spec.chain)?;
    let cfg = EvolutionConfig::with_dt(spec.dt);

    let jobs: Vec<(usize, usize)> = (0..spec.w_grid.len())
        .flat_map(|wi| (0..spec.samples).map(move |si| (wi, si)))
        .collect();

    let run_one = |&(wi, si): &(usize, usize)| -> Result<(f64, f64)> {
        let w = spec.w_grid[wi];
        let seed = derive_seed(spec.master_seed, wi as u64, si as u64);
        let wrap = |e: Error| Error::Sample { seed, w, source: Box::new(e) };
        let disorder = sample_disorder(w, spec.chain.bonds(), seed).map_err(wrap)?;
        let report = transfer_with_gap(spec.protocol, &spec.chain, spec.omega, Some(&disorder), &cfg, gap)
            .map_err(wrap)?;
        Ok((report.fidelity, report.norm_drift_max))
    };

    let outcomes: Vec<Result<(f64, f64)>> = {
        use rayon::prelude::*;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = workers {
            builder = builder.num_threads(k.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(run_one).collect())
    };

    let mut points = Vec::with_capacity(spec.w_grid.len());
    let mut iter = outcomes.into_iter();
    for &w in &spec.w_grid {
        let mut fids = Vec::with_capacity(spec.samples);
        let mut drift: f64 = 0.0;
        for outcome in iter.by_ref().take(spec.samples) {
            let (f, d) = outcome?;
            fids.push(f);
            drift = drift.max(d);
        }
        let (mean, std) = mean_std(&fids);
        points.push(EnsemblePoint {
            w,
            mean_fidelity: mean,
            std_dev: std,
            samples: fids.len(),
            max_norm_drift: drift,
            sample_fidelities: spec.keep_samples.then_some(fids),
        });
    }

    Ok(EnsembleResult { spec: spec.clone(), gap, seed_rule: SEED_RULE.to_string(), points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    /// `log10(W/Δ)`.
    pub x: f64,
    pub w: f64,
    pub mean_fidelity: f64,
}

/// Maps each `W > 0` point to `log10(W/Δ)`; `W = 0` has no image and is dropped.
pub fn collapse_axis(result: &EnsembleResult) -> Result<Vec<CollapsePoint>> {
    if result.gap.is_nan() || result.gap <= 0.0 {
        return Err(Error::InvalidArgument(format!("gap must be positive, got {}", result.gap)));
    }
    Ok(result
        .points
        .iter()
        .filter(|p| p.w > 0.0)
        .map(|p| CollapsePoint { x: (p.w / result.gap).log10(), w: p.w, mean_fidelity: p.mean_fidelity })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScanRow {
    pub qubits: usize,
    pub gap: Option<f64>,
    pub error: Option<String>,
}

/// The chain a protocol of period `p` runs on.
pub fn protocol_chain(period: usize, qubits: usize) -> Result<ChainSpec> {
    match period {
        2 => ChainSpec::ssh(qubits),
        3 => ChainSpec::trimer(qubits),
        p => Err(Error::InvalidChain(format!("no transfer protocol for p = {p}"))),
    }
}

/// `Δ(M)` for each size; incompatible sizes produce an error row.
pub fn gap_scan(period: usize, sizes: &[usize], theta_range: (f64, f64), theta_steps: usize) -> Vec<GapScanRow> {
    sizes
        .iter()
        .map(|&m| {
            match protocol_chain(period, m).and_then(|c| bulk_edge_gap(&c, theta_range, theta_steps)) {
                Ok(g) => GapScanRow { qubits: m, gap: Some(g), error: None },
                Err(e) => GapScanRow { qubits: m, gap: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}
