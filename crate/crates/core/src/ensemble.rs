//! Monte Carlo averages over static disorder, and parameter sweeps.
//!
//! Realizations run in parallel on a rayon pool; each one draws its disorder
//! from `(seed, index)` alone and results are reduced in index order, so the
//! statistics are bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, TransferResult};
use crate::disorder::{sample_realization, DisorderSpec};
use crate::error::{Error, Result};
use crate::propagator::{transfer, PropagationSettings};
use crate::protocols::{build_schedule, ProtocolKind, ProtocolSpec};

pub const DEFAULT_REALIZATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub chain: ChainConfig,
    pub protocol: ProtocolSpec,
    pub disorder: DisorderSpec,
    pub realizations: usize,
    pub seed: u64,
    pub settings: PropagationSettings,
}

impl ExperimentConfig {
    pub fn new(kind: ProtocolKind, n_sites: usize, sigma_h: f64, sigma_j: f64) -> Self {
        Self {
            chain: ChainConfig {
                n_sites,
                j_max: 1.0,
            },
            protocol: ProtocolSpec::new(kind),
            disorder: DisorderSpec { sigma_h, sigma_j },
            realizations: DEFAULT_REALIZATIONS,
            seed: 0,
            settings: PropagationSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.protocol.validate()?;
        self.disorder.validate()?;
        self.settings.validate()?;
        if self.realizations == 0 {
            return Err(Error::input("realizations must be at least 1"));
        }
        if self.protocol.kind == ProtocolKind::Adiabatic && self.chain.n_sites % 2 == 0 {
            return Err(Error::EvenChain(self.chain.n_sites));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean_probability: f64,
    pub mean_fidelity: f64,
    pub std_probability: f64,
    pub std_fidelity: f64,
    pub stderr_probability: f64,
    pub stderr_fidelity: f64,
    pub count: usize,
}

impl EnsembleStats {
    /// Aggregates `(probability, fidelity)` pairs in iteration order.
    pub fn from_samples<I>(samples: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let samples: Vec<(f64, f64)> = samples.into_iter().collect();
        let count = samples.len();
        let (mean_probability, std_probability) = mean_std(samples.iter().map(|s| s.0), count);
        let (mean_fidelity, std_fidelity) = mean_std(samples.iter().map(|s| s.1), count);
        let root = (count.max(1) as f64).sqrt();
        Self {
            mean_probability,
            mean_fidelity,
            std_probability,
            std_fidelity,
            stderr_probability: std_probability / root,
            stderr_fidelity: std_fidelity / root,
            count,
        }
    }

    pub fn from_results(results: &[TransferResult]) -> Self {
        Self::from_samples(results.iter().map(|r| (r.probability, r.fidelity)))
    }
}

/// Two-pass mean and sample standard deviation, summed in order.
fn mean_std(values: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / count as f64;
    if count == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
    (mean, var.sqrt())
}

/// Per-realization transfer results, in realization order.
pub fn run_realizations(config: &ExperimentConfig) -> Result<Vec<TransferResult>> {
    config.validate()?;
    let schedule = build_schedule(&config.chain, &config.protocol)?;
    (0..config.realizations)
        .into_par_iter()
        .map(|index| {
            let realization =
                sample_realization(&config.disorder, &config.chain, config.seed, index as u64);
            transfer(&schedule, &realization, &config.settings).map_err(|e| Error::Realization {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Ensemble statistics for one parameter point on the current rayon pool.
pub fn run_point(config: &ExperimentConfig) -> Result<EnsembleStats> {
    Ok(EnsembleStats::from_results(&run_realizations(config)?))
}

/// [`run_point`] on a dedicated pool of `threads` workers.
pub fn run_point_with_threads(config: &ExperimentConfig, threads: usize) -> Result<EnsembleStats> {
    thread_pool(threads)?.install(|| run_point(config))
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::input(format!("cannot build thread pool: {e}")))
}

pub const DEFAULT_SIGMA_MAX: f64 = 0.3;
pub const DEFAULT_SIGMA_STEP: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub protocols: Vec<ProtocolKind>,
    pub n_sites: Vec<usize>,
    pub sigma_h: Vec<f64>,
    pub sigma_j: Vec<f64>,
}

impl Default for SweepGrid {
    /// All protocols, `N ∈ {15, 25, 51}`, both widths over `0..=0.3` in steps of 0.02.
    fn default() -> Self {
        let axis = Self::axis(DEFAULT_SIGMA_MAX, DEFAULT_SIGMA_STEP);
        Self {
            protocols: ProtocolKind::ALL.to_vec(),
            n_sites: vec![15, 25, 51],
            sigma_h: axis.clone(),
            sigma_j: axis,
        }
    }
}

impl SweepGrid {
    /// `0, step, 2·step, …` up to and including `max` (to within rounding).
    pub fn axis(max: f64, step: f64) -> Vec<f64> {
        let count = (max / step + 1e-9).floor() as usize;
        (0..=count).map(|k| k as f64 * step).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocols.is_empty()
            || self.n_sites.is_empty()
            || self.sigma_h.is_empty()
            || self.sigma_j.is_empty()
        {
            return Err(Error::input("sweep grid axes must be non-empty"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.protocols.len() * self.n_sites.len() * self.sigma_h.len() * self.sigma_j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in row order: protocol, then N, then σ_h, then σ_J.
    pub fn points(&self) -> impl Iterator<Item = (ProtocolKind, usize, f64, f64)> + '_ {
        self.protocols.iter().flat_map(move |&p| {
            self.n_sites.iter().flat_map(move |&n| {
                self.sigma_h
                    .iter()
                    .flat_map(move |&h| self.sigma_j.iter().map(move |&j| (p, n, h, j)))
            })
        })
    }
}

/// One row of ensemble output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsRow {
    pub protocol: ProtocolKind,
    pub n_sites: usize,
    pub sigma_h: f64,
    pub sigma_j: f64,
    pub realizations: usize,
    /// Seed the point was actually run with.
    pub seed: u64,
    pub stats: EnsembleStats,
}

impl StatsRow {
    pub fn new(config: &ExperimentConfig, stats: EnsembleStats) -> Self {
        Self {
            protocol: config.protocol.kind,
            n_sites: config.chain.n_sites,
            sigma_h: config.disorder.sigma_h,
            sigma_j: config.disorder.sigma_j,
            realizations: config.realizations,
            seed: config.seed,
            stats,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one grid point, a hash of the master seed and the point's
/// coordinates, so a point's result does not depend on the rest of the grid.
pub fn point_seed(
    master: u64,
    protocol: ProtocolKind,
    n_sites: usize,
    sigma_h: f64,
    sigma_j: f64,
) -> u64 {
    [
        protocol as u64,
        n_sites as u64,
        sigma_h.to_bits(),
        sigma_j.to_bits(),
    ]
    .into_iter()
    .fold(splitmix64(master), |acc, v| splitmix64(acc ^ v))
}

/// The experiment run for one grid point.
pub fn point_config(
    base: &ExperimentConfig,
    protocol: ProtocolKind,
    n_sites: usize,
    sigma_h: f64,
    sigma_j: f64,
) -> ExperimentConfig {
    ExperimentConfig {
        chain: ChainConfig {
            n_sites,
            ..base.chain
        },
        protocol: ProtocolSpec {
            kind: protocol,
            ..base.protocol
        },
        disorder: DisorderSpec { sigma_h, sigma_j },
        seed: point_seed(base.seed, protocol, n_sites, sigma_h, sigma_j),
        ..*base
    }
}

/// Evaluates the full Cartesian grid, one row per point in
/// [`SweepGrid::points`] order.
pub fn run_sweep(grid: &SweepGrid, base: &ExperimentConfig) -> Result<Vec<StatsRow>> {
    grid.validate()?;
    grid.points()
        .map(|(p, n, h, j)| {
            let config = point_config(base, p, n, h, j);
            run_point(&config).map(|stats| StatsRow::new(&config, stats))
        })
        .collect()
}
