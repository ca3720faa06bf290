//! Static Gaussian disorder on site energies and bond strengths.
//!
//! Realization `i` of a run is drawn from a ChaCha stream keyed by the master
//! seed and selected by `i`, so it does not depend on which thread draws it or
//! in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chain::ChainConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisorderSpec {
    /// Width of the site energies `h_j`, in units of `j_max`.
    pub sigma_h: f64,
    /// Width of the relative bond errors `δJ_j` (dimensionless).
    pub sigma_j: f64,
}

impl DisorderSpec {
    pub fn new(sigma_h: f64, sigma_j: f64) -> Result<Self> {
        let spec = Self { sigma_h, sigma_j };
        spec.validate()?;
        Ok(spec)
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_h", self.sigma_h), ("sigma_j", self.sigma_j)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::input(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma_h == 0.0 && self.sigma_j == 0.0
    }
}

/// One frozen draw: site energies (first and last pinned at zero) and the
/// multiplicative bond factors `1 + δJ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    onsite: Vec<f64>,
    coupling_factors: Vec<f64>,
}

impl DisorderRealization {
    pub fn noiseless(n_sites: usize) -> Self {
        Self {
            onsite: vec![0.0; n_sites],
            coupling_factors: vec![1.0; n_sites.saturating_sub(1)],
        }
    }

    /// Builds a realization from explicit values. The endpoint energies must
    /// be zero.
    pub fn new(onsite: Vec<f64>, coupling_factors: Vec<f64>) -> Result<Self> {
        if onsite.len() < 2 {
            return Err(Error::input("realization needs at least 2 sites"));
        }
        Error::check_len("coupling factors", onsite.len() - 1, coupling_factors.len())?;
        if onsite[0] != 0.0 || onsite[onsite.len() - 1] != 0.0 {
            return Err(Error::input("end sites are exempt from on-site disorder"));
        }
        Ok(Self {
            onsite,
            coupling_factors,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn coupling_factors(&self) -> &[f64] {
        &self.coupling_factors
    }

    /// `J_j (1 + δJ_j)` written into `out`.
    pub fn apply_to_couplings(&self, nominal: &[f64], out: &mut [f64]) {
        for ((o, &j), &f) in out.iter_mut().zip(nominal).zip(&self.coupling_factors) {
            *o = j * f;
        }
    }
}

/// Random generator for realization `index` of the run keyed by `seed`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws realization `index`: interior `h_j ~ N(0, (σ_h j_max)²)` first, then
/// every `δJ_j ~ N(0, σ_J²)`.
pub fn sample_realization(
    spec: &DisorderSpec,
    config: &ChainConfig,
    seed: u64,
    index: u64,
) -> DisorderRealization {
    let n = config.n_sites;
    if spec.is_noiseless() {
        return DisorderRealization::noiseless(n);
    }
    let mut rng = realization_rng(seed, index);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let mut onsite = vec![0.0; n];
    for h in onsite.iter_mut().take(n - 1).skip(1) {
        *h = spec.sigma_h * config.j_max * normal();
    }
    let coupling_factors = (0..n - 1).map(|_| 1.0 + spec.sigma_j * normal()).collect();
    DisorderRealization {
        onsite,
        coupling_factors,
    }
}
