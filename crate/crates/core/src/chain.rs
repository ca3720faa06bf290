//! Chain geometry, the single-excitation Hamiltonian and the fidelity measures.
//!
//! Energies and couplings are in absolute units; setting `j_max = 1` makes
//! them multiples of the coupling cap and times multiples of `1/j_max`
//! (ħ = 1 throughout).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::TridiagonalEigen;

/// Tolerance on `Σ|A_j|² = 1` used by input validation.
pub const NORM_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_N_SITES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub n_sites: usize,
    pub j_max: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_sites: DEFAULT_N_SITES,
            j_max: 1.0,
        }
    }
}

impl ChainConfig {
    pub fn new(n_sites: usize, j_max: f64) -> Result<Self> {
        let config = Self { n_sites, j_max };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::input(format!(
                "chain needs at least 2 sites, got {}",
                self.n_sites
            )));
        }
        if !(self.j_max.is_finite() && self.j_max > 0.0) {
            return Err(Error::input(format!(
                "j_max must be positive and finite, got {}",
                self.j_max
            )));
        }
        Ok(())
    }

    pub fn n_bonds(&self) -> usize {
        self.n_sites - 1
    }
}

/// Hopping Hamiltonian restricted to one excitation: the real symmetric
/// tridiagonal matrix with diagonal `h_j` and off-diagonal `J_j`.
///
/// With this sign a π-pulse on one bond maps `|j⟩ → −i|j+1⟩`, so the arrival
/// phases are `(−i)^(N−1)` as returned by [`protocol_phase`]. The opposite
/// sign is a gauge change `|j⟩ → (−1)^j |j⟩`: spectra and odd-N results are
/// identical, even-N arrival phases flip by π.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationHamiltonian {
    onsite: Vec<f64>,
    couplings: Vec<f64>,
}

impl SingleExcitationHamiltonian {
    pub fn new(onsite: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if onsite.len() < 2 {
            return Err(Error::input("Hamiltonian needs at least 2 sites"));
        }
        Error::check_len("couplings", onsite.len() - 1, couplings.len())?;
        Ok(Self { onsite, couplings })
    }

    pub fn n_sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Off-diagonal matrix entries.
    pub fn off_diagonal(&self) -> &[f64] {
        &self.couplings
    }

    /// Row-major dense matrix; mostly useful for tests and small printouts.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_sites();
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = self.onsite[i];
        }
        for (i, &j) in self.couplings.iter().enumerate() {
            m[i][i + 1] = j;
            m[i + 1][i] = j;
        }
        m
    }

    pub fn eigen(&self) -> Result<TridiagonalEigen> {
        TridiagonalEigen::new(&self.onsite, &self.couplings)
    }

    /// `H v` for a complex vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        crate::linalg::tridiagonal_mul(&self.onsite, &self.couplings, v, &mut out);
        out
    }
}

pub fn build_hamiltonian(
    config: &ChainConfig,
    onsite: &[f64],
    couplings: &[f64],
) -> Result<SingleExcitationHamiltonian> {
    config.validate()?;
    Error::check_len("onsite energies", config.n_sites, onsite.len())?;
    Error::check_len("couplings", config.n_bonds(), couplings.len())?;
    SingleExcitationHamiltonian::new(onsite.to_vec(), couplings.to_vec())
}

/// Eigenvalues in ascending order.
pub fn spectrum(h: &SingleExcitationHamiltonian) -> Result<Vec<f64>> {
    Ok(h.eigen()?.values().to_vec())
}

/// Amplitudes `A_j` over the single-excitation basis `|j⟩`, `j = 1..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<Complex64>);

impl StateVector {
    /// Wraps amplitudes, rejecting vectors that are not normalized.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self(amplitudes);
        let drift = (state.norm() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::input(format!("state vector norm off by {drift:e}")));
        }
        Ok(state)
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        Self(amplitudes)
    }

    /// Excitation localized on site `site` (1-based).
    pub fn site(n_sites: usize, site: usize) -> Self {
        assert!(
            (1..=n_sites).contains(&site),
            "site {site} outside 1..={n_sites}"
        );
        let mut amps = vec![Complex64::new(0.0, 0.0); n_sites];
        amps[site - 1] = Complex64::new(1.0, 0.0);
        Self(amps)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    /// Amplitude on site `site` (1-based).
    pub fn amplitude(&self, site: usize) -> Complex64 {
        self.0[site - 1]
    }

    pub fn last(&self) -> Complex64 {
        self.0[self.0.len() - 1]
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

/// Outcome of one transfer run, read off the last site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferResult {
    pub a_n: Complex64,
    pub probability: f64,
    /// `arg(A_N)` in (−π, π].
    pub phase: f64,
    pub fidelity: f64,
}

impl TransferResult {
    pub fn new(a_n: Complex64, phi0: f64) -> Self {
        Self {
            a_n,
            probability: a_n.norm_sqr().min(1.0),
            phase: wrap_phase(a_n.arg()),
            fidelity: mean_fidelity(a_n, phi0),
        }
    }
}

/// Reduces an angle to (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance between two angles on the circle, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// Fidelity `⟨ψ|ρ_N|ψ⟩` of the received qubit for the input `α|0⟩ + β|1⟩`.
pub fn state_fidelity(alpha: Complex64, beta: Complex64, a_n: Complex64) -> Result<f64> {
    let pa = alpha.norm_sqr();
    let pb = beta.norm_sqr();
    if (pa + pb - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::input(format!(
            "qubit state not normalized: |α|² + |β|² = {}",
            pa + pb
        )));
    }
    let mag = a_n.norm();
    let phi = a_n.arg();
    Ok(pa + pb * (1.0 - 2.0 * pa) * mag * mag + 2.0 * pa * pb * mag * phi.cos())
}

/// Fidelity averaged over all input qubit states, after undoing the known
/// protocol phase `phi0`: `1/2 + |A_N|²/6 + |A_N| cos(φ − φ0)/3`.
pub fn mean_fidelity(a_n: Complex64, phi0: f64) -> f64 {
    let mag = a_n.norm().min(1.0);
    let phi = a_n.arg();
    0.5 + mag * mag / 6.0 + mag * (phi - phi0).cos() / 3.0
}

/// Phase `−(π/2)(N − 1)` picked up by the arriving amplitude in every
/// protocol, reduced to (−π, π].
pub fn protocol_phase(n_sites: usize) -> f64 {
    // (-i)^(N-1) cycles with period 4; reduce exactly before scaling.
    let quarter_turns = ((n_sites.max(1) - 1) % 4) as f64;
    wrap_phase(-FRAC_PI_2 * quarter_turns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_site_matrix() {
        let cfg = ChainConfig::new(2, 1.0).unwrap();
        let h = build_hamiltonian(&cfg, &[0.0, 0.0], &[1.0]).unwrap();
        assert_eq!(h.to_dense(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let ev = spectrum(&h).unwrap();
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn three_site_homogeneous() {
        let j = 0.7;
        let cfg = ChainConfig::new(3, 1.0).unwrap();
        let h = build_hamiltonian(&cfg, &[0.0; 3], &[j, j]).unwrap();
        let ev = spectrum(&h).unwrap();
        let s2 = 2f64.sqrt();
        for (a, b) in ev.iter().zip([-s2 * j, 0.0, s2 * j]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let cfg = ChainConfig::new(6, 1.0).unwrap();
        let h = build_hamiltonian(
            &cfg,
            &[0.1, -0.2, 0.3, 0.0, 0.5, -0.1],
            &[0.3, 1.0, 0.2, 0.9, 0.4],
        )
        .unwrap();
        let m = h.to_dense();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
    }

    #[test]
    fn length_errors() {
        let cfg = ChainConfig::new(3, 1.0).unwrap();
        assert!(matches!(
            build_hamiltonian(&cfg, &[0.0; 2], &[1.0, 1.0]),
            Err(Error::Length { .. })
        ));
        assert!(matches!(
            build_hamiltonian(&cfg, &[0.0; 3], &[1.0]),
            Err(Error::Length { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::new(1, 1.0).is_err());
        assert!(ChainConfig::new(2, 0.0).is_err());
        assert!(ChainConfig::new(2, f64::NAN).is_err());
        assert!(ChainConfig::new(2, 2.5).is_ok());
    }

    #[test]
    fn state_vector_rejects_unnormalized() {
        assert!(StateVector::new(vec![c(1.0, 0.0), c(0.1, 0.0)]).is_err());
        assert!(StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).is_ok());
    }

    #[test]
    fn protocol_phase_values() {
        assert_abs_diff_eq!(protocol_phase(5), 0.0);
        assert_abs_diff_eq!(protocol_phase(25), 0.0);
        assert_abs_diff_eq!(protocol_phase(2), -FRAC_PI_2);
        assert_abs_diff_eq!(protocol_phase(3), PI);
        assert_abs_diff_eq!(protocol_phase(4), FRAC_PI_2);
        for n in 2..200usize {
            let direct = wrap_phase(-FRAC_PI_2 * (n - 1) as f64);
            assert!(circular_distance(protocol_phase(n), direct) < 1e-12);
        }
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(circular_distance(3.1, -3.1), TAU - 6.2, epsilon = 1e-12);
    }

    #[test]
    fn state_fidelity_limits() {
        for phi in [0.0, 1.0, -2.5, PI] {
            let a = Complex64::from_polar(1.0, phi);
            assert_abs_diff_eq!(
                state_fidelity(c(0.0, 0.0), c(1.0, 0.0), a).unwrap(),
                1.0,
                epsilon = 1e-15
            );
        }
        for a in [c(0.0, 0.0), c(0.3, -0.4), c(0.0, 1.0)] {
            assert_abs_diff_eq!(
                state_fidelity(c(1.0, 0.0), c(0.0, 0.0), a).unwrap(),
                1.0,
                epsilon = 1e-15
            );
        }
        assert!(state_fidelity(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn mean_fidelity_limits() {
        assert_eq!(mean_fidelity(c(0.0, 0.0), 0.3), 0.5);
        assert_abs_diff_eq!(
            mean_fidelity(Complex64::from_polar(1.0, 0.7), 0.7),
            1.0,
            epsilon = 1e-15
        );
        // |A_N| slightly above one from round-off is clamped
        assert!(mean_fidelity(c(1.0 + 1e-12, 0.0), 0.0) <= 1.0);
    }

    #[test]
    fn mean_fidelity_random_phase_is_classical() {
        // Average over φ on a uniform grid: the cosine term integrates to zero.
        let m = 4096;
        let avg: f64 = (0..m)
            .map(|k| mean_fidelity(Complex64::from_polar(1.0, TAU * k as f64 / m as f64), 0.0))
            .sum::<f64>()
            / m as f64;
        assert_abs_diff_eq!(avg, 2.0 / 3.0, epsilon = 1e-12);
    }

    /// Monte Carlo average of `state_fidelity` over Haar-random qubits
    /// (uniform on the Bloch sphere) reproduces `mean_fidelity`.
    #[test]
    fn bloch_sphere_average_matches_mean_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = 200_000;
        for a_n in [
            c(0.0, 0.0),
            c(0.8, 0.0),
            Complex64::from_polar(0.9, 2.0),
            c(0.0, -1.0),
        ] {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                let cos_theta: f64 = rng.gen_range(-1.0..1.0);
                let lambda: f64 = rng.gen_range(0.0..TAU);
                let alpha = c(((1.0 + cos_theta) / 2.0).sqrt(), 0.0);
                let beta = Complex64::from_polar(((1.0 - cos_theta) / 2.0).sqrt(), lambda);
                let f = state_fidelity(alpha, beta, a_n).unwrap();
                sum += f;
                sum_sq += f * f;
            }
            let mean = sum / samples as f64;
            let stderr = ((sum_sq / samples as f64 - mean * mean) / samples as f64).sqrt();
            let expected = mean_fidelity(a_n, 0.0);
            assert!(
                (mean - expected).abs() < 4.0 * stderr + 1e-12,
                "A_N={a_n}: MC {mean} vs {expected} (stderr {stderr})"
            );
        }
    }

    #[test]
    fn transfer_result_fields() {
        let r = TransferResult::new(c(0.0, -1.0), -FRAC_PI_2);
        assert_abs_diff_eq!(r.probability, 1.0);
        assert_abs_diff_eq!(r.phase, -FRAC_PI_2);
        assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-15);
    }
}
