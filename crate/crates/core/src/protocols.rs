//! Coupling schedules for the three transfer protocols and their closed-form
//! reference solutions.
//!
//! * sequential SWAP: back-to-back π-pulses on one bond at a time;
//! * spin coupling: the static profile `J_j = J0 √(j(N−j))`, whose equidistant
//!   spectrum refocuses the excitation on the far end at `t = π/(2 J0)`;
//! * adiabatic: even bonds switched off while odd bonds switch on, carrying
//!   the zero-energy dark state from site 1 to site N.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, StateVector};
use crate::error::{Error, Result};

pub const DEFAULT_ADIABATIC_C: f64 = 8.0;
pub const DEFAULT_SIGMA_RATIO: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    #[serde(rename = "swap")]
    SequentialSwap,
    SpinCoupling,
    Adiabatic,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [
        ProtocolKind::SequentialSwap,
        ProtocolKind::SpinCoupling,
        ProtocolKind::Adiabatic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::SequentialSwap => "swap",
            ProtocolKind::SpinCoupling => "spin-coupling",
            ProtocolKind::Adiabatic => "adiabatic",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swap" | "sequential-swap" => Ok(ProtocolKind::SequentialSwap),
            "spin-coupling" => Ok(ProtocolKind::SpinCoupling),
            "adiabatic" => Ok(ProtocolKind::Adiabatic),
            other => Err(Error::input(format!(
                "unknown protocol '{other}' (expected swap, spin-coupling or adiabatic)"
            ))),
        }
    }
}

/// Treatment of the erf ramp tails at `t = 0` and `t = t_out`.
///
/// With `σ_t = t_out/8` the raw ramps leave the "off" family at
/// `j_max erfc(√2)/2 ≈ 0.023 j_max` at both ends, so `|1⟩` is not exactly the
/// dark state and the residual bright component interferes at the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampEndpoints {
    /// Ramps rescaled affinely so they run exactly between 0 and `j_max`.
    #[default]
    Pinned,
    /// The erf profiles as written, tails included.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    /// Adiabatic duration in units of `N / j_max`.
    pub adiabatic_c: f64,
    /// Width of the erf ramps relative to the duration, `σ_t / t_out`.
    pub adiabatic_sigma_ratio: f64,
    pub ramp_endpoints: RampEndpoints,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        Self::new(ProtocolKind::SpinCoupling)
    }
}

impl ProtocolSpec {
    pub fn new(kind: ProtocolKind) -> Self {
        Self {
            kind,
            adiabatic_c: DEFAULT_ADIABATIC_C,
            adiabatic_sigma_ratio: DEFAULT_SIGMA_RATIO,
            ramp_endpoints: RampEndpoints::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.adiabatic_c >= 1.0 && self.adiabatic_c.is_finite()) {
            return Err(Error::input(format!(
                "adiabatic_c must be at least 1, got {}",
                self.adiabatic_c
            )));
        }
        if !(self.adiabatic_sigma_ratio > 0.0 && self.adiabatic_sigma_ratio < 0.5) {
            return Err(Error::input(format!(
                "adiabatic_sigma_ratio must lie in (0, 1/2), got {}",
                self.adiabatic_sigma_ratio
            )));
        }
        Ok(())
    }
}

/// Interval of constant couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub duration: f64,
    pub couplings: Vec<f64>,
}

impl Segment {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Piecewise(Vec<Segment>),
    /// Odd bonds follow `J_odd(t)`, even bonds `J_even(t)`.
    ErfRamps {
        sigma_t: f64,
        endpoints: RampEndpoints,
    },
}

/// Nominal (disorder-free) couplings as a function of time over `[0, t_out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSchedule {
    kind: ProtocolKind,
    n_sites: usize,
    j_max: f64,
    t_out: f64,
    shape: Shape,
}

impl CouplingSchedule {
    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn j_max(&self) -> f64 {
        self.j_max
    }

    pub fn t_out(&self) -> f64 {
        self.t_out
    }

    /// Constant-coupling intervals, present for piecewise-constant protocols.
    pub fn segments(&self) -> Option<&[Segment]> {
        match &self.shape {
            Shape::Piecewise(segments) => Some(segments),
            Shape::ErfRamps { .. } => None,
        }
    }

    /// Ramp width `σ_t` of the adiabatic schedule.
    pub fn sigma_t(&self) -> Option<f64> {
        match self.shape {
            Shape::ErfRamps { sigma_t, .. } => Some(sigma_t),
            Shape::Piecewise(_) => None,
        }
    }

    /// Nominal couplings `J_1 … J_{N−1}` at time `t`, clamped into `[0, t_out]`.
    pub fn couplings_at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n_sites - 1];
        self.couplings_into(t, &mut out);
        out
    }

    pub fn couplings_into(&self, t: f64, out: &mut [f64]) {
        let t = t.clamp(0.0, self.t_out);
        match &self.shape {
            Shape::Piecewise(segments) => {
                let seg = segments
                    .iter()
                    .find(|s| t < s.end())
                    .unwrap_or_else(|| segments.last().expect("schedule has segments"));
                out.copy_from_slice(&seg.couplings);
            }
            Shape::ErfRamps { sigma_t, endpoints } => {
                let ramp = |family| match endpoints {
                    RampEndpoints::Raw => erf_ramp(self.j_max, self.t_out, *sigma_t, t, family),
                    RampEndpoints::Pinned => {
                        pinned_erf_ramp(self.j_max, self.t_out, *sigma_t, t, family)
                    }
                };
                let odd = ramp(RampFamily::Odd);
                let even = ramp(RampFamily::Even);
                for (i, j) in out.iter_mut().enumerate() {
                    // bond index i + 1 is odd when i is even
                    *j = if i % 2 == 0 { odd } else { even };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampFamily {
    Odd,
    Even,
}

/// `J_odd/even(t) = (j_max/2) [1 ± erf((t − t_out/2 ± 2σ_t) / (√2 σ_t))]`.
pub fn erf_ramp(j_max: f64, t_out: f64, sigma_t: f64, t: f64, family: RampFamily) -> f64 {
    let sign = match family {
        RampFamily::Odd => 1.0,
        RampFamily::Even => -1.0,
    };
    let x = (t - 0.5 * t_out + sign * 2.0 * sigma_t) / (SQRT_2 * sigma_t);
    0.5 * j_max * (1.0 + sign * libm::erf(x))
}

/// [`erf_ramp`] shifted and stretched to take exactly the values 0 and
/// `j_max` at the ends of `[0, t_out]`. The ramps are monotone, so the cap
/// still holds.
pub fn pinned_erf_ramp(j_max: f64, t_out: f64, sigma_t: f64, t: f64, family: RampFamily) -> f64 {
    let raw = |t| erf_ramp(1.0, t_out, sigma_t, t, family);
    let (lo, hi) = match family {
        RampFamily::Odd => (raw(0.0), raw(t_out)),
        RampFamily::Even => (raw(t_out), raw(0.0)),
    };
    j_max * (raw(t) - lo) / (hi - lo)
}

pub fn build_schedule(config: &ChainConfig, spec: &ProtocolSpec) -> Result<CouplingSchedule> {
    match spec.kind {
        ProtocolKind::SequentialSwap => swap_schedule(config),
        ProtocolKind::SpinCoupling => spin_coupling_schedule(config),
        ProtocolKind::Adiabatic => adiabatic_schedule(config, spec),
    }
}

/// N−1 consecutive π-pulses, bond `j` at full strength for `π/(2 j_max)`.
pub fn swap_schedule(config: &ChainConfig) -> Result<CouplingSchedule> {
    config.validate()?;
    let bonds = config.n_bonds();
    let pulse = FRAC_PI_2 / config.j_max;
    let segments = (0..bonds)
        .map(|j| {
            let mut couplings = vec![0.0; bonds];
            couplings[j] = config.j_max;
            Segment {
                start: j as f64 * pulse,
                duration: pulse,
                couplings,
            }
        })
        .collect();
    Ok(CouplingSchedule {
        kind: ProtocolKind::SequentialSwap,
        n_sites: config.n_sites,
        j_max: config.j_max,
        t_out: bonds as f64 * pulse,
        shape: Shape::Piecewise(segments),
    })
}

/// Static profile `J_j = J0 √(j(N−j))`, scaled so its largest bond is exactly
/// `j_max`. Returns the couplings and `J0`.
pub fn spin_coupling_profile(config: &ChainConfig) -> Result<(Vec<f64>, f64)> {
    config.validate()?;
    let n = config.n_sites;
    let peak = if n % 2 == 0 {
        n as f64 / 2.0
    } else {
        ((n * n - 1) as f64).sqrt() / 2.0
    };
    let j0 = config.j_max / peak;
    let couplings = (1..n).map(|j| j0 * ((j * (n - j)) as f64).sqrt()).collect();
    Ok((couplings, j0))
}

pub fn spin_coupling_schedule(config: &ChainConfig) -> Result<CouplingSchedule> {
    let (couplings, j0) = spin_coupling_profile(config)?;
    let t_out = FRAC_PI_2 / j0;
    Ok(CouplingSchedule {
        kind: ProtocolKind::SpinCoupling,
        n_sites: config.n_sites,
        j_max: config.j_max,
        t_out,
        shape: Shape::Piecewise(vec![Segment {
            start: 0.0,
            duration: t_out,
            couplings,
        }]),
    })
}

/// Counterintuitive erf ramps of duration `C N / j_max`: even bonds start on
/// and switch off late, odd bonds switch on early.
pub fn adiabatic_schedule(config: &ChainConfig, spec: &ProtocolSpec) -> Result<CouplingSchedule> {
    config.validate()?;
    spec.validate()?;
    if config.n_sites % 2 == 0 {
        return Err(Error::EvenChain(config.n_sites));
    }
    let t_out = spec.adiabatic_c * config.n_sites as f64 / config.j_max;
    Ok(CouplingSchedule {
        kind: ProtocolKind::Adiabatic,
        n_sites: config.n_sites,
        j_max: config.j_max,
        t_out,
        shape: Shape::ErfRamps {
            sigma_t: spec.adiabatic_sigma_ratio * t_out,
            endpoints: spec.ramp_endpoints,
        },
    })
}

/// Closed-form amplitudes of the spin-coupling chain started on site 1:
/// `A_j(t) = √C(N−1, j−1) (−i sin J0 t)^(j−1) (cos J0 t)^(N−j)`.
pub fn analytic_spin_coupling_amplitudes(config: &ChainConfig, t: f64) -> Result<StateVector> {
    if !(t >= 0.0) {
        return Err(Error::input(format!("time must be non-negative, got {t}")));
    }
    let (_, j0) = spin_coupling_profile(config)?;
    let n = config.n_sites;
    let (s, c) = (j0 * t).sin_cos();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut binom = 1.0_f64;
    let amps = (0..n)
        .map(|k| {
            if k > 0 {
                binom *= (n - k) as f64 / k as f64;
            }
            let mag = binom.sqrt() * s.powi(k as i32) * c.powi((n - 1 - k) as i32);
            minus_i.powu(k as u32) * mag
        })
        .collect();
    Ok(StateVector::from_raw(amps))
}

/// Normalized zero-energy eigenstate of the coupling-only chain (odd N).
///
/// Site `2m+1` carries `(−1)^m Π_{odd k < 2m+1} J_k Π_{even k > 2m+1} J_k`;
/// even sites are empty. Products are accumulated as logarithms so extreme
/// coupling ratios neither overflow nor underflow.
pub fn dark_state(couplings: &[f64]) -> Result<StateVector> {
    let n = couplings.len() + 1;
    if n % 2 == 0 {
        return Err(Error::EvenChain(n));
    }
    let half = (n - 1) / 2;
    // bond k (1-based) lives at couplings[k - 1]
    let log_abs = |k: usize| couplings[k - 1].abs().ln();
    let sign_of = |k: usize| couplings[k - 1].signum();

    let mut logs = Vec::with_capacity(half + 1);
    let mut signs = Vec::with_capacity(half + 1);
    for m in 0..=half {
        let site = 2 * m + 1;
        let mut log = 0.0;
        let mut sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for k in (1..site).step_by(2) {
            log += log_abs(k);
            sign *= sign_of(k);
        }
        for k in (site + 1..n).step_by(2) {
            log += log_abs(k);
            sign *= sign_of(k);
        }
        logs.push(log);
        signs.push(sign);
    }

    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::DegenerateDarkState);
    }
    let weights: Vec<f64> = logs
        .iter()
        .zip(&signs)
        .map(|(&l, &s)| s * (l - peak).exp())
        .collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();

    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for (m, w) in weights.iter().enumerate() {
        amps[2 * m] = Complex64::new(w / norm, 0.0);
    }
    Ok(StateVector::from_raw(amps))
}

/// Spectrum of the spin-coupling chain, `λ_k = 2 J0 k − J0 (N+1)`, ascending.
pub fn equidistant_levels(n_sites: usize, j0: f64) -> Vec<f64> {
    (1..=n_sites)
        .map(|k| 2.0 * j0 * k as f64 - j0 * (n_sites + 1) as f64)
        .collect()
}

/// Spectrum of the uniform chain, `λ_k = −2J cos(kπ/(N+1))`, ascending.
pub fn cosine_band(n_sites: usize, j: f64) -> Vec<f64> {
    (1..=n_sites)
        .map(|k| -2.0 * j * (k as f64 * PI / (n_sites + 1) as f64).cos())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hamiltonian, spectrum};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(n: usize) -> ChainConfig {
        ChainConfig::new(n, 1.0).unwrap()
    }

    #[test]
    fn swap_two_sites() {
        let s = swap_schedule(&cfg(2)).unwrap();
        assert_abs_diff_eq!(s.t_out(), FRAC_PI_2);
        assert_eq!(s.segments().unwrap().len(), 1);
    }

    #[test]
    fn swap_25_sites() {
        let s = swap_schedule(&cfg(25)).unwrap();
        assert_abs_diff_eq!(s.t_out(), 12.0 * PI, epsilon = 1e-12);
        for seg in s.segments().unwrap() {
            let active = seg.couplings.iter().filter(|&&j| j != 0.0).count();
            assert_eq!(active, 1);
            assert!(seg.couplings.iter().all(|&j| j <= 1.0));
        }
        // the active bond advances with time
        assert_eq!(s.couplings_at(0.0)[0], 1.0);
        assert_eq!(s.couplings_at(s.t_out())[23], 1.0);
        assert_eq!(s.couplings_at(FRAC_PI_2 * 3.5)[3], 1.0);
    }

    #[test]
    fn swap_respects_j_max() {
        let s = swap_schedule(&ChainConfig::new(5, 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s.t_out(), 4.0 * FRAC_PI_2 / 2.0);
        assert_eq!(s.couplings_at(0.1)[0], 2.0);
    }

    #[test]
    fn spin_coupling_profile_values() {
        let (j2, j0) = spin_coupling_profile(&cfg(2)).unwrap();
        assert_abs_diff_eq!(j0, 1.0);
        assert_abs_diff_eq!(j2[0], 1.0);

        let (j4, j0) = spin_coupling_profile(&cfg(4)).unwrap();
        assert_abs_diff_eq!(j0, 0.5);
        let s3 = 3f64.sqrt();
        for (a, b) in j4.iter().zip([s3 * 0.5, 1.0, s3 * 0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }

        let (j25, j0) = spin_coupling_profile(&cfg(25)).unwrap();
        let peak = j25.iter().copied().fold(0.0, f64::max);
        assert_abs_diff_eq!(peak, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j0 * (12.0f64 * 13.0).sqrt(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spin_coupling_durations() {
        for n in [2, 4, 10, 50] {
            let s = spin_coupling_schedule(&cfg(n)).unwrap();
            assert_abs_diff_eq!(s.t_out(), PI / 4.0 * n as f64, epsilon = 1e-12);
        }
        let s = spin_coupling_schedule(&cfg(25)).unwrap();
        assert_abs_diff_eq!(s.t_out(), PI / 4.0 * 624f64.sqrt(), epsilon = 1e-12);
        let swap = swap_schedule(&cfg(2)).unwrap();
        assert_abs_diff_eq!(
            spin_coupling_schedule(&cfg(2)).unwrap().t_out(),
            swap.t_out()
        );
    }

    #[test]
    fn adiabatic_rejects_even_chain() {
        let spec = ProtocolSpec::new(ProtocolKind::Adiabatic);
        assert!(matches!(
            adiabatic_schedule(&cfg(4), &spec),
            Err(Error::EvenChain(4))
        ));
    }

    #[test]
    fn adiabatic_duration_and_ramps() {
        let spec = ProtocolSpec {
            ramp_endpoints: RampEndpoints::Raw,
            ..ProtocolSpec::new(ProtocolKind::Adiabatic)
        };
        let s = adiabatic_schedule(&cfg(25), &spec).unwrap();
        assert_abs_diff_eq!(s.t_out(), 200.0);
        assert_abs_diff_eq!(s.sigma_t().unwrap(), 25.0);

        // At t = 0 the odd ramp sits √2 ramp-widths below its midpoint and the
        // even ramp 3√2 widths above its own: J_odd(0) = erfc(√2)/2,
        // J_even(0) = 1 − erfc(3√2)/2 (erfc values from 30-digit mpmath).
        let j0 = s.couplings_at(0.0);
        assert_abs_diff_eq!(j0[0], 0.5 * 0.045_500_263_896_358_42, epsilon = 1e-12);
        assert_abs_diff_eq!(j0[1], 1.0 - 0.5 * 1.973_175_290_075_396e-9, epsilon = 1e-12);

        let mid = s.couplings_at(100.0);
        assert_abs_diff_eq!(mid[0], mid[1], epsilon = 1e-14);

        let end = s.couplings_at(200.0);
        assert_abs_diff_eq!(end[1], j0[0], epsilon = 1e-14);
        assert_abs_diff_eq!(end[0], j0[1], epsilon = 1e-14);

        // bond parity
        let c = s.couplings_at(37.0);
        for (i, &j) in c.iter().enumerate() {
            assert_eq!(j, if i % 2 == 0 { c[0] } else { c[1] });
        }
    }

    #[test]
    fn pinned_ramps_hit_endpoints() {
        let spec = ProtocolSpec::new(ProtocolKind::Adiabatic);
        let s = adiabatic_schedule(&ChainConfig::new(25, 2.0).unwrap(), &spec).unwrap();
        let start = s.couplings_at(0.0);
        let end = s.couplings_at(s.t_out());
        assert_eq!((start[0], start[1]), (0.0, 2.0));
        assert_abs_diff_eq!(end[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(end[1], 0.0, epsilon = 1e-15);
        let mid = s.couplings_at(s.t_out() / 2.0);
        assert_abs_diff_eq!(mid[0], mid[1], epsilon = 1e-14);

        // affine in the raw profile
        let raw_spec = ProtocolSpec {
            ramp_endpoints: RampEndpoints::Raw,
            ..spec
        };
        let raw = adiabatic_schedule(&ChainConfig::new(25, 2.0).unwrap(), &raw_spec).unwrap();
        let lo = raw.couplings_at(0.0)[0];
        let hi = raw.couplings_at(raw.t_out())[0];
        for t in [10.0, 90.0, 250.0] {
            let expect = 2.0 * (raw.couplings_at(t)[0] - lo) / (hi - lo);
            assert_abs_diff_eq!(s.couplings_at(t)[0], expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = ProtocolSpec::new(ProtocolKind::Adiabatic);
        spec.adiabatic_c = 0.5;
        assert!(spec.validate().is_err());
        spec.adiabatic_c = 8.0;
        spec.adiabatic_sigma_ratio = 0.5;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn duration_ordering() {
        let spec = ProtocolSpec::new(ProtocolKind::Adiabatic);
        for n in (3..=101).step_by(2) {
            let c = cfg(n);
            let sc = spin_coupling_schedule(&c).unwrap().t_out();
            let sw = swap_schedule(&c).unwrap().t_out();
            let ad = adiabatic_schedule(&c, &spec).unwrap().t_out();
            assert!(sc < sw && sw < ad, "N={n}: {sc} {sw} {ad}");
            assert!(ad > n as f64 / (2.0 * PI));
        }
    }

    #[test]
    fn analytic_amplitudes_endpoints() {
        let c = cfg(9);
        let a = analytic_spin_coupling_amplitudes(&c, 0.0).unwrap();
        assert_eq!(a, StateVector::site(9, 1));

        let (_, j0) = spin_coupling_profile(&c).unwrap();
        let a = analytic_spin_coupling_amplitudes(&c, FRAC_PI_2 / j0).unwrap();
        let expected = Complex64::new(0.0, -1.0).powu(8);
        assert!((a.last() - expected).norm() < 1e-12);
        for j in 1..9 {
            assert!(a.amplitude(j).norm() < 1e-12);
        }
        assert!(analytic_spin_coupling_amplitudes(&c, -1.0).is_err());
    }

    #[test]
    fn equidistant_spectrum() {
        for n in [2, 3, 8, 25, 51, 101] {
            let c = cfg(n);
            let (couplings, j0) = spin_coupling_profile(&c).unwrap();
            let h = build_hamiltonian(&c, &vec![0.0; n], &couplings).unwrap();
            let ev = spectrum(&h).unwrap();
            for (a, b) in ev.iter().zip(equidistant_levels(n, j0)) {
                assert!((a - b).abs() < 1e-10, "N={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dark_state_limits() {
        let n = 7;
        let mut couplings = vec![0.0; n - 1];
        for (i, j) in couplings.iter_mut().enumerate() {
            *j = if i % 2 == 1 { 1.0 } else { 1e-6 };
        }
        let d = dark_state(&couplings).unwrap();
        assert!((d.amplitude(1).re - 1.0).abs() < 1e-6);

        for (i, j) in couplings.iter_mut().enumerate() {
            *j = if i % 2 == 0 { 1.0 } else { 1e-6 };
        }
        let d = dark_state(&couplings).unwrap();
        // (−1)^((N−1)/2) = −1 for N = 7
        assert!((d.last().re + 1.0).abs() < 1e-6);
    }

    #[test]
    fn dark_state_extreme_ratio_long_chain() {
        let couplings: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 1 { 1.0 } else { 1e-8 })
            .collect();
        let d = dark_state(&couplings).unwrap();
        assert!((d.norm() - 1.0).abs() < 1e-14);
        assert!((d.amplitude(1).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dark_state_errors() {
        assert!(matches!(
            dark_state(&[1.0, 1.0, 1.0]),
            Err(Error::EvenChain(4))
        ));
        // J_1 = 0 kills every site beyond 1; J_4 = 0 kills every site before 5.
        assert!(matches!(
            dark_state(&[0.0, 1.0, 1.0, 0.0]),
            Err(Error::DegenerateDarkState)
        ));
    }

    #[test]
    fn dark_state_has_no_even_weight() {
        let d = dark_state(&[0.3, 0.9, 0.5, 0.2]).unwrap();
        assert_eq!(d.amplitude(2), Complex64::new(0.0, 0.0));
        assert_eq!(d.amplitude(4), Complex64::new(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn dark_state_is_zero_mode(
            couplings in prop::collection::vec(0.01f64..1.0, 2..60)
                .prop_filter("odd chain", |c| c.len() % 2 == 0)
        ) {
            let n = couplings.len() + 1;
            let h = build_hamiltonian(&ChainConfig::new(n, 1.0).unwrap(), &vec![0.0; n], &couplings)
                .unwrap();
            let d = dark_state(&couplings).unwrap();
            let hv = h.apply(d.amplitudes());
            let resid = hv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(resid < 1e-12, "residual {resid}");
            prop_assert!((d.norm() - 1.0).abs() < 1e-13);
        }

        #[test]
        fn analytic_amplitudes_unit_norm(n in 2usize..120, t in 0.0f64..50.0) {
            let a = analytic_spin_coupling_amplitudes(&cfg(n), t).unwrap();
            prop_assert!((a.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn schedules_respect_cap(n in 2usize..60, j_max in 0.1f64..5.0, frac in 0.0f64..=1.0) {
            let c = ChainConfig::new(n, j_max).unwrap();
            let mut schedules = vec![swap_schedule(&c).unwrap(), spin_coupling_schedule(&c).unwrap()];
            if n % 2 == 1 {
                let spec = ProtocolSpec::new(ProtocolKind::Adiabatic);
                schedules.push(adiabatic_schedule(&c, &spec).unwrap());
                let raw = ProtocolSpec { ramp_endpoints: RampEndpoints::Raw, ..spec };
                schedules.push(adiabatic_schedule(&c, &raw).unwrap());
            }
            for s in schedules {
                for j in s.couplings_at(frac * s.t_out()) {
                    prop_assert!(j >= 0.0 && j <= j_max * (1.0 + 1e-15));
                }
            }
        }
    }
}
