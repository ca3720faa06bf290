//! Time evolution of the single-excitation amplitudes.
//!
//! Constant-coupling segments are propagated exactly through one
//! eigendecomposition each. Smooth schedules use the exponential midpoint
//! rule: a step of length `dt` applies `exp(−i H(t + dt/2) dt)`, which is
//! unitary at every step and second-order accurate in `dt`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{protocol_phase, SingleExcitationHamiltonian, StateVector, TransferResult};
use crate::disorder::DisorderRealization;
use crate::error::{Error, Result};
use crate::linalg::{evolve_series, TridiagonalEigen};
use crate::protocols::CouplingSchedule;

pub const DEFAULT_DT_MAX: f64 = 0.01;

/// How each midpoint step forms `exp(−i H dt) ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepExponential {
    /// Taylor series of the action, summed to round-off.
    #[default]
    Series,
    /// Full tridiagonal eigendecomposition per step.
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationSettings {
    /// Step cap for smooth schedules (and sampling interval for trajectories).
    pub dt_max: f64,
    pub record_trajectory: bool,
    /// Keep every `trajectory_stride`-th sample.
    pub trajectory_stride: usize,
    pub step_exponential: StepExponential,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        Self {
            dt_max: DEFAULT_DT_MAX,
            record_trajectory: false,
            trajectory_stride: 1,
            step_exponential: StepExponential::default(),
        }
    }
}

impl PropagationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::input(format!(
                "dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        if self.trajectory_stride == 0 {
            return Err(Error::input("trajectory_stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of equal steps covering `duration` without exceeding `dt_max`.
    pub fn steps_for(&self, duration: f64) -> usize {
        ((duration / self.dt_max).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    fn push(&mut self, t: f64, psi: &[Complex64]) {
        self.times.push(t);
        self.states.push(StateVector::from_raw(psi.to_vec()));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

struct Recorder {
    trajectory: Option<Trajectory>,
    stride: usize,
    sample: usize,
    last_time: f64,
}

impl Recorder {
    fn new(settings: &PropagationSettings, psi0: &[Complex64]) -> Self {
        let trajectory = settings.record_trajectory.then(|| {
            let mut t = Trajectory::default();
            t.push(0.0, psi0);
            t
        });
        Self {
            trajectory,
            stride: settings.trajectory_stride,
            sample: 0,
            last_time: 0.0,
        }
    }

    fn active(&self) -> bool {
        self.trajectory.is_some()
    }

    fn offer(&mut self, t: f64, psi: &[Complex64]) {
        if let Some(traj) = self.trajectory.as_mut() {
            self.sample += 1;
            if self.sample % self.stride == 0 {
                traj.push(t, psi);
                self.last_time = t;
            }
        }
    }

    fn finish(mut self, t: f64, psi: &[Complex64]) -> Option<Trajectory> {
        if let Some(traj) = self.trajectory.as_mut() {
            if self.last_time != t {
                traj.push(t, psi);
            }
        }
        self.trajectory
    }
}

/// `exp(−i H t) ψ0` for a time-independent Hamiltonian.
pub fn propagate_static(
    h: &SingleExcitationHamiltonian,
    psi0: &StateVector,
    t: f64,
) -> Result<StateVector> {
    if !(t >= 0.0) {
        return Err(Error::input(format!(
            "propagation time must be non-negative, got {t}"
        )));
    }
    Error::check_len("initial state", h.n_sites(), psi0.len())?;
    let mut psi = psi0.clone();
    h.eigen()?.evolve(psi.amplitudes_mut(), t);
    Ok(psi)
}

/// Evolves `psi0` over `[0, t_out]` under the schedule with the disorder
/// realization applied: site energies added, every nominal coupling scaled by
/// its factor `1 + δJ_j`.
pub fn propagate_schedule(
    schedule: &CouplingSchedule,
    realization: &DisorderRealization,
    psi0: &StateVector,
    settings: &PropagationSettings,
) -> Result<(StateVector, Option<Trajectory>)> {
    settings.validate()?;
    let n = schedule.n_sites();
    Error::check_len("disorder realization", n, realization.n_sites())?;
    Error::check_len("initial state", n, psi0.len())?;
    let drift = (psi0.norm() - 1.0).abs();
    if drift > crate::chain::NORM_TOLERANCE {
        return Err(Error::input(format!("initial state norm off by {drift:e}")));
    }

    let mut psi = psi0.clone();
    let mut recorder = Recorder::new(settings, psi.amplitudes());
    let diag = realization.onsite();
    let mut couplings = vec![0.0; n - 1];

    match schedule.segments() {
        Some(segments) => {
            for seg in segments {
                realization.apply_to_couplings(&seg.couplings, &mut couplings);
                let eig = TridiagonalEigen::new(diag, &couplings)?;
                if recorder.active() {
                    let steps = settings.steps_for(seg.duration);
                    let dt = seg.duration / steps as f64;
                    for k in 1..steps {
                        let mut sample = psi.amplitudes().to_vec();
                        eig.evolve(&mut sample, k as f64 * dt);
                        recorder.offer(seg.start + k as f64 * dt, &sample);
                    }
                }
                eig.evolve(psi.amplitudes_mut(), seg.duration);
                recorder.offer(seg.end(), psi.amplitudes());
            }
        }
        None => {
            let t_out = schedule.t_out();
            let steps = settings.steps_for(t_out);
            let dt = t_out / steps as f64;
            let mut nominal = vec![0.0; n - 1];
            for k in 0..steps {
                let t_mid = (k as f64 + 0.5) * dt;
                schedule.couplings_into(t_mid, &mut nominal);
                realization.apply_to_couplings(&nominal, &mut couplings);
                match settings.step_exponential {
                    StepExponential::Series => {
                        evolve_series(diag, &couplings, psi.amplitudes_mut(), dt)
                    }
                    StepExponential::Eigen => {
                        TridiagonalEigen::new(diag, &couplings)?.evolve(psi.amplitudes_mut(), dt)
                    }
                }
                recorder.offer((k + 1) as f64 * dt, psi.amplitudes());
            }
        }
    }

    let trajectory = recorder.finish(schedule.t_out(), psi.amplitudes());
    Ok((psi, trajectory))
}

/// Runs the schedule from `|1⟩` and reads off the last site, compensating the
/// protocol phase in the fidelity.
pub fn transfer(
    schedule: &CouplingSchedule,
    realization: &DisorderRealization,
    settings: &PropagationSettings,
) -> Result<TransferResult> {
    let n = schedule.n_sites();
    let quiet = PropagationSettings {
        record_trajectory: false,
        ..*settings
    };
    let (psi, _) = propagate_schedule(schedule, realization, &StateVector::site(n, 1), &quiet)?;
    Ok(TransferResult::new(psi.last(), protocol_phase(n)))
}
