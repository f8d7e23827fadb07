//! Time integration of the truncated systems.
//!
//! The linear dissipation is diagonal, so it is integrated exactly by an
//! integrating factor and only the quadratic transfer terms are
//! approximated (see [`etd`]). [`picard`] solves the same mild formulation
//! by fixed-point iteration on a short interval.

pub mod etd;
pub mod picard;
mod trajectory;

use alloc::vec::Vec;

pub use etd::{integrate_system, Dynamics};
pub use picard::{
    compute_l, observed_contraction_rate, picard_local_solve, picard_local_solve_with, LBound, PicardConfig,
    PicardSolution,
};
pub use trajectory::{ModelKind, Trajectory};

use crate::shell_model::{averaged_nonlinear_into, dyadic_nonlinear_into, AveragedState, ModelParams, ShellState};
use crate::{Error, Result};

/// Adaptive step-size control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub dt_init: f64,
    pub rtol: f64,
    pub atol: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Attempted steps (accepted + rejected) before giving up.
    pub max_steps: usize,
    /// When set, steps are shortened to land on every multiple of this
    /// interval, so runs can be compared at common times.
    pub sample_dt: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            dt_init: 1e-4,
            rtol: 1e-8,
            atol: 1e-12,
            dt_min: 1e-14,
            dt_max: 0.1,
            max_steps: 10_000_000,
            sample_dt: None,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.rtol) && pos(self.atol)) {
            return Err(Error::InvalidParameter { name: "rtol/atol", reason: "must be positive" });
        }
        if !(pos(self.dt_min) && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::InvalidParameter { name: "dt", reason: "need 0 < dt_min <= dt_init <= dt_max" });
        }
        if let Some(s) = self.sample_dt {
            if !pos(s) {
                return Err(Error::InvalidParameter { name: "sample_dt", reason: "must be positive" });
            }
        }
        Ok(())
    }

    /// Slack used by the discrete energy checks: `100 * rtol`.
    pub fn energy_tolerance(&self) -> f64 {
        100.0 * self.rtol
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_dt: f64,
    pub max_dt: f64,
}

/// The scalar dyadic model as a [`Dynamics`].
#[derive(Debug, Clone, Copy)]
pub struct ScalarSystem<'a> {
    params: &'a ModelParams,
}

impl<'a> ScalarSystem<'a> {
    pub fn new(params: &'a ModelParams) -> Self {
        ScalarSystem { params }
    }
}

impl Dynamics for ScalarSystem<'_> {
    fn dim(&self) -> usize {
        self.params.shells()
    }
    fn linear_rates(&self) -> &[f64] {
        self.params.decay_rates()
    }
    fn nonlinear(&self, t: f64, x: &[f64], out: &mut [f64]) {
        dyadic_nonlinear_into(self.params, t, x, out)
    }
}

/// The averaged four-component system as a [`Dynamics`].
#[derive(Debug, Clone)]
pub struct AveragedSystem<'a> {
    params: &'a ModelParams,
    constants: [f64; 5],
    rates: Vec<f64>,
}

impl<'a> AveragedSystem<'a> {
    pub fn new(params: &'a ModelParams, constants: [f64; 5]) -> Self {
        let r = params.averaged_decay_rates();
        let rates = r.iter().chain(r).chain(r).chain(r).copied().collect();
        AveragedSystem { params, constants, rates }
    }
}

impl Dynamics for AveragedSystem<'_> {
    fn dim(&self) -> usize {
        4 * self.params.shells()
    }
    fn linear_rates(&self) -> &[f64] {
        &self.rates
    }
    fn nonlinear(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        averaged_nonlinear_into(self.params, &self.constants, x, out)
    }
}

/// Integrate the scalar model from `x0` to `t_end`.
pub fn integrate(x0: &ShellState, params: &ModelParams, t_end: f64, ctrl: &StepControl) -> Result<Trajectory> {
    if x0.x.len() != params.shells() {
        return Err(Error::DimensionMismatch { expected: params.shells(), found: x0.x.len() });
    }
    let run = integrate_system(&ScalarSystem::new(params), x0.t, &x0.x, t_end, ctrl)?;
    Ok(Trajectory::from_run(params.clone(), ModelKind::Scalar, *ctrl, run))
}

/// Integrate the averaged system from `x0` to `t_end`.
pub fn integrate_averaged(
    x0: &AveragedState,
    params: &ModelParams,
    t_end: f64,
    ctrl: &StepControl,
) -> Result<Trajectory> {
    if x0.x.len() != 4 * params.shells() {
        return Err(Error::DimensionMismatch { expected: 4 * params.shells(), found: x0.x.len() });
    }
    let sys = AveragedSystem::new(params, x0.constants);
    let run = integrate_system(&sys, x0.t, &x0.x, t_end, ctrl)?;
    let kind = ModelKind::Averaged { constants: x0.constants };
    Ok(Trajectory::from_run(params.clone(), kind, *ctrl, run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shell_model::{GFamily, PhiSpec};

    #[test]
    fn pure_decay_is_exact() {
        let p = ModelParams::new(1.0, 4, GFamily::Constant(1.0), PhiSpec::constant(0.0)).unwrap();
        let ctrl = StepControl { dt_init: 0.3, dt_max: 0.5, ..StepControl::default() };
        let tr = integrate(&ShellState::unit_mode(4, 1), &p, 1.0, &ctrl).unwrap();
        let x1 = tr.final_state().x[0];
        assert!((x1 - libm::exp(-2.0)).abs() <= 1e-8 * libm::exp(-2.0));
    }

    #[test]
    fn rejects_bad_control() {
        let c = StepControl { dt_min: 1.0, dt_init: 0.1, ..StepControl::default() };
        assert!(c.validate().is_err());
        let c = StepControl { rtol: 0.0, ..StepControl::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn t_end_must_be_ahead() {
        let p = ModelParams::new(1.0, 4, GFamily::Linear, PhiSpec::constant(1.0)).unwrap();
        let r = integrate(&ShellState::unit_mode(4, 1), &p, 0.0, &StepControl::default());
        assert!(r.is_err());
    }
}
