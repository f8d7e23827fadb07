use alloc::vec::Vec;

use super::etd::RawRun;
use super::{StepControl, StepStats};
use crate::shell_model::{AveragedState, ModelParams, ShellState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Scalar,
    Averaged { constants: [f64; 5] },
}

/// Accepted states of one integration, with the accumulated dissipation
/// `D_i(t) = int_0^t 2 L_i x_i^2 ds` of every component.
///
/// Times are strictly increasing and every `D_i` is nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub kind: ModelKind,
    pub control: StepControl,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub dissipation: Vec<Vec<f64>>,
    pub sample_indices: Vec<usize>,
    pub stats: StepStats,
}

impl Trajectory {
    pub(crate) fn from_run(params: ModelParams, kind: ModelKind, control: StepControl, run: RawRun) -> Self {
        Trajectory {
            params,
            kind,
            control,
            times: run.times,
            states: run.states,
            dissipation: run.dissipation,
            sample_indices: run.sample_indices,
            stats: run.stats,
        }
    }

    /// Single-state trajectory; useful as a degenerate input to the checks.
    pub fn stationary(params: ModelParams, state: ShellState) -> Self {
        let dim = state.x.len();
        Trajectory {
            params,
            kind: ModelKind::Scalar,
            control: StepControl::default(),
            times: alloc::vec![state.t],
            states: alloc::vec![state.x],
            dissipation: alloc::vec![alloc::vec![0.0; dim]],
            sample_indices: alloc::vec![0],
            stats: StepStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn shells(&self) -> usize {
        self.params.shells()
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self.kind, ModelKind::Scalar)
    }

    pub fn shell_state(&self, j: usize) -> ShellState {
        ShellState { t: self.times[j], x: self.states[j].clone() }
    }

    pub fn averaged_state(&self, j: usize) -> Option<AveragedState> {
        match self.kind {
            ModelKind::Averaged { constants } => {
                Some(AveragedState { t: self.times[j], x: self.states[j].clone(), constants })
            }
            ModelKind::Scalar => None,
        }
    }

    pub fn averaged_states(&self) -> Vec<AveragedState> {
        (0..self.len()).filter_map(|j| self.averaged_state(j)).collect()
    }

    pub fn final_state(&self) -> ShellState {
        self.shell_state(self.len() - 1)
    }

    /// `X_n^2(t_j)` per shell (components summed for the averaged system).
    pub fn shell_energies(&self, j: usize) -> Vec<f64> {
        per_shell(&self.states[j], self.shells(), |v| v * v)
    }

    /// `D_n(t_j)` per shell (components summed for the averaged system).
    pub fn shell_dissipation(&self, j: usize) -> Vec<f64> {
        per_shell(&self.dissipation[j], self.shells(), |v| v)
    }

    pub fn energy(&self, j: usize) -> f64 {
        crate::sum::sum(self.states[j].iter().map(|v| v * v))
    }

    pub fn total_dissipation(&self, j: usize) -> f64 {
        crate::sum::sum(self.dissipation[j].iter().copied())
    }

    /// Index `j` and weight `w` such that `t = (1 - w) t_j + w t_{j+1}`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let first = self.times[0];
        let last = *self.times.last().unwrap();
        if !(t >= first && t <= last) {
            return Err(Error::OutOfRange { what: "time", value: t });
        }
        let j = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        if j + 1 >= self.len() {
            return Ok((self.len() - 1, 0.0));
        }
        let w = (t - self.times[j]) / (self.times[j + 1] - self.times[j]);
        Ok((j, w))
    }
}

fn per_shell(values: &[f64], shells: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let comps = values.len() / shells;
    (0..shells).map(|n| (0..comps).map(|i| f(values[i * shells + n])).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::integrate;
    use crate::shell_model::{GFamily, PhiSpec};

    #[test]
    fn locate_interpolates() {
        let p = ModelParams::new(1.0, 4, GFamily::Linear, PhiSpec::constant(1.0)).unwrap();
        let ctrl = StepControl { sample_dt: Some(0.1), ..StepControl::default() };
        let tr = integrate(&ShellState::unit_mode(4, 1), &p, 0.5, &ctrl).unwrap();
        let (j, w) = tr.locate(0.0).unwrap();
        assert_eq!((j, w), (0, 0.0));
        let (j, w) = tr.locate(0.5).unwrap();
        assert_eq!(j, tr.len() - 1);
        assert_eq!(w, 0.0);
        let (j, w) = tr.locate(0.25).unwrap();
        assert!(tr.times[j] <= 0.25 && 0.25 <= tr.times[j + 1] && (0.0..=1.0).contains(&w));
        assert!(tr.locate(0.6).is_err());
    }

    #[test]
    fn times_increase_and_dissipation_grows() {
        let p = ModelParams::new(1.0, 6, GFamily::Linear, PhiSpec::constant(1.0)).unwrap();
        let tr = integrate(&ShellState::unit_mode(6, 1), &p, 1.0, &StepControl::default()).unwrap();
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        for j in 1..tr.len() {
            for (a, b) in tr.dissipation[j - 1].iter().zip(&tr.dissipation[j]) {
                assert!(b >= a && *a >= 0.0);
            }
        }
    }
}
