use alloc::vec::Vec;

use super::time_derivative;
use crate::integrator::Trajectory;
use crate::shell_model::{ModelParams, ShellState};
use crate::{Error, Result};

/// `flux[n-1] = Pi_n = 2 phi_n k_n X_n^2 X_{n+1}`, the energy crossing from
/// shell `n` to `n + 1`, and `dissipation[n-1] = 2 (k_n / g_n) X_n^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxProfile {
    pub flux: Vec<f64>,
    pub dissipation: Vec<f64>,
}

impl FluxProfile {
    /// `d/dt E_n = -Pi_n - sum_{i <= n} delta_i`.
    pub fn partial_energy_rate(&self, n: usize) -> f64 {
        -self.flux[n - 1] - crate::sum::sum(self.dissipation[..n].iter().copied())
    }
}

pub fn flux_profile(state: &ShellState, params: &ModelParams) -> Result<FluxProfile> {
    let n_shells = params.shells();
    if state.x.len() != n_shells {
        return Err(Error::DimensionMismatch { expected: n_shells, found: state.x.len() });
    }
    let x = &state.x;
    let phi = params.phi();
    let mut flux = Vec::with_capacity(n_shells);
    let mut dissipation = Vec::with_capacity(n_shells);
    for n in 1..=n_shells {
        let xn = x[n - 1];
        let next = x.get(n).copied().unwrap_or(0.0);
        flux.push(2.0 * phi.eval(n, state.t, x) * params.k(n) * xn * xn * next);
        dissipation.push(2.0 * params.decay_rates()[n - 1] * xn * xn);
    }
    Ok(FluxProfile { flux, dissipation })
}

fn require_scalar(traj: &Trajectory) -> Result<()> {
    if traj.is_scalar() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "trajectory", reason: "needs a scalar-model run" })
    }
}

/// `d/dt E_n` by finite differences minus the flux-profile prediction, at
/// every stored time.
pub fn energy_rate_residual(traj: &Trajectory, n: usize) -> Result<Vec<f64>> {
    require_scalar(traj)?;
    if n == 0 || n > traj.shells() {
        return Err(Error::OutOfRange { what: "shell index", value: n as f64 });
    }
    let e_n: Vec<f64> = (0..traj.len()).map(|j| crate::sum::sum(traj.states[j][..n].iter().map(|v| v * v))).collect();
    let fd = time_derivative(&traj.times, &e_n);
    (0..traj.len())
        .map(|j| Ok(fd[j] - flux_profile(&traj.shell_state(j), &traj.params)?.partial_energy_rate(n)))
        .collect()
}

/// Residual of the balance on shells `n..=n+m`:
///
/// ```text
/// d/dt (1/2) sum X_i^2 = phi_{n-1} k_{n-1} X_{n-1}^2 X_n
///                      - phi_{n+m} k_{n+m} X_{n+m}^2 X_{n+m+1}
///                      - sum (k_i / g_i) X_i^2
/// ```
///
/// with the left side by finite differences. `X_0 = X_{N+1} = 0`, so the
/// window may start at 1 and end at `N`.
pub fn window_balance(traj: &Trajectory, n: usize, m: usize) -> Result<Vec<f64>> {
    require_scalar(traj)?;
    if n == 0 || n + m > traj.shells() {
        return Err(Error::OutOfRange { what: "window", value: (n + m) as f64 });
    }
    let p = &traj.params;
    let half: Vec<f64> =
        (0..traj.len()).map(|j| 0.5 * crate::sum::sum(traj.states[j][n - 1..n + m].iter().map(|v| v * v))).collect();
    let fd = time_derivative(&traj.times, &half);
    Ok((0..traj.len())
        .map(|j| {
            let x = &traj.states[j];
            let t = traj.times[j];
            let at = |i: usize| if i == 0 || i > x.len() { 0.0 } else { x[i - 1] };
            let last = n + m;
            let inflow = p.phi().eval(n - 1, t, x) * p.k(n - 1) * at(n - 1) * at(n - 1) * at(n);
            let outflow = p.phi().eval(last, t, x) * p.k(last) * at(last) * at(last) * at(last + 1);
            let diss = crate::sum::sum((n..=last).map(|i| p.decay_rates()[i - 1] * at(i) * at(i)));
            fd[j] - (inflow - outflow - diss)
        })
        .collect())
}
