//! Shell energies of the averaged system.
//!
//! Summing the four components, `X_n^2 = sum_i X_{i,n}^2` obeys
//!
//! ```text
//! d/dt (X_n^2 / 2) = -(k_n^a / g_n) X_n^2
//!                    + C_4 k_n^c X_{4,n-1}^2 X_{1,n}
//!                    - C_4 k_{n+1}^c X_{4,n}^2 X_{1,n+1}
//! ```
//!
//! (`a = alpha`, `c = gamma`): a scalar dyadic model with state-dependent
//! coupling.

use alloc::vec::Vec;

use super::rhs::rhs_averaged;
use super::{AveragedState, ModelParams};
use crate::{Error, Result};

/// Per-shell energy budget of one averaged state.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellBalance {
    pub t: f64,
    /// `X_n^2`.
    pub energy: Vec<f64>,
    /// `C_4 k_n^gamma X_{4,n-1}^2 X_{1,n}`.
    pub inflow: Vec<f64>,
    /// `C_4 k_{n+1}^gamma X_{4,n}^2 X_{1,n+1}`.
    pub outflow: Vec<f64>,
    /// `(k_n^alpha / g_n) X_n^2`.
    pub dissipation: Vec<f64>,
}

impl ShellBalance {
    /// Reduced prediction of `d/dt (X_n^2 / 2)`.
    pub fn rate(&self, n: usize) -> f64 {
        self.inflow[n - 1] - self.outflow[n - 1] - self.dissipation[n - 1]
    }
}

pub fn shell_balance(state: &AveragedState, params: &ModelParams) -> Result<ShellBalance> {
    let n_shells = params.shells();
    if state.shells() != n_shells {
        return Err(Error::DimensionMismatch { expected: n_shells, found: state.shells() });
    }
    let c4 = state.constants[3];
    let rates = params.averaged_decay_rates();
    let energy = state.shell_energies();
    let inflow = (1..=n_shells)
        .map(|n| {
            let x4_prev = if n > 1 { state.get(4, n - 1) } else { 0.0 };
            c4 * params.k_gamma(n) * x4_prev * x4_prev * state.get(1, n)
        })
        .collect();
    let outflow = (1..=n_shells)
        .map(|n| {
            let x1_next = if n < n_shells { state.get(1, n + 1) } else { 0.0 };
            let x4 = state.get(4, n);
            c4 * params.k_gamma(n + 1) * x4 * x4 * x1_next
        })
        .collect();
    let dissipation = energy.iter().zip(rates).map(|(e, r)| e * r).collect();
    Ok(ShellBalance { t: state.t, energy, inflow, outflow, dissipation })
}

/// Shell energies and effective fluxes along an averaged trajectory.
pub fn reduce_averaged_to_scalar(traj: &[AveragedState], params: &ModelParams) -> Result<Vec<ShellBalance>> {
    traj.iter().map(|s| shell_balance(s, params)).collect()
}

/// `max_n |sum_i X_{i,n} F_{i,n} - rate_n|` where `F` is the full averaged
/// right-hand side: the reduction checked pointwise against the RHS.
pub fn pointwise_identity_residual(state: &AveragedState, params: &ModelParams) -> Result<f64> {
    let rhs = rhs_averaged(state, params)?;
    let bal = shell_balance(state, params)?;
    let n_shells = params.shells();
    let mut worst = 0.0_f64;
    for n in 1..=n_shells {
        let direct: f64 = (0..4).map(|i| state.x[i * n_shells + n - 1] * rhs[i * n_shells + n - 1]).sum();
        worst = worst.max((direct - bal.rate(n)).abs());
    }
    Ok(worst)
}

/// For each step `[t_j, t_{j+1}]`, the largest over shells of
/// `|(X_n^2(t_{j+1}) - X_n^2(t_j)) / 2 - integral of the reduced rate|`,
/// with the integral taken by the trapezoid rule.
pub fn step_identity_residuals(balances: &[ShellBalance]) -> Vec<f64> {
    balances
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let h = b.t - a.t;
            (1..=a.energy.len())
                .map(|n| {
                    let lhs = 0.5 * (b.energy[n - 1] - a.energy[n - 1]);
                    let rhs = 0.5 * h * (a.rate(n) + b.rate(n));
                    (lhs - rhs).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect()
}
