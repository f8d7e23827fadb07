use alloc::vec;
use alloc::vec::Vec;

use super::{AveragedState, ModelParams, ShellState};
use crate::{Error, Result};

fn check_scalar(state: &ShellState, params: &ModelParams) -> Result<()> {
    if state.x.len() != params.shells() {
        return Err(Error::DimensionMismatch { expected: params.shells(), found: state.x.len() });
    }
    if !state.t.is_finite() || state.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rhs input"));
    }
    Ok(())
}

fn check_averaged(state: &AveragedState, params: &ModelParams) -> Result<()> {
    if state.x.len() != 4 * params.shells() {
        return Err(Error::DimensionMismatch { expected: 4 * params.shells(), found: state.x.len() });
    }
    if !state.t.is_finite() || state.x.iter().chain(&state.constants).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rhs input"));
    }
    Ok(())
}

/// Quadratic transfer terms of the scalar model,
/// `phi_{n-1} k_{n-1} X_{n-1}^2 - phi_n k_n X_n X_{n+1}`, with `X_0 = X_{N+1} = 0`.
pub(crate) fn dyadic_nonlinear_into(params: &ModelParams, t: f64, x: &[f64], out: &mut [f64]) {
    let n_shells = x.len();
    let phi = params.phi();
    // a = phi_{n-1} k_{n-1} X_{n-1} carried from the previous shell
    let mut a_prev = 0.0;
    let mut x_prev = 0.0;
    for n in 1..=n_shells {
        let xn = x[n - 1];
        let x_next = if n < n_shells { x[n] } else { 0.0 };
        let a = phi.eval(n, t, x) * params.k(n) * xn;
        out[n - 1] = a_prev * x_prev - a * x_next;
        a_prev = a;
        x_prev = xn;
    }
}

/// Right-hand side of the scalar model:
/// `phi_{n-1} k_{n-1} X_{n-1}^2 - phi_n k_n X_n X_{n+1} - (k_n / g_n) X_n`.
pub fn rhs_dyadic(state: &ShellState, params: &ModelParams) -> Result<Vec<f64>> {
    check_scalar(state, params)?;
    let mut out = vec![0.0; state.x.len()];
    dyadic_nonlinear_into(params, state.t, &state.x, &mut out);
    for ((o, x), rate) in out.iter_mut().zip(&state.x).zip(params.decay_rates()) {
        *o -= rate * x;
    }
    Ok(out)
}

/// Transfer part of [`rhs_dyadic`] only.
pub fn dyadic_nonlinear(state: &ShellState, params: &ModelParams) -> Result<Vec<f64>> {
    check_scalar(state, params)?;
    let mut out = vec![0.0; state.x.len()];
    dyadic_nonlinear_into(params, state.t, &state.x, &mut out);
    Ok(out)
}

/// Quadratic part of the averaged four-component system, same row-major
/// layout as [`AveragedState::x`].
pub(crate) fn averaged_nonlinear_into(params: &ModelParams, c: &[f64; 5], x: &[f64], out: &mut [f64]) {
    let n_shells = x.len() / 4;
    let (x1, rest) = x.split_at(n_shells);
    let (x2, rest) = rest.split_at(n_shells);
    let (x3, x4) = rest.split_at(n_shells);
    let [c1, c2, c3, c4, c5] = *c;
    for j in 0..n_shells {
        let n = j + 1;
        let kg = params.k_gamma(n);
        let kg_next = params.k_gamma(n + 1);
        let (a, b, d, e) = (x1[j], x2[j], x3[j], x4[j]);
        let e_prev = if j > 0 { x4[j - 1] } else { 0.0 };
        let a_next = if n < n_shells { x1[j + 1] } else { 0.0 };
        out[j] = kg * (-c1 * d * e - c2 * a * b - c3 * a * d + c4 * e_prev * e_prev);
        out[n_shells + j] = kg * (c2 * a * a - c5 * d * d);
        out[2 * n_shells + j] = kg * (c3 * a * a + c5 * b * d);
        out[3 * n_shells + j] = kg * c1 * a * d - kg_next * c4 * e * a_next;
    }
}

/// Right-hand side of the averaged system, with linear rates
/// `k_n^alpha / g_n` and transport factors `k_n^gamma`.
pub fn rhs_averaged(state: &AveragedState, params: &ModelParams) -> Result<Vec<f64>> {
    check_averaged(state, params)?;
    let mut out = vec![0.0; state.x.len()];
    averaged_nonlinear_into(params, &state.constants, &state.x, &mut out);
    let rates = params.averaged_decay_rates();
    for (idx, (o, x)) in out.iter_mut().zip(&state.x).enumerate() {
        *o -= rates[idx % rates.len()] * x;
    }
    Ok(out)
}

/// Quadratic part of [`rhs_averaged`] only.
pub fn averaged_nonlinear(state: &AveragedState, params: &ModelParams) -> Result<Vec<f64>> {
    check_averaged(state, params)?;
    let mut out = vec![0.0; state.x.len()];
    averaged_nonlinear_into(params, &state.constants, &state.x, &mut out);
    Ok(out)
}
