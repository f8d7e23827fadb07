use alloc::vec::Vec;

use crate::integrator::Trajectory;
use crate::shell_model::{sobolev_norm, ModelParams};
use crate::{Error, Result};

/// `psi(t) = sup_{n <= N} 2^{(s2 - s1) n} exp(-(k_n / g_n) t)` and its
/// reciprocal `phi = 1 / psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingRate {
    pub psi: f64,
    pub phi: f64,
    pub log2_psi: f64,
    pub argmax: usize,
    /// The supremum is attained below the truncation, so a larger `N`
    /// would not change it.
    pub interior: bool,
}

/// Evaluated in log space; `t = 0` is allowed and then the supremum sits at
/// `n = N`.
pub fn smoothing_psi(t: f64, s1: f64, s2: f64, params: &ModelParams) -> Result<SmoothingRate> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter { name: "t", reason: "must be nonnegative" });
    }
    if !(s2 >= s1) || !s1.is_finite() || !s2.is_finite() {
        return Err(Error::InvalidParameter { name: "s1/s2", reason: "need s2 >= s1" });
    }
    let n_shells = params.shells();
    let ln2 = core::f64::consts::LN_2;
    let mut best = (f64::NEG_INFINITY, 1);
    for n in 1..=n_shells {
        let log2_term = (s2 - s1) * n as f64 - params.decay_rates()[n - 1] * t / ln2;
        if log2_term > best.0 {
            best = (log2_term, n);
        }
    }
    let psi = libm::exp2(best.0);
    Ok(SmoothingRate { psi, phi: libm::exp2(-best.0), log2_psi: best.0, argmax: best.1, interior: best.1 < n_shells })
}

/// `max_n 2^{sn} |Z_n(t)|` for the linear flow `Z_n(t) = x_n exp(-(k_n/g_n) t)`,
/// with the maximizing shell.
pub fn linear_flow_sup(x: &[f64], params: &ModelParams, t: f64, s: f64) -> (f64, usize) {
    let mut best = (0.0, 1);
    for (i, xi) in x.iter().enumerate().take(params.shells()) {
        let n = i + 1;
        let v = libm::exp2(s * n as f64) * xi.abs() * libm::exp(-params.decay_rates()[i] * t);
        if v > best.0 {
            best = (v, n);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedNorm {
    /// `(t, phi(t) ||X(t)||_{H^{s2}})` at the sampled times.
    pub values: Vec<(f64, f64)>,
    pub sup: f64,
    pub t_at_sup: f64,
}

/// `sup_t phi(t) ||X(t)||_{H^{s2}}` over the sampled states, measured from
/// the trajectory start.
pub fn smoothed_norm_sup(traj: &Trajectory, s1: f64, s2: f64) -> Result<SmoothedNorm> {
    let t0 = traj.times[0];
    let mut values = Vec::with_capacity(traj.sample_indices.len());
    let (mut sup, mut t_at_sup) = (0.0_f64, t0);
    for &j in &traj.sample_indices {
        let t = traj.times[j];
        let rate = smoothing_psi(t - t0, s1, s2, &traj.params)?;
        let energies = traj.shell_energies(j);
        let amplitudes: Vec<f64> = energies.iter().map(|e| libm::sqrt(*e)).collect();
        let v = rate.phi * sobolev_norm(&amplitudes, s2, 2.0)?;
        if v > sup {
            sup = v;
            t_at_sup = t;
        }
        values.push((t, v));
    }
    Ok(SmoothedNorm { values, sup, t_at_sup })
}
