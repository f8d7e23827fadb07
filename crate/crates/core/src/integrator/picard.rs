//! Local solution of the mild (Duhamel) formulation by fixed-point iteration.
//!
//! ```text
//! (F V)_n(t) = x_n e^{-l_n t}
//!            + int_0^t e^{-l_n (t-u)} [phi_{n-1} k_{n-1} V_{n-1}^2 - phi_n k_n V_n V_{n+1}](u) du
//! ```
//!
//! with `l_n = k_n / g_n`. `F` maps the ball of radius `2 ||x||_{H^s}` of
//! `L^inf([0, eta]; H^s)` into itself and contracts with constant `theta`
//! as soon as `L(eta) <= theta / (8 ||phi||_inf ||x||_{H^s})`. Here
//! `||v||_{H^s}^2 = sum_n k_n^{2s} v_n^2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::shell_model::{dyadic_nonlinear_into, weighted_l2, ModelParams, ShellState};
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// `L(eta)` over the truncated shells, and the `eta`-independent bound on
/// the squared contribution of the shells beyond the truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LBound {
    pub truncated: f64,
    /// `2^{4 beta s} sum_{n > N} k_n^{-2s} g_n^2`; infinite when `g` is not
    /// in `H^{-s}`.
    pub tail_sq: f64,
}

impl LBound {
    pub fn upper(&self) -> f64 {
        libm::sqrt(self.truncated * self.truncated + self.tail_sq)
    }
}

const TAIL_TERMS: usize = 4096;

/// `L(eta) = [sum_n k_n^{2s} k_{n-1}^{-4s} g_n^2 (1 - e^{-k_n eta / g_n})^2]^{1/2}`
/// over `n = 1..=N`, plus a tail estimate following the `g` family.
pub fn compute_l(eta: f64, params: &ModelParams, s: f64) -> Result<LBound> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter { name: "eta", reason: "must be >= 0" });
    }
    let truncated = truncated_l(eta, params, s);
    let tail_sq = tail_sq(params, s)?;
    Ok(LBound { truncated, tail_sq })
}

fn truncated_l(eta: f64, params: &ModelParams, s: f64) -> f64 {
    let beta = params.beta();
    let mut acc = NeumaierSum::new();
    for n in 1..=params.shells() {
        // k_n^{2s} k_{n-1}^{-4s} = 2^{beta s (4 - 2n)}
        let w = libm::exp2(beta * s * (4.0 - 2.0 * n as f64));
        let g = params.g(n);
        let one_minus = -libm::expm1(-params.decay_rates()[n - 1] * eta);
        acc.add(w * g * g * one_minus * one_minus);
    }
    libm::sqrt(acc.value())
}

fn tail_sq(params: &ModelParams, s: f64) -> Result<f64> {
    let n0 = params.shells();
    let g = params.extended_g(n0 + TAIL_TERMS)?;
    let beta = params.beta();
    let mut acc = NeumaierSum::new();
    let mut last = 0.0;
    for n in n0 + 1..=n0 + TAIL_TERMS {
        let gn = g[n - 1];
        last = libm::exp2(beta * s * (4.0 - 2.0 * n as f64)) * gn * gn;
        acc.add(last);
    }
    let total = acc.value();
    if !total.is_finite() || last > 1e-12 * total {
        Ok(f64::INFINITY)
    } else {
        Ok(total)
    }
}

/// Whether `sum_n k_n^{-2s} g_n^2 < inf` for the declared `g`.
pub fn g_in_negative_sobolev(params: &ModelParams, s: f64) -> Result<bool> {
    Ok(tail_sq(params, s)?.is_finite())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub s: f64,
    pub theta: f64,
    pub iter_tol: f64,
    pub max_iter: usize,
    /// Uniform grid intervals on `[0, eta]`.
    pub grid_intervals: usize,
    /// Largest admissible `eta`.
    pub eta_cap: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { s: 1.0, theta: 0.5, iter_tol: 1e-12, max_iter: 200, grid_intervals: 1 << 10, eta_cap: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSolution {
    pub eta: f64,
    /// `L(eta)` over the truncated shells.
    pub l_eta: f64,
    /// `theta / (8 ||phi||_inf ||x||_{H^s})`.
    pub l_target: f64,
    pub times: Vec<f64>,
    /// Fixed point on the grid, one state per time.
    pub values: Vec<Vec<f64>>,
    /// Every iterate including `V^0`, flattened `time x shell`.
    pub iterates: Vec<Vec<f64>>,
    /// `sup_t ||V^{j+1} - V^j||_{H^s}` for consecutive iterates.
    pub distances: Vec<f64>,
    pub iterations: usize,
    pub contraction_rate: f64,
    pub ball_radius: f64,
    pub max_norm: f64,
    pub stayed_in_ball: bool,
}

impl PicardSolution {
    pub fn state_at(&self, j: usize) -> ShellState {
        ShellState { t: self.times[j], x: self.values[j].clone() }
    }
}

fn hs_weights(params: &ModelParams, s: f64) -> Vec<f64> {
    (1..=params.shells()).map(|n| libm::exp2(params.beta() * s * n as f64)).collect()
}

/// Picard iteration for the scalar model on `[0, eta]`, with `eta` chosen by
/// bisection on `L`.
pub fn picard_local_solve(
    x0: &ShellState,
    params: &ModelParams,
    s: f64,
    theta: f64,
    iter_tol: f64,
) -> Result<PicardSolution> {
    let cfg = PicardConfig { s, theta, iter_tol, ..PicardConfig::default() };
    picard_local_solve_with(x0, params, &cfg)
}

pub fn picard_local_solve_with(x0: &ShellState, params: &ModelParams, cfg: &PicardConfig) -> Result<PicardSolution> {
    let n_shells = params.shells();
    if x0.x.len() != n_shells {
        return Err(Error::DimensionMismatch { expected: n_shells, found: x0.x.len() });
    }
    if !(cfg.theta > 0.0 && cfg.theta < 1.0) {
        return Err(Error::InvalidParameter { name: "theta", reason: "must lie in (0, 1)" });
    }
    if !(cfg.iter_tol > 0.0) || cfg.grid_intervals == 0 {
        return Err(Error::InvalidParameter { name: "iter_tol", reason: "must be positive" });
    }
    if !g_in_negative_sobolev(params, cfg.s)? {
        return Err(Error::InvalidParameter { name: "g", reason: "g is not in H^{-s}" });
    }
    let weights = hs_weights(params, cfg.s);
    let x_norm = weighted_l2(&x0.x, &weights);
    if !x_norm.is_finite() {
        return Err(Error::NonFinite("initial H^s norm"));
    }
    let l_target = cfg.theta / (8.0 * params.phi_sup() * x_norm);
    let eta = select_eta(params, cfg.s, l_target, cfg.eta_cap);
    let l_eta = truncated_l(eta, params, cfg.s);

    let m = cfg.grid_intervals;
    let h = eta / m as f64;
    let times: Vec<f64> = (0..=m).map(|j| x0.t + j as f64 * h).collect();
    let rates = params.decay_rates();
    let step_decay: Vec<f64> = rates.iter().map(|l| libm::exp(-l * h)).collect();
    let free: Vec<f64> = (0..=m)
        .flat_map(|j| {
            let tj = j as f64 * h;
            x0.x.iter().zip(rates).map(move |(x, l)| x * libm::exp(-l * tj))
        })
        .collect();

    let mut current: Vec<f64> = (0..=m).flat_map(|_| x0.x.iter().copied()).collect();
    let mut iterates = vec![current.clone()];
    let mut distances = Vec::new();
    let mut nl = vec![0.0; (m + 1) * n_shells];
    let mut integral = vec![0.0; n_shells];
    let mut diff = vec![0.0; n_shells];
    let mut converged = false;
    let mut rate = 0.0;

    for _ in 0..cfg.max_iter {
        for (j, &tj) in times.iter().enumerate().take(m + 1) {
            let row = j * n_shells..(j + 1) * n_shells;
            dyadic_nonlinear_into(params, tj, &current[row.clone()], &mut nl[row]);
        }
        let mut next = free.clone();
        integral.iter_mut().for_each(|v| *v = 0.0);
        for j in 1..=m {
            for n in 0..n_shells {
                let e = step_decay[n];
                let a = nl[(j - 1) * n_shells + n];
                let b = nl[j * n_shells + n];
                integral[n] = e * integral[n] + 0.5 * h * (e * a + b);
                next[j * n_shells + n] += integral[n];
            }
        }
        let mut dist = 0.0_f64;
        for j in 0..=m {
            for n in 0..n_shells {
                diff[n] = next[j * n_shells + n] - current[j * n_shells + n];
            }
            dist = dist.max(weighted_l2(&diff, &weights));
        }
        if !dist.is_finite() {
            return Err(Error::NonFinite("Picard iterate"));
        }
        distances.push(dist);
        iterates.push(next.clone());
        current = next;
        if distances.len() >= 2 {
            rate = ratio_max(&distances);
            if rate >= 1.0 {
                return Err(Error::PicardNotContracting { rate });
            }
        }
        if dist < cfg.iter_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::PicardNotConverged {
            iterations: cfg.max_iter,
            last_distance: *distances.last().unwrap_or(&f64::INFINITY),
        });
    }

    let ball_radius = 2.0 * x_norm;
    let max_norm =
        iterates.iter().flat_map(|it| it.chunks(n_shells).map(|c| weighted_l2(c, &weights))).fold(0.0, f64::max);
    let values = current.chunks(n_shells).map(|c| c.to_vec()).collect();
    Ok(PicardSolution {
        eta,
        l_eta,
        l_target,
        times,
        values,
        iterations: distances.len(),
        iterates,
        distances,
        contraction_rate: rate,
        ball_radius,
        max_norm,
        stayed_in_ball: max_norm <= ball_radius * (1.0 + 1e-12),
    })
}

/// Largest `eta <= cap` with `L(eta) <= target` (bisection; `L` is
/// nondecreasing in `eta`).
fn select_eta(params: &ModelParams, s: f64, target: f64, cap: f64) -> f64 {
    if !target.is_finite() || truncated_l(cap, params, s) <= target {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_l(mid, params, s) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

fn ratio_max(distances: &[f64]) -> f64 {
    distances
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (_, 0.0) => 0.0,
            (0.0, _) => f64::INFINITY,
            (a, b) => b / a,
        })
        .fold(0.0, f64::max)
}

/// `max_j ||V^{j+1} - V^j|| / ||V^j - V^{j-1}||` in `sup_t H^s`, for iterates
/// flattened as in [`PicardSolution::iterates`]. A vanishing numerator gives 0.
pub fn observed_contraction_rate(iterates: &[Vec<f64>], params: &ModelParams, s: f64) -> Result<f64> {
    if iterates.len() < 3 {
        return Err(Error::TooFewIterates { found: iterates.len() });
    }
    let n_shells = params.shells();
    let weights = hs_weights(params, s);
    let mut diff = vec![0.0; n_shells];
    let distances: Vec<f64> = iterates
        .windows(2)
        .map(|w| {
            w[0].chunks(n_shells)
                .zip(w[1].chunks(n_shells))
                .map(|(a, b)| {
                    for (d, (x, y)) in diff.iter_mut().zip(a.iter().zip(b)) {
                        *d = y - x;
                    }
                    weighted_l2(&diff, &weights)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ratio_max(&distances))
}
