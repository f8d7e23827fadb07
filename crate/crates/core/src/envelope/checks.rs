use alloc::vec;
use alloc::vec::Vec;

use super::{c_n, BoundingSequence};
use crate::integrator::Trajectory;
use crate::sum::{tail_sums, NeumaierSum};
use crate::{Error, Result};

const MAX_LISTED_VIOLATIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub n: usize,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub checked: usize,
    pub violation_count: usize,
    /// First violations found, in time order.
    pub violations: Vec<Violation>,
    /// `max (X_n^2(t) - y_n)` over all stored states and shells.
    pub max_excess: f64,
    pub slack: f64,
}

impl DominanceReport {
    pub fn holds(&self) -> bool {
        self.violation_count == 0
    }
}

/// Check `X_n^2(t) <= y_n + slack` at every stored state. For the averaged
/// system `X_n^2` is the shell energy summed over components.
pub fn envelope_dominates(traj: &Trajectory, y: &BoundingSequence, slack: f64) -> DominanceReport {
    let mut report = DominanceReport {
        checked: 0,
        violation_count: 0,
        violations: Vec::new(),
        max_excess: f64::NEG_INFINITY,
        slack,
    };
    let shells = traj.shells().min(y.shells());
    for j in 0..traj.len() {
        let e = traj.shell_energies(j);
        for n in 1..=shells {
            let value = e[n - 1];
            let bound = y.y(n);
            report.checked += 1;
            report.max_excess = report.max_excess.max(value - bound);
            if !(value <= bound + slack) {
                report.violation_count += 1;
                if report.violations.len() < MAX_LISTED_VIOLATIONS {
                    report.violations.push(Violation { t: traj.times[j], n, value, bound });
                }
            }
        }
    }
    report
}

/// `d_n^2(t_j) = F_n(t_j) + sum_{i > n} D_i(t_j)` for `n = 1..=N`.
fn dn_profile(traj: &Trajectory, j: usize) -> Vec<f64> {
    let f = tail_sums(&traj.shell_energies(j));
    let d = tail_sums(&traj.shell_dissipation(j));
    (0..f.len()).map(|i| f[i] + d.get(i + 1).copied().unwrap_or(0.0)).collect()
}

/// `d_n^2(t)`, linearly interpolated between stored states.
pub fn d_n_squared(traj: &Trajectory, n: usize, t: f64) -> Result<f64> {
    if n == 0 || n > traj.shells() {
        return Err(Error::OutOfRange { what: "shell index", value: n as f64 });
    }
    let (j, w) = traj.locate(t)?;
    let lo = dn_profile(traj, j)[n - 1];
    if w == 0.0 {
        return Ok(lo);
    }
    let hi = dn_profile(traj, j + 1)[n - 1];
    Ok((1.0 - w) * lo + w * hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionAudit {
    /// `sup_t d_n^2(t)` over stored states, `n = 1..=N`.
    pub d_bar_sq: Vec<f64>,
    /// `d̄_{n+2}^2 - C_{n+2}(d̄_{n+1}) d̄_n^2 - F_{n+2}(0)` for `n = 1..=N-2`.
    pub excess: Vec<f64>,
    pub max_excess: f64,
    /// `max_{n,t} d_n^2(t) - ||x||^2`; nonpositive up to integration error.
    pub max_over_initial: f64,
}

/// Suprema of `d_n^2` over the stored states and the recursion they satisfy.
pub fn dn_recursion_audit(traj: &Trajectory) -> Result<RecursionAudit> {
    let shells = traj.shells();
    if shells < 3 {
        return Err(Error::InvalidParameter { name: "N", reason: "need at least 3 shells" });
    }
    let mut d_bar_sq = vec![0.0_f64; shells];
    for j in 0..traj.len() {
        for (bar, v) in d_bar_sq.iter_mut().zip(dn_profile(traj, j)) {
            *bar = bar.max(v);
        }
    }
    let f0 = tail_sums(&traj.shell_energies(0));
    let phi_sup = traj.params.phi_sup();
    let mut excess = Vec::with_capacity(shells - 2);
    for n in 1..=shells - 2 {
        let g = traj.params.g(n + 2);
        let c = if phi_sup > 0.0 { c_n(libm::sqrt(d_bar_sq[n]), g, phi_sup)? } else { 0.0 };
        excess.push(d_bar_sq[n + 1] - c * d_bar_sq[n - 1] - f0[n + 1]);
    }
    let max_excess = excess.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_over_initial = d_bar_sq.iter().copied().fold(f64::NEG_INFINITY, f64::max) - f0[0];
    Ok(RecursionAudit { d_bar_sq, excess, max_excess, max_over_initial })
}

/// `sum_{n = n_lo}^{N} 2^{2sn} y_n`.
pub fn weighted_tail_sum(y: &BoundingSequence, s: f64, n_lo: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    for n in n_lo.max(1)..=y.shells() {
        acc.add(libm::exp2(2.0 * s * n as f64) * y.y(n));
    }
    acc.value()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummabilityReport {
    pub total: f64,
    /// Contribution of the last quarter of shells to `total`.
    pub last_quarter: f64,
    pub last_quarter_share: f64,
    /// `max c_n` over each block `[10d + 1, 10d + 10]` (shells below 3 skipped).
    pub decade_max: Vec<f64>,
    pub first_decade_min: f64,
    pub upper_half_max: f64,
    /// Decade maxima non-increasing and `max_{n >= N/2} c_n` below the
    /// smallest `c_n` of the first decade.
    pub c_decreasing: bool,
}

pub fn summability_report(y: &BoundingSequence, s: f64) -> SummabilityReport {
    let n_shells = y.shells();
    let total = weighted_tail_sum(y, s, 1);
    let n_lo = n_shells - n_shells / 4 + 1;
    let last_quarter = weighted_tail_sum(y, s, n_lo);
    let last_quarter_share = if total > 0.0 { last_quarter / total } else { 0.0 };

    let c = |n: usize| y.c(n).unwrap_or(0.0);
    let decade_max: Vec<f64> = (0..n_shells.div_ceil(10))
        .map(|d| (10 * d + 1..=(10 * d + 10).min(n_shells)).filter(|n| *n >= 3).map(c).fold(0.0, f64::max))
        .collect();
    let first_decade_min = (3..=10.min(n_shells)).map(c).fold(f64::INFINITY, f64::min);
    let upper_half_max = (n_shells / 2..=n_shells).filter(|n| *n >= 3).map(c).fold(0.0, f64::max);
    let c_decreasing = decade_max.windows(2).all(|w| w[1] <= w[0]) && upper_half_max < first_decade_min;
    SummabilityReport {
        total,
        last_quarter,
        last_quarter_share,
        decade_max,
        first_decade_min,
        upper_half_max,
        c_decreasing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanishingReport {
    pub max_y: f64,
    /// `max_{n in [N-5, N]} y_n`.
    pub tail_max: f64,
    pub ratio: f64,
    /// `c = 2 / (||phi|| sqrt(sup y))`, so that
    /// `2 / (g_n ||phi|| sqrt(y_{n-1})) >= c / g_n` for every `n`.
    pub c: f64,
}

pub fn vanishing_report(y: &BoundingSequence) -> VanishingReport {
    let n_shells = y.shells();
    let max_y = y.y.iter().copied().fold(0.0, f64::max);
    let tail_max = y.y[n_shells.saturating_sub(6)..].iter().copied().fold(0.0, f64::max);
    let ratio = if max_y > 0.0 { tail_max / max_y } else { 0.0 };
    let c = if max_y > 0.0 && y.phi_sup > 0.0 { 2.0 / (y.phi_sup * libm::sqrt(max_y)) } else { f64::INFINITY };
    VanishingReport { max_y, tail_max, ratio, c }
}

/// `max_{n, m} (y_{n+2m} - b_{n,m}) / b_{n,m}` with
/// `b_{n,m} = y_n prod_{i=1}^{m} c_{n+2i} + h_n`; nonpositive by induction on
/// the recursion, up to rounding. Bounds below the normal range are measured
/// against `f64::MIN_POSITIVE`.
pub fn product_bound_excess(y: &BoundingSequence) -> f64 {
    let n_shells = y.shells();
    let mut worst = f64::NEG_INFINITY;
    for n in 1..=n_shells {
        let mut prod = 1.0;
        let mut m = 1;
        while n + 2 * m <= n_shells {
            prod *= y.c[n + 2 * m - 1];
            let bound = y.y(n) * prod + y.h[n - 1];
            let excess = y.y(n + 2 * m) - bound;
            worst = worst.max(excess / bound.max(f64::MIN_POSITIVE));
            m += 1;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::bounding_sequence;
    use crate::shell_model::{GFamily, ModelParams, PhiSpec, ShellState};

    fn params(n: usize) -> ModelParams {
        ModelParams::new(1.0, n, GFamily::Linear, PhiSpec::constant(1.0)).unwrap()
    }

    #[test]
    fn zero_trajectory_has_no_violations() {
        let p = params(8);
        let tr = Trajectory::stationary(p.clone(), ShellState::zeros(8));
        let y = bounding_sequence(&[1.0], &p).unwrap();
        assert!(envelope_dominates(&tr, &y, 0.0).holds());
    }

    #[test]
    fn dn_at_start_is_tail_energy() {
        let p = params(6);
        let x = ShellState::geometric(6, 0.5, 3);
        let tr = Trajectory::stationary(p, x.clone());
        let f3: f64 = x.x[2..].iter().map(|v| v * v).sum();
        assert_eq!(d_n_squared(&tr, 3, 0.0).unwrap(), f3);
        assert!(d_n_squared(&tr, 3, 1.0).is_err());
        assert!(d_n_squared(&tr, 0, 0.0).is_err());
    }

    #[test]
    fn weighted_sum_of_zero() {
        let p = params(10);
        let y = bounding_sequence(&[], &p).unwrap();
        assert_eq!(weighted_tail_sum(&y, 0.5, 1), 0.0);
        assert_eq!(summability_report(&y, 0.5).last_quarter_share, 0.0);
    }

    #[test]
    fn product_bound_holds() {
        let p = params(40);
        let x: Vec<f64> = (1..=20).map(|n| libm::exp2(-(n as f64))).collect();
        let y = bounding_sequence(&x, &p).unwrap();
        let e = product_bound_excess(&y);
        assert!(e <= 1e-14, "{e}");
    }
}
