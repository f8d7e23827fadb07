//! Energy bookkeeping and the quantities used to argue about regularity.

pub mod counterexample;
mod energy;
mod flux;
mod smoothing;
mod tao;

pub use counterexample::{CounterexampleG, CounterexampleLevel};
pub use energy::{energy_report, EnergyReport};
pub use flux::{energy_rate_residual, flux_profile, window_balance, FluxProfile};
pub use smoothing::{linear_flow_sup, smoothed_norm_sup, smoothing_psi, SmoothedNorm, SmoothingRate};
pub use tao::{tao_audit, tao_quantities, TaoAudit, TaoQuantities};

/// Centered differences at interior points, one-sided at the ends. The
/// interior formula is the three-point one, exact for quadratics on
/// nonuniform grids.
pub(crate) fn time_derivative(t: &[f64], v: &[f64]) -> alloc::vec::Vec<f64> {
    let n = t.len();
    if n < 2 {
        return alloc::vec![0.0; n];
    }
    (0..n)
        .map(|j| {
            if j == 0 {
                (v[1] - v[0]) / (t[1] - t[0])
            } else if j == n - 1 {
                (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2])
            } else {
                let h0 = t[j] - t[j - 1];
                let h1 = t[j + 1] - t[j];
                let a = -h1 / (h0 * (h0 + h1));
                let b = (h1 - h0) / (h0 * h1);
                let c = h0 / (h1 * (h0 + h1));
                a * v[j - 1] + b * v[j] + c * v[j + 1]
            }
        })
        .collect()
}
