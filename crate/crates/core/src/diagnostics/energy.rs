use alloc::vec::Vec;

use crate::integrator::Trajectory;
use crate::sum::{sum, tail_sums};

/// Energy tables of a trajectory. `E_n = sum_{i <= n} X_i^2` and
/// `F_n = sum_{i >= n} X_i^2`, both indexed from shell 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub partial: Vec<Vec<f64>>,
    pub tails: Vec<Vec<f64>>,
    /// `sum_n D_n(t)`.
    pub dissipation: Vec<f64>,
    /// `r(t) = E(t) + sum_n D_n(t) - E(0)`.
    pub residual: Vec<f64>,
    /// `int_0^t sum_n k_n |X_n|^3 ds`, trapezoid on the stored grid.
    pub w3_integral: Vec<f64>,
    pub tolerance: f64,
    pub max_abs_residual: f64,
    /// `max |E - E_n - F_{n+1}|`.
    pub max_partition_error: f64,
    /// `|r(t)| <= tolerance * max(E(0), atol)` at every stored time.
    pub equality: bool,
}

impl EnergyReport {
    /// The inequality side `r(t) <= tolerance * max(E(0), atol)`.
    pub fn inequality_holds(&self) -> bool {
        let scale = self.tolerance * self.scale();
        self.residual.iter().all(|r| *r <= scale)
    }

    fn scale(&self) -> f64 {
        self.energy.first().copied().unwrap_or(0.0)
    }

    pub fn relative_residual(&self) -> f64 {
        let e0 = self.scale();
        if e0 > 0.0 {
            self.max_abs_residual / e0
        } else {
            self.max_abs_residual
        }
    }
}

pub fn energy_report(traj: &Trajectory) -> EnergyReport {
    let len = traj.len();
    let tolerance = traj.control.energy_tolerance();
    let k: Vec<f64> = (1..=traj.shells()).map(|n| traj.params.k(n)).collect();

    let mut energy = Vec::with_capacity(len);
    let mut partial = Vec::with_capacity(len);
    let mut tails = Vec::with_capacity(len);
    let mut dissipation = Vec::with_capacity(len);
    let mut w3 = Vec::with_capacity(len);
    let mut max_partition_error = 0.0_f64;
    for j in 0..len {
        let e = traj.shell_energies(j);
        let f = tail_sums(&e);
        let mut p = Vec::with_capacity(e.len());
        let mut acc = crate::sum::NeumaierSum::new();
        for v in &e {
            acc.add(*v);
            p.push(acc.value());
        }
        let total = f[0];
        for (n, pn) in p.iter().enumerate() {
            let rest = f.get(n + 1).copied().unwrap_or(0.0);
            max_partition_error = max_partition_error.max((total - pn - rest).abs());
        }
        energy.push(total);
        partial.push(p);
        tails.push(f);
        dissipation.push(traj.total_dissipation(j));
        w3.push(sum(e.iter().zip(&k).map(|(e, k)| k * e * libm::sqrt(*e))));
    }

    let mut w3_integral = Vec::with_capacity(len);
    let mut acc = 0.0;
    for j in 0..len {
        if j > 0 {
            acc += 0.5 * (traj.times[j] - traj.times[j - 1]) * (w3[j] + w3[j - 1]);
        }
        w3_integral.push(acc);
    }

    let e0 = energy.first().copied().unwrap_or(0.0);
    let residual: Vec<f64> = energy.iter().zip(&dissipation).map(|(e, d)| e + d - e0).collect();
    let max_abs_residual = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let equality = max_abs_residual <= tolerance * e0.max(traj.control.atol);
    EnergyReport {
        times: traj.times.clone(),
        energy,
        partial,
        tails,
        dissipation,
        residual,
        w3_integral,
        tolerance,
        max_abs_residual,
        max_partition_error,
        equality,
    }
}
