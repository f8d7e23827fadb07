//! A-priori envelope for the scalar model.
//!
//! For initial data `x` the bounding sequence is
//!
//! ```text
//! y_1 = y_2 = 2 ||x||^2,
//! y_{n+2} = C_{n+2}(sqrt(y_{n+1})) y_n + F_{n+2}(0),
//! C_n(v) = (1 + 1 / (g_n ||phi||_inf v / 2))^{-1},
//! ```
//!
//! and every solution that satisfies the energy inequality obeys
//! `X_n(t)^2 <= y_n` when `g` is non-decreasing. When `sum 1/g_n` diverges
//! `y` decays super-exponentially; the special subsequence `n_k` paces
//! that decay.

mod checks;
mod subsequence;

use alloc::vec;
use alloc::vec::Vec;

use crate::shell_model::ModelParams;
use crate::sum::{tail_sums, NeumaierSum};
use crate::{Error, Result};

pub use checks::{
    d_n_squared, dn_recursion_audit, envelope_dominates, product_bound_excess, summability_report, vanishing_report,
    weighted_tail_sum, DominanceReport, RecursionAudit, SummabilityReport, VanishingReport, Violation,
};
pub use subsequence::{
    adjacent_pair_growth, count_adjacent_pairs, select_ladder_parameters, special_subsequence, verify_decay_ladder,
    AdjacentPairsReport, Hypothesis, LadderLevel, LadderParameters, LadderReport, SpecialSubsequence,
};

/// `C_n(v) = (1 + 1/(g_n phi_sup v / 2))^{-1}`, increasing in `v` with values
/// in `(0, 1)`. `v = 0` yields the limit value 0.
pub fn c_n(v: f64, g_n: f64, phi_sup: f64) -> Result<f64> {
    if !(g_n > 0.0) || !(phi_sup > 0.0) {
        return Err(Error::InvalidParameter { name: "C_n", reason: "g_n and ||phi|| must be positive" });
    }
    if !(v >= 0.0) {
        return Err(Error::InvalidParameter { name: "C_n", reason: "argument must be nonnegative" });
    }
    let z = 0.5 * g_n * phi_sup * v;
    Ok(z / (1.0 + z))
}

/// Bounding sequence with the auxiliary sequences used by the decay estimates.
/// All vectors are indexed from shell 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingSequence {
    pub y: Vec<f64>,
    /// `f_n = F_n(0) = sum_{i >= n} x_i^2`.
    pub f: Vec<f64>,
    /// `h_n = sum_{j >= n} sum_{i >= j} x_i^2`.
    pub h: Vec<f64>,
    /// `c_n = C_n(sqrt(y_{n-1}))`; entries for `n = 1, 2` are unused and 0.
    pub c: Vec<f64>,
    pub x: Vec<f64>,
    pub phi_sup: f64,
    pub g: Vec<f64>,
}

impl BoundingSequence {
    pub fn shells(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self, n: usize) -> f64 {
        self.y[n - 1]
    }

    /// `c_n` for `n >= 3`.
    pub fn c(&self, n: usize) -> Option<f64> {
        (n >= 3 && n <= self.c.len()).then(|| self.c[n - 1])
    }

    /// `h_n` through the closed form `sum_{j >= 1} j x_{j+n-1}^2`.
    pub fn h_closed_form(&self, n: usize) -> f64 {
        let mut acc = NeumaierSum::new();
        for (j, xi) in self.x.iter().skip(n - 1).enumerate() {
            acc.add((j + 1) as f64 * xi * xi);
        }
        acc.value()
    }

    /// Largest violation of `y_{n+2} = c_{n+2} y_n + f_{n+2}` (should be 0).
    pub fn reconstruction_error(&self) -> f64 {
        (1..=self.shells().saturating_sub(2))
            .map(|n| (self.y(n + 2) - (self.c[n + 1] * self.y(n) + self.f[n + 1])).abs())
            .fold(0.0, f64::max)
    }
}

/// Bounding sequence of `x` (zero padded to `N` shells).
pub fn bounding_sequence(x: &[f64], params: &ModelParams) -> Result<BoundingSequence> {
    let n_shells = params.shells();
    if x.len() > n_shells {
        return Err(Error::DimensionMismatch { expected: n_shells, found: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("bounding sequence data"));
    }
    let phi_sup = params.phi_sup();
    let mut xs = x.to_vec();
    xs.resize(n_shells, 0.0);
    let sq: Vec<f64> = xs.iter().map(|v| v * v).collect();
    let f = tail_sums(&sq);
    let h = tail_sums(&f);
    let g = params.g_table()[..n_shells].to_vec();

    let mut y = vec![0.0; n_shells];
    let mut c = vec![0.0; n_shells];
    y[0] = 2.0 * f[0];
    y[1] = y[0];
    for n in 3..=n_shells {
        c[n - 1] = c_n(libm::sqrt(y[n - 2]), g[n - 1], phi_sup)?;
        y[n - 1] = c[n - 1] * y[n - 3] + f[n - 1];
    }
    Ok(BoundingSequence { y, f, h, c, x: xs, phi_sup, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shell_model::{GFamily, PhiSpec};

    #[test]
    fn c_n_half() {
        assert_eq!(c_n(1.0, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(c_n(2.0, 1.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn c_n_small_argument_bound() {
        for v in [1e-3, 1e-6, 1e-9] {
            let z = 0.5 * 3.0 * 2.0 * v;
            assert!(c_n(v, 3.0, 2.0).unwrap() <= z);
        }
        assert_eq!(c_n(0.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn c_n_rejects_nonpositive() {
        assert!(c_n(1.0, 0.0, 1.0).is_err());
        assert!(c_n(1.0, 1.0, 0.0).is_err());
        assert!(c_n(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_data_gives_zero_sequence() {
        let p = ModelParams::new(1.0, 10, GFamily::Linear, PhiSpec::constant(1.0)).unwrap();
        let b = bounding_sequence(&[], &p).unwrap();
        assert!(b.y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn unit_mode_start() {
        let p = ModelParams::new(1.0, 5, GFamily::Constant(1.0), PhiSpec::constant(1.0)).unwrap();
        let b = bounding_sequence(&[1.0], &p).unwrap();
        assert_eq!(b.y(1), 2.0);
        assert_eq!(b.y(2), 2.0);
        let c3 = c_n(libm::sqrt(2.0), 1.0, 1.0).unwrap();
        assert_eq!(b.y(3), c3 * 2.0);
        assert_eq!(b.reconstruction_error(), 0.0);
    }
}
