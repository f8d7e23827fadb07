use crate::shell_model::{ModelParams, ShellState};
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// Quantities of the energy-method argument at Sobolev index `s`:
///
/// ```text
/// a = sum (k_n / g_n) X_n^2
/// A = sum k_n^{2s} X_n^2
/// B = sum (k_n^{2s+1} / g_n) X_n^2
/// ```
///
/// and the low/high split at `N_cut`, the least `n` with `k_n >= A`, of
/// `sum g_n k_n^{2s+1} X_n^2 X_{n+1}^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaoQuantities {
    pub a: f64,
    pub big_a: f64,
    pub big_b: f64,
    pub n_cut: usize,
    /// `sum_{n <= N_cut} g_n^2 (k_n / g_n X_n^2) (k_n^{2s} X_{n+1}^2)`.
    pub l_part: f64,
    /// `sum_{n > N_cut} (g_n / k_n) (k_n^{s+1} X_n^2) (k_n^{s+1} X_{n+1}^2)`.
    pub h_part: f64,
}

pub fn tao_quantities(state: &ShellState, params: &ModelParams, s: f64) -> Result<TaoQuantities> {
    let n_shells = params.shells();
    if state.x.len() != n_shells {
        return Err(Error::DimensionMismatch { expected: n_shells, found: state.x.len() });
    }
    if !s.is_finite() || state.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("tao_quantities input"));
    }
    let x = &state.x;
    let beta = params.beta();
    let k_pow = |n: usize, e: f64| libm::exp2(beta * e * n as f64);

    let (mut a, mut big_a, mut big_b) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
    for n in 1..=n_shells {
        let x2 = x[n - 1] * x[n - 1];
        if x2 == 0.0 {
            continue;
        }
        let g = params.g(n);
        a.add(params.k(n) / g * x2);
        big_a.add(k_pow(n, 2.0 * s) * x2);
        big_b.add(k_pow(n, 2.0 * s + 1.0) / g * x2);
    }
    let big_a = big_a.value();
    let n_cut = if big_a == 0.0 { 1 } else { (1..=n_shells).find(|&n| params.k(n) >= big_a).unwrap_or(n_shells) };

    let (mut l_part, mut h_part) = (NeumaierSum::new(), NeumaierSum::new());
    for n in 1..n_shells {
        let (xn, xm) = (x[n - 1], x[n]);
        if xn == 0.0 || xm == 0.0 {
            continue;
        }
        let g = params.g(n);
        let k = params.k(n);
        if n <= n_cut {
            l_part.add(g * g * (k / g * xn * xn) * (k_pow(n, 2.0 * s) * xm * xm));
        } else {
            h_part.add((g / k) * (k_pow(n, s + 1.0) * xn * xn) * (k_pow(n, s + 1.0) * xm * xm));
        }
    }
    Ok(TaoQuantities {
        a: a.value(),
        big_a,
        big_b: big_b.value(),
        n_cut,
        l_part: l_part.value(),
        h_part: h_part.value(),
    })
}

/// Both sides of `L <= c g_{N_cut}^2 a A` and `H <= (g_{N_cut} / k_{N_cut}) A^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaoAudit {
    pub c: f64,
    pub l_bound: f64,
    pub h_bound: f64,
    pub l_ratio: f64,
    pub h_ratio: f64,
}

impl TaoAudit {
    pub fn holds(&self, slack: f64) -> bool {
        self.l_ratio <= 1.0 + slack && self.h_ratio <= 1.0 + slack
    }
}

/// Audit with `c = 1`, which is enough for `s >= 1` when `g` and `k_n / g_n`
/// are non-decreasing.
pub fn tao_audit(q: &TaoQuantities, params: &ModelParams) -> TaoAudit {
    let c = 1.0;
    let g = params.g(q.n_cut);
    let k = params.k(q.n_cut);
    let l_bound = c * g * g * q.a * q.big_a;
    let h_bound = g / k * q.big_a * q.big_a;
    let ratio = |v: f64, b: f64| if v == 0.0 { 0.0 } else { v / b };
    TaoAudit { c, l_bound, h_bound, l_ratio: ratio(q.l_part, l_bound), h_ratio: ratio(q.h_part, h_bound) }
}
