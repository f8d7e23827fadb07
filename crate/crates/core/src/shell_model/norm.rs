use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// `||x||_{W^{s,p}} = (sum_n 2^(p s n) |x_n|^p)^(1/p)`, shells indexed from 1.
///
/// `p = 2` gives the `H^s` norm; `s` may be negative.
pub fn sobolev_norm(x: &[f64], s: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter { name: "p", reason: "must be >= 1" });
    }
    if !s.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sobolev_norm input"));
    }
    let mut acc = NeumaierSum::new();
    for (i, v) in x.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let n = (i + 1) as f64;
        acc.add(libm::pow(libm::exp2(s * n) * v.abs(), p));
    }
    Ok(libm::pow(acc.value(), 1.0 / p))
}

/// `sqrt(sum_n w_n^2 x_n^2)`; `H^s` with wavenumber weights when `w_n = k_n^s`.
pub(crate) fn weighted_l2(x: &[f64], weights: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for (v, w) in x.iter().zip(weights) {
        acc.add((v * w) * (v * w));
    }
    libm::sqrt(acc.value())
}
