//! A non-decreasing `g` with `k_n / g_n` non-decreasing for which the linear
//! flow does not smooth: `n g_n / k_n = 1` at the start of every plateau.
//!
//! ```text
//! g_{n_p} = k_{n_p} / n_p,           r_p = ceil(k_{n_p} / n_p)
//! m_p = n_p + r_p,                   n_{p+1} = n_p 2^{ceil(beta r_p)}
//! g_n = g_{n_p}                      on [n_p, m_p]
//! g_n = g_{n_p} k_n / k_{m_p}        on (m_p, n_{p+1})
//! ```
//!
//! Below `n_1` the sequence is constant. Rounding `r_p` and the exponent up
//! keeps `n_{p+1}` an integer and only lengthens the plateaus.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleLevel {
    pub p: usize,
    pub n_p: u64,
    pub m_p: u64,
    pub g_np: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleG {
    pub beta: f64,
    pub levels: Vec<CounterexampleLevel>,
}

impl CounterexampleG {
    pub fn build(beta: f64, n1: u64, levels: usize) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter { name: "beta", reason: "must be positive" });
        }
        if n1 == 0 || levels == 0 {
            return Err(Error::InvalidParameter { name: "n1/levels", reason: "must be at least 1" });
        }
        let mut out = Vec::with_capacity(levels);
        let mut n_p = n1;
        for p in 1..=levels {
            let overflow = Error::CounterexampleOverflow { max_level: p - 1 };
            let k = libm::exp2(beta * n_p as f64);
            let g_np = k / n_p as f64;
            if !g_np.is_finite() || libm::ceil(g_np) >= u64::MAX as f64 {
                return Err(overflow);
            }
            let r = libm::ceil(g_np) as u64;
            let m_p = n_p.checked_add(r).ok_or(overflow.clone())?;
            out.push(CounterexampleLevel { p, n_p, m_p, g_np });
            if p < levels {
                let shift = libm::ceil(beta * r as f64);
                if shift >= 63.0 {
                    return Err(Error::CounterexampleOverflow { max_level: p });
                }
                n_p = n_p.checked_mul(1u64 << shift as u32).ok_or(Error::CounterexampleOverflow { max_level: p })?;
                if !libm::exp2(beta * n_p as f64).is_finite() {
                    return Err(Error::CounterexampleOverflow { max_level: p });
                }
            }
        }
        Ok(CounterexampleG { beta, levels: out })
    }

    /// Highest level the construction can represent from `n1`.
    pub fn max_level(beta: f64, n1: u64) -> usize {
        let mut levels = 1;
        loop {
            match Self::build(beta, n1, levels) {
                Ok(_) => levels += 1,
                Err(Error::CounterexampleOverflow { max_level }) => return max_level,
                Err(_) => return 0,
            }
            if levels > 64 {
                return levels - 1;
            }
        }
    }

    /// `g_n`; the last ramp continues beyond the last level.
    pub fn g(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::OutOfRange { what: "shell index", value: 0.0 });
        }
        let first = self.levels[0];
        if n < first.n_p {
            return Ok(first.g_np);
        }
        let idx = self.levels.partition_point(|l| l.n_p <= n) - 1;
        let level = self.levels[idx];
        let value =
            if n <= level.m_p { level.g_np } else { level.g_np * libm::exp2(self.beta * (n - level.m_p) as f64) };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::OutOfRange { what: "counterexample shell", value: n as f64 })
        }
    }

    /// `n_p g_{n_p} / k_{n_p}` at every plateau start.
    pub fn plateau_ratios(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.n_p as f64 * l.g_np / libm::exp2(self.beta * l.n_p as f64)).collect()
    }

    /// Witness data `x_{n_p} = 1/p` (zero elsewhere) on shells `1..=len`.
    pub fn witness(&self, len: usize) -> Vec<f64> {
        let mut x = alloc::vec![0.0; len];
        for l in &self.levels {
            if l.n_p as usize <= len {
                x[l.n_p as usize - 1] = 1.0 / l.p as f64;
            }
        }
        x
    }

    /// `log2 (2^{s n_p} |Z_{n_p}(t)|)` for the witness under the linear flow;
    /// the decay rate at `n_p` is exactly `n_p`, so these grow with `p`
    /// whenever `s ln 2 > t`.
    pub fn witness_log2_weights(&self, s: f64, t: f64) -> Vec<f64> {
        self.levels
            .iter()
            .map(|l| {
                let n = l.n_p as f64;
                s * n - n * t / core::f64::consts::LN_2 - libm::log2(l.p as f64)
            })
            .collect()
    }
}
