use alloc::vec::Vec;

use super::phi::PhiSpec;
use crate::diagnostics::counterexample::CounterexampleG;
use crate::{Error, Result};

/// `k_n = 2^(beta n)`.
///
/// Fails when the value is not a finite `f64` (roughly `beta n > 1023`).
pub fn wavenumber(beta: f64, n: usize) -> Result<f64> {
    let k = libm::exp2(beta * n as f64);
    if k.is_finite() {
        Ok(k)
    } else {
        Err(Error::WavenumberOverflow { beta, n })
    }
}

/// Named families for the dissipation correction `g_n`.
///
/// Tables are built from these rather than from closures so that scenarios
/// stay serializable.
#[derive(Debug, Clone, PartialEq)]
pub enum GFamily {
    /// `g_n = c`; `c = 1` is the critical regime.
    Constant(f64),
    /// `g_n = sqrt(n)`.
    Sqrt,
    /// `g_n = n`, the conjecture regime.
    Linear,
    /// `g_n = n * ln(n + 1)^power`. `sum 1/g_n` diverges iff `power <= 1`.
    NLog { power: f64 },
    /// Explicit values `g_1, g_2, ...`; extended by repeating the last one.
    Custom(Vec<f64>),
    /// Piecewise sequence on which the linear flow does not smooth.
    Counterexample { n1: u64, levels: usize },
}

impl GFamily {
    pub fn name(&self) -> &'static str {
        match self {
            GFamily::Constant(_) => "constant",
            GFamily::Sqrt => "sqrt",
            GFamily::Linear => "linear",
            GFamily::NLog { .. } => "nlogn",
            GFamily::Custom(_) => "custom",
            GFamily::Counterexample { .. } => "counterexample",
        }
    }

    /// `g_1, ..., g_len`.
    pub fn table(&self, beta: f64, len: usize) -> Result<Vec<f64>> {
        let table: Vec<f64> = match self {
            GFamily::Constant(c) => alloc::vec![*c; len],
            GFamily::Sqrt => (1..=len).map(|n| libm::sqrt(n as f64)).collect(),
            GFamily::Linear => (1..=len).map(|n| n as f64).collect(),
            GFamily::NLog { power } => {
                (1..=len).map(|n| n as f64 * libm::pow(libm::log(n as f64 + 1.0), *power)).collect()
            }
            GFamily::Custom(values) => {
                let last =
                    *values.last().ok_or(Error::InvalidParameter { name: "g", reason: "custom table is empty" })?;
                (0..len).map(|i| values.get(i).copied().unwrap_or(last)).collect()
            }
            GFamily::Counterexample { n1, levels } => {
                let c = CounterexampleG::build(beta, *n1, *levels)?;
                (1..=len as u64).map(|n| c.g(n)).collect::<Result<_>>()?
            }
        };
        if table.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidParameter { name: "g", reason: "entries must be finite and strictly positive" });
        }
        Ok(table)
    }

    /// Whether `sum_n 1/g_n` diverges; `None` when the family does not say.
    pub fn reciprocal_sum_diverges(&self) -> Option<bool> {
        match self {
            GFamily::Constant(_) | GFamily::Sqrt | GFamily::Linear => Some(true),
            GFamily::NLog { power } => Some(*power <= 1.0),
            GFamily::Counterexample { .. } => Some(true),
            GFamily::Custom(_) => None,
        }
    }
}

/// Parameters of a truncated model with shells `1..=N`.
///
/// Wavenumbers and the linear rates `k_n / g_n`, `k_n^alpha / g_n` are
/// tabulated once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    beta: f64,
    shells: usize,
    g: Vec<f64>,
    family: Option<GFamily>,
    phi: PhiSpec,
    alpha: f64,
    gamma: f64,
    s: f64,
    // k_0 ..= k_{N+1}
    k: Vec<f64>,
    k_gamma: Vec<f64>,
    // n = 1 ..= N
    decay: Vec<f64>,
    decay_alpha: Vec<f64>,
}

impl ModelParams {
    pub fn new(beta: f64, shells: usize, family: GFamily, phi: PhiSpec) -> Result<Self> {
        let g = family.table(beta, shells + 1)?;
        let mut p = Self::from_g_table(beta, shells, g, phi)?;
        p.family = Some(family);
        Ok(p)
    }

    /// Build from an explicit `g_1, g_2, ...` table. Missing entries up to
    /// `g_{N+1}` repeat the last one.
    pub fn from_g_table(beta: f64, shells: usize, mut g: Vec<f64>, phi: PhiSpec) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter { name: "beta", reason: "must be positive" });
        }
        if shells < 3 {
            return Err(Error::InvalidParameter { name: "N", reason: "need at least 3 shells" });
        }
        if g.len() < shells {
            return Err(Error::DimensionMismatch { expected: shells, found: g.len() });
        }
        g.truncate(shells + 1);
        if g.len() == shells {
            g.push(g[shells - 1]);
        }
        if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter { name: "g", reason: "entries must be finite and strictly positive" });
        }
        phi.check_shells(shells)?;
        let mut p = ModelParams {
            beta,
            shells,
            g,
            family: None,
            phi,
            alpha: 1.0,
            gamma: 1.0,
            s: 1.0,
            k: Vec::new(),
            k_gamma: Vec::new(),
            decay: Vec::new(),
            decay_alpha: Vec::new(),
        };
        p.tabulate()?;
        Ok(p)
    }

    fn tabulate(&mut self) -> Result<()> {
        let n_max = self.shells + 1;
        self.k = (0..=n_max).map(|n| wavenumber(self.beta, n)).collect::<Result<_>>()?;
        self.k_gamma = (0..=n_max).map(|n| wavenumber(self.beta * self.gamma, n)).collect::<Result<_>>()?;
        self.decay = (1..=self.shells).map(|n| self.k[n] / self.g[n - 1]).collect();
        self.decay_alpha = (1..=self.shells)
            .map(|n| Ok(wavenumber(self.beta * self.alpha, n)? / self.g[n - 1]))
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Dissipation and transport exponents of the averaged system.
    pub fn with_exponents(mut self, alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter { name: "alpha/gamma", reason: "must be positive" });
        }
        self.alpha = alpha;
        self.gamma = gamma;
        self.tabulate()?;
        Ok(self)
    }

    pub fn with_sobolev_index(mut self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter { name: "s", reason: "must be positive" });
        }
        self.s = s;
        Ok(self)
    }

    /// Same model with a different truncation. Requires a `g` family, or
    /// repeats the last tabulated value when the table is explicit.
    pub fn with_shells(&self, shells: usize) -> Result<Self> {
        let g = match &self.family {
            Some(f) => f.table(self.beta, shells + 1)?,
            None => {
                let last = *self.g.last().unwrap();
                (0..=shells).map(|i| self.g.get(i).copied().unwrap_or(last)).collect()
            }
        };
        let phi = self.phi.clone();
        let mut p = ModelParams::from_g_table(self.beta, shells, g, phi)?.with_exponents(self.alpha, self.gamma)?;
        p.s = self.s;
        p.family = self.family.clone();
        Ok(p)
    }

    pub fn with_phi(&self, phi: PhiSpec) -> Result<Self> {
        phi.check_shells(self.shells)?;
        let mut p = self.clone();
        p.phi = phi;
        Ok(p)
    }

    /// Fails unless `g_{n+1} >= g_n` on the whole table.
    pub fn require_monotone_g(&self) -> Result<()> {
        match self.g.windows(2).position(|w| w[1] < w[0]) {
            Some(i) => Err(Error::NonMonotoneG { n: i + 1 }),
            None => Ok(()),
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of shells `N`.
    pub fn shells(&self) -> usize {
        self.shells
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sobolev_index(&self) -> f64 {
        self.s
    }

    pub fn family(&self) -> Option<&GFamily> {
        self.family.as_ref()
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    /// `||phi||_inf`.
    pub fn phi_sup(&self) -> f64 {
        self.phi.sup_bound()
    }

    /// `g_n` for `1 <= n <= N + 1`.
    #[inline]
    pub fn g(&self, n: usize) -> f64 {
        self.g[n - 1]
    }

    /// `g_1 ..= g_{N+1}`.
    pub fn g_table(&self) -> &[f64] {
        &self.g
    }

    /// `k_n` for `0 <= n <= N + 1`.
    #[inline]
    pub fn k(&self, n: usize) -> f64 {
        self.k[n]
    }

    /// `k_n^gamma` for `0 <= n <= N + 1`.
    #[inline]
    pub fn k_gamma(&self, n: usize) -> f64 {
        self.k_gamma[n]
    }

    /// `k_n / g_n` for `n = 1 ..= N`, indexed from 0.
    pub fn decay_rates(&self) -> &[f64] {
        &self.decay
    }

    /// `k_n^alpha / g_n` for `n = 1 ..= N`, indexed from 0.
    pub fn averaged_decay_rates(&self) -> &[f64] {
        &self.decay_alpha
    }

    /// `g_n` beyond the table, following the declared family.
    pub(crate) fn extended_g(&self, len: usize) -> Result<Vec<f64>> {
        match &self.family {
            Some(f) => f.table(self.beta, len),
            None => {
                let last = *self.g.last().unwrap();
                Ok((0..len).map(|i| self.g.get(i).copied().unwrap_or(last)).collect())
            }
        }
    }
}
