use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// `(X_1, ..., X_N)` at time `t`. `X_0` and `X_{N+1}` are implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellState {
    pub t: f64,
    pub x: Vec<f64>,
}

impl ShellState {
    pub fn new(t: f64, x: Vec<f64>) -> Result<Self> {
        if !t.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("shell state"));
        }
        Ok(ShellState { t, x })
    }

    pub fn zeros(shells: usize) -> Self {
        ShellState { t: 0.0, x: vec![0.0; shells] }
    }

    /// `e_mode` at `t = 0`.
    pub fn unit_mode(shells: usize, mode: usize) -> Self {
        let mut s = Self::zeros(shells);
        s.x[mode - 1] = 1.0;
        s
    }

    /// `x_n = ratio^n` for `n <= support`, zero beyond.
    pub fn geometric(shells: usize, ratio: f64, support: usize) -> Self {
        let mut s = Self::zeros(shells);
        let mut v = 1.0;
        for xn in s.x.iter_mut().take(support) {
            v *= ratio;
            *xn = v;
        }
        s
    }

    pub fn shells(&self) -> usize {
        self.x.len()
    }

    /// `E = sum_n X_n^2`.
    pub fn energy(&self) -> f64 {
        crate::sum::sum(self.x.iter().map(|v| v * v))
    }
}

/// Four-component shells `X_{i,n}`, `i = 1..=4`, with the constants
/// `C_1..C_5` of the averaged system.
///
/// `x` is row-major: component `i` occupies `x[(i-1)*N .. i*N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedState {
    pub t: f64,
    pub x: Vec<f64>,
    pub constants: [f64; 5],
}

impl AveragedState {
    pub fn new(t: f64, x: Vec<f64>, constants: [f64; 5]) -> Result<Self> {
        if !x.len().is_multiple_of(4) || x.is_empty() {
            return Err(Error::DimensionMismatch { expected: 4 * (x.len() / 4 + 1), found: x.len() });
        }
        if !t.is_finite() || x.iter().chain(&constants).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("averaged state"));
        }
        Ok(AveragedState { t, x, constants })
    }

    pub fn zeros(shells: usize, constants: [f64; 5]) -> Self {
        AveragedState { t: 0.0, x: vec![0.0; 4 * shells], constants }
    }

    pub fn shells(&self) -> usize {
        self.x.len() / 4
    }

    /// `X_{i,n}` with `i` in `1..=4` and `n` in `1..=N`.
    #[inline]
    pub fn get(&self, i: usize, n: usize) -> f64 {
        self.x[(i - 1) * self.shells() + n - 1]
    }

    #[inline]
    pub fn set(&mut self, i: usize, n: usize, v: f64) {
        let shells = self.shells();
        self.x[(i - 1) * shells + n - 1] = v;
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let n = self.shells();
        &self.x[(i - 1) * n..i * n]
    }

    /// `X_n^2 = sum_i X_{i,n}^2` per shell.
    pub fn shell_energies(&self) -> Vec<f64> {
        (1..=self.shells())
            .map(|n| {
                (1..=4)
                    .map(|i| {
                        let v = self.get(i, n);
                        v * v
                    })
                    .sum()
            })
            .collect()
    }
}
