use alloc::vec::Vec;

use crate::{Error, Result};

/// Local coupling rule `phi_n(t, X_{n-m}, ..., X_{n+m})`.
///
/// Receives the window (length `2m + 1`, centre at index `m`, zero padded
/// outside `1..=N`) and returns a value in `[-1, 1]` that is scaled by
/// [`PhiSpec::sup_bound`].
pub type WindowFn = fn(t: f64, window: &[f64]) -> f64;

/// Registered window callbacks, looked up by name from scenario files.
pub const WINDOW_REGISTRY: &[(&str, WindowFn)] =
    &[("unit", unit), ("tanh_gradient", tanh_gradient), ("cos_phase", cos_phase)];

fn unit(_t: f64, _w: &[f64]) -> f64 {
    1.0
}

fn tanh_gradient(_t: f64, w: &[f64]) -> f64 {
    let m = w.len() / 2;
    libm::tanh(w[m] - w[m + 1])
}

fn cos_phase(t: f64, w: &[f64]) -> f64 {
    libm::cos(t + w.iter().sum::<f64>())
}

pub fn lookup_window(name: &str) -> Option<WindowFn> {
    WINDOW_REGISTRY.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

#[derive(Debug, Clone)]
pub enum PhiKind {
    Constant(f64),
    PerShell(Vec<f64>),
    Windowed { half_width: usize, name: &'static str, func: WindowFn },
}

// Window callbacks are compared by registry name.
impl PartialEq for PhiKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PhiKind::Constant(a), PhiKind::Constant(b)) => a == b,
            (PhiKind::PerShell(a), PhiKind::PerShell(b)) => a == b,
            (PhiKind::Windowed { half_width: m, name: a, .. }, PhiKind::Windowed { half_width: n, name: b, .. }) => {
                m == n && a == b
            }
            _ => false,
        }
    }
}

/// Coupling coefficients together with their uniform bound.
///
/// Every evaluation is clamped to `[-sup_bound, sup_bound]`. No sign is
/// assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSpec {
    kind: PhiKind,
    sup_bound: f64,
}

impl PhiSpec {
    pub fn constant(c: f64) -> Self {
        PhiSpec { kind: PhiKind::Constant(c), sup_bound: c.abs() }
    }

    pub fn per_shell(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "phi",
                reason: "per-shell values must be finite and non-empty",
            });
        }
        let sup_bound = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        Ok(PhiSpec { kind: PhiKind::PerShell(values), sup_bound })
    }

    pub fn windowed(name: &str, half_width: usize, sup_bound: f64) -> Result<Self> {
        let (name, func) = WINDOW_REGISTRY
            .iter()
            .find(|(n, _)| *n == name)
            .copied()
            .ok_or_else(|| Error::UnknownCallback(name.into()))?;
        if half_width == 0 {
            return Err(Error::InvalidParameter { name: "phi.half_width", reason: "must be >= 1" });
        }
        if !(sup_bound.is_finite() && sup_bound > 0.0) {
            return Err(Error::InvalidParameter { name: "phi.sup", reason: "must be positive" });
        }
        Ok(PhiSpec { kind: PhiKind::Windowed { half_width, name, func }, sup_bound })
    }

    pub fn kind(&self) -> &PhiKind {
        &self.kind
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Constant in time and state, so that `phi` can be tabulated once.
    pub fn is_static(&self) -> bool {
        !matches!(self.kind, PhiKind::Windowed { .. })
    }

    pub(crate) fn check_shells(&self, shells: usize) -> Result<()> {
        match &self.kind {
            PhiKind::PerShell(v) if v.len() < shells => {
                Err(Error::DimensionMismatch { expected: shells, found: v.len() })
            }
            _ => Ok(()),
        }
    }

    /// `phi_n` at time `t` and state `x = (X_1, ..., X_N)`; `n = 0` gives 0.
    pub fn eval(&self, n: usize, t: f64, x: &[f64]) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let raw = match &self.kind {
            PhiKind::Constant(c) => return *c,
            PhiKind::PerShell(v) => return v[n - 1],
            PhiKind::Windowed { half_width, func, .. } => {
                let m = *half_width;
                let mut window = [0.0_f64; 17];
                let w: &mut [f64] = if 2 * m < window.len() {
                    &mut window[..2 * m + 1]
                } else {
                    return self.eval_wide(n, t, x);
                };
                fill_window(w, n, m, x);
                func(t, w)
            }
        };
        (raw * self.sup_bound).clamp(-self.sup_bound, self.sup_bound)
    }

    fn eval_wide(&self, n: usize, t: f64, x: &[f64]) -> f64 {
        let PhiKind::Windowed { half_width: m, func, .. } = &self.kind else { unreachable!() };
        let mut w = alloc::vec![0.0; 2 * m + 1];
        fill_window(&mut w, n, *m, x);
        (func(t, &w) * self.sup_bound).clamp(-self.sup_bound, self.sup_bound)
    }
}

fn fill_window(w: &mut [f64], n: usize, m: usize, x: &[f64]) {
    for (slot, j) in w.iter_mut().zip((n as isize - m as isize)..) {
        *slot = if j >= 1 && (j as usize) <= x.len() { x[j as usize - 1] } else { 0.0 };
    }
}
