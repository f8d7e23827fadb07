//! Generalized dyadic (Katz–Pavlovic type) shell model with a slightly
//! supercritical dissipation `k_n / g_n`.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It is split
//! into four parts:
//!
//! - [`shell_model`]: parameters, states, right-hand sides of the scalar and
//!   the four-component averaged system, sequence-space norms and the
//!   averaged-to-scalar energy reduction.
//! - [`integrator`]: an adaptive exponential (ETD-RK2) integrator for the
//!   truncated systems and a Picard solver for the mild formulation.
//! - [`envelope`]: the a-priori bounding sequence `y`, the special
//!   subsequence `n_k` and the checks built on them.
//! - [`diagnostics`]: energy bookkeeping, fluxes, Tao-type a-priori
//!   quantities, smoothing rates and the non-smoothing counterexample.
//!
//! All arithmetic is `f64`; transcendental functions come from `libm` so
//! results do not depend on the platform's C library.
#![no_std]
#![warn(missing_debug_implementations)]
// NaN must fail the positivity and ordering checks, so `!(a > b)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod envelope;
mod error;
pub mod integrator;
pub mod shell_model;
pub mod sum;

pub use error::{BlowUp, BlowUpReason, Error, Result};
pub use integrator::{integrate, integrate_averaged, StepControl, Trajectory};
pub use shell_model::{AveragedState, GFamily, ModelParams, PhiSpec, ShellState};
