//! Model definition: parameters, states, right-hand sides and norms.

mod norm;
mod params;
pub mod phi;
pub mod reduce;
mod rhs;
mod state;

pub use norm::sobolev_norm;
pub(crate) use norm::weighted_l2;
pub use params::{wavenumber, GFamily, ModelParams};
pub use phi::{PhiKind, PhiSpec};
pub use reduce::{reduce_averaged_to_scalar, ShellBalance};
pub use rhs::{averaged_nonlinear, dyadic_nonlinear, rhs_averaged, rhs_dyadic};
pub(crate) use rhs::{averaged_nonlinear_into, dyadic_nonlinear_into};
pub use state::{AveragedState, ShellState};
