use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::integrator::StepStats;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Why an integration was abandoned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowUpReason {
    MaxSteps,
    StepUnderflow,
    NonFinite,
}

/// Last valid state of an abandoned integration.
///
/// Supercritical or badly resolved runs are expected to end here, so this is
/// reported rather than treated as a bug.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowUp {
    pub reason: BlowUpReason,
    pub t: f64,
    pub state: Vec<f64>,
    pub dt: f64,
    pub stats: StepStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `2^(beta n)` is not representable as a finite `f64`.
    WavenumberOverflow {
        beta: f64,
        n: usize,
    },
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NonFinite(&'static str),
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// `g_{n+1} < g_n` for a model declared monotone.
    NonMonotoneG {
        n: usize,
    },
    UnknownCallback(String),
    SuspectedBlowUp(Box<BlowUp>),
    PicardNotConverged {
        iterations: usize,
        last_distance: f64,
    },
    PicardNotContracting {
        rate: f64,
    },
    TooFewIterates {
        found: usize,
    },
    /// The `g` table ran out before the requested subsequence level.
    SubsequenceExhausted {
        level_reached: usize,
        requested: usize,
    },
    OutOfRange {
        what: &'static str,
        value: f64,
    },
    CounterexampleOverflow {
        max_level: usize,
    },
    Unverifiable(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::WavenumberOverflow { beta, n } => {
                write!(f, "wavenumber 2^({beta}*{n}) overflows f64")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::NonMonotoneG { n } => write!(f, "g is not non-decreasing at n = {n}"),
            Error::UnknownCallback(name) => write!(f, "unknown phi callback `{name}`"),
            Error::SuspectedBlowUp(b) => {
                write!(f, "suspected blow-up ({:?}) at t = {} after {} accepted steps", b.reason, b.t, b.stats.accepted)
            }
            Error::PicardNotConverged { iterations, last_distance } => write!(
                f,
                "Picard iteration did not converge in {iterations} iterations (last distance {last_distance:e})"
            ),
            Error::PicardNotContracting { rate } => {
                write!(f, "Picard map is not contracting (observed rate {rate})")
            }
            Error::TooFewIterates { found } => {
                write!(f, "need at least 3 iterates, got {found}")
            }
            Error::SubsequenceExhausted { level_reached, requested } => {
                write!(f, "g table exhausted at level {level_reached} of {requested}")
            }
            Error::OutOfRange { what, value } => write!(f, "{what} out of range: {value}"),
            Error::CounterexampleOverflow { max_level } => {
                write!(f, "counterexample construction overflows; max representable level is {max_level}")
            }
            Error::Unverifiable(what) => write!(f, "precondition not verifiable: {what}"),
        }
    }
}

impl core::error::Error for Error {}
