use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// A parameter violates the invariants of the type it configures.
    InvalidInput,
    /// The inputs are well formed but describe a physically unusable situation.
    Physics,
    /// A numerical procedure failed to produce an answer.
    Solver,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    UnchargedParticle,
    StepTooLarge {
        dt: f64,
        max_dt: f64,
    },
    NotConverged {
        what: &'static str,
        steps: usize,
        change: f64,
    },
    StableOverRamp {
        omega_end: f64,
    },
    InsufficientSpan {
        periods: f64,
        required: f64,
    },
    NoLibration,
    GridTooNarrow {
        uncovered: Vec<f64>,
    },
    NoResonance,
    NoDips,
    TooFewPeaks {
        found: usize,
        required: usize,
    },
    NoConsistentOrientation {
        residual_hz: f64,
        threshold_hz: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::StepTooLarge { .. }
            | Error::GridTooNarrow { .. }
            | Error::InsufficientSpan { .. } => ErrorKind::InvalidInput,
            Error::UnchargedParticle | Error::StableOverRamp { .. } => ErrorKind::Physics,
            Error::NotConverged { .. }
            | Error::NoLibration
            | Error::NoResonance
            | Error::NoDips
            | Error::TooFewPeaks { .. }
            | Error::NoConsistentOrientation { .. } => ErrorKind::Solver,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => write!(f, "invalid `{name}`: {reason}"),
            Error::UnchargedParticle => f.write_str("uncharged particle is untrapped"),
            Error::StepTooLarge { dt, max_dt } => {
                write!(f, "time step {dt:e} s exceeds the limit {max_dt:e} s (1/200 of a drive period)")
            }
            Error::NotConverged { what, steps, change } => {
                write!(f, "{what} did not converge after {steps} steps (last relative change {change:e})")
            }
            Error::StableOverRamp { omega_end } => write!(
                f,
                "stable over full ramp (reached {:.3} Hz without escape)",
                omega_end / (2.0 * core::f64::consts::PI)
            ),
            Error::InsufficientSpan { periods, required } => write!(
                f,
                "trajectory spans {periods:.2} libration periods, at least {required} required"
            ),
            Error::NoLibration => f.write_str("no secular libration detected"),
            Error::GridTooNarrow { uncovered } => {
                f.write_str("frequency grid does not cover dips (Hz):")?;
                for d in uncovered {
                    write!(f, " {d:.6e}")?;
                }
                Ok(())
            }
            Error::NoResonance => f.write_str("no resonance detected"),
            Error::NoDips => f.write_str("no dips above depth threshold"),
            Error::TooFewPeaks { found, required } => {
                write!(f, "found {found} dips, at least {required} required")
            }
            Error::NoConsistentOrientation { residual_hz, threshold_hz } => write!(
                f,
                "no consistent orientation (best residual {residual_hz:.4e} Hz > threshold {threshold_hz:.4e} Hz)"
            ),
        }
    }
}

impl core::error::Error for Error {}
