use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The forward state became non-finite at this knot.
    IntegrationDiverged { knot: usize },
    /// The backward costate became non-finite at this knot.
    AdjointDiverged { knot: usize },
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A trajectory was evaluated against a system with a different horizon.
    GridMismatch { grid_horizon: f64, system_horizon: f64 },
    /// A decision vector entry is outside the system's admissible domain.
    Decision { index: usize, value: f64 },
    /// The standard derivative was requested for a system that is only
    /// defined at binary decisions.
    NotRelaxable,
    Constraint(String),
    Infeasible,
    /// The relaxed LP returned a fractional vertex, so the constraint matrix
    /// was not totally unimodular after all.
    TuViolation { index: usize, value: f64 },
    EnumerationRefused { m: usize, limit: usize },
    InvalidParams(String),
    Step { step: usize, source: Box<Error> },
}

impl Error {
    /// Wraps an error with the 1-based receding-horizon step it occurred in.
    pub fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping step wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            e => e,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IntegrationDiverged { knot } => {
                write!(f, "integration diverged at knot {knot}")
            }
            Error::AdjointDiverged { knot } => write!(f, "adjoint diverged at knot {knot}"),
            Error::Dimension {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch for {what}: expected {expected}, found {found}"),
            Error::GridMismatch {
                grid_horizon,
                system_horizon,
            } => write!(
                f,
                "time grid horizon {grid_horizon} does not match system horizon {system_horizon}"
            ),
            Error::Decision { index, value } => {
                write!(f, "decision entry {index} = {value} is outside the admissible domain")
            }
            Error::NotRelaxable => f.write_str(
                "system is only defined at binary decisions; use the nonstandard derivative",
            ),
            Error::Constraint(msg) => write!(f, "invalid constraint: {msg}"),
            Error::Infeasible => f.write_str("no feasible binary decision"),
            Error::TuViolation { index, value } => write!(
                f,
                "LP vertex entry {index} = {value} is fractional; constraint matrix is not totally unimodular"
            ),
            Error::EnumerationRefused { m, limit } => {
                write!(f, "refusing to enumerate 2^{m} decisions (limit 2^{limit})")
            }
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::Step { step, source } => write!(f, "step {step}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Step { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
