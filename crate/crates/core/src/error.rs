use thiserror::Error;

/// Everything that can go wrong while evaluating a state, a measure, or a
/// numerical search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("trace {trace} deviates from 1 by more than {tolerance:e}")]
    Trace { trace: f64, tolerance: f64 },

    #[error("diagonal entry rho{index}{index}={value} is below -{tolerance:e}")]
    NegativeDiagonal {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("negative radicand {value:e} in {context}")]
    NegativeRadicand { context: &'static str, value: f64 },

    #[error("non-finite result in {op}")]
    Overflow { op: &'static str },

    #[error(
        "quadrature for {quantity} did not converge: extrapolation residual {residual:e} exceeds {limit:e}"
    )]
    NonConvergence {
        quantity: &'static str,
        residual: f64,
        limit: f64,
        /// Raw estimates, one per regulator value.
        estimates: Vec<f64>,
    },

    #[error("no sign change on [{lo}, {hi}]: g(lo)={g_lo:e}, g(hi)={g_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("no asymmetry peak: maximum {peak:e} is below 1e-15")]
    NoPeak { peak: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Short bare-word tag, used in CSV cells and machine-readable messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Trace { .. } => "trace",
            Error::NegativeDiagonal { .. } => "negative_diagonal",
            Error::NegativeRadicand { .. } => "negative_radicand",
            Error::Overflow { .. } => "overflow",
            Error::NonConvergence { .. } => "non_convergence",
            Error::NoSignChange { .. } => "no_sign_change",
            Error::NoPeak { .. } => "no_peak",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Io { .. } => "io",
        }
    }

    /// Numerical failures, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NegativeRadicand { .. }
                | Error::Overflow { .. }
                | Error::NonConvergence { .. }
                | Error::NoSignChange { .. }
                | Error::NoPeak { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
