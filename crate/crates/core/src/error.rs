use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Where in a computation an error surfaced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Location {
    /// Pass (residence time) index, counted from 1.
    pub pass: Option<usize>,
    /// Integration step inside the pass, counted from 0.
    pub step: Option<usize>,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.pass, self.step) {
            (Some(p), Some(s)) => write!(f, " (pass {p}, step {s})"),
            (Some(p), None) => write!(f, " (pass {p})"),
            (None, Some(s)) => write!(f, " (step {s})"),
            (None, None) => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {message}{at}")]
    Domain { message: String, at: Location },

    #[error("singular derivative: {message}{at}")]
    Singularity { message: String, at: Location },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate tangent vector at pass {pass}")]
    DegenerateTangent { pass: usize },

    #[error("predicate has the same value ({value}) at both ends of [{lo}, {hi}]")]
    SamePredicate { lo: f64, hi: f64, value: bool },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain {
            message: message.into(),
            at: Location::default(),
        }
    }

    pub(crate) fn singularity(message: impl Into<String>) -> Self {
        Error::Singularity {
            message: message.into(),
            at: Location::default(),
        }
    }

    /// Attach the integration step index to a domain or singularity error.
    pub fn at_step(mut self, step: usize) -> Self {
        if let Error::Domain { at, .. } | Error::Singularity { at, .. } = &mut self {
            at.step = Some(step);
        }
        self
    }

    /// Attach the pass index to a domain or singularity error.
    pub fn at_pass(mut self, pass: usize) -> Self {
        if let Error::Domain { at, .. } | Error::Singularity { at, .. } = &mut self {
            at.pass = Some(pass);
        }
        self
    }

    /// True for failures of the numerical model itself (as opposed to usage
    /// or I/O problems).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Singularity { .. }
                | Error::NoConvergence { .. }
                | Error::DegenerateTangent { .. }
                | Error::InsufficientData { .. }
                | Error::SamePredicate { .. }
        )
    }
}
