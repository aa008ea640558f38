use thiserror::Error;

/// Errors raised by the discounting kernels, the valuation engine and the
/// experiment runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested confidence level cannot be met at any contracted size.
    #[error("infeasible diversification: {0}")]
    InfeasibleDiversification(String),

    /// The survival kernel reached a zero-valued step before the requested
    /// amount could be funded.
    #[error("capacity exhausted: requested {requested}, fundable {available}")]
    CapacityExhausted { requested: f64, available: f64 },

    #[error("bracket failure: value does not change sign on [{lower}, {upper}] ({value_lower}, {value_upper})")]
    BracketFailure {
        lower: f64,
        upper: f64,
        value_lower: f64,
        value_upper: f64,
    },

    /// Too many paths hit an exhausted capacity during a valuation.
    #[error("capacity exhausted on {fraction} of paths (limit {limit})")]
    ExhaustedPaths { fraction: f64, limit: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),

    /// Failure of one point of an experiment sweep.
    #[error("at {point}: {source}")]
    Sweep { point: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at(self, point: impl Into<String>) -> Self {
        Error::Sweep {
            point: point.into(),
            source: Box::new(self),
        }
    }

    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InfeasibleDiversification(_) => "infeasible-diversification",
            Error::CapacityExhausted { .. } | Error::ExhaustedPaths { .. } => "capacity-exhausted",
            Error::BracketFailure { .. } => "bracket-failure",
            Error::Config { .. } => "config-error",
            Error::Io(_) => "io-error",
            Error::Sweep { source, .. } => source.kind(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
