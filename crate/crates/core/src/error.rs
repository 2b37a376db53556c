use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// A game parameter is malformed.
    #[error("invalid game spec: field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    /// A strategy profile violates the effort bounds of its game.
    #[error("infeasible profile: player {player}: {reason}")]
    Infeasible { player: usize, reason: String },

    /// An index or vector length does not match the game.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The operation is only defined for a game mode other than the one given.
    #[error("operation `{op}` requires {expected} mode")]
    WrongMode {
        op: &'static str,
        expected: &'static str,
    },

    /// Heterogeneous best response with a non-concave payoff.
    #[error(
        "unsupported regime: player {player} has alpha <= lambda * rho \
         ({alpha} <= {lambda} * {rho}); heterogeneous best responses require a concave payoff"
    )]
    UnsupportedRegime {
        player: usize,
        alpha: f64,
        lambda: f64,
        rho: f64,
    },

    /// Argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Floating-point failure (non-finite values, failed consistency checks).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Local training produced a non-finite loss.
    #[error("training diverged (non-finite loss){}", round.map(|r| format!(" in round {r}")).unwrap_or_default())]
    Divergence { round: Option<usize> },

    /// Sweep data does not have the expected shape.
    #[error("data quality: {0}")]
    DataQuality(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from invalid input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec { .. }
                | Error::Infeasible { .. }
                | Error::DimensionMismatch(_)
                | Error::WrongMode { .. }
                | Error::Domain(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
