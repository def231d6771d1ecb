use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    Window(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The model has no finite local-stability envelope.
    #[error("model is not locally stable: {0}")]
    Stability(String),

    /// Adaptive quadrature ran out of budget; carries the best estimate so far.
    #[error("quadrature did not converge: estimate {estimate:e} with error {error:e} after {evaluations} evaluations")]
    Quadrature {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("series diverges: {0}")]
    Divergence(String),

    /// A jump chain exceeded its level cap.
    #[error("explosion: chain reached level {level}")]
    Explosion { level: u64 },

    #[error("input too large: {0}")]
    TooLarge(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

/// Attaches a context string to the error branch of a result.
pub trait ResultExt<T> {
    fn context(self, context: impl Into<String>) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl Into<String>) -> Result<T> {
        self.map_err(|e| e.context(context))
    }
}
