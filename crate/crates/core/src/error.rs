use thiserror::Error;

/// Errors produced by the distribution, oracle and validation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("network is not sub-unitary: largest singular value {0}")]
    NotSubunitary(f64),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("Q matrix is ill-conditioned: {0}")]
    Conditioning(String),

    #[error("Q matrix is singular at eta = {0:?}")]
    Singular(Vec<f64>),

    #[error("non-finite value: {0}")]
    Numeric(String),

    #[error("branch tracking failed between eta = {from:?} and {to:?}")]
    Branch { from: Vec<f64>, to: Vec<f64> },

    #[error("reconstructed probability {value:e} at pattern {pattern:?} is below the clamp threshold")]
    NegativeProbability { pattern: Vec<usize>, value: f64 },

    #[error("cutoff policy: {0}")]
    Policy(String),

    #[error("state space too large: {0}")]
    Size(String),

    #[error("photon number mismatch: {input} in, {output} out")]
    PhotonMismatch { input: usize, output: usize },

    #[error("Haar trial {trial} (seed {seed}, stream {trial}) failed: {source}")]
    TrialFailed {
        trial: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
