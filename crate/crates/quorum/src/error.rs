use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] quorum_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad file format: {0}")]
    Format(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{algorithm} disagrees with the oracle on {dataset} (N={n}, T={t}, seed={seed})")]
    Mismatch { algorithm: String, dataset: String, n: usize, t: usize, seed: u64 },
}
