use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("threshold {t} is out of range for {n} inputs")]
    InvalidThreshold { t: usize, n: usize },
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("positions must be strictly increasing (saw {prev} then {next})")]
    UnsortedPositions { prev: u32, next: u32 },
    #[error("position {pos} is outside a bitmap of length {len}")]
    PositionOutOfRange { pos: u32, len: u32 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("needs {needed} bytes, exceeding the budget of {budget} bytes")]
    ResourceLimit { needed: u64, budget: u64 },
    #[error("circuit needs {needed} product terms, above the cap of {cap}")]
    CircuitTooLarge { needed: u64, cap: u64 },
    #[error("no tabulated circuit covers N={n}, T={t}")]
    NoCoveringCircuit { n: usize, t: usize },
}
