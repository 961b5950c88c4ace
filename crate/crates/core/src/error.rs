use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generator index {letter} is outside 1..={q}")]
    InvalidGenerator { letter: u32, q: u8 },

    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u8, right: u8 },

    #[error("lamp modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u8, right: u8 },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("{0}")]
    InvalidArgument(String),

    /// The geometric series behind ν̂₂ diverges (Ĝ·p ≥ 1).
    #[error("divergent series: Ghat * p = {0} >= 1")]
    DivergentSeries(f64),

    #[error("state space exceeded the cap of {cap} elements")]
    ResourceLimit { cap: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
