use thiserror::Error;

use crate::statevec::ParticleId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} outside supported range 2..=16")]
    Dimension(u32),

    #[error("digit {digit} out of range for d = {dim}")]
    DigitOutOfRange { digit: u32, dim: u32 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("particle {0} is not part of this state")]
    UnknownParticle(ParticleId),

    #[error("particle {0} appears more than once")]
    DuplicateParticle(ParticleId),

    #[error("control and target are the same particle {0}")]
    ControlIsTarget(ParticleId),

    #[error("state would need {amplitudes} amplitudes, above the oracle cap of {cap}")]
    OracleCap { amplitudes: u128, cap: u128 },

    #[error("a cat state needs at least 2 particles, got {0}")]
    TooFewParticles(usize),

    #[error("empty particle subset")]
    EmptySubset,

    #[error("reference state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("unsupported swap configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("register has no fragments")]
    EmptyRegister,

    #[error("invalid protocol configuration: {0}")]
    InvalidConfig(String),

    #[error("missing recovery share from party {0}")]
    InsufficientShares(usize),

    #[error("party index {0} has no view of this kind")]
    InvalidParty(usize),
}
