//! Qudit Bell and cat states, symbolic entanglement swapping, and a d-level
//! secret-sharing protocol, backed by a dense state-vector oracle.
//!
//! * [`qudit`]: `Z_d` labels, roots of unity, index packing.
//! * [`statevec`]: dense amplitudes, gates, projective measurement.
//! * [`catbell`]: Bell/cat constructors and basis expansions.
//! * [`swapcalc`]: label algebra for Bell measurements on cat registers.
//! * [`protocol`]: secret-sharing rounds, key recovery, collusion analysis.

pub mod catbell;
pub mod error;
pub mod protocol;
pub mod qudit;
pub mod statevec;
pub mod swapcalc;

pub use error::{Error, Result};
pub use qudit::{Dimension, Dit, PhasePower};
pub use statevec::{ParticleId, StateVector};
