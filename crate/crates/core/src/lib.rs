//! Simulators for two accounts of quantum teleportation.
//!
//! * [`teleport`] runs the textbook collapse protocol on an exact 3-qubit
//!   statevector.
//! * [`ensemble`] runs the state-selection model: every EPR pair carries a
//!   hidden shared quantization axis, and only pairs whose axis matches the
//!   input photon's axis (within a tolerance cone) are accepted.
//! * [`chsh`] estimates correlations and the CHSH combination for the
//!   quantum singlet and for both ensemble outcome rules.
//!
//! [`experiment`] ties these together into reproducible, seeded runs.

pub mod bellspace;
pub mod chsh;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod qcore;
pub mod report;
pub mod stream;
pub mod teleport;

pub use error::{Error, Result};
