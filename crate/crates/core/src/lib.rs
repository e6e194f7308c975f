//! Qubit dynamics in a pair of coupled lossy cavities: single-qubit coherence,
//! non-Markovianity and two-qubit entanglement.

pub mod amplitude;
pub mod error;
pub mod io;
pub mod model;
pub mod nonmarkov;
pub mod single_qubit;
pub mod sweeps;
pub mod two_qubit;

pub use error::{Error, Result};
pub use model::{PureQubitInit, QubitState, SiteParams, TimeGrid, TwoQubitState};
