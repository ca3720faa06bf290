pub mod chain;
pub mod disorder;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod linalg;
pub mod propagator;
pub mod protocols;
pub mod verify;

pub use chain::{ChainConfig, SingleExcitationHamiltonian, StateVector, TransferResult};
pub use error::{Error, Result};
