pub mod analysis;
pub mod channel;
pub mod cli;
pub mod detection;
pub mod dft;
pub mod error;
pub mod geometry;
pub mod rng;
pub mod transceiver;

pub use error::{Error, Result};
