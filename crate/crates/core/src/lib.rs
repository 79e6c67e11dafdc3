//! Quantum error correction and entanglement certificates for noisy channels.

pub mod channel;
pub mod correct;
pub mod error;
pub mod families;
pub mod linalg;
pub mod measures;
pub mod optimize;
pub mod random;
pub mod tomo;

pub use error::{Error, Result};
