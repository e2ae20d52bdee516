//! Reconstruction of sparse multicomponent polynomial-phase signals from a
//! random subset of their samples.

pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod lpft;
pub mod noise;
pub mod pft;
pub mod recovery;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
pub use signal::C64;
