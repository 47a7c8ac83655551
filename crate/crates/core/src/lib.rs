//! Finite-dimensional quantum relative entropy with numerically certified
//! proofs of the data-processing inequality.

pub mod channels;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod limits;
pub mod linalg;
pub mod petz;
pub mod rng;
pub mod states;
pub mod tol;
pub mod uhlmann;

pub use error::{Error, Result};
