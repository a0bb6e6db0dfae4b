pub mod config;
pub mod corr;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod inference;
pub mod priors;
pub mod samplers;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;
