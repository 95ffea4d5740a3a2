#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]
pub mod bath;
pub mod coefficients;
pub mod config;
pub mod error;
pub mod evolve;
pub mod io;
pub mod kernel;
pub mod liouvillian;
pub mod operator;
pub mod propagator;
pub mod quad;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};
