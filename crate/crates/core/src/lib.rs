//! Second-order perturbative model of a two-level probe crossing a cavity
//! that holds an entangled qubit-cat state, together with brute-force
//! oracles and a sweep driver.

pub mod config;
pub mod error;
pub mod kernels;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod output;
pub mod reduced;
pub mod sweep;

pub use error::{Error, Result};
