//! Secrecy and multicast rate regions of the two-user Gaussian MIMO broadcast channel.

pub mod baselines;
pub mod bfgs;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod multicast;
pub mod rates;
pub mod region;
pub mod rotation;
pub mod search;
pub mod split;
pub mod transforms;
pub mod types;
pub mod waterfill;
pub mod wiretap;
pub mod wsr;

pub use error::{Error, Result};
