//! Coding for asymmetric discrete memoryless channels.
//!
//! Three routes to the capacity of a binary- or finite-input channel whose
//! optimal input law is not uniform:
//!
//! * [`gallager`]: a non-linear mapper from an extended uniform alphabet,
//!   with binary polar codes on the induced synthetic channels;
//! * [`polar`] and [`sparse`]: integrated schemes where one code does the
//!   source shaping and the error protection at once;
//! * [`chaining`]: independent source and channel codes bound together by
//!   storing each block's redundancy in the next block.
//!
//! [`dmc`] and [`ldensity`] hold the channel model and the log-likelihood
//! density identities the schemes rest on. [`harness`] runs reproducible
//! Monte Carlo experiments and backs the `asymcap` CLI.

pub mod chaining;
pub mod dmc;
pub mod error;
pub mod gallager;
pub mod harness;
pub mod info;
pub mod ldensity;
pub mod polar;
pub mod seed;
pub mod sparse;

pub use dmc::{Dmc, InfoReport, InputDist};
pub use error::{Error, Result};
