#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod csm;
mod error;
pub mod gleason;
pub mod numerics;
pub mod phase_recovery;
pub mod stochastic;

pub use error::{Error, Result};
