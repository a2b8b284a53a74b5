//! Finite-alphabet laboratory for the two-user multiple-access wiretap
//! channel: exact information measures, achievable-rate pentagons, binned
//! wiretap codebooks, a slotted key-recycling protocol, and leakage audits
//! that are exact whenever the state space fits in a configured budget.

pub mod channel;
pub mod coding;
pub mod error;
pub mod info;
pub mod leakage;
pub mod protocol;
pub mod regions;

pub use error::{Error, Result};
