//! Local trilinear period constants for GL(2) over Q_p.
//!
//! Every closed-form local value is paired with an independent brute-force
//! finite-sum evaluation built only from group invariance and exact shell sums.

pub mod characters;
pub mod error;
pub mod global;
pub mod haar;
pub mod induced;
pub mod kirillov;
pub mod padic;
pub mod par;
pub mod triple;
pub mod verify;

pub use error::{Error, Result};
