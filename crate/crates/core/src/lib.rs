//! Unfolded irregular singular connections on the trivial bundle over the
//! disk, with pole divisor `z^m - eps^m`.
//!
//! The crate covers the algebra of the divisor ring, symmetric factorizations
//! of the local endomorphism and their symplectic pairings, construction of
//! connections from exponent data, first-order horizontal lifts over the dual
//! numbers, and flow/monodromy diagnostics.

pub mod algebra;
pub mod connection;
pub mod demo;
pub mod error;
pub mod flows;
pub mod json;
pub mod orbit;
pub mod random;
pub mod unfolding;

pub use error::{Error, Result};
