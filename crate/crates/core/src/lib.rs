//! Exact engine for colored shuffle algebras: products, slope subspaces,
//! constant-term pairings, and refined characters of loop-algebra modules.

pub mod cartan;
pub mod characters;
mod error;
pub mod laurent;
pub mod linalg;
pub mod literal;
pub mod pairing;
pub mod scalars;
pub mod shuffle;
pub mod slopes;

pub use error::{Error, Result};
