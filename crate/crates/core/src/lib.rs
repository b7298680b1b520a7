//! Exact semantics, testing characteristics and equivalence checking for
//! randomized CCS.

pub mod error;
pub mod rational;
pub mod characteristics;
pub mod corpus;
pub mod distribution;
pub mod equivalence;
pub mod linalg;
pub mod plts;
pub mod syntax;

pub use error::{Error, Result};
pub use rational::Rational;
