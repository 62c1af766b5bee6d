//! Truthful mechanisms, exact solvers and auditing tools for capacitated
//! facility location on the real line.

pub mod audit;
pub mod cli;
pub mod error;
pub mod mechanisms;
pub mod model;
pub mod number;
pub mod ratios;
pub mod solvers;

pub use error::{Error, Result};
pub use number::Rational;
