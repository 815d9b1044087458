//! Exact computation of biholomorphic invariants of real algebraic CR submanifolds.

pub mod error;
pub mod exactalg;
pub mod finitetype;
pub mod cli;
pub mod corpus;
pub mod dsl;
pub mod geometry;
pub mod homogeneous;
pub mod mapcheck;
pub mod nondegen;
pub mod normalform;
pub mod segre;

pub use error::{CrError, Result};
