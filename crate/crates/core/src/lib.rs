//! Numerical verification of regularized integrals of equivariant forms on
//! Hamiltonian torus manifolds.

pub mod cli;
pub mod distrib;
pub mod eqforms;
pub mod error;
pub mod extrap;
pub mod geometry;
pub mod graded;
pub mod integrate;
pub mod jet;
pub mod liealg;
pub mod localize;
pub mod ominimal;
pub mod poly;
pub mod quad;
pub mod report;

pub use error::{Error, Result};
