pub mod associate;
pub mod cli;
pub mod dae_model;
pub mod error;
pub mod galerkin_heat;
pub mod linalg_subspace;
pub mod lq_solver;
pub mod ode_geometry;
pub mod schur;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
