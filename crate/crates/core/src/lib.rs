//! Quasi-incompressible Navier–Stokes on a doubly periodic grid, with the
//! inertial-force and energy diagnostics that explain its extra force.

pub mod diagnostics;
pub mod harness;
pub mod error;
pub mod fields;
pub mod inertia;
pub mod interp;
pub mod models;
pub mod operators;

pub use error::{Error, Result};
