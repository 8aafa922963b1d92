//! Integrable charged-particle systems of cylindrical type in static magnetic
//! fields: construction, simulation and numerical verification.

// `!(x > 0.0)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auxfields;
pub mod catalog;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fd;
pub mod function;
pub mod geometry;
pub mod jet;
pub mod odes;
pub mod specialfn;
pub mod verify;

pub use error::{Error, Result};
