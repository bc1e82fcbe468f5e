//! Verification of symmetry generators for spacetime geometries.

pub mod cartan;
pub mod catalog;
pub mod chart;
pub mod checks;
mod error;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod jet;
pub mod report;
pub mod tensor;

pub use error::{Error, Result};
