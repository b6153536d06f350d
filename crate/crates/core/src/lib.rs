//! Paneitz operator laboratory.

pub mod bounds;
pub mod catalog;
pub mod coefficients;
pub mod discrete;
pub mod error;
pub mod geometry;
