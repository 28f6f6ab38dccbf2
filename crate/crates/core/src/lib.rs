//! Numerical nonsmooth analysis on graphs of functions given as expressions:
//! tangent and normal cones, BTC/Clarke/Fréchet/limiting subdifferentials,
//! and certificates for generalized mean-value theorems.

pub mod batch;
pub mod cones;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod mvt;
pub mod sampling;
pub mod subdiff;

pub use error::{Error, Result};
