//! Numerical toolkit for Poisson Lie groups and their doubles. The momentum
//! maps of dressing-type actions drive a pointwise model of Poisson induction.

pub mod bialgebra;
pub mod error;
pub mod lie;
pub mod momentum;
pub mod numerics;
pub mod poisson;
pub mod reduction;
pub mod report;
pub mod scenario;
pub mod suites;

pub use error::{Error, Result};
