//! Analytical models for evaluating memory disaggregation in HPC systems.

pub mod appmodel;
pub mod classify;
pub mod design_space;
pub mod error;
pub mod figure;
pub mod golden;
pub mod roofline;
pub mod techdb;
pub mod topology;
pub mod units;

pub use error::{Error, Result};
