//! Monte Carlo integration in high dimensions with non-asymptotic,
//! concentration-based confidence intervals.
//!
//! The crate provides reproducible samplers ([`sampling`]), special functions
//! for reference values ([`specfun`]), tail bounds and sample-size planning
//! ([`bounds`]), certified estimators ([`estimators`]), binomial proportion
//! intervals ([`intervals`]), scripted studies ([`experiments`]) and CSV/SVG
//! output ([`report`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod families;
pub mod intervals;
pub mod quad;
pub mod report;
pub mod sampling;
pub mod specfun;

pub use error::{Error, Result};
