//! Substitution estimators for semiparametric models.
//!
//! A finite-dimensional parameter θ is estimated first, then a nuisance
//! functional is estimated as if θ were known and θ̂ is plugged in, either
//! directly or with sample splitting. The crate carries the estimators, their
//! influence functions, and a Monte Carlo harness that checks linearity and
//! efficiency claims numerically.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod combine;
pub mod distkit;
pub mod error;
pub mod estimators;
pub mod influence;
pub mod linalg;
pub mod mcverify;
pub mod models;
pub mod par;
pub mod pipelines;
pub mod quad;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
