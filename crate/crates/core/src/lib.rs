//! Multiple systems estimation of hidden population sizes with Poisson
//! log-linear models.
//!
//! The crate covers the observed capture-history tables ([`tables`]), model
//! matrices and their diagnostics ([`design`]), maximum likelihood fitting
//! with profile-likelihood intervals ([`poisfit`]), stepwise and exhaustive
//! model selection ([`select`]) and the two-stage Bayesian threshold
//! estimator ([`bayes`]).

pub mod bayes;
pub mod design;
pub mod error;
pub mod poisfit;
pub mod select;
pub mod stats;
pub mod tables;

pub use error::{MseError, Result};
