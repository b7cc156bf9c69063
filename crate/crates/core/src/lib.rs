//! Posterior predictive criticism for Bayesian causal models.
//!
//! A causal model is split into an assignment model `p(a | x, phi)` and an
//! outcome model `p(y(0), y(1) | x, theta)`. Under unconfoundedness the
//! posterior factorizes, so the two pieces are fit ([`inference`]) and
//! criticized ([`ppc`]) separately. Outcome discrepancies depend on
//! counterfactual outcomes; [`discrepancy`] realizes them from observed data
//! with inverse propensity weights, or with imputation / oracle tables for
//! comparison.

pub mod data;
pub mod discrepancy;
pub mod error;
pub mod inference;
pub mod models;
pub mod ppc;
pub mod rng;
pub mod synthgen;

pub use data::{Dataset, PairStructure, PotentialOutcomeTable, ValidationReport};
pub use error::{Error, Result};
pub use rng::{Purpose, SeedStreams};
