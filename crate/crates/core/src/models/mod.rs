//! Assignment and outcome model families.
//!
//! Every family exposes a [`ParamLayout`] (names, positivity constraints and
//! priors), a log-likelihood, a prior log-density and a forward sampler.

mod assignment;
mod dist;
mod outcome;

pub use assignment::{AssignmentFamily, AssignmentKind};
pub use dist::ArmDist;
pub use outcome::{sample_table as outcome_sample_table, OutcomeFamily, OutcomeKind, PairedVariant};

use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Probabilities entering a log are clamped to `[EPS, 1 - EPS]`.
pub const LOG_PROB_EPS: f64 = 1e-12;

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Prior {
    Normal { mean: f64, sd: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl Prior {
    pub const STANDARD_NORMAL: Prior = Prior::Normal { mean: 0.0, sd: 1.0 };
    pub const UNIT_GAMMA: Prior = Prior::Gamma {
        shape: 1.0,
        rate: 1.0,
    };

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Prior::Normal { mean, sd } => normal_ln_pdf(x, mean, sd * sd),
            Prior::Gamma { shape, rate } => gamma_ln_pdf(x, shape, rate),
        }
    }
}

pub fn normal_ln_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = x - mean;
    -0.5 * (2.0 * PI * var).ln() - 0.5 * z * z / var
}

pub fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Real,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub constraint: Constraint,
}

/// Ordered parameter names and constraints for one family.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamLayout {
    specs: Vec<ParamSpec>,
}

impl ParamLayout {
    pub fn push(&mut self, name: impl Into<String>, constraint: Constraint) {
        self.specs.push(ParamSpec {
            name: name.into(),
            constraint,
        });
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    pub fn names(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    pub fn is_positive(&self, j: usize) -> bool {
        self.specs[j].constraint == Constraint::Positive
    }

    /// Length and support check.
    pub fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Layout {
                expected: self.len(),
                got: values.len(),
            });
        }
        for (spec, &v) in self.specs.iter().zip(values) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: spec.name.clone(),
                    value: v,
                    reason: "not finite",
                });
            }
            if spec.constraint == Constraint::Positive && v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: spec.name.clone(),
                    value: v,
                    reason: "must be strictly positive",
                });
            }
        }
        Ok(())
    }

    /// Positive entries go to the log scale.
    pub fn to_unconstrained(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(j, &v)| if self.is_positive(j) { v.ln() } else { v })
            .collect()
    }

    pub fn from_unconstrained(&self, z: &[f64], out: &mut [f64]) {
        for (j, (&zj, o)) in z.iter().zip(out.iter_mut()).enumerate() {
            *o = if self.is_positive(j) { zj.exp() } else { zj };
        }
    }

    /// `log |d values / d z|` for the log transform of positive entries.
    pub fn log_jacobian(&self, z: &[f64]) -> f64 {
        z.iter()
            .enumerate()
            .filter(|(j, _)| self.is_positive(*j))
            .map(|(_, &zj)| zj)
            .sum()
    }

    /// Coefficients at 0, positive entries at 1.
    pub fn initial_values(&self) -> Vec<f64> {
        self.specs
            .iter()
            .map(|s| match s.constraint {
                Constraint::Real => 0.0,
                Constraint::Positive => 1.0,
            })
            .collect()
    }
}

/// A flat parameter vector (one posterior draw, or generator truth).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn checked(layout: &ParamLayout, values: Vec<f64>) -> Result<Self> {
        layout.check(&values)?;
        Ok(Self(values))
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}
