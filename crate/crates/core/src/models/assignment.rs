use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{logistic, Constraint, ParamLayout, Prior, LOG_PROB_EPS};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssignmentKind {
    /// `P(a = 1) = logistic(eta)`.
    Logistic,
    /// `P(a = 1) = floor + (1 - floor) * logistic(eta)`, support `[floor, 1]`.
    ShiftedLogistic { floor: f64 },
}

/// Bernoulli assignment model on a linear predictor of selected covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentFamily {
    pub kind: AssignmentKind,
    /// Covariate column indices entering the linear predictor.
    pub columns: Vec<usize>,
    pub intercept: bool,
    /// Independent prior on every coefficient.
    pub prior: Prior,
}

impl AssignmentFamily {
    pub fn logistic(columns: Vec<usize>, intercept: bool) -> Self {
        Self {
            kind: AssignmentKind::Logistic,
            columns,
            intercept,
            prior: Prior::STANDARD_NORMAL,
        }
    }

    pub fn shifted_logistic(columns: Vec<usize>, intercept: bool, floor: f64) -> Self {
        Self {
            kind: AssignmentKind::ShiftedLogistic { floor },
            columns,
            intercept,
            prior: Prior::STANDARD_NORMAL,
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.len() + usize::from(self.intercept)
    }

    pub fn layout(&self, data: &Dataset) -> ParamLayout {
        let mut layout = ParamLayout::default();
        if self.intercept {
            layout.push("phi[intercept]", Constraint::Real);
        }
        for &c in &self.columns {
            let name = data
                .covariates
                .names()
                .get(c)
                .cloned()
                .unwrap_or_else(|| format!("col{c}"));
            layout.push(format!("phi[{name}]"), Constraint::Real);
        }
        layout
    }

    /// Checks that design columns exist and the shift floor is a probability.
    pub fn check_design(&self, data: &Dataset) -> Result<()> {
        let d = data.covariates.ncols();
        if let Some(&c) = self.columns.iter().find(|&&c| c >= d) {
            return Err(Error::Config(format!(
                "assignment design column {c} out of range (dataset has {d} covariates)"
            )));
        }
        if let AssignmentKind::ShiftedLogistic { floor } = self.kind {
            if !(0.0..1.0).contains(&floor) {
                return Err(Error::Config(format!(
                    "shifted logistic floor must lie in [0, 1), got {floor}"
                )));
            }
        }
        Ok(())
    }

    fn check_phi(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.dim() {
            return Err(Error::Layout {
                expected: self.dim(),
                got: phi.len(),
            });
        }
        Ok(())
    }

    pub fn linear_predictor(&self, phi: &[f64], data: &Dataset, i: usize) -> f64 {
        let row = data.covariates.row(i);
        let (mut eta, coefs) = if self.intercept {
            (phi[0], &phi[1..])
        } else {
            (0.0, phi)
        };
        for (&c, &b) in self.columns.iter().zip(coefs) {
            eta += b * row[c];
        }
        eta
    }

    /// Unclamped `P(a_i = 1 | x_i, phi)`.
    pub fn prob_treated(&self, phi: &[f64], data: &Dataset, i: usize) -> f64 {
        let p = logistic(self.linear_predictor(phi, data, i));
        match self.kind {
            AssignmentKind::Logistic => p,
            AssignmentKind::ShiftedLogistic { floor } => floor + (1.0 - floor) * p,
        }
    }

    /// `sum_i log p(a_i | x_i, phi)` with probabilities clamped away from 0 and 1.
    pub fn loglik(&self, phi: &[f64], data: &Dataset) -> Result<f64> {
        self.check_phi(phi)?;
        Ok(self.loglik_unchecked(phi, data))
    }

    pub(crate) fn loglik_unchecked(&self, phi: &[f64], data: &Dataset) -> f64 {
        (0..data.n)
            .map(|i| {
                let p = self
                    .prob_treated(phi, data, i)
                    .clamp(LOG_PROB_EPS, 1.0 - LOG_PROB_EPS);
                if data.treated(i) {
                    p.ln()
                } else {
                    (1.0 - p).ln()
                }
            })
            .sum()
    }

    pub fn prior_logdensity(&self, phi: &[f64]) -> Result<f64> {
        self.check_phi(phi)?;
        Ok(phi.iter().map(|&v| self.prior.ln_pdf(v)).sum())
    }

    /// Independent Bernoulli draws of the assignment vector.
    pub fn forward<R: Rng + ?Sized>(&self, phi: &[f64], data: &Dataset, rng: &mut R) -> Result<Vec<u8>> {
        self.check_phi(phi)?;
        Ok((0..data.n)
            .map(|i| {
                let p = self.prob_treated(phi, data, i);
                u8::from(rng.random::<f64>() < p)
            })
            .collect())
    }
}
