//! Discrepancy functions, posterior-marginal propensities and the three
//! realization modes for discrepancies that depend on both potential
//! outcomes.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PotentialOutcomeTable};
use crate::error::{Error, Result};
use crate::inference::Draws;
use crate::models::{ArmDist, AssignmentFamily, OutcomeFamily};

/// Propensities are clamped to `[PROPENSITY_CLAMP, 1 - PROPENSITY_CLAMP]`.
pub const PROPENSITY_CLAMP: f64 = 1e-6;
/// Inverse weights above this trigger an extreme-weight warning.
pub const EXTREME_WEIGHT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyKind {
    AssignmentLogScore,
    OutcomeLogLik,
    AteMse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizationMode {
    Ipw,
    Imputation,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscrepancySpec {
    pub kind: DiscrepancyKind,
    /// Ignored by the assignment log-score.
    pub mode: RealizationMode,
    /// Hajek weights instead of Horvitz-Thompson (IPW only).
    #[serde(default)]
    pub self_normalized: bool,
}

impl DiscrepancySpec {
    pub fn assignment() -> Self {
        Self {
            kind: DiscrepancyKind::AssignmentLogScore,
            mode: RealizationMode::Ipw,
            self_normalized: false,
        }
    }

    pub fn outcome(kind: DiscrepancyKind, mode: RealizationMode) -> Self {
        Self {
            kind,
            mode,
            self_normalized: false,
        }
    }

    /// Short label such as `ate_mse/ipw`.
    pub fn label(&self) -> String {
        let kind = match self.kind {
            DiscrepancyKind::AssignmentLogScore => return "assignment_log_score".into(),
            DiscrepancyKind::OutcomeLogLik => "outcome_log_lik",
            DiscrepancyKind::AteMse => "ate_mse",
        };
        let mode = match (self.mode, self.self_normalized) {
            (RealizationMode::Ipw, true) => "ipw_hajek",
            (RealizationMode::Ipw, false) => "ipw",
            (RealizationMode::Imputation, _) => "imputation",
            (RealizationMode::Oracle, _) => "oracle",
        };
        format!("{kind}/{mode}")
    }
}

impl std::str::FromStr for DiscrepancySpec {
    type Err = Error;

    /// Inverse of [`DiscrepancySpec::label`].
    fn from_str(label: &str) -> Result<Self> {
        if label == "assignment_log_score" {
            return Ok(Self::assignment());
        }
        let bad = || Error::Config(format!("unknown discrepancy `{label}`"));
        let (kind, mode) = label.split_once('/').ok_or_else(bad)?;
        let kind = match kind {
            "outcome_log_lik" => DiscrepancyKind::OutcomeLogLik,
            "ate_mse" => DiscrepancyKind::AteMse,
            _ => return Err(bad()),
        };
        let (mode, self_normalized) = match mode {
            "ipw" => (RealizationMode::Ipw, false),
            "ipw_hajek" => (RealizationMode::Ipw, true),
            "imputation" => (RealizationMode::Imputation, false),
            "oracle" => (RealizationMode::Oracle, false),
            _ => return Err(bad()),
        };
        Ok(Self {
            kind,
            mode,
            self_normalized,
        })
    }
}

/// Posterior-marginal treatment probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityVector {
    pi1: Vec<f64>,
    pi_of_realized: Vec<f64>,
}

impl PropensityVector {
    /// Clamps `pi1` and evaluates it at the realized assignments.
    pub fn new(pi1: Vec<f64>, assignments: &[u8]) -> Result<Self> {
        if pi1.len() != assignments.len() {
            return Err(Error::LengthMismatch {
                what: "propensities".into(),
                got: pi1.len(),
                expected: assignments.len(),
            });
        }
        let pi1: Vec<f64> = pi1
            .into_iter()
            .map(|p| p.clamp(PROPENSITY_CLAMP, 1.0 - PROPENSITY_CLAMP))
            .collect();
        let pi_of_realized = pi1
            .iter()
            .zip(assignments)
            .map(|(&p, &a)| if a == 1 { p } else { 1.0 - p })
            .collect();
        Ok(Self { pi1, pi_of_realized })
    }

    /// A design with a known constant treatment probability.
    pub fn known(p: f64, assignments: &[u8]) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!("known propensity must lie in (0, 1), got {p}")));
        }
        Self::new(vec![p; assignments.len()], assignments)
    }

    pub fn pi1(&self) -> &[f64] {
        &self.pi1
    }

    pub fn pi_of_realized(&self) -> &[f64] {
        &self.pi_of_realized
    }

    pub fn len(&self) -> usize {
        self.pi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi1.is_empty()
    }

    pub fn max_weight(&self) -> f64 {
        self.pi_of_realized.iter().map(|p| 1.0 / p).fold(0.0, f64::max)
    }

    /// Warning text when some inverse weight exceeds [`EXTREME_WEIGHT`].
    pub fn weight_warning(&self) -> Option<String> {
        let extreme = self
            .pi_of_realized
            .iter()
            .filter(|&&p| 1.0 / p > EXTREME_WEIGHT)
            .count();
        (extreme > 0).then(|| {
            format!(
                "{extreme} unit(s) have inverse propensity weight above {EXTREME_WEIGHT} (max {:.1})",
                self.max_weight()
            )
        })
    }
}

/// `pi1_i = (1/S) sum_s p(a_i = 1 | x_i, phi_s)`.
pub fn propensities(phi_draws: &Draws, family: &AssignmentFamily, data: &Dataset) -> Result<PropensityVector> {
    if phi_draws.is_empty() {
        return Err(Error::Discrepancy("propensities need at least one draw".into()));
    }
    family.check_design(data)?;
    let layout = family.layout(data);
    phi_draws.check_layout(&layout)?;
    let s = phi_draws.len() as f64;
    let mut pi1 = vec![0.0; data.n];
    for phi in phi_draws.rows() {
        for (i, p) in pi1.iter_mut().enumerate() {
            *p += family.prob_treated(phi, data, i);
        }
    }
    pi1.iter_mut().for_each(|p| *p /= s);
    PropensityVector::new(pi1, &data.assignments)
}

/// `(1/n) sum_i log pi_i(a_i)` for an assignment vector under fixed
/// (already clamped) marginal treatment probabilities.
pub fn log_score(assignments: &[u8], pi1: &[f64]) -> Result<f64> {
    if assignments.len() != pi1.len() || assignments.is_empty() {
        return Err(Error::LengthMismatch {
            what: "assignments".into(),
            got: assignments.len(),
            expected: pi1.len(),
        });
    }
    let total: f64 = assignments
        .iter()
        .zip(pi1)
        .map(|(&a, &p)| {
            let p = p.clamp(PROPENSITY_CLAMP, 1.0 - PROPENSITY_CLAMP);
            if a == 1 { p.ln() } else { (1.0 - p).ln() }
        })
        .sum();
    Ok(total / assignments.len() as f64)
}

/// Average marginal log-likelihood of the assignments `a`.
pub fn assignment_log_score(
    assignments: &[u8],
    data: &Dataset,
    phi_draws: &Draws,
    family: &AssignmentFamily,
) -> Result<f64> {
    let p = propensities(phi_draws, family, data)?;
    log_score(assignments, p.pi1())
}

fn check_table(table: &PotentialOutcomeTable, data: &Dataset) -> Result<()> {
    if table.len() != data.n {
        return Err(Error::LengthMismatch {
            what: "potential outcome table".into(),
            got: table.len(),
            expected: data.n,
        });
    }
    Ok(())
}

/// `(1/n) sum_i [log p(y_i(0)) + log p(y_i(1))]`.
pub fn outcome_loglik_t(
    family: &OutcomeFamily,
    theta: &[f64],
    table: &PotentialOutcomeTable,
    data: &Dataset,
) -> Result<f64> {
    check_table(table, data)?;
    let l0 = family.loglik_arm(theta, data, 0, table.y0())?;
    let l1 = family.loglik_arm(theta, data, 1, table.y1())?;
    Ok((l0 + l1) / data.n as f64)
}

/// `(1/n) sum_i [(d_i - cate_i)^2 - d_i^2]` with `d_i = y_i(1) - y_i(0)`.
pub fn ate_mse_t(
    family: &OutcomeFamily,
    theta: &[f64],
    table: &PotentialOutcomeTable,
    data: &Dataset,
) -> Result<f64> {
    check_table(table, data)?;
    let cate = family.conditional_cate(theta, data)?;
    Ok(ate_mse_from_cate(&cate, table))
}

pub fn ate_mse_from_cate(cate: &[f64], table: &PotentialOutcomeTable) -> f64 {
    let total: f64 = cate
        .iter()
        .zip(table.y0().iter().zip(table.y1()))
        .map(|(&c, (&y0, &y1))| {
            let d = y1 - y0;
            (d - c).powi(2) - d * d
        })
        .sum();
    total / cate.len() as f64
}

/// Per-unit polynomial in the two potential outcomes,
/// `sum_k coef_k[i] * y_i(0)^p0_k * y_i(1)^p1_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<(u32, u32), Vec<f64>>,
}

impl Polynomial {
    pub fn constant(values: Vec<f64>) -> Self {
        let n = values.len();
        Self {
            n,
            terms: BTreeMap::from([((0, 0), values)]),
        }
    }

    pub fn y0(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::from([((1, 0), vec![1.0; n])]),
        }
    }

    pub fn y1(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::from([((0, 1), vec![1.0; n])]),
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.n, other.n, "polynomials over different unit counts");
        let mut terms = self.terms.clone();
        for (key, coef) in &other.terms {
            let entry = terms.entry(*key).or_insert_with(|| vec![0.0; self.n]);
            entry.iter_mut().zip(coef).for_each(|(e, c)| *e += sign * c);
        }
        Self { n: self.n, terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "polynomials over different unit counts");
        let mut terms: BTreeMap<(u32, u32), Vec<f64>> = BTreeMap::new();
        for (&(a0, a1), ca) in &self.terms {
            for (&(b0, b1), cb) in &other.terms {
                let entry = terms.entry((a0 + b0, a1 + b1)).or_insert_with(|| vec![0.0; self.n]);
                for i in 0..self.n {
                    entry[i] += ca[i] * cb[i];
                }
            }
        }
        Self { n: self.n, terms }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn eval(&self, i: usize, y0: f64, y1: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(p0, p1), c)| c[i] * y0.powi(p0 as i32) * y1.powi(p1 as i32))
            .sum()
    }
}

type ArmFn = Box<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// A sum-form discrepancy
/// `scale * sum_i [c_i + f0(i, y_i(0)) + f1(i, y_i(1))]`.
pub struct TermFunctions {
    constant: Vec<f64>,
    arms: [ArmFn; 2],
    scale: f64,
}

impl std::fmt::Debug for TermFunctions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TermFunctions")
            .field("n", &self.constant.len())
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

impl TermFunctions {
    pub fn new<F0, F1>(constant: Vec<f64>, f0: F0, f1: F1, scale: f64) -> Self
    where
        F0: Fn(usize, f64) -> f64 + Send + Sync + 'static,
        F1: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            constant,
            arms: [Box::new(f0), Box::new(f1)],
            scale,
        }
    }

    /// Splits a polynomial into single-arm parts. Monomials that multiply
    /// `y(0)` by `y(1)` cannot be identified from one observed arm per unit
    /// and are rejected.
    pub fn from_polynomial(poly: &Polynomial, scale: f64) -> Result<Self> {
        let mut constant = vec![0.0; poly.n];
        let mut arm0 = Vec::new();
        let mut arm1 = Vec::new();
        for (&(p0, p1), coef) in &poly.terms {
            let nonzero = coef.iter().any(|&c| c.abs() > 1e-12 * (1.0 + c.abs()));
            match (p0, p1) {
                (0, 0) => constant.iter_mut().zip(coef).for_each(|(k, c)| *k += c),
                (p, 0) => arm0.push((p as i32, coef.clone())),
                (0, p) => arm1.push((p as i32, coef.clone())),
                _ if nonzero => {
                    return Err(Error::Discrepancy(format!(
                        "term y(0)^{p0} * y(1)^{p1} mixes both potential outcomes of a unit; \
                         only one arm is observed per unit, so it cannot be reweighted"
                    )))
                }
                _ => {}
            }
        }
        let eval = |parts: Vec<(i32, Vec<f64>)>| {
            move |i: usize, y: f64| parts.iter().map(|(p, c)| c[i] * y.powi(*p)).sum::<f64>()
        };
        Ok(Self::new(constant, eval(arm0), eval(arm1), scale))
    }

    /// Terms of the average potential-outcome log-likelihood.
    pub fn outcome_loglik(family: &OutcomeFamily, theta: &[f64], data: &Dataset) -> Result<Self> {
        let dists = family.arm_dists(theta, data)?;
        Ok(Self::from_dists(dists, data.n))
    }

    pub(crate) fn from_dists(dists: Vec<[ArmDist; 2]>, n: usize) -> Self {
        let dists = std::sync::Arc::new(dists);
        let d1 = dists.clone();
        Self::new(
            vec![0.0; n],
            move |i, y| dists[i][0].ln_pdf(y),
            move |i, y| d1[i][1].ln_pdf(y),
            1.0 / n as f64,
        )
    }

    /// Terms of the adjusted ATE mean squared error.
    pub fn ate_mse(family: &OutcomeFamily, theta: &[f64], data: &Dataset) -> Result<Self> {
        Self::ate_mse_from_cate(family.conditional_cate(theta, data)?)
    }

    pub fn ate_mse_from_cate(cate: Vec<f64>) -> Result<Self> {
        let n = cate.len();
        let diff = Polynomial::y1(n).sub(&Polynomial::y0(n));
        let poly = diff.sub(&Polynomial::constant(cate)).square().sub(&diff.square());
        Self::from_polynomial(&poly, 1.0 / n as f64)
    }

    pub fn len(&self) -> usize {
        self.constant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constant.is_empty()
    }

    pub fn arm_term(&self, arm: u8, i: usize, y: f64) -> f64 {
        (self.arms[arm as usize])(i, y)
    }

    /// Full-information value on a complete table (oracle realization).
    pub fn full(&self, table: &PotentialOutcomeTable) -> Result<f64> {
        if table.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "potential outcome table".into(),
                got: table.len(),
                expected: self.len(),
            });
        }
        let total: f64 = (0..self.len())
            .map(|i| self.constant[i] + self.arm_term(0, i, table.y0()[i]) + self.arm_term(1, i, table.y1()[i]))
            .sum();
        Ok(self.scale * total)
    }
}

/// Inverse-propensity realization: each unit contributes through its
/// observed arm only, weighted by `1 / pi_i(a_i)`.
pub fn realize_ipw(
    terms: &TermFunctions,
    data: &Dataset,
    propensities: &PropensityVector,
    self_normalized: bool,
) -> Result<f64> {
    if terms.len() != data.n || propensities.len() != data.n {
        return Err(Error::LengthMismatch {
            what: "ipw inputs".into(),
            got: terms.len().min(propensities.len()),
            expected: data.n,
        });
    }
    let mut arm_sum = [0.0f64; 2];
    let mut weight_sum = [0.0f64; 2];
    for i in 0..data.n {
        let a = data.assignments[i];
        let w = 1.0 / propensities.pi_of_realized()[i];
        arm_sum[a as usize] += w * terms.arm_term(a, i, data.observed_outcomes[i]);
        weight_sum[a as usize] += w;
    }
    let mut total: f64 = terms.constant.iter().sum();
    for arm in 0..2 {
        total += if self_normalized {
            if weight_sum[arm] > 0.0 {
                arm_sum[arm] * data.n as f64 / weight_sum[arm]
            } else {
                0.0
            }
        } else {
            arm_sum[arm]
        };
    }
    Ok(terms.scale * total)
}

/// Table with observed arms from the data and missing arms drawn from
/// the outcome model.
pub fn impute_table<R: Rng + ?Sized>(
    family: &OutcomeFamily,
    theta: &[f64],
    data: &Dataset,
    rng: &mut R,
) -> Result<PotentialOutcomeTable> {
    let dists = family.arm_dists(theta, data)?;
    Ok(impute_from_dists(&dists, data, rng))
}

pub(crate) fn impute_from_dists<R: Rng + ?Sized>(
    dists: &[[ArmDist; 2]],
    data: &Dataset,
    rng: &mut R,
) -> PotentialOutcomeTable {
    let mut y0 = Vec::with_capacity(data.n);
    let mut y1 = Vec::with_capacity(data.n);
    for (i, d) in dists.iter().enumerate() {
        let y = data.observed_outcomes[i];
        if data.assignments[i] == 1 {
            y0.push(d[0].sample(rng));
            y1.push(y);
        } else {
            y0.push(y);
            y1.push(d[1].sample(rng));
        }
    }
    PotentialOutcomeTable::new(y0, y1).expect("finite imputations")
}

/// Imputation realization: missing-arm outcomes drawn from the model.
pub fn realize_impute<R: Rng + ?Sized>(
    terms: &TermFunctions,
    family: &OutcomeFamily,
    theta: &[f64],
    data: &Dataset,
    rng: &mut R,
) -> Result<f64> {
    terms.full(&impute_table(family, theta, data, rng)?)
}

/// Oracle realization on the true potential-outcome table.
pub fn realize_oracle(terms: &TermFunctions, table: &PotentialOutcomeTable) -> Result<f64> {
    terms.full(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Covariates;
    use crate::models::logistic;
    use std::f64::consts::PI;

    fn data(a: Vec<u8>, y: Vec<f64>) -> Dataset {
        let n = a.len();
        let x = Covariates::new(vec!["x1".into()], n, vec![1.0; n]).unwrap();
        Dataset::new(x, a, y)
    }

    #[test]
    fn spec_labels_round_trip() {
        for label in [
            "assignment_log_score",
            "outcome_log_lik/ipw",
            "outcome_log_lik/oracle",
            "ate_mse/ipw_hajek",
            "ate_mse/imputation",
        ] {
            let spec: DiscrepancySpec = label.parse().unwrap();
            assert_eq!(spec.label(), label);
        }
        assert!("ate_mse".parse::<DiscrepancySpec>().is_err());
        assert!("ate_mse/bogus".parse::<DiscrepancySpec>().is_err());
    }

    #[test]
    fn propensity_examples() {
        let d = data(vec![1, 0], vec![0.0, 0.0]);
        let fam = AssignmentFamily::logistic(vec![0], false);
        let zero = Draws::new(vec!["phi[x1]".into()], vec![vec![0.0], vec![0.0]]).unwrap();
        let p = propensities(&zero, &fam, &d).unwrap();
        assert_eq!(p.pi1(), &[0.5, 0.5]);

        let two = Draws::new(vec!["phi[x1]".into()], vec![vec![0.0], vec![2.0]]).unwrap();
        let p = propensities(&two, &fam, &d).unwrap();
        let oracle = (0.5 + logistic(2.0)) / 2.0;
        assert!((p.pi1()[0] - oracle).abs() < 1e-12);
        assert!((oracle - 0.69034).abs() < 1e-4);
        assert_eq!(p.pi_of_realized()[1], 1.0 - p.pi1()[1]);

        let empty = Draws::new(vec!["phi[x1]".into()], vec![]).unwrap();
        assert!(propensities(&empty, &fam, &d).is_err());
    }

    #[test]
    fn log_score_examples() {
        assert!((log_score(&[1, 0, 1], &[0.5; 3]).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let v = log_score(&[1, 0], &[0.8, 0.3]).unwrap();
        assert!((v - (0.8f64.ln() + 0.7f64.ln()) / 2.0).abs() < 1e-15);
        assert!((v + 0.28990).abs() < 1e-5);
        let saturated = log_score(&[1, 1], &[1.0, 1.0]).unwrap();
        assert!((saturated - (1.0 - 1e-6f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn outcome_loglik_examples() {
        let d = data(vec![0, 1, 1], vec![0.0; 3]);
        let fam = OutcomeFamily::gaussian_linear(vec![0], false);
        let table = PotentialOutcomeTable::new(vec![0.0; 3], vec![0.0; 3]).unwrap();
        let t = outcome_loglik_t(&fam, &[0.0, 0.0, 1.0], &table, &d).unwrap();
        assert!((t - 2.0 * (-0.5 * (2.0 * PI).ln())).abs() < 1e-12);

        let one = Dataset::new(Covariates::empty(1), vec![0], vec![0.0]);
        let fam = OutcomeFamily::gaussian_linear(vec![], false);
        let table = PotentialOutcomeTable::new(vec![0.0], vec![1.0]).unwrap();
        let t = outcome_loglik_t(&fam, &[1.0, 1.0], &table, &one).unwrap();
        assert!((t - 2.0 * (-0.5 * (2.0 * PI).ln())).abs() < 1e-12);
    }

    #[test]
    fn ate_mse_examples() {
        let table = PotentialOutcomeTable::new(vec![0.0, 0.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(ate_mse_from_cate(&[2.0, 2.0], &table), -4.0);
        assert_eq!(ate_mse_from_cate(&[0.0, 0.0], &table), 0.0);
        let tau = 1.7;
        let t = PotentialOutcomeTable::new(vec![0.3, -1.0], vec![0.3 + tau, -1.0 + tau]).unwrap();
        assert!((ate_mse_from_cate(&[tau, tau], &t) + tau * tau).abs() < 1e-12);

        let terms = TermFunctions::ate_mse_from_cate(vec![2.0, 2.0]).unwrap();
        assert!((terms.full(&table).unwrap() + 4.0).abs() < 1e-12);
    }

    #[test]
    fn cross_arm_terms_rejected() {
        let n = 3;
        let prod = Polynomial::y0(n).mul(&Polynomial::y1(n));
        let err = TermFunctions::from_polynomial(&prod, 1.0).unwrap_err();
        assert!(err.to_string().contains("mixes both potential outcomes"));
        // squared difference keeps a y0*y1 term
        let diff = Polynomial::y1(n).sub(&Polynomial::y0(n));
        assert!(TermFunctions::from_polynomial(&diff.square(), 1.0).is_err());
        assert!(TermFunctions::from_polynomial(&Polynomial::y1(n).square(), 1.0).is_ok());
    }

    #[test]
    fn ipw_examples() {
        let d = data(vec![1, 0], vec![4.0, 6.0]);
        let p = PropensityVector::new(vec![0.5, 0.5], &d.assignments).unwrap();
        let terms = TermFunctions::new(vec![0.0; 2], |_, y| y, |_, y| y, 1.0);
        assert_eq!(realize_ipw(&terms, &d, &p, false).unwrap(), 20.0);
        assert!(p.weight_warning().is_none());

        let p = PropensityVector::new(vec![1.0, 0.0], &d.assignments).unwrap();
        let v = realize_ipw(&terms, &d, &p, false).unwrap();
        assert!((v - 10.0).abs() < 1e-4);
        let extreme = PropensityVector::new(vec![0.001, 0.5], &d.assignments).unwrap();
        assert!(extreme.weight_warning().is_some());
    }

    #[test]
    fn hajek_normalizes_each_arm() {
        let d = data(vec![1, 1, 0, 0], vec![2.0, 4.0, 1.0, 1.0]);
        let p = PropensityVector::new(vec![0.25, 0.25, 0.25, 0.25], &d.assignments).unwrap();
        let terms = TermFunctions::new(vec![0.0; 4], |_, _| 0.0, |_, y| y, 1.0);
        // mean of treated outcomes times n
        assert!((realize_ipw(&terms, &d, &p, true).unwrap() - 12.0).abs() < 1e-12);
        assert!((realize_ipw(&terms, &d, &p, false).unwrap() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn all_treated_modes_agree() {
        let d = data(vec![1, 1, 1], vec![1.0, 2.0, 5.0]);
        let fam = OutcomeFamily::gaussian_linear(vec![0], false);
        let theta = [0.3, 0.1, 1.0];
        let terms = TermFunctions::new(vec![0.5; 3], |_, _| 0.0, |_, y| y * y, 0.5);
        let p = PropensityVector::new(vec![1.0; 3], &d.assignments).unwrap();
        let ipw = realize_ipw(&terms, &d, &p, false).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        use rand::SeedableRng;
        let imp = realize_impute(&terms, &fam, &theta, &d, &mut rng).unwrap();
        let direct = 0.5 * (1.5 + 1.0 + 4.0 + 25.0);
        assert!((ipw - direct).abs() < 1e-4 * direct);
        assert!((imp - direct).abs() < 1e-12);
    }

    #[test]
    fn degenerate_noise_imputes_model_mean() {
        let d = data(vec![1, 0], vec![3.0, -1.0]);
        let fam = OutcomeFamily::gaussian_linear(vec![0], false);
        let theta = [0.5, 2.0, 1e-14];
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let t = impute_table(&fam, &theta, &d, &mut rng).unwrap();
        assert!((t.y0()[0] - 0.5).abs() < 1e-6);
        assert!((t.y1()[1] - 2.5).abs() < 1e-6);
        assert_eq!(t.y1()[0], 3.0);
        assert_eq!(t.y0()[1], -1.0);
    }
}
