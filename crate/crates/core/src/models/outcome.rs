use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ArmDist, Constraint, ParamLayout, Prior};
use crate::data::{Dataset, PotentialOutcomeTable};
use crate::error::{Error, Result};

/// Lower clamp on the heteroscedastic Gaussian variance `factor * mean`.
pub const MIN_HETERO_VARIANCE: f64 = 1e-8;

/// Structure of the paired hierarchical normal model. Units are classes;
/// each pair contributes one treated and one control class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairedVariant {
    /// Pair intercepts `b_i ~ N(mu_g, tau_g^2)`, grade-specific slope and effect.
    GradeSpecific,
    /// Slope `m` and effect `theta` shared by all grades.
    SharedSlopeEffect,
    /// One intercept `b` shared by all pairs.
    SharedIntercept,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeKind {
    /// `y(a) ~ N(x.beta + tau a, sigma2)`.
    GaussianLinear,
    /// `y(a) ~ Poisson(t exp(x.beta + tau a))`.
    PoissonLogLinear,
    /// Same mean as Poisson, variance `mu + mu^2 / dispersion`.
    NegBinLogLinear,
    /// Same mean as Poisson, Gaussian with variance `factor * mu`.
    HeteroscedasticGaussian,
    /// `y ~ N(b_pair + m_g pre + theta_g a, sigma_g^2)`.
    PairedHierarchical { variant: PairedVariant },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFamily {
    pub kind: OutcomeKind,
    /// Covariate columns in the design. For the paired model, the single
    /// pre-treatment score column.
    pub columns: Vec<usize>,
    pub intercept: bool,
    /// Prior on regression coefficients, the treatment coefficient and (for
    /// the paired model) every location parameter.
    pub coef_prior: Prior,
    /// Prior on the positive parameter(s): sigma2, dispersion, variance
    /// factor, or the paired model's sigma_g and tau_g.
    pub positive_prior: Prior,
}

/// Offsets of each parameter block in a paired-model vector.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PairedIndex {
    pub variant: PairedVariant,
    pub n_grades: usize,
    pub b: Range<usize>,
    pub m: Range<usize>,
    pub theta: Range<usize>,
    pub sigma: Range<usize>,
    pub mu: Range<usize>,
    pub tau: Range<usize>,
    pub len: usize,
}

impl PairedIndex {
    fn new(variant: PairedVariant, n_pairs: usize, n_grades: usize) -> Self {
        let mut at = 0;
        let mut block = |len: usize| {
            let r = at..at + len;
            at += len;
            r
        };
        let (nb, nk, nh) = match variant {
            PairedVariant::GradeSpecific => (n_pairs, n_grades, n_grades),
            PairedVariant::SharedSlopeEffect => (n_pairs, 1, n_grades),
            PairedVariant::SharedIntercept => (1, n_grades, 0),
        };
        let b = block(nb);
        let m = block(nk);
        let theta = block(nk);
        let sigma = block(n_grades);
        let mu = block(nh);
        let tau = block(nh);
        Self {
            variant,
            n_grades,
            b,
            m,
            theta,
            sigma,
            mu,
            tau,
            len: at,
        }
    }

    /// Index into the `m` / `theta` blocks for a grade.
    pub fn effect_slot(&self, grade: usize) -> usize {
        match self.variant {
            PairedVariant::SharedSlopeEffect => 0,
            _ => grade,
        }
    }

    pub fn intercept_slot(&self, pair: usize) -> usize {
        match self.variant {
            PairedVariant::SharedIntercept => 0,
            _ => pair,
        }
    }

    pub fn hierarchical(&self) -> bool {
        !self.mu.is_empty()
    }
}

impl OutcomeFamily {
    fn regression(kind: OutcomeKind, columns: Vec<usize>, intercept: bool) -> Self {
        Self {
            kind,
            columns,
            intercept,
            coef_prior: Prior::STANDARD_NORMAL,
            positive_prior: Prior::UNIT_GAMMA,
        }
    }

    pub fn gaussian_linear(columns: Vec<usize>, intercept: bool) -> Self {
        Self::regression(OutcomeKind::GaussianLinear, columns, intercept)
    }

    pub fn poisson(columns: Vec<usize>, intercept: bool) -> Self {
        Self::regression(OutcomeKind::PoissonLogLinear, columns, intercept)
    }

    pub fn negbin(columns: Vec<usize>, intercept: bool) -> Self {
        Self::regression(OutcomeKind::NegBinLogLinear, columns, intercept)
    }

    pub fn heteroscedastic(columns: Vec<usize>, intercept: bool) -> Self {
        Self::regression(OutcomeKind::HeteroscedasticGaussian, columns, intercept)
    }

    /// Paired hierarchical model with normal(0, 10^4) location priors and
    /// gamma(10, 1) priors on the standard deviations.
    pub fn paired(variant: PairedVariant, pre_score_column: usize) -> Self {
        Self {
            kind: OutcomeKind::PairedHierarchical { variant },
            columns: vec![pre_score_column],
            intercept: false,
            coef_prior: Prior::Normal {
                mean: 0.0,
                sd: 100.0,
            },
            positive_prior: Prior::Gamma {
                shape: 10.0,
                rate: 1.0,
            },
        }
    }

    /// Structural omission of a design column (misspecified fit).
    pub fn without_column(mut self, column: usize) -> Self {
        self.columns.retain(|&c| c != column);
        self
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OutcomeKind::GaussianLinear => "gaussian_linear",
            OutcomeKind::PoissonLogLinear => "poisson_loglinear",
            OutcomeKind::NegBinLogLinear => "negbin_loglinear",
            OutcomeKind::HeteroscedasticGaussian => "heteroscedastic_gaussian_loglinear",
            OutcomeKind::PairedHierarchical { .. } => "paired_hierarchical_normal",
        }
    }

    pub fn is_count(&self) -> bool {
        matches!(
            self.kind,
            OutcomeKind::PoissonLogLinear | OutcomeKind::NegBinLogLinear
        )
    }

    fn n_coefs(&self) -> usize {
        self.columns.len() + usize::from(self.intercept)
    }

    /// Position of the treatment coefficient (regression families).
    pub fn treatment_index(&self) -> Option<usize> {
        match self.kind {
            OutcomeKind::PairedHierarchical { .. } => None,
            _ => Some(self.n_coefs()),
        }
    }

    pub(crate) fn paired_index(&self, data: &Dataset) -> Option<PairedIndex> {
        match self.kind {
            OutcomeKind::PairedHierarchical { variant } => {
                let pairs = data.pairs.as_ref()?;
                Some(PairedIndex::new(variant, pairs.n_pairs(), pairs.n_grades()))
            }
            _ => None,
        }
    }

    pub fn layout(&self, data: &Dataset) -> ParamLayout {
        let mut layout = ParamLayout::default();
        let names = data.covariates.names();
        let col_name = |c: usize| names.get(c).cloned().unwrap_or_else(|| format!("col{c}"));
        if let Some(idx) = self.paired_index(data) {
            for j in idx.b.clone() {
                layout.push(format!("b[{}]", j - idx.b.start), Constraint::Real);
            }
            for (block, label) in [(&idx.m, "m"), (&idx.theta, "theta")] {
                for j in block.clone() {
                    layout.push(format!("{label}[{}]", j - block.start), Constraint::Real);
                }
            }
            for j in idx.sigma.clone() {
                layout.push(format!("sigma[{}]", j - idx.sigma.start), Constraint::Positive);
            }
            for j in idx.mu.clone() {
                layout.push(format!("mu[{}]", j - idx.mu.start), Constraint::Real);
            }
            for j in idx.tau.clone() {
                layout.push(format!("tau[{}]", j - idx.tau.start), Constraint::Positive);
            }
            return layout;
        }
        if self.intercept {
            layout.push("beta[intercept]", Constraint::Real);
        }
        for &c in &self.columns {
            layout.push(format!("beta[{}]", col_name(c)), Constraint::Real);
        }
        layout.push("treatment", Constraint::Real);
        match self.kind {
            OutcomeKind::GaussianLinear => layout.push("sigma2", Constraint::Positive),
            OutcomeKind::NegBinLogLinear => layout.push("dispersion", Constraint::Positive),
            OutcomeKind::HeteroscedasticGaussian => {
                layout.push("variance_factor", Constraint::Positive)
            }
            _ => {}
        }
        layout
    }

    pub fn check_design(&self, data: &Dataset) -> Result<()> {
        let d = data.covariates.ncols();
        if let Some(&c) = self.columns.iter().find(|&&c| c >= d) {
            return Err(Error::Config(format!(
                "outcome design column {c} out of range (dataset has {d} covariates)"
            )));
        }
        if let OutcomeKind::PairedHierarchical { .. } = self.kind {
            let pairs = data.pairs.as_ref().ok_or_else(|| {
                Error::Config("paired hierarchical model needs pair and grade columns".into())
            })?;
            if self.columns.len() != 1 {
                return Err(Error::Config(
                    "paired hierarchical model takes exactly one pre-score column".into(),
                ));
            }
            let grades = pairs.pair_grades();
            for (i, (&p, &g)) in pairs.pair.iter().zip(&pairs.grade).enumerate() {
                if grades[p] != g {
                    return Err(Error::Config(format!(
                        "unit {i}: grade differs from the rest of pair {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Errors for outcome values outside the family's support.
    pub fn check_support(&self, outcomes: &[f64]) -> Result<()> {
        if !self.is_count() {
            return Ok(());
        }
        match outcomes
            .iter()
            .position(|&y| !(y >= 0.0 && y.fract() == 0.0))
        {
            Some(row) => Err(Error::Support {
                row,
                value: outcomes[row],
                family: self.name(),
            }),
            None => Ok(()),
        }
    }

    fn regression_eta(&self, theta: &[f64], data: &Dataset, i: usize) -> f64 {
        let row = data.covariates.row(i);
        let (mut eta, coefs) = if self.intercept {
            (theta[0], &theta[1..])
        } else {
            (0.0, theta)
        };
        for (&c, &b) in self.columns.iter().zip(coefs) {
            eta += b * row[c];
        }
        eta
    }

    /// Distributions of `y_i(0)` and `y_i(1)` for every unit.
    pub fn arm_dists(&self, theta: &[f64], data: &Dataset) -> Result<Vec<[ArmDist; 2]>> {
        let layout = self.layout(data);
        layout.check(theta)?;
        Ok(self.arm_dists_unchecked(theta, data))
    }

    pub(crate) fn arm_dists_unchecked(&self, theta: &[f64], data: &Dataset) -> Vec<[ArmDist; 2]> {
        if let Some(idx) = self.paired_index(data) {
            let pairs = data.pairs.as_ref().expect("paired index implies pairs");
            let pre = self.columns[0];
            return (0..data.n)
                .map(|i| {
                    let g = pairs.grade[i];
                    let k = idx.effect_slot(g);
                    let base = theta[idx.b.start + idx.intercept_slot(pairs.pair[i])]
                        + theta[idx.m.start + k] * data.covariates.get(i, pre);
                    let sd = theta[idx.sigma.start + g];
                    let var = sd * sd;
                    [
                        ArmDist::Normal { mean: base, var },
                        ArmDist::Normal {
                            mean: base + theta[idx.theta.start + k],
                            var,
                        },
                    ]
                })
                .collect();
        }
        let t = self.n_coefs();
        let tau = theta[t];
        (0..data.n)
            .map(|i| {
                let eta0 = self.regression_eta(theta, data, i);
                let arm = |eta: f64| match self.kind {
                    OutcomeKind::GaussianLinear => ArmDist::Normal {
                        mean: eta,
                        var: theta[t + 1],
                    },
                    OutcomeKind::PoissonLogLinear => ArmDist::Poisson {
                        mean: data.offset(i) * eta.exp(),
                    },
                    OutcomeKind::NegBinLogLinear => ArmDist::NegBin {
                        mean: data.offset(i) * eta.exp(),
                        size: theta[t + 1],
                    },
                    OutcomeKind::HeteroscedasticGaussian => {
                        let mean = data.offset(i) * eta.exp();
                        ArmDist::Normal {
                            mean,
                            var: (theta[t + 1] * mean).max(MIN_HETERO_VARIANCE),
                        }
                    }
                    OutcomeKind::PairedHierarchical { .. } => unreachable!(),
                };
                [arm(eta0), arm(eta0 + tau)]
            })
            .collect()
    }

    /// `sum_i log p(y_i(a_i) | theta, x_i, a_i)` on the observed outcomes.
    pub fn loglik(&self, theta: &[f64], data: &Dataset) -> Result<f64> {
        self.check_support(&data.observed_outcomes)?;
        let dists = self.arm_dists(theta, data)?;
        Ok(dists
            .iter()
            .enumerate()
            .map(|(i, d)| d[data.assignments[i] as usize].ln_pdf(data.observed_outcomes[i]))
            .sum())
    }

    /// `sum_i log p(y_i(arm) | theta, x_i)` for caller-supplied outcomes of one arm.
    pub fn loglik_arm(&self, theta: &[f64], data: &Dataset, arm: u8, outcomes: &[f64]) -> Result<f64> {
        if outcomes.len() != data.n {
            return Err(Error::LengthMismatch {
                what: "arm outcomes".into(),
                got: outcomes.len(),
                expected: data.n,
            });
        }
        self.check_support(outcomes)?;
        let dists = self.arm_dists(theta, data)?;
        Ok(dists
            .iter()
            .zip(outcomes)
            .map(|(d, &y)| d[arm as usize].ln_pdf(y))
            .sum())
    }

    pub(crate) fn loglik_unchecked(&self, theta: &[f64], data: &Dataset) -> f64 {
        self.arm_dists_unchecked(theta, data)
            .iter()
            .enumerate()
            .map(|(i, d)| d[data.assignments[i] as usize].ln_pdf(data.observed_outcomes[i]))
            .sum()
    }

    /// Independent draws of both potential outcomes for every unit.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        data: &Dataset,
        rng: &mut R,
    ) -> Result<PotentialOutcomeTable> {
        let dists = self.arm_dists(theta, data)?;
        Ok(sample_table(&dists, rng))
    }

    /// `E[Y_i(1) - Y_i(0) | theta, x_i]` per unit.
    pub fn conditional_cate(&self, theta: &[f64], data: &Dataset) -> Result<Vec<f64>> {
        Ok(self
            .arm_dists(theta, data)?
            .iter()
            .map(|d| d[1].mean() - d[0].mean())
            .collect())
    }

    /// Sum of prior log-densities; `-inf` when a positive entry is not.
    pub fn prior_logdensity(&self, theta: &[f64], data: &Dataset) -> Result<f64> {
        let layout = self.layout(data);
        if theta.len() != layout.len() {
            return Err(Error::Layout {
                expected: layout.len(),
                got: theta.len(),
            });
        }
        Ok(self.prior_unchecked(theta, data, &layout))
    }

    pub(crate) fn prior_unchecked(&self, theta: &[f64], data: &Dataset, layout: &ParamLayout) -> f64 {
        for (j, &v) in theta.iter().enumerate() {
            if layout.is_positive(j) && !(v > 0.0) {
                return f64::NEG_INFINITY;
            }
        }
        if let Some(idx) = self.paired_index(data) {
            let mut lp = 0.0;
            let loc = |r: &Range<usize>| -> f64 {
                theta[r.clone()].iter().map(|&v| self.coef_prior.ln_pdf(v)).sum()
            };
            let pos = |r: &Range<usize>| -> f64 {
                theta[r.clone()].iter().map(|&v| self.positive_prior.ln_pdf(v)).sum()
            };
            lp += loc(&idx.m) + loc(&idx.theta) + pos(&idx.sigma);
            if idx.hierarchical() {
                lp += loc(&idx.mu) + pos(&idx.tau);
                let grades = data.pairs.as_ref().expect("paired").pair_grades();
                for (p, &g) in grades.iter().enumerate() {
                    let tau = theta[idx.tau.start + g];
                    lp += super::normal_ln_pdf(
                        theta[idx.b.start + p],
                        theta[idx.mu.start + g],
                        tau * tau,
                    );
                }
            } else {
                lp += loc(&idx.b);
            }
            return lp;
        }
        let t = self.n_coefs();
        let mut lp: f64 = theta[..=t].iter().map(|&v| self.coef_prior.ln_pdf(v)).sum();
        if theta.len() > t + 1 {
            lp += self.positive_prior.ln_pdf(theta[t + 1]);
        }
        lp
    }
}

/// One independent draw of each arm per unit.
pub fn sample_table<R: Rng + ?Sized>(dists: &[[ArmDist; 2]], rng: &mut R) -> PotentialOutcomeTable {
    let mut y0 = Vec::with_capacity(dists.len());
    let mut y1 = Vec::with_capacity(dists.len());
    for d in dists {
        y0.push(d[0].sample(rng));
        y1.push(d[1].sample(rng));
    }
    PotentialOutcomeTable::new(y0, y1).expect("finite draws from finite parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Covariates, PairStructure};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn dataset(x: Vec<Vec<f64>>, a: Vec<u8>, y: Vec<f64>) -> Dataset {
        let d = x[0].len();
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        Dataset::new(Covariates::from_rows(names, &x).unwrap(), a, y)
    }

    #[test]
    fn gaussian_standard_normal_at_zero() {
        let data = dataset(vec![vec![0.3]; 5], vec![0, 1, 0, 1, 1], vec![0.0; 5]);
        let fam = OutcomeFamily::gaussian_linear(vec![0], false);
        let ll = fam.loglik(&[0.0, 0.0, 1.0], &data).unwrap();
        assert!((ll - 5.0 * (-0.5 * (2.0 * PI).ln())).abs() < 1e-12);
        assert!(fam.loglik(&[0.0, 0.0, 0.0], &data).is_err());
    }

    #[test]
    fn poisson_with_offset() {
        let data = dataset(vec![vec![0.0]], vec![0], vec![2.0]).with_offsets(vec![2.0]);
        let fam = OutcomeFamily::poisson(vec![0], true);
        let ll = fam.loglik(&[0.0, 0.0, 0.0], &data).unwrap();
        let oracle = 2.0 * 2f64.ln() - 2.0 - 2f64.ln();
        assert!((ll - oracle).abs() < 1e-12);
        let bad = data.with_outcomes(vec![-1.0]);
        assert!(matches!(fam.loglik(&[0.0, 0.0, 0.0], &bad), Err(Error::Support { .. })));
    }

    #[test]
    fn heteroscedastic_unit_factor_is_gaussian_with_mean_variance() {
        let x = vec![vec![0.2, 1.0], vec![0.5, 0.0], vec![1.5, 2.0]];
        let data = dataset(x, vec![1, 0, 1], vec![3.0, 0.5, 12.0]).with_offsets(vec![1.0, 0.4, 2.0]);
        let het = OutcomeFamily::heteroscedastic(vec![0, 1], true);
        let theta = [0.3, 0.4, -0.2, 0.5, 1.0];
        let ll = het.loglik(&theta, &data).unwrap();
        let pois = OutcomeFamily::poisson(vec![0, 1], true);
        let means = pois.arm_dists(&theta[..4], &data).unwrap();
        let direct: f64 = (0..3)
            .map(|i| {
                let mu = means[i][data.assignments[i] as usize].mean();
                super::super::normal_ln_pdf(data.observed_outcomes[i], mu, mu)
            })
            .sum();
        assert!((ll - direct).abs() < 1e-12);
        // identical mean functions
        let hd = het.arm_dists(&theta, &data).unwrap();
        for (h, p) in hd.iter().zip(&means) {
            assert_eq!(h[0].mean(), p[0].mean());
            assert_eq!(h[1].mean(), p[1].mean());
        }
    }

    #[test]
    fn cate_examples() {
        let data = dataset(vec![vec![0.1], vec![0.9]], vec![0, 1], vec![0.0, 0.0]);
        let g = OutcomeFamily::gaussian_linear(vec![0], false);
        assert_eq!(g.conditional_cate(&[1.0, 2.5, 1.0], &data).unwrap(), vec![2.5, 2.5]);

        let p = OutcomeFamily::poisson(vec![], true);
        let one = dataset(vec![vec![0.0]], vec![0], vec![0.0]).with_offsets(vec![1.0]);
        let c = p.conditional_cate(&[0.0, 2f64.ln()], &one).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);

        let nb = OutcomeFamily::negbin(vec![0], true);
        let c = nb.conditional_cate(&[0.4, 1.2, 0.0, 2.0], &data).unwrap();
        assert!(c.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn near_degenerate_noise_reproduces_mean() {
        let data = dataset(vec![vec![0.4], vec![0.8]], vec![0, 1], vec![0.0, 0.0]);
        let fam = OutcomeFamily::gaussian_linear(vec![0], false);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = fam.forward(&[2.0, -1.0, 1e-12], &data, &mut rng).unwrap();
        assert!((t.y0()[0] - 0.8).abs() < 1e-5);
        assert!((t.y1()[1] - 0.6).abs() < 1e-5);
    }

    #[test]
    fn forward_treatment_difference() {
        let n = 100_000;
        let data = dataset(vec![vec![0.5]; n], vec![0; n], vec![0.0; n]);
        let fam = OutcomeFamily::gaussian_linear(vec![0], false);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = fam.forward(&[1.0, 0.7, 2.0], &data, &mut rng).unwrap();
        let diff = t.y1().iter().zip(t.y0()).map(|(a, b)| a - b).sum::<f64>() / n as f64;
        let se = (2.0 * 2.0 / n as f64).sqrt();
        assert!((diff - 0.7).abs() < 3.0 * se);

        let pois = OutcomeFamily::poisson(vec![0], true);
        let t = pois.forward(&[1.0, 0.5, -0.3], &data, &mut rng).unwrap();
        assert!(t.y0().iter().chain(t.y1()).all(|y| *y >= 0.0 && y.fract() == 0.0));
    }

    #[test]
    fn dropped_column_changes_layout() {
        let data = dataset(vec![vec![0.1, 0.2, 0.3]], vec![0], vec![0.0]);
        let fam = OutcomeFamily::gaussian_linear(vec![0, 1, 2], false).without_column(0);
        assert_eq!(
            fam.layout(&data).names(),
            vec!["beta[x2]", "beta[x3]", "treatment", "sigma2"]
        );
    }

    fn paired_data() -> Dataset {
        // two pairs in grade 0, one pair in grade 1
        let pre = vec![vec![10.0], vec![11.0], vec![20.0], vec![19.0], vec![5.0], vec![6.0]];
        dataset(pre, vec![1, 0, 0, 1, 1, 0], vec![12.0, 11.5, 21.0, 22.0, 9.0, 6.5]).with_pairs(
            PairStructure {
                pair: vec![0, 0, 1, 1, 2, 2],
                grade: vec![0, 0, 0, 0, 1, 1],
            },
        )
    }

    #[test]
    fn paired_layouts() {
        let data = paired_data();
        let a = OutcomeFamily::paired(PairedVariant::GradeSpecific, 0).layout(&data);
        assert_eq!(a.len(), 3 + 2 + 2 + 2 + 2 + 2);
        let b = OutcomeFamily::paired(PairedVariant::SharedSlopeEffect, 0).layout(&data);
        assert_eq!(b.len(), 3 + 1 + 1 + 2 + 2 + 2);
        let c = OutcomeFamily::paired(PairedVariant::SharedIntercept, 0).layout(&data);
        assert_eq!(c.names(), vec!["b[0]", "m[0]", "m[1]", "theta[0]", "theta[1]", "sigma[0]", "sigma[1]"]);
    }

    #[test]
    fn paired_means_cate_and_prior() {
        let data = paired_data();
        let fam = OutcomeFamily::paired(PairedVariant::GradeSpecific, 0);
        // b0 b1 b2 | m0 m1 | th0 th1 | s0 s1 | mu0 mu1 | tau0 tau1
        let theta = [1.0, 2.0, 3.0, 1.1, 0.9, 0.5, 2.0, 1.5, 2.5, 1.0, 3.0, 4.0, 5.0];
        let d = fam.arm_dists(&theta, &data).unwrap();
        assert!((d[0][1].mean() - (1.0 + 1.1 * 10.0 + 0.5)).abs() < 1e-12);
        assert!((d[4][0].mean() - (3.0 + 0.9 * 5.0)).abs() < 1e-12);
        assert!((d[5][0].variance() - 6.25).abs() < 1e-12);
        let cate = fam.conditional_cate(&theta, &data).unwrap();
        assert!((cate[0] - 0.5).abs() < 1e-12 && (cate[5] - 2.0).abs() < 1e-12);

        let lp = fam.prior_logdensity(&theta, &data).unwrap();
        let n100 = |v: f64| super::super::normal_ln_pdf(v, 0.0, 1e4);
        let g = |v: f64| super::super::gamma_ln_pdf(v, 10.0, 1.0);
        let expected = [1.1, 0.9, 0.5, 2.0, 1.0, 3.0].iter().map(|&v| n100(v)).sum::<f64>()
            + [1.5, 2.5, 4.0, 5.0].iter().map(|&v| g(v)).sum::<f64>()
            + super::super::normal_ln_pdf(1.0, 1.0, 16.0)
            + super::super::normal_ln_pdf(2.0, 1.0, 16.0)
            + super::super::normal_ln_pdf(3.0, 3.0, 25.0);
        assert!((lp - expected).abs() < 1e-10);
        let mut bad = theta;
        bad[7] = -1.0;
        assert_eq!(fam.prior_logdensity(&bad, &data).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn regression_prior_examples() {
        let data = dataset(vec![vec![0.0, 0.0]], vec![0], vec![0.0]);
        let fam = OutcomeFamily::gaussian_linear(vec![0, 1], false);
        let lp = fam.prior_logdensity(&[0.0, 0.0, 0.0, 1.0], &data).unwrap();
        assert!((lp - (3.0 * (-0.5 * (2.0 * PI).ln()) - 1.0)).abs() < 1e-12);
        assert_eq!(
            fam.prior_logdensity(&[0.0, 0.0, 0.0, -1.0], &data).unwrap(),
            f64::NEG_INFINITY
        );
    }
}
