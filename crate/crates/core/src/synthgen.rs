//! Synthetic scenarios with known potential outcomes, and a Monte Carlo
//! check of the imputation-bias algebra.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Covariates, Dataset, PotentialOutcomeTable};
use crate::discrepancy::{realize_impute, realize_ipw, PropensityVector, TermFunctions};
use crate::error::{Error, Result};
use crate::models::{logistic, OutcomeFamily};
use crate::rng::{Purpose, SeedStreams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Both potential outcomes are observable.
    ScienceFiction,
    /// Only the assigned arm is observable.
    Fiction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub n: usize,
    pub d: usize,
    pub scenario: Scenario,
    /// Length `d`; drawn from N(0, 1) when absent.
    pub true_phi: Option<Vec<f64>>,
    /// Length `d + 1`, treatment coefficient last; N(0, 1) when absent.
    pub true_theta: Option<Vec<f64>>,
    pub true_sigma2: f64,
    /// Treatment probability `shift + (1 - shift) * logistic(x . phi)`.
    pub assignment_shift: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            d: 10,
            scenario: Scenario::Fiction,
            true_phi: None,
            true_theta: None,
            true_sigma2: 1.0,
            assignment_shift: 0.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::Config("scenario needs n >= 1 and d >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.assignment_shift) {
            return Err(Error::Config(format!(
                "assignment_shift must lie in [0, 1], got {}",
                self.assignment_shift
            )));
        }
        if !(self.true_sigma2 >= 0.0 && self.true_sigma2.is_finite()) {
            return Err(Error::Config(format!(
                "true_sigma2 must be finite and non-negative, got {}",
                self.true_sigma2
            )));
        }
        let check_len = |v: &Option<Vec<f64>>, len: usize, what: &str| match v {
            Some(v) if v.len() != len => Err(Error::LengthMismatch {
                what: what.into(),
                got: v.len(),
                expected: len,
            }),
            _ => Ok(()),
        };
        check_len(&self.true_phi, self.d, "true_phi")?;
        check_len(&self.true_theta, self.d + 1, "true_theta")
    }

    /// Generator parameters, filling unspecified ones from the seed.
    pub fn resolved_params(&self) -> (Vec<f64>, Vec<f64>) {
        let mut rng = SeedStreams::new(self.seed).rng(Purpose::Generation, 0);
        let phi_draw: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
        let theta_draw: Vec<f64> = (0..=self.d).map(|_| rng.sample(StandardNormal)).collect();
        (
            self.true_phi.clone().unwrap_or(phi_draw),
            self.true_theta.clone().unwrap_or(theta_draw),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub scenario: Scenario,
    /// Set in the science-fiction scenario; in fiction the table is kept
    /// for oracle comparisons only.
    pub observable: bool,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma2: f64,
    pub assignment_shift: f64,
    pub true_propensities: Vec<f64>,
    pub table: PotentialOutcomeTable,
}

/// `x ~ U[0,1]^d`, `a ~ Bernoulli(p(x))`, `y(a) ~ N([x, a] . theta, sigma2)`.
pub fn generate(config: &ScenarioConfig) -> Result<(Dataset, SyntheticTruth)> {
    config.validate()?;
    let (phi, theta) = config.resolved_params();
    let streams = SeedStreams::new(config.seed);
    let (n, d) = (config.n, config.d);

    let mut rng = streams.rng(Purpose::Generation, 1);
    let values: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    let covariates = Covariates::new(names, n, values)?;

    let shift = config.assignment_shift;
    let true_propensities: Vec<f64> = (0..n)
        .map(|i| {
            let eta: f64 = covariates.row(i).iter().zip(&phi).map(|(x, p)| x * p).sum();
            shift + (1.0 - shift) * logistic(eta)
        })
        .collect();
    let mut rng = streams.rng(Purpose::Generation, 2);
    let assignments: Vec<u8> = true_propensities
        .iter()
        .map(|&p| u8::from(rng.random::<f64>() < p))
        .collect();

    let mut rng = streams.rng(Purpose::Generation, 3);
    let sd = config.true_sigma2.sqrt();
    let tau = theta[d];
    let mut y0 = Vec::with_capacity(n);
    let mut y1 = Vec::with_capacity(n);
    for i in 0..n {
        let base: f64 = covariates.row(i).iter().zip(&theta).map(|(x, t)| x * t).sum();
        let z0: f64 = StandardNormal.sample(&mut rng);
        let z1: f64 = StandardNormal.sample(&mut rng);
        y0.push(base + sd * z0);
        y1.push(base + tau + sd * z1);
    }
    let table = PotentialOutcomeTable::new(y0, y1)?;
    let observed = table.select_observed(&assignments)?;
    let data = Dataset::new(covariates, assignments, observed);
    let truth = SyntheticTruth {
        scenario: config.scenario,
        observable: config.scenario == Scenario::ScienceFiction,
        phi,
        theta,
        sigma2: config.true_sigma2,
        assignment_shift: shift,
        true_propensities,
        table,
    };
    Ok((data, truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub impute: McEstimate,
    pub ipw: McEstimate,
}

/// Bias of the imputation and IPW realizations of the single-arm term
/// `f(y(1)) = y(1)` for one unit treated with probability `pi`, whose
/// treated outcome has true mean `mu_star` while the model imputes with
/// mean `mu` (unit noise on both).
pub fn bias_oracle(pi: f64, mu_star: f64, mu: f64, replicates: usize, seed: u64) -> Result<BiasEstimate> {
    if !(pi > 0.0 && pi <= 1.0) {
        return Err(Error::Config(format!("pi must lie in (0, 1], got {pi}")));
    }
    if replicates < 10_000 {
        return Err(Error::Config(format!("bias oracle needs at least 10^4 replicates, got {replicates}")));
    }
    let family = OutcomeFamily::gaussian_linear(vec![], true);
    let theta = [0.0, mu, 1.0];
    let terms = TermFunctions::new(vec![0.0], |_, _| 0.0, |_, y| y, 1.0);
    let mut rng = SeedStreams::new(seed).rng(Purpose::Oracle, 0);
    let mut impute_err = Vec::with_capacity(replicates);
    let mut ipw_err = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let y1 = mu_star + rng.sample::<f64, _>(StandardNormal);
        let y0: f64 = rng.sample(StandardNormal);
        let a = u8::from(rng.random::<f64>() < pi);
        let observed = if a == 1 { y1 } else { y0 };
        let unit = Dataset::new(Covariates::empty(1), vec![a], vec![observed]);
        let truth = y1;
        let imputed = realize_impute(&terms, &family, &theta, &unit, &mut rng)?;
        let p = PropensityVector::new(vec![pi], &unit.assignments)?;
        let weighted = realize_ipw(&terms, &unit, &p, false)?;
        impute_err.push(imputed - truth);
        ipw_err.push(weighted - truth);
    }
    Ok(BiasEstimate {
        impute: mc_estimate(&impute_err),
        ipw: mc_estimate(&ipw_err),
    })
}

fn mc_estimate(xs: &[f64]) -> McEstimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    McEstimate {
        mean,
        se: (var / n).sqrt(),
    }
}
