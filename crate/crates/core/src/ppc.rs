//! Posterior predictive checks of the assignment and outcome models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PotentialOutcomeTable};
use crate::discrepancy::{
    impute_from_dists, log_score, propensities, realize_ipw, DiscrepancyKind, DiscrepancySpec,
    PropensityVector, RealizationMode, TermFunctions,
};
use crate::error::{Error, Result};
use crate::inference::Draws;
use crate::models::{outcome_sample_table, AssignmentFamily, OutcomeFamily};
use crate::rng::{Purpose, SeedStreams};

pub const SCHEMA_VERSION: &str = "v1";
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

/// `(1/S) sum_s 1[t_rep_s >= t_obs_s]`; ties count as exceedance.
pub fn tail_probability(t_rep: &[f64], t_obs: &[f64]) -> Result<f64> {
    if t_rep.is_empty() {
        return Err(Error::Discrepancy("tail probability of an empty sequence".into()));
    }
    if t_rep.len() != t_obs.len() {
        return Err(Error::LengthMismatch {
            what: "t_obs".into(),
            got: t_obs.len(),
            expected: t_rep.len(),
        });
    }
    let exceed = t_rep.iter().zip(t_obs).filter(|(r, o)| r >= o).count();
    Ok(exceed as f64 / t_rep.len() as f64)
}

/// Two-sided rule with a warning band of width `alpha` inside each boundary.
pub fn verdict(tail_prob: f64, alpha: f64) -> Result<Verdict> {
    if !(alpha > 0.0 && alpha < 0.25) {
        return Err(Error::Config(format!("alpha must lie in (0, 0.25), got {alpha}")));
    }
    if !(0.0..=1.0).contains(&tail_prob) {
        return Err(Error::Discrepancy(format!("tail probability {tail_prob} outside [0, 1]")));
    }
    Ok(if tail_prob < alpha || tail_prob > 1.0 - alpha {
        Verdict::Fail
    } else if tail_prob < 2.0 * alpha || tail_prob > 1.0 - 2.0 * alpha {
        Verdict::Warn
    } else {
        Verdict::Pass
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub schema: String,
    /// Free-form label, typically the checked model's name.
    pub model: String,
    pub spec: DiscrepancySpec,
    #[serde(rename = "S")]
    pub draws: usize,
    pub seed: u64,
    pub alpha: f64,
    pub t_rep: Vec<f64>,
    pub t_obs: Vec<f64>,
    pub tail_prob: f64,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

impl CheckResult {
    fn build(
        model: String,
        spec: DiscrepancySpec,
        settings: &CheckSettings,
        t_rep: Vec<f64>,
        t_obs: Vec<f64>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        let tail_prob = tail_probability(&t_rep, &t_obs)?;
        Ok(Self {
            schema: SCHEMA_VERSION.into(),
            model,
            spec,
            draws: t_rep.len(),
            seed: settings.seed,
            alpha: settings.alpha,
            verdict: verdict(tail_prob, settings.alpha)?,
            t_rep,
            t_obs,
            tail_prob,
            warnings,
        })
    }

    /// True when every realized value equals the first (a point mass).
    pub fn realized_is_point_mass(&self) -> bool {
        self.t_obs.windows(2).all(|w| w[0] == w[1])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let result: Self = serde_json::from_str(text)?;
        if result.schema != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported check schema {:?}, expected {SCHEMA_VERSION:?}",
                result.schema
            )));
        }
        Ok(result)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSettings {
    /// Number of posterior draws `S` used by the check.
    pub draws: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl CheckSettings {
    pub fn new(draws: usize, seed: u64) -> Self {
        Self {
            draws,
            seed,
            alpha: DEFAULT_ALPHA,
        }
    }
}

/// Assignment check. Replicates `a_rep_s ~ p(a | x, phi_s)` and compares
/// the draw-marginal log-score of each replicate with that of the observed
/// assignments; the realized value is therefore constant across `s`.
pub fn check_assignment(
    family: &AssignmentFamily,
    data: &Dataset,
    phi_draws: &Draws,
    settings: &CheckSettings,
) -> Result<CheckResult> {
    let report = data.validate();
    if !report.ok {
        return Err(Error::Validation(report.to_string()));
    }
    let marginal = propensities(phi_draws, family, data)?;
    let used = phi_draws.subsample(settings.draws)?;
    let t_obs_value = log_score(&data.assignments, marginal.pi1())?;
    let streams = SeedStreams::new(settings.seed);
    let t_rep = (0..settings.draws)
        .into_par_iter()
        .map(|s| {
            let mut rng = streams.rng(Purpose::Replication, s as u64);
            let a_rep = family.forward(used.row(s), data, &mut rng)?;
            log_score(&a_rep, marginal.pi1())
        })
        .collect::<Result<Vec<f64>>>()?;
    CheckResult::build(
        family_label(family),
        DiscrepancySpec::assignment(),
        settings,
        t_rep,
        vec![t_obs_value; settings.draws],
        Vec::new(),
    )
}

fn family_label(family: &AssignmentFamily) -> String {
    match family.kind {
        crate::models::AssignmentKind::Logistic => "logistic".into(),
        crate::models::AssignmentKind::ShiftedLogistic { floor } => format!("shifted_logistic({floor})"),
    }
}

/// Inputs that only some realization modes need.
#[derive(Debug, Clone, Copy, Default)]
pub struct Realization<'a> {
    /// Required by IPW.
    pub propensities: Option<&'a PropensityVector>,
    /// Required by the oracle mode.
    pub truth: Option<&'a PotentialOutcomeTable>,
}

/// Outcome check. For each draw `theta_s`, the reference value is the
/// discrepancy on a replicated table `~ p(y(0), y(1) | x, theta_s)` and the
/// realized value comes from the discrepancy's realization mode.
pub fn check_outcome(
    family: &OutcomeFamily,
    data: &Dataset,
    theta_draws: &Draws,
    spec: DiscrepancySpec,
    realization: Realization<'_>,
    settings: &CheckSettings,
) -> Result<CheckResult> {
    if spec.kind == DiscrepancyKind::AssignmentLogScore {
        return Err(Error::Config("check_outcome needs an outcome discrepancy".into()));
    }
    let report = data.validate();
    if !report.ok {
        return Err(Error::Validation(report.to_string()));
    }
    family.check_design(data)?;
    family.check_support(&data.observed_outcomes)?;
    theta_draws.check_layout(&family.layout(data))?;
    let mut warnings = Vec::new();
    match spec.mode {
        RealizationMode::Ipw => {
            let p = realization.propensities.ok_or_else(|| {
                Error::Config("ipw realization needs propensities from an assignment model".into())
            })?;
            if p.len() != data.n {
                return Err(Error::LengthMismatch {
                    what: "propensities".into(),
                    got: p.len(),
                    expected: data.n,
                });
            }
            warnings.extend(p.weight_warning());
        }
        RealizationMode::Oracle => {
            let t = realization.truth.ok_or_else(|| {
                Error::Config("oracle realization needs the true potential-outcome table".into())
            })?;
            if t.len() != data.n {
                return Err(Error::LengthMismatch {
                    what: "potential outcome table".into(),
                    got: t.len(),
                    expected: data.n,
                });
            }
        }
        RealizationMode::Imputation => {}
    }
    let used = theta_draws.subsample(settings.draws)?;
    let streams = SeedStreams::new(settings.seed);
    let pairs = (0..settings.draws)
        .into_par_iter()
        .map(|s| {
            let theta = used.row(s);
            let dists = family.arm_dists(theta, data)?;
            let mut rep_rng = streams.rng(Purpose::Replication, s as u64);
            let table_rep = outcome_sample_table(&dists, &mut rep_rng);
            let terms = match spec.kind {
                DiscrepancyKind::OutcomeLogLik => TermFunctions::from_dists(dists.clone(), data.n),
                _ => TermFunctions::ate_mse_from_cate(
                    dists.iter().map(|d| d[1].mean() - d[0].mean()).collect(),
                )?,
            };
            let t_rep = terms.full(&table_rep)?;
            let t_obs = match spec.mode {
                RealizationMode::Ipw => realize_ipw(
                    &terms,
                    data,
                    realization.propensities.expect("checked above"),
                    spec.self_normalized,
                )?,
                RealizationMode::Imputation => {
                    let mut imp_rng = streams.rng(Purpose::Imputation, s as u64);
                    terms.full(&impute_from_dists(&dists, data, &mut imp_rng))?
                }
                RealizationMode::Oracle => terms.full(realization.truth.expect("checked above"))?,
            };
            Ok((t_rep, t_obs))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (t_rep, t_obs) = pairs.into_iter().unzip();
    CheckResult::build(family.name().into(), spec, settings, t_rep, t_obs, warnings)
}
