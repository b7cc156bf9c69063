//! Run configuration, read from a TOML file of flat keys plus a few tables.
//!
//! ```toml
//! seed = 3
//! out = "results/roaches"
//! alpha = 0.05
//! holdout = 0.5
//! standardize = true
//! checks = ["assignment_log_score", "ate_mse/ipw"]
//!
//! [dataset]
//! source = "preset"      # or "csv" (path, truth) or "synthetic" (scenario keys)
//! name = "roaches"
//!
//! [assignment]
//! family = "logistic"    # or "shifted_logistic" (floor) or "known" (probability)
//! covariates = ["roach1", "senior"]
//!
//! [[outcome]]
//! name = "poisson"
//! family = "poisson"     # gaussian_linear | poisson | negbin | heteroscedastic | paired
//! covariates = ["roach1", "senior"]
//!
//! [sampler]
//! draws = 1000
//! burn_in = 2000
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use causalcheck::discrepancy::{DiscrepancyKind, DiscrepancySpec, RealizationMode};
use causalcheck::inference::SamplerConfig;
use causalcheck::models::{AssignmentFamily, OutcomeFamily, PairedVariant};
use causalcheck::synthgen::ScenarioConfig;
use causalcheck::Dataset;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Fraction of units withheld from the assignment fit; the assignment
    /// check scores only those units.
    #[serde(default)]
    pub holdout: Option<f64>,
    /// Center and scale every covariate before fitting.
    #[serde(default)]
    pub standardize: bool,
    /// Draws per check; defaults to `sampler.draws`.
    #[serde(default)]
    pub check_draws: Option<usize>,
    pub dataset: DatasetSource,
    #[serde(default)]
    pub assignment: Option<AssignmentSpec>,
    #[serde(default)]
    pub outcome: Vec<OutcomeSpec>,
    #[serde(default)]
    pub sampler: SamplerConfig,
    /// Discrepancy labels; `check` needs at least one.
    #[serde(default)]
    pub checks: Vec<String>,
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn default_alpha() -> f64 {
    causalcheck::ppc::DEFAULT_ALPHA
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    /// Core CSV layout; `truth` optionally points at a generated truth JSON
    /// (needed by oracle checks).
    Csv {
        path: PathBuf,
        #[serde(default)]
        truth: Option<PathBuf>,
    },
    Synthetic(ScenarioConfig),
    Preset { name: Preset },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Roaches,
    Electric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentFamilyName {
    Logistic,
    ShiftedLogistic,
    /// Fixed, known treatment probability (randomized designs); no fit.
    Known,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentSpec {
    pub family: AssignmentFamilyName,
    /// Covariate names; all columns when absent.
    #[serde(default)]
    pub covariates: Option<Vec<String>>,
    #[serde(default = "yes")]
    pub intercept: bool,
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default)]
    pub probability: Option<f64>,
}

/// The assignment side once names are resolved against a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum AssignmentModel {
    Fitted(AssignmentFamily),
    Known(f64),
}

impl AssignmentSpec {
    pub fn resolve(&self, data: &Dataset) -> Result<AssignmentModel> {
        let columns = || resolve_columns(self.covariates.as_deref(), &[], data);
        Ok(match self.family {
            AssignmentFamilyName::Logistic => {
                AssignmentModel::Fitted(AssignmentFamily::logistic(columns()?, self.intercept))
            }
            AssignmentFamilyName::ShiftedLogistic => {
                let floor = self
                    .floor
                    .context("shifted_logistic assignment needs `floor`")?;
                if !(0.0..1.0).contains(&floor) {
                    bail!("shifted_logistic floor must lie in [0, 1), got {floor}");
                }
                AssignmentModel::Fitted(AssignmentFamily::shifted_logistic(
                    columns()?,
                    self.intercept,
                    floor,
                ))
            }
            AssignmentFamilyName::Known => {
                let p = self
                    .probability
                    .context("known assignment needs `probability`")?;
                if !(p > 0.0 && p < 1.0) {
                    bail!("known treatment probability must lie in (0, 1), got {p}");
                }
                AssignmentModel::Known(p)
            }
        })
    }

    pub fn label(&self) -> String {
        match self.family {
            AssignmentFamilyName::Logistic => "logistic".into(),
            AssignmentFamilyName::ShiftedLogistic => {
                format!("shifted_logistic({})", self.floor.unwrap_or(f64::NAN))
            }
            AssignmentFamilyName::Known => {
                format!("known({})", self.probability.unwrap_or(f64::NAN))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeFamilyName {
    GaussianLinear,
    Poisson,
    Negbin,
    Heteroscedastic,
    Paired,
}

/// Paired model structure: `a` grade-specific with pair intercepts, `b`
/// shared slope and effect, `c` one shared intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    A,
    B,
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSpec {
    /// Report label; defaults to the family name.
    #[serde(default)]
    pub name: Option<String>,
    pub family: OutcomeFamilyName,
    /// Covariate names; all columns when absent.
    #[serde(default)]
    pub covariates: Option<Vec<String>>,
    /// Covariates removed from the design (deliberately misspecified fits).
    #[serde(default)]
    pub drop: Vec<String>,
    #[serde(default = "yes")]
    pub intercept: bool,
    #[serde(default)]
    pub variant: Option<VariantName>,
    /// Pre-treatment score column of the paired model.
    #[serde(default)]
    pub pre_score: Option<String>,
}

impl OutcomeSpec {
    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match (self.family, self.variant) {
            (OutcomeFamilyName::Paired, Some(v)) => format!("paired_{v:?}").to_lowercase(),
            (f, _) => format!("{f:?}")
                .chars()
                .enumerate()
                .flat_map(|(i, c)| {
                    let sep = (i > 0 && c.is_uppercase()).then_some('_');
                    sep.into_iter().chain(c.to_lowercase())
                })
                .collect(),
        }
    }

    pub fn resolve(&self, data: &Dataset) -> Result<OutcomeFamily> {
        if self.family == OutcomeFamilyName::Paired {
            let variant = match self.variant.context("paired outcome needs `variant` (a, b or c)")? {
                VariantName::A => PairedVariant::GradeSpecific,
                VariantName::B => PairedVariant::SharedSlopeEffect,
                VariantName::C => PairedVariant::SharedIntercept,
            };
            let pre = self
                .pre_score
                .as_deref()
                .context("paired outcome needs `pre_score`")?;
            if data.pairs.is_none() {
                bail!("paired outcome needs a dataset with pair and grade columns");
            }
            return Ok(OutcomeFamily::paired(variant, column_index(data, pre)?));
        }
        let columns = resolve_columns(self.covariates.as_deref(), &self.drop, data)?;
        Ok(match self.family {
            OutcomeFamilyName::GaussianLinear => OutcomeFamily::gaussian_linear(columns, self.intercept),
            OutcomeFamilyName::Poisson => OutcomeFamily::poisson(columns, self.intercept),
            OutcomeFamilyName::Negbin => OutcomeFamily::negbin(columns, self.intercept),
            OutcomeFamilyName::Heteroscedastic => OutcomeFamily::heteroscedastic(columns, self.intercept),
            OutcomeFamilyName::Paired => unreachable!("handled above"),
        })
    }
}

fn column_index(data: &Dataset, name: &str) -> Result<usize> {
    data.covariates.column_index(name).with_context(|| {
        format!(
            "unknown covariate `{name}`; dataset has {:?}",
            data.covariates.names()
        )
    })
}

fn resolve_columns(names: Option<&[String]>, drop: &[String], data: &Dataset) -> Result<Vec<usize>> {
    for d in drop {
        column_index(data, d)?;
    }
    let all = data.covariates.names().to_vec();
    names
        .unwrap_or(&all)
        .iter()
        .filter(|n| !drop.contains(n))
        .map(|n| column_index(data, n))
        .collect()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).context("malformed run configuration")?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path`; relative dataset paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config = Self::from_toml(&text)
            .with_context(|| format!("in config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let DatasetSource::Csv { path, truth } = &mut config.dataset {
            *path = base.join(&*path);
            if let Some(t) = truth {
                *t = base.join(&*t);
            }
        }
        Ok(config)
    }

    pub fn specs(&self) -> Result<Vec<DiscrepancySpec>> {
        self.checks
            .iter()
            .map(|c| c.parse::<DiscrepancySpec>().map_err(Into::into))
            .collect()
    }

    pub fn check_draws(&self) -> usize {
        self.check_draws.unwrap_or(self.sampler.draws)
    }

    pub fn validate(&self) -> Result<()> {
        causalcheck::ppc::verdict(0.5, self.alpha)?;
        self.sampler.validate()?;
        if let Some(h) = self.holdout {
            if !(h > 0.0 && h < 1.0) {
                bail!("holdout fraction must lie in (0, 1), got {h}");
            }
        }
        let s = self.check_draws();
        if s == 0 || s > self.sampler.draws {
            bail!(
                "check_draws must lie in 1..={} (the sampler's draws), got {s}",
                self.sampler.draws
            );
        }
        let specs = self.specs()?;
        let known = matches!(
            &self.assignment,
            Some(AssignmentSpec {
                family: AssignmentFamilyName::Known,
                ..
            })
        );
        for spec in &specs {
            if spec.kind == DiscrepancyKind::AssignmentLogScore {
                if self.assignment.is_none() || known {
                    bail!("assignment_log_score needs a fitted assignment model");
                }
            } else {
                if self.outcome.is_empty() {
                    bail!("check `{}` needs at least one [[outcome]] model", spec.label());
                }
                if spec.mode == RealizationMode::Ipw && self.assignment.is_none() {
                    bail!("check `{}` needs an [assignment] model for propensities", spec.label());
                }
            }
        }
        let mut labels: Vec<String> = self.outcome.iter().map(OutcomeSpec::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            bail!("duplicate outcome model name `{}`", w[0]);
        }
        Ok(())
    }
}
