//! Posterior sampling for the assignment and outcome parameters.
//!
//! The posterior factorizes, so `phi` and `theta` are fit independently:
//! the assignment fit never reads outcomes and the outcome fit never reads
//! the assignment model.

mod diagnostics;
mod draws;
mod gibbs;
mod metropolis;
mod paired;

pub use diagnostics::{effective_sample_size, potential_scale_reduction, EssEstimate};
pub use draws::{ChainMetadata, Draws, PosteriorDraws};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{AssignmentFamily, OutcomeFamily, OutcomeKind, ParamLayout};
use crate::rng::{Purpose, SeedStreams};

/// R-hat below this and ESS above [`ESS_THRESHOLD`] count as converged.
pub const RHAT_THRESHOLD: f64 = 1.05;
pub const ESS_THRESHOLD: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Total retained draws `S` after thinning across chains.
    pub draws: usize,
    pub burn_in: usize,
    pub chains: usize,
    /// Every `thin`-th post-burn-in iteration is stored; chains run
    /// `draws * thin` iterations after burn-in.
    pub thin: usize,
    /// Initial random-walk proposal scale on the unconstrained space.
    pub step_scale: f64,
    pub adapt_target: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            draws: 1000,
            burn_in: 2000,
            chains: 4,
            thin: 1,
            step_scale: 0.1,
            adapt_target: 0.30,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    /// Iterations per chain after burn-in, before thinning.
    pub fn post_burn_in(&self) -> usize {
        self.draws * self.thin
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::Config("sampler draws must be at least 1".into()));
        }
        if self.chains == 0 {
            return Err(Error::Config("sampler chains must be at least 1".into()));
        }
        if self.thin == 0 {
            return Err(Error::Config("sampler thin must be at least 1".into()));
        }
        if !(self.adapt_target > 0.0 && self.adapt_target < 1.0) {
            return Err(Error::Config(format!(
                "adapt_target must lie in (0, 1), got {}",
                self.adapt_target
            )));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::Config(format!(
                "step_scale must be positive, got {}",
                self.step_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub names: Vec<String>,
    /// Per-parameter ESS summed over chains (retained segments).
    pub ess: Vec<f64>,
    /// Per-parameter split R-hat; `None` with a single chain or short chains.
    pub rhat: Vec<Option<f64>>,
    pub acceptance_rate: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn converged(&self) -> bool {
        self.warnings.is_empty()
    }

    fn from_chains(names: Vec<String>, chains: &[Vec<Vec<f64>>], acceptance_rate: Vec<f64>) -> Self {
        let total: usize = chains.iter().map(|c| c.len()).sum();
        let mut ess = Vec::with_capacity(names.len());
        let mut rhat = Vec::with_capacity(names.len());
        let mut warnings = Vec::new();
        for (j, name) in names.iter().enumerate() {
            let columns: Vec<Vec<f64>> = chains
                .iter()
                .map(|c| c.iter().map(|row| row[j]).collect())
                .collect();
            let mut e = 0.0;
            let mut constant = true;
            let mut measured = false;
            for col in &columns {
                if let Ok(est) = effective_sample_size(col) {
                    e += est.ess;
                    constant &= est.constant;
                    measured = true;
                }
            }
            let e = e.min(total as f64);
            if measured && constant {
                warnings.push(format!("{name}: chain is constant"));
            } else if measured && e <= ESS_THRESHOLD {
                warnings.push(format!("{name}: effective sample size {e:.1} <= {ESS_THRESHOLD}"));
            }
            ess.push(e);
            let r = potential_scale_reduction(&columns).ok();
            if let Some(r) = r {
                if !(r < RHAT_THRESHOLD) {
                    warnings.push(format!("{name}: R-hat {r:.3} >= {RHAT_THRESHOLD}"));
                }
            }
            rhat.push(r);
        }
        Self {
            names,
            ess,
            rhat,
            acceptance_rate,
            warnings,
        }
    }
}

/// Draws for one parameter block plus their diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub draws: Draws,
    pub diagnostics: Diagnostics,
    pub metadata: ChainMetadata,
}

pub(crate) struct ChainResult {
    /// Retained draws on the constrained scale.
    pub draws: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
}

/// Indices of `keep` draws spread evenly over `len`.
fn even_indices(len: usize, keep: usize) -> impl Iterator<Item = usize> {
    (0..keep).map(move |k| k * len / keep)
}

fn assemble(
    names: Vec<String>,
    chains: Vec<ChainResult>,
    config: &SamplerConfig,
) -> Fit {
    let per_chain: Vec<Vec<Vec<f64>>> = chains
        .iter()
        .map(|c| c.draws.iter().step_by(config.thin).cloned().collect())
        .collect();
    let acceptance: Vec<f64> = chains.iter().map(|c| c.acceptance_rate).collect();
    let diagnostics = Diagnostics::from_chains(names.clone(), &per_chain, acceptance);
    let n_chains = per_chain.len();
    let mut rows = Vec::with_capacity(config.draws);
    for (c, chain) in per_chain.iter().enumerate() {
        let keep = config.draws / n_chains + usize::from(c < config.draws % n_chains);
        rows.extend(even_indices(chain.len(), keep).map(|i| chain[i].clone()));
    }
    Fit {
        draws: Draws::new(names, rows).expect("rows share the layout width"),
        diagnostics,
        metadata: ChainMetadata {
            chain_lengths: per_chain.iter().map(|c| c.len()).collect(),
            burn_in: config.burn_in,
            seed: config.seed,
        },
    }
}

fn run_chains<F>(config: &SamplerConfig, purpose: Purpose, chain: F) -> Result<Vec<ChainResult>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<ChainResult> + Sync,
{
    let streams = SeedStreams::new(config.seed);
    (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = streams.rng(purpose, c as u64);
            chain(&mut rng)
        })
        .collect()
}

/// Adaptive Metropolis on a layout with log-transformed positive entries.
fn fit_metropolis<F>(
    layout: &ParamLayout,
    log_density: F,
    config: &SamplerConfig,
    purpose: Purpose,
) -> Result<Fit>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let init = layout.to_unconstrained(&layout.initial_values());
    let per_chain_keep = config.post_burn_in();
    let chains = run_chains(config, purpose, |rng| {
        let mut buf = vec![0.0; layout.len()];
        let target = |z: &[f64]| {
            let mut theta = vec![0.0; z.len()];
            layout.from_unconstrained(z, &mut theta);
            log_density(&theta) + layout.log_jacobian(z)
        };
        let run = metropolis::run_chain(
            target,
            init.clone(),
            config.step_scale,
            config.adapt_target,
            config.burn_in,
            per_chain_keep,
            rng,
        )?;
        let draws = run
            .draws
            .iter()
            .map(|z| {
                layout.from_unconstrained(z, &mut buf);
                buf.clone()
            })
            .collect();
        Ok(ChainResult {
            draws,
            acceptance_rate: run.acceptance_rate,
        })
    })?;
    Ok(assemble(layout.names(), chains, config))
}

/// Posterior draws of `phi` given `(x, a)`.
pub fn fit_assignment(family: &AssignmentFamily, data: &Dataset, config: &SamplerConfig) -> Result<Fit> {
    config.validate()?;
    family.check_design(data)?;
    let layout = family.layout(data);
    fit_metropolis(
        &layout,
        |phi| {
            let lp: f64 = phi.iter().map(|&v| family.prior.ln_pdf(v)).sum();
            lp + family.loglik_unchecked(phi, data)
        },
        config,
        Purpose::AssignmentFit,
    )
}

/// Posterior draws of `theta` given the observed-arm outcomes.
pub fn fit_outcome(family: &OutcomeFamily, data: &Dataset, config: &SamplerConfig) -> Result<Fit> {
    config.validate()?;
    family.check_design(data)?;
    family.check_support(&data.observed_outcomes)?;
    let layout = family.layout(data);
    match family.kind {
        OutcomeKind::GaussianLinear => gibbs::fit(family, data, config, &layout),
        OutcomeKind::PairedHierarchical { .. } => paired::fit(family, data, config, &layout),
        _ => fit_metropolis(
            &layout,
            |theta| family.prior_unchecked(theta, data, &layout) + family.loglik_unchecked(theta, data),
            config,
            Purpose::OutcomeFit,
        ),
    }
}
