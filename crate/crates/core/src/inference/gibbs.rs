//! Gibbs sampler for the Gaussian linear outcome model: exact normal draws
//! of the coefficients given `sigma2`, adaptive Metropolis on `log sigma2`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::metropolis::ScalarWalk;
use super::{assemble, run_chains, ChainResult, Fit, SamplerConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{gamma_ln_pdf, OutcomeFamily, ParamLayout, Prior};
use crate::rng::Purpose;

/// Draw from `N(Q^{-1} r, Q^{-1})` given the precision `Q`.
pub(crate) fn gaussian_from_precision<R: Rng + ?Sized>(
    precision: DMatrix<f64>,
    shift: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let dim = shift.len();
    let chol = precision
        .cholesky()
        .ok_or_else(|| Error::Sampler("conditional precision is not positive definite".into()))?;
    let mean = chol.solve(shift);
    let xi = DVector::<f64>::from_fn(dim, |_, _| rng.sample(StandardNormal));
    let noise = chol
        .l()
        .tr_solve_lower_triangular(&xi)
        .ok_or_else(|| Error::Sampler("singular Cholesky factor".into()))?;
    Ok(mean + noise)
}

pub(crate) fn normal_prior(prior: Prior, what: &str) -> Result<(f64, f64)> {
    match prior {
        Prior::Normal { mean, sd } => Ok((mean, sd * sd)),
        other => Err(Error::Config(format!("{what} prior must be normal, got {other:?}"))),
    }
}

pub(crate) fn gamma_prior(prior: Prior, what: &str) -> Result<(f64, f64)> {
    match prior {
        Prior::Gamma { shape, rate } => Ok((shape, rate)),
        other => Err(Error::Config(format!("{what} prior must be gamma, got {other:?}"))),
    }
}

struct Moments {
    ztz: DMatrix<f64>,
    zty: DVector<f64>,
    yty: f64,
    n: f64,
}

fn moments(family: &OutcomeFamily, data: &Dataset, p: usize) -> Moments {
    let mut ztz = DMatrix::<f64>::zeros(p, p);
    let mut zty = DVector::<f64>::zeros(p);
    let mut yty = 0.0;
    let mut z = vec![0.0; p];
    for i in 0..data.n {
        let row = data.covariates.row(i);
        let mut k = 0;
        if family.intercept {
            z[k] = 1.0;
            k += 1;
        }
        for &c in &family.columns {
            z[k] = row[c];
            k += 1;
        }
        z[k] = f64::from(data.assignments[i]);
        let y = data.observed_outcomes[i];
        for a in 0..p {
            zty[a] += z[a] * y;
            for b in 0..p {
                ztz[(a, b)] += z[a] * z[b];
            }
        }
        yty += y * y;
    }
    Moments {
        ztz,
        zty,
        yty,
        n: data.n as f64,
    }
}

pub(super) fn fit(
    family: &OutcomeFamily,
    data: &Dataset,
    config: &SamplerConfig,
    layout: &ParamLayout,
) -> Result<Fit> {
    let (m0, v0) = normal_prior(family.coef_prior, "coefficient")?;
    let (shape, rate) = gamma_prior(family.positive_prior, "sigma2")?;
    let p = layout.len() - 1;
    let mom = moments(family, data, p);
    let prior_prec = DMatrix::<f64>::identity(p, p) / v0;
    let prior_shift = DVector::<f64>::from_element(p, m0 / v0);

    let chains = run_chains(config, Purpose::OutcomeFit, |rng| {
        let mut u = 0.0f64; // log sigma2
        let mut walk = ScalarWalk::new(config.step_scale);
        let mut draws = Vec::with_capacity(config.post_burn_in());
        for t in 0..config.burn_in + config.post_burn_in() {
            let s2 = u.exp();
            let precision = &mom.ztz / s2 + &prior_prec;
            let shift = &mom.zty / s2 + &prior_shift;
            let beta = gaussian_from_precision(precision, &shift, rng)?;

            let rss = mom.yty - 2.0 * beta.dot(&mom.zty) + (&mom.ztz * &beta).dot(&beta);
            let rss = rss.max(0.0);
            let target = |u: f64| {
                let s2 = u.exp();
                -0.5 * mom.n * u - 0.5 * rss / s2 + gamma_ln_pdf(s2, shape, rate) + u
            };
            let adapting = t < config.burn_in;
            if t == config.burn_in {
                walk.reset_counts();
            }
            walk.step(&mut u, target, t, adapting.then_some(config.adapt_target), rng);
            if !adapting {
                let mut row: Vec<f64> = beta.iter().copied().collect();
                row.push(u.exp());
                draws.push(row);
            }
        }
        Ok(ChainResult {
            draws,
            acceptance_rate: walk.accepted as f64 / walk.proposed.max(1) as f64,
        })
    })?;
    Ok(assemble(layout.names(), chains, config))
}
