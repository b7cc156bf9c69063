//! Metropolis-within-Gibbs for the paired hierarchical normal model.
//!
//! Given the scale parameters, every location parameter (pair intercepts,
//! slopes, effects and grade means) is jointly Gaussian and drawn exactly in
//! one block. The scales `sigma_g` and `tau_g` get adaptive scalar random
//! walks on the log scale.

use nalgebra::{DMatrix, DVector};

use super::gibbs::{gamma_prior, gaussian_from_precision, normal_prior};
use super::metropolis::ScalarWalk;
use super::{assemble, run_chains, ChainResult, Fit, SamplerConfig};
use crate::data::Dataset;
use crate::error::Result;
use crate::models::{gamma_ln_pdf, OutcomeFamily, ParamLayout};
use crate::rng::Purpose;

struct Unit {
    y: f64,
    grade: usize,
    /// Positions in the location vector and their design values.
    features: [(usize, f64); 3],
}

pub(super) fn fit(
    family: &OutcomeFamily,
    data: &Dataset,
    config: &SamplerConfig,
    layout: &ParamLayout,
) -> Result<Fit> {
    let idx = family
        .paired_index(data)
        .expect("check_design guarantees pair structure");
    let pairs = data.pairs.as_ref().expect("pair structure");
    let pair_grades = pairs.pair_grades();
    let (m0, v0) = normal_prior(family.coef_prior, "location")?;
    let (shape, rate) = gamma_prior(family.positive_prior, "scale")?;
    let pre = family.columns[0];

    // Location vector = theta[b] ++ theta[m] ++ theta[theta] ++ theta[mu].
    let loc_slots: Vec<usize> = idx
        .b
        .clone()
        .chain(idx.m.clone())
        .chain(idx.theta.clone())
        .chain(idx.mu.clone())
        .collect();
    let q = loc_slots.len();
    let local = |slot: usize| loc_slots.iter().position(|&s| s == slot).expect("location slot");
    let units: Vec<Unit> = (0..data.n)
        .map(|i| {
            let g = pairs.grade[i];
            let k = idx.effect_slot(g);
            Unit {
                y: data.observed_outcomes[i],
                grade: g,
                features: [
                    (local(idx.b.start + idx.intercept_slot(pairs.pair[i])), 1.0),
                    (local(idx.m.start + k), data.covariates.get(i, pre)),
                    (local(idx.theta.start + k), f64::from(data.assignments[i])),
                ],
            }
        })
        .collect();
    let n_grades = idx.sigma.len();
    let mut grade_units = vec![0usize; n_grades];
    for u in &units {
        grade_units[u.grade] += 1;
    }
    let mut grade_pairs = vec![0usize; n_grades];
    for &g in &pair_grades {
        grade_pairs[g] += 1;
    }

    let chains = run_chains(config, Purpose::OutcomeFit, |rng| {
        let mut theta = layout.initial_values();
        let mut sigma_walks: Vec<ScalarWalk> =
            (0..n_grades).map(|_| ScalarWalk::new(config.step_scale)).collect();
        let mut tau_walks: Vec<ScalarWalk> =
            (0..idx.tau.len()).map(|_| ScalarWalk::new(config.step_scale)).collect();
        let mut draws = Vec::with_capacity(config.post_burn_in());
        for t in 0..config.burn_in + config.post_burn_in() {
            // Location block.
            let mut prec = DMatrix::<f64>::zeros(q, q);
            let mut shift = DVector::<f64>::zeros(q);
            for u in &units {
                let s = theta[idx.sigma.start + u.grade];
                let w = 1.0 / (s * s);
                for &(a, fa) in &u.features {
                    shift[a] += w * u.y * fa;
                    for &(b, fb) in &u.features {
                        prec[(a, b)] += w * fa * fb;
                    }
                }
            }
            let flat_prior = |prec: &mut DMatrix<f64>, shift: &mut DVector<f64>, slot: usize| {
                let a = local(slot);
                prec[(a, a)] += 1.0 / v0;
                shift[a] += m0 / v0;
            };
            for slot in idx.m.clone().chain(idx.theta.clone()) {
                flat_prior(&mut prec, &mut shift, slot);
            }
            if idx.hierarchical() {
                for slot in idx.mu.clone() {
                    flat_prior(&mut prec, &mut shift, slot);
                }
                for (p, &g) in pair_grades.iter().enumerate() {
                    let tau = theta[idx.tau.start + g];
                    let w = 1.0 / (tau * tau);
                    let b = local(idx.b.start + p);
                    let mu = local(idx.mu.start + g);
                    prec[(b, b)] += w;
                    prec[(mu, mu)] += w;
                    prec[(b, mu)] -= w;
                    prec[(mu, b)] -= w;
                }
            } else {
                for slot in idx.b.clone() {
                    flat_prior(&mut prec, &mut shift, slot);
                }
            }
            let loc = gaussian_from_precision(prec, &shift, rng)?;
            for (a, &slot) in loc_slots.iter().enumerate() {
                theta[slot] = loc[a];
            }

            let adapting = t < config.burn_in;
            if t == config.burn_in {
                sigma_walks.iter_mut().chain(tau_walks.iter_mut()).for_each(ScalarWalk::reset_counts);
            }
            let adapt = adapting.then_some(config.adapt_target);

            // Residual scales.
            let mut ss = vec![0.0; n_grades];
            for u in &units {
                let mean: f64 = u.features.iter().map(|&(a, f)| loc[a] * f).sum();
                ss[u.grade] += (u.y - mean).powi(2);
            }
            for g in 0..n_grades {
                let (n_g, ss_g) = (grade_units[g] as f64, ss[g]);
                let target = |v: f64| {
                    let s = v.exp();
                    -n_g * v - 0.5 * ss_g / (s * s) + gamma_ln_pdf(s, shape, rate) + v
                };
                let mut v = theta[idx.sigma.start + g].ln();
                sigma_walks[g].step(&mut v, target, t, adapt, rng);
                theta[idx.sigma.start + g] = v.exp();
            }

            // Pair-intercept scales.
            if idx.hierarchical() {
                let mut ss = vec![0.0; n_grades];
                for (p, &g) in pair_grades.iter().enumerate() {
                    ss[g] += (theta[idx.b.start + p] - theta[idx.mu.start + g]).powi(2);
                }
                for g in 0..n_grades {
                    let (n_g, ss_g) = (grade_pairs[g] as f64, ss[g]);
                    let target = |v: f64| {
                        let s = v.exp();
                        -n_g * v - 0.5 * ss_g / (s * s) + gamma_ln_pdf(s, shape, rate) + v
                    };
                    let mut v = theta[idx.tau.start + g].ln();
                    tau_walks[g].step(&mut v, target, t, adapt, rng);
                    theta[idx.tau.start + g] = v.exp();
                }
            }
            if !adapting {
                draws.push(theta.clone());
            }
        }
        let (acc, prop) = sigma_walks
            .iter()
            .chain(&tau_walks)
            .fold((0, 0), |(a, p), w| (a + w.accepted, p + w.proposed));
        Ok(ChainResult {
            draws,
            acceptance_rate: acc as f64 / prop.max(1) as f64,
        })
    })?;
    Ok(assemble(layout.names(), chains, config))
}
