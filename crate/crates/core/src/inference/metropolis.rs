//! Adaptive random-walk Metropolis on an unconstrained vector.
//!
//! During burn-in the proposal covariance tracks the empirical covariance of
//! the chain and a global scale follows a Robbins-Monro recursion toward the
//! target acceptance rate. Both freeze at the end of burn-in, so retained
//! draws come from a fixed Metropolis kernel.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub(crate) struct ChainRun {
    /// Retained draws in the unconstrained space.
    pub draws: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
}

/// Robbins-Monro step size for iteration `t`.
pub(crate) fn rm_gain(t: usize) -> f64 {
    1.0 / ((t + 1) as f64).powf(0.6)
}

pub(crate) fn run_chain<F, R>(
    log_target: F,
    init: Vec<f64>,
    step_scale: f64,
    adapt_target: f64,
    burn_in: usize,
    keep: usize,
    rng: &mut R,
) -> Result<ChainRun>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let d = init.len();
    let mut z = init;
    let mut lp = log_target(&z);
    if !lp.is_finite() {
        return Err(Error::Sampler(format!(
            "log target is not finite at the initial point ({lp})"
        )));
    }
    let mut chol = DMatrix::<f64>::identity(d, d) * step_scale;
    let mut log_scale = 0.0f64;
    let mut run_mean = DVector::<f64>::zeros(d);
    let mut run_m2 = DMatrix::<f64>::zeros(d, d);
    let mut proposal = vec![0.0; d];
    let mut accepted_burn = 0usize;
    let mut accepted_keep = 0usize;
    let mut draws = Vec::with_capacity(keep);
    let restart = if burn_in >= 2000 { burn_in / 2 } else { usize::MAX };

    for t in 0..burn_in + keep {
        let adapting = t < burn_in;
        let scale = log_scale.exp();
        let xi = DVector::<f64>::from_fn(d, |_, _| rng.sample(StandardNormal));
        let step = &chol * xi;
        for j in 0..d {
            proposal[j] = z[j] + scale * step[j];
        }
        let lp_new = log_target(&proposal);
        let log_ratio = lp_new - lp;
        let accept_prob = if log_ratio.is_nan() {
            0.0
        } else {
            log_ratio.min(0.0).exp()
        };
        if rng.random::<f64>() < accept_prob {
            z.copy_from_slice(&proposal);
            lp = lp_new;
            if adapting {
                accepted_burn += 1;
            } else {
                accepted_keep += 1;
            }
        }
        if adapting {
            log_scale += rm_gain(t) * (accept_prob - adapt_target);
            // Welford update of the running mean and scatter matrix; the
            // first half of a long burn-in is dropped from the estimate.
            if t == restart {
                run_mean.fill(0.0);
                run_m2.fill(0.0);
            }
            let n = t + 1 - if t >= restart { restart } else { 0 };
            let zt = DVector::from_column_slice(&z);
            let delta = &zt - &run_mean;
            run_mean += &delta / n as f64;
            let delta2 = &zt - &run_mean;
            run_m2 += &delta * delta2.transpose();
            if n >= 200 && n % 100 == 0 && n + 1 < burn_in {
                let cov = &run_m2 / (n - 1) as f64 * (2.38 * 2.38 / d as f64)
                    + DMatrix::<f64>::identity(d, d) * 1e-10;
                if let Some(c) = cov.cholesky() {
                    // Rescale so the overall proposal size is continuous
                    // across the switch; Robbins-Monro takes it from there.
                    if n == 200 && t < restart {
                        log_scale = 0.0;
                    }
                    chol = c.l();
                }
            }
        } else {
            draws.push(z.clone());
        }
    }
    if burn_in > 0 && accepted_burn == 0 {
        return Err(Error::Sampler(format!(
            "all {burn_in} burn-in proposals were rejected; check the step scale"
        )));
    }
    Ok(ChainRun {
        draws,
        acceptance_rate: if keep > 0 {
            accepted_keep as f64 / keep as f64
        } else {
            accepted_burn as f64 / burn_in.max(1) as f64
        },
    })
}

/// One adaptive scalar random-walk step on the log scale of a positive
/// parameter. Returns whether the proposal was accepted.
pub(crate) struct ScalarWalk {
    pub log_step: f64,
    pub accepted: usize,
    pub proposed: usize,
}

impl ScalarWalk {
    pub fn new(step: f64) -> Self {
        Self {
            log_step: step.ln(),
            accepted: 0,
            proposed: 0,
        }
    }

    /// `log_target(u)` must include the Jacobian of the log transform.
    pub fn step<F, R>(&mut self, u: &mut f64, log_target: F, t: usize, adapt: Option<f64>, rng: &mut R)
    where
        F: Fn(f64) -> f64,
        R: Rng + ?Sized,
    {
        let z: f64 = rng.sample(StandardNormal);
        let proposal = *u + self.log_step.exp() * z;
        let log_ratio = log_target(proposal) - log_target(*u);
        let accept_prob = if log_ratio.is_nan() {
            0.0
        } else {
            log_ratio.min(0.0).exp()
        };
        self.proposed += 1;
        if rng.random::<f64>() < accept_prob {
            *u = proposal;
            self.accepted += 1;
        }
        if let Some(target) = adapt {
            self.log_step += rm_gain(t) * (accept_prob - target);
        }
    }

    pub fn reset_counts(&mut self) {
        self.accepted = 0;
        self.proposed = 0;
    }
}
