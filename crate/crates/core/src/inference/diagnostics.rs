//! Effective sample size and split potential scale reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssEstimate {
    pub ess: f64,
    /// Set when the chain has zero variance; `ess` is then 0.
    pub constant: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Geyer's initial positive (and monotone) sequence estimator.
pub fn effective_sample_size(chain: &[f64]) -> Result<EssEstimate> {
    let n = chain.len();
    if n < 10 {
        return Err(Error::Config(format!(
            "effective sample size needs at least 10 draws, got {n}"
        )));
    }
    let m = mean(chain);
    let centered: Vec<f64> = chain.iter().map(|x| x - m).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let gamma0 = autocov(0);
    if !(gamma0 > 0.0) || gamma0 <= 1e-300 {
        return Ok(EssEstimate {
            ess: 0.0,
            constant: true,
        });
    }
    let mut sum_pairs = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / gamma0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        sum_pairs += pair;
        prev_pair = pair;
        lag += 2;
    }
    let tau = (2.0 * sum_pairs - 1.0).max(1.0 / n as f64);
    Ok(EssEstimate {
        ess: (n as f64 / tau).min(n as f64),
        constant: false,
    })
}

/// Split-R-hat over chains of equal length. Clamped below at 1.
pub fn potential_scale_reduction(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::Config(format!(
            "potential scale reduction needs at least 2 chains, got {}",
            chains.len()
        )));
    }
    let len = chains[0].len();
    if chains.iter().any(|c| c.len() != len) {
        return Err(Error::Config("chains must have equal length".into()));
    }
    if len < 10 {
        return Err(Error::Config(format!(
            "potential scale reduction needs chains of length >= 10, got {len}"
        )));
    }
    let half = len / 2;
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..half], &c[len - half..]])
        .collect();
    let m = halves.len() as f64;
    let n = half as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let grand = means.iter().sum::<f64>() / m;
    let between = n / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let within = halves
        .iter()
        .zip(&means)
        .map(|(h, mu)| h.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / m;
    if within <= 0.0 {
        return Ok(if between <= 0.0 { 1.0 } else { f64::INFINITY });
    }
    let var_plus = (n - 1.0) / n * within + between / n;
    Ok((var_plus / within).sqrt().max(1.0))
}
