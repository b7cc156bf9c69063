use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use statrs::function::gamma::ln_gamma;

use super::normal_ln_pdf;

/// Conditional distribution of one unit's outcome under one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmDist {
    Normal { mean: f64, var: f64 },
    Poisson { mean: f64 },
    /// Mean `mean`, variance `mean + mean^2 / size`.
    NegBin { mean: f64, size: f64 },
}

impl ArmDist {
    pub fn mean(&self) -> f64 {
        match *self {
            ArmDist::Normal { mean, .. } | ArmDist::Poisson { mean } | ArmDist::NegBin { mean, .. } => {
                mean
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ArmDist::Normal { var, .. } => var,
            ArmDist::Poisson { mean } => mean,
            ArmDist::NegBin { mean, size } => mean + mean * mean / size,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, ArmDist::Normal { .. })
    }

    /// Log density (or mass). `-inf` outside the support.
    pub fn ln_pdf(&self, y: f64) -> f64 {
        match *self {
            ArmDist::Normal { mean, var } => {
                if var > 0.0 {
                    normal_ln_pdf(y, mean, var)
                } else {
                    f64::NEG_INFINITY
                }
            }
            ArmDist::Poisson { mean } => {
                if !is_count(y) {
                    return f64::NEG_INFINITY;
                }
                if mean <= 0.0 {
                    return if y == 0.0 { 0.0 } else { f64::NEG_INFINITY };
                }
                y * mean.ln() - mean - ln_gamma(y + 1.0)
            }
            ArmDist::NegBin { mean, size } => {
                if !is_count(y) || size <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                if mean <= 0.0 {
                    return if y == 0.0 { 0.0 } else { f64::NEG_INFINITY };
                }
                ln_gamma(y + size) - ln_gamma(size) - ln_gamma(y + 1.0)
                    + size * (size / (size + mean)).ln()
                    + y * (mean / (size + mean)).ln()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ArmDist::Normal { mean, var } => {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                mean + var.max(0.0).sqrt() * z
            }
            ArmDist::Poisson { mean } => sample_poisson(mean, rng),
            ArmDist::NegBin { mean, size } => {
                if mean <= 0.0 {
                    return 0.0;
                }
                let rate = match Gamma::new(size, mean / size) {
                    Ok(g) => g.sample(rng),
                    Err(_) => mean,
                };
                sample_poisson(rate, rng)
            }
        }
    }
}

fn is_count(y: f64) -> bool {
    y >= 0.0 && y.fract() == 0.0 && y.is_finite()
}

fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if !(mean > 1e-300) {
        return 0.0;
    }
    if mean > 1e12 {
        // Poisson is numerically Gaussian here and rand_distr refuses huge rates.
        let n = Normal::new(mean, mean.sqrt()).expect("finite mean");
        return n.sample(rng).round().max(0.0);
    }
    Poisson::new(mean).map_or(mean.round(), |p| p.sample(rng))
}
