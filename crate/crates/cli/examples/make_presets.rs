//! Regenerates the bundled preset tables in `data/`.
//!
//! Both tables are simulated stand-ins with the column layout of the public
//! roach-infestation and reading-program studies. Run with
//! `cargo run -p causalcheck-cli --example make_presets`.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Poisson, StandardNormal};

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Counts with mean `t exp(2 - 0.4 s + 0.5 r - 0.5 a)` and variance 30 times
/// the mean (gamma-Poisson mixture), where `r = roach1 / 100`.
fn roaches(seed: u64) -> String {
    const KAPPA: f64 = 30.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = LogNormal::new(40f64.ln(), 1.2).unwrap();
    let exposure_levels = [1.0, 1.0, 1.0, 0.8, 0.6, 1.2, 1.4];
    let mut out = String::from("y,roach1,treatment,senior,exposure2\n");
    for _ in 0..262 {
        let senior = u8::from(rng.random::<f64>() < 0.27);
        let roach1 = if rng.random::<f64>() < 0.2 {
            0.0
        } else {
            (level.sample(&mut rng).min(450.0) * 100.0).round() / 100.0
        };
        let base = exposure_levels[rng.random_range(0..exposure_levels.len())];
        let exposure = (base * rng.random_range(0.8f64..1.2) * 100.0).round() / 100.0;
        let r = roach1 / 100.0;
        let s = f64::from(senior);
        let treatment = u8::from(rng.random::<f64>() < logistic(0.6 - 0.6 * s + 0.3 * r));
        let mu = exposure * (2.0 - 0.4 * s + 0.5 * r - 0.5 * f64::from(treatment)).exp();
        let shape = mu / (KAPPA - 1.0);
        let rate = Gamma::new(shape, mu / shape).unwrap().sample(&mut rng);
        let y = Poisson::new(rate.max(1e-12)).unwrap().sample(&mut rng);
        writeln!(out, "{y},{roach1},{treatment},{senior},{exposure}").unwrap();
    }
    out
}

/// Paired classes: `post = b_pair + m_g pre + theta_g a + N(0, sigma_g^2)`,
/// `b_pair ~ N(mu_g, tau_g^2)`, one treated and one control class per pair.
fn electric(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs_per_grade = [21, 34, 20, 21];
    let pre_mean = [13.0, 40.0, 96.0, 104.0];
    let pre_sd = [5.0, 12.0, 14.0, 10.0];
    let slope = [1.4, 0.6, 0.9, 0.9];
    let mu = [52.0, 69.0, 18.0, 16.0];
    let effect = [8.0, 4.0, 2.0, 1.0];
    let sigma = [6.0, 5.0, 4.0, 3.0];
    let tau = [4.0, 4.0, 3.0, 3.0];
    let mut out = String::from("pair,grade,treatment,pre_test,post_test\n");
    let mut pair = 0;
    for g in 0..4 {
        for _ in 0..pairs_per_grade[g] {
            pair += 1;
            let mut z = || -> f64 { rng.sample(StandardNormal) };
            let school = pre_mean[g] + 0.9 * pre_sd[g] * z();
            let b = mu[g] + tau[g] * z();
            for treatment in [1u8, 0] {
                let pre = ((school + 0.3 * pre_sd[g] * z()) * 10.0).round() / 10.0;
                let post = b + slope[g] * pre + effect[g] * f64::from(treatment) + sigma[g] * z();
                let post = (post * 10.0).round() / 10.0;
                writeln!(out, "{pair},{},{treatment},{pre},{post}", g + 1).unwrap();
            }
        }
    }
    out
}

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("roaches.csv"), roaches(0))?;
    std::fs::write(dir.join("electric.csv"), electric(0))?;
    println!("wrote {}", dir.display());
    Ok(())
}
