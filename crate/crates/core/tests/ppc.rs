use causalcheck::discrepancy::{
    ate_mse_from_cate, log_score, propensities, DiscrepancyKind, DiscrepancySpec, RealizationMode,
};
use causalcheck::inference::{fit_assignment, fit_outcome, SamplerConfig};
use causalcheck::models::{AssignmentFamily, OutcomeFamily};
use causalcheck::ppc::{check_assignment, check_outcome, tail_probability, CheckSettings, Realization};
use causalcheck::synthgen::{generate, Scenario, ScenarioConfig};
use causalcheck::PotentialOutcomeTable;
use proptest::prelude::*;

const PHI: [f64; 3] = [1.2, -0.8, 0.4];
const THETA: [f64; 4] = [1.0, -0.5, 0.7, 0.9];

fn scenario(n: usize, scenario: Scenario, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        n,
        d: 3,
        scenario,
        true_phi: Some(PHI.to_vec()),
        true_theta: Some(THETA.to_vec()),
        seed,
        ..ScenarioConfig::default()
    }
}

fn sampler(seed: u64) -> SamplerConfig {
    SamplerConfig {
        draws: 200,
        burn_in: 1000,
        chains: 2,
        seed,
        ..SamplerConfig::default()
    }
}

fn columns() -> Vec<usize> {
    vec![0, 1, 2]
}

#[test]
fn self_checks_are_calibrated() {
    let runs = 100;
    let assign = AssignmentFamily::logistic(columns(), false);
    let outcome = OutcomeFamily::gaussian_linear(columns(), false);
    let ipw = DiscrepancySpec::outcome(DiscrepancyKind::AteMse, RealizationMode::Ipw);
    let mut extreme_assign = 0;
    let mut extreme_outcome = 0;
    for seed in 0..runs {
        let (data, _) = generate(&scenario(300, Scenario::Fiction, seed)).unwrap();
        let phi = fit_assignment(&assign, &data, &sampler(10 * seed)).unwrap();
        let r = check_assignment(&assign, &data, &phi.draws, &CheckSettings::new(200, 10 * seed + 1)).unwrap();
        extreme_assign += usize::from(r.tail_prob < 0.05);
        let props = propensities(&phi.draws, &assign, &data).unwrap();
        let theta = fit_outcome(&outcome, &data, &sampler(10 * seed + 2)).unwrap();
        let real = Realization {
            propensities: Some(&props),
            truth: None,
        };
        let r = check_outcome(&outcome, &data, &theta.draws, ipw, real, &CheckSettings::new(200, 10 * seed + 3)).unwrap();
        extreme_outcome += usize::from(r.tail_prob < 0.05);
    }
    let limit = (0.12 * runs as f64) as usize;
    assert!(extreme_assign <= limit, "assignment: {extreme_assign}/{runs} below 0.05");
    assert!(extreme_outcome <= limit, "outcome: {extreme_outcome}/{runs} below 0.05");
}

#[test]
fn severity_grows_with_the_fitted_floor() {
    let seeds = 20;
    let floors = [0.0, 0.35, 0.7];
    let mut distance = [0.0; 3];
    for seed in 0..seeds {
        let (data, _) = generate(&scenario(500, Scenario::Fiction, 100 + seed)).unwrap();
        for (k, &floor) in floors.iter().enumerate() {
            let family = AssignmentFamily::shifted_logistic(columns(), false, floor);
            let fit = fit_assignment(&family, &data, &sampler(1000 * seed + k as u64)).unwrap();
            let settings = CheckSettings::new(200, 1000 * seed + 10 + k as u64);
            let r = check_assignment(&family, &data, &fit.draws, &settings).unwrap();
            distance[k] += (r.tail_prob - 0.5).abs() / seeds as f64;
        }
    }
    assert!(distance[0] <= distance[1] && distance[1] <= distance[2], "{distance:?}");
    assert!(distance[2] > 0.45, "{distance:?}");
}

#[test]
fn assignment_check_ignores_outcomes() {
    let family = AssignmentFamily::logistic(columns(), false);
    let (data, _) = generate(&scenario(200, Scenario::Fiction, 3)).unwrap();
    let fit = fit_assignment(&family, &data, &sampler(5)).unwrap();
    let settings = CheckSettings::new(100, 6);
    let base = check_assignment(&family, &data, &fit.draws, &settings).unwrap();
    let shuffled: Vec<f64> = data.observed_outcomes.iter().rev().map(|y| 3.0 * y - 7.0).collect();
    let moved = check_assignment(&family, &data.with_outcomes(shuffled), &fit.draws, &settings).unwrap();
    assert_eq!(base.to_json().unwrap(), moved.to_json().unwrap());
}

#[test]
fn oracle_check_ignores_assignments() {
    let family = OutcomeFamily::gaussian_linear(columns(), false);
    let (data, truth) = generate(&scenario(200, Scenario::ScienceFiction, 4)).unwrap();
    let fit = fit_outcome(&family, &data, &sampler(7)).unwrap();
    let settings = CheckSettings::new(100, 8);
    let real = Realization {
        propensities: None,
        truth: Some(&truth.table),
    };
    let oracle = DiscrepancySpec::outcome(DiscrepancyKind::AteMse, RealizationMode::Oracle);
    let base = check_outcome(&family, &data, &fit.draws, oracle, real, &settings).unwrap();
    let flipped: Vec<u8> = data.assignments.iter().map(|a| 1 - a).collect();
    let moved = check_outcome(&family, &data.with_assignments(flipped), &fit.draws, oracle, real, &settings).unwrap();
    assert_eq!(base.to_json().unwrap(), moved.to_json().unwrap());
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn log_score_is_exchangeable(
        units in prop::collection::vec((0u8..=1, 0.01f64..0.99), 1..60),
        rotate in 0usize..60,
    ) {
        let (a, p): (Vec<u8>, Vec<f64>) = units.iter().copied().unzip();
        let k = rotate % units.len();
        let mut permuted = units.clone();
        permuted.rotate_left(k);
        permuted.reverse();
        let (pa, pp): (Vec<u8>, Vec<f64>) = permuted.into_iter().unzip();
        prop_assert!(close(log_score(&a, &p).unwrap(), log_score(&pa, &pp).unwrap()));
    }

    #[test]
    fn ate_mse_ignores_a_common_shift(
        rows in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -3.0f64..3.0), 1..50),
        shift in -100.0f64..100.0,
    ) {
        let y0: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let y1: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let cate: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let table = PotentialOutcomeTable::new(y0.clone(), y1.clone()).unwrap();
        let moved = PotentialOutcomeTable::new(
            y0.iter().map(|v| v + shift).collect(),
            y1.iter().map(|v| v + shift).collect(),
        ).unwrap();
        let a = ate_mse_from_cate(&cate, &table);
        let b = ate_mse_from_cate(&cate, &moved);
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + shift.abs()).powi(2), "{} vs {}", a, b);
    }

    #[test]
    fn tail_probability_is_monotone_in_the_realized_value(
        t_rep in prop::collection::vec(-10.0f64..10.0, 1..80),
        t_obs in -10.0f64..10.0,
        step in 0.0f64..5.0,
    ) {
        let low = tail_probability(&t_rep, &vec![t_obs; t_rep.len()]).unwrap();
        let high = tail_probability(&t_rep, &vec![t_obs + step; t_rep.len()]).unwrap();
        prop_assert!((0.0..=1.0).contains(&low));
        prop_assert!(high <= low);
    }
}
