//! `generate`, `check` and `report`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use causalcheck::discrepancy::{propensities, DiscrepancyKind, PropensityVector, RealizationMode};
use causalcheck::inference::{fit_assignment, fit_outcome, Fit, SamplerConfig};
use causalcheck::ppc::{check_assignment, check_outcome, CheckResult, CheckSettings, Realization};
use causalcheck::synthgen::{generate, SyntheticTruth};
use causalcheck::{Dataset, PotentialOutcomeTable, SeedStreams};

use crate::config::{AssignmentModel, DatasetSource, RunConfig};
use crate::presets;
use crate::report::{self, CheckEntry, FitSummary, Report, Summary, REPORT_SCHEMA};
use crate::svg;

const ASSIGNMENT_FIT: u64 = 1;
const SPLIT: u64 = 2;
const HOLDOUT_FIT: u64 = 3;
const OUTCOME_FIT: u64 = 100;
const CHECK: u64 = 1000;

pub const DATASET_FILE: &str = "dataset.csv";
pub const TRUTH_FILE: &str = "truth.json";

/// Exit status of `check`: 0 when nothing fails, 2 otherwise. Errors map to 1.
pub fn exit_code(report: &Report) -> u8 {
    if report.any_fail() {
        2
    } else {
        0
    }
}

/// Writes the synthetic dataset and its truth sidecar into `out`.
pub fn cmd_generate(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let DatasetSource::Synthetic(scenario) = &config.dataset else {
        bail!("generate needs a synthetic dataset source");
    };
    let (data, truth) = generate(scenario)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let csv_path = out.join(DATASET_FILE);
    let file = File::create(&csv_path).with_context(|| format!("cannot write {}", csv_path.display()))?;
    data.write_csv(BufWriter::new(file))?;
    let truth_path = out.join(TRUTH_FILE);
    fs::write(&truth_path, serde_json::to_string_pretty(&truth)? + "\n")
        .with_context(|| format!("cannot write {}", truth_path.display()))?;
    Ok(vec![csv_path, truth_path])
}

pub struct Loaded {
    pub data: Dataset,
    pub truth: Option<PotentialOutcomeTable>,
    pub label: String,
}

pub fn load_dataset(config: &RunConfig) -> Result<Loaded> {
    let (data, truth, label) = match &config.dataset {
        DatasetSource::Csv { path, truth } => {
            let file = File::open(path).with_context(|| format!("cannot open dataset {}", path.display()))?;
            let data = Dataset::read_csv(file).with_context(|| format!("in dataset {}", path.display()))?;
            let table = match truth {
                Some(t) => {
                    let text = fs::read_to_string(t)
                        .with_context(|| format!("cannot read truth file {}", t.display()))?;
                    let truth: SyntheticTruth = serde_json::from_str(&text)
                        .with_context(|| format!("malformed truth file {}", t.display()))?;
                    Some(truth.table)
                }
                None => None,
            };
            let name = path.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned());
            (data, table, format!("csv:{name}"))
        }
        DatasetSource::Synthetic(scenario) => {
            let (data, truth) = generate(scenario)?;
            (data, Some(truth.table), format!("synthetic:{:?}", scenario.scenario).to_lowercase())
        }
        DatasetSource::Preset { name } => {
            (presets::dataset(*name)?, None, format!("preset:{name:?}").to_lowercase())
        }
    };
    if let Some(t) = &truth {
        if t.len() != data.n {
            bail!("truth table has {} rows, dataset has {}", t.len(), data.n);
        }
    }
    let report = data.validate();
    if !report.ok {
        bail!("{report}");
    }
    let data = if config.standardize { data.standardized() } else { data };
    Ok(Loaded { data, truth, label })
}

/// One check's result and the file name it is written under.
pub struct NamedResult {
    pub file: String,
    pub result: CheckResult,
}

/// Fits the configured models and runs every listed check, without writing
/// anything.
pub fn run_checks(config: &RunConfig) -> Result<(Report, Vec<NamedResult>)> {
    config.validate()?;
    if config.checks.is_empty() {
        bail!("no checks listed; add e.g. checks = [\"ate_mse/ipw\"] to the config");
    }
    let loaded = load_dataset(config)?;
    let data = &loaded.data;
    let streams = SeedStreams::new(config.seed);
    let specs = config.specs()?;
    let sampler = |label: u64| SamplerConfig {
        seed: streams.child(label).seed(),
        ..config.sampler.clone()
    };
    let settings = |index: u64| CheckSettings {
        draws: config.check_draws(),
        seed: streams.child(CHECK + index).seed(),
        alpha: config.alpha,
    };
    let mut fits = Vec::new();

    let needs_assignment = specs
        .iter()
        .any(|s| s.kind == DiscrepancyKind::AssignmentLogScore || s.mode == RealizationMode::Ipw);
    let assignment = match (&config.assignment, needs_assignment) {
        (Some(spec), true) => Some((spec.label(), spec.resolve(data)?)),
        _ => None,
    };

    // With a holdout, the assignment check scores held-out units under a
    // fit to the remaining ones; propensity weights always come from the
    // fit to all units.
    let mut phi_fit: Option<(Fit, Dataset)> = None;
    let mut props: Option<PropensityVector> = None;
    if let Some((label, model)) = &assignment {
        match model {
            AssignmentModel::Fitted(family) => {
                let needs_ipw = specs
                    .iter()
                    .any(|s| s.kind != DiscrepancyKind::AssignmentLogScore && s.mode == RealizationMode::Ipw);
                let needs_check = specs.iter().any(|s| s.kind == DiscrepancyKind::AssignmentLogScore);
                let mut full_fit = None;
                if needs_ipw || config.holdout.is_none() {
                    let fit = fit_assignment(family, data, &sampler(ASSIGNMENT_FIT))
                        .with_context(|| format!("fitting assignment model {label}"))?;
                    fits.push(FitSummary::new(label, "assignment", fit.draws.len(), &fit.diagnostics));
                    props = Some(propensities(&fit.draws, family, data)?);
                    full_fit = Some(fit);
                }
                if needs_check {
                    phi_fit = Some(match (config.holdout, full_fit) {
                        (Some(h), _) => {
                            let (t, v) = data.holdout_split(h, streams.child(SPLIT).seed())?;
                            let fit = fit_assignment(family, &data.select_rows(&t), &sampler(HOLDOUT_FIT))
                                .with_context(|| format!("fitting assignment model {label} on the training split"))?;
                            fits.push(FitSummary::new(
                                label,
                                "assignment_training_split",
                                fit.draws.len(),
                                &fit.diagnostics,
                            ));
                            (fit, data.select_rows(&v))
                        }
                        (None, Some(fit)) => (fit, data.clone()),
                        (None, None) => unreachable!("fitted above when there is no holdout"),
                    });
                }
            }
            AssignmentModel::Known(p) => {
                props = Some(PropensityVector::known(*p, &data.assignments)?);
            }
        }
    }

    let needs_outcome = specs.iter().any(|s| s.kind != DiscrepancyKind::AssignmentLogScore);
    let mut outcome_fits = Vec::new();
    if needs_outcome {
        for (k, spec) in config.outcome.iter().enumerate() {
            let label = spec.label();
            let family = spec.resolve(data).with_context(|| format!("outcome model {label}"))?;
            let fit = fit_outcome(&family, data, &sampler(OUTCOME_FIT + k as u64))
                .with_context(|| format!("fitting outcome model {label}"))?;
            fits.push(FitSummary::new(&label, "outcome", fit.draws.len(), &fit.diagnostics));
            outcome_fits.push((label, family, fit));
        }
    }

    let mut results = Vec::new();
    for spec in &specs {
        if spec.kind == DiscrepancyKind::AssignmentLogScore {
            let (Some((label, AssignmentModel::Fitted(family))), Some((fit, held))) = (&assignment, &phi_fit) else {
                bail!("assignment_log_score needs a fitted assignment model");
            };
            let mut r = check_assignment(family, held, &fit.draws, &settings(results.len() as u64))?;
            r.model = label.clone();
            results.push(named(results.len(), r));
            continue;
        }
        for (label, family, fit) in &outcome_fits {
            let realization = Realization {
                propensities: props.as_ref(),
                truth: loaded.truth.as_ref(),
            };
            if spec.mode == RealizationMode::Oracle && loaded.truth.is_none() {
                bail!("oracle check `{}` needs the true potential outcomes (synthetic data or a truth file)", spec.label());
            }
            let mut r = check_outcome(family, data, &fit.draws, *spec, realization, &settings(results.len() as u64))
                .with_context(|| format!("check {} on {label}", spec.label()))?;
            r.model = label.clone();
            results.push(named(results.len(), r));
        }
    }

    let checks: Vec<CheckEntry> = results
        .iter()
        .map(|r| CheckEntry::new(r.file.clone(), &r.result))
        .collect();
    let report = Report {
        schema: REPORT_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        dataset: loaded.label,
        n: data.n,
        overall: report::overall(checks.iter().map(|c| &c.verdict)),
        checks,
        fits,
    };
    Ok((report, results))
}

/// Runs the checks and writes one JSON per check, `report.json` and, when
/// `svg` is set, one histogram per check.
pub fn cmd_check(config: &RunConfig, svg: bool) -> Result<Report> {
    let (report, results) = run_checks(config)?;
    let out = &config.out;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    for r in &results {
        let path = out.join(&r.file);
        fs::write(&path, r.result.to_json()? + "\n").with_context(|| format!("cannot write {}", path.display()))?;
        if svg {
            let title = format!("{} | {}", r.result.model, r.result.spec.label());
            let path = path.with_extension("svg");
            fs::write(&path, svg::histogram(&r.result, &title))
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    let path = out.join(report::REPORT_FILE);
    fs::write(&path, report.to_json()?).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(report)
}

/// Merges the check results in `dir` into `summary.json` and `index.html`.
pub fn cmd_report(dir: &Path) -> Result<Summary> {
    let summary = report::summarize(dir)?;
    fs::write(dir.join(report::SUMMARY_FILE), serde_json::to_string_pretty(&summary)? + "\n")?;
    fs::write(dir.join(report::INDEX_FILE), report::index_html(&summary, dir))?;
    Ok(summary)
}

fn named(index: usize, result: CheckResult) -> NamedResult {
    let file = format!(
        "check-{index:02}-{}-{}.json",
        file_token(&result.model),
        file_token(&result.spec.label())
    );
    NamedResult { file, result }
}

fn file_token(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect::<String>()
        .trim_matches('_')
        .to_string()
}

