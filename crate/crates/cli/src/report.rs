//! Run reports and the consolidated summary across result files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use causalcheck::inference::Diagnostics;
use causalcheck::ppc::{CheckResult, Verdict};
use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA: &str = "v1";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const INDEX_FILE: &str = "index.html";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    /// Result file name within the output directory.
    pub file: String,
    pub model: String,
    pub spec: String,
    pub tail_prob: f64,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

impl CheckEntry {
    pub fn new(file: String, result: &CheckResult) -> Self {
        Self {
            file,
            model: result.model.clone(),
            spec: result.spec.label(),
            tail_prob: result.tail_prob,
            verdict: result.verdict,
            warnings: result.warnings.clone(),
        }
    }
}

/// Convergence summary for one fitted parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub model: String,
    /// `assignment` or `outcome`.
    pub block: String,
    pub draws: usize,
    pub converged: bool,
    pub min_ess: f64,
    pub max_rhat: Option<f64>,
    pub mean_acceptance: f64,
    pub warnings: Vec<String>,
}

impl FitSummary {
    pub fn new(model: &str, block: &str, draws: usize, diagnostics: &Diagnostics) -> Self {
        let rates = &diagnostics.acceptance_rate;
        Self {
            model: model.into(),
            block: block.into(),
            draws,
            converged: diagnostics.converged(),
            min_ess: diagnostics.ess.iter().copied().fold(f64::INFINITY, f64::min),
            max_rhat: diagnostics.rhat.iter().flatten().copied().reduce(f64::max),
            mean_acceptance: rates.iter().sum::<f64>() / rates.len().max(1) as f64,
            warnings: diagnostics.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub seed: u64,
    pub dataset: String,
    pub n: usize,
    pub overall: Verdict,
    pub checks: Vec<CheckEntry>,
    pub fits: Vec<FitSummary>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn any_fail(&self) -> bool {
        self.overall == Verdict::Fail
    }
}

/// Fail if any check fails, else warn if any warns, else pass.
pub fn overall<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Verdict {
    verdicts.into_iter().fold(Verdict::Pass, |acc, v| match (acc, v) {
        (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
        (Verdict::Warn, _) | (_, Verdict::Warn) => Verdict::Warn,
        _ => Verdict::Pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub overall: Verdict,
    pub rows: Vec<CheckEntry>,
}

/// Reads every `check-*.json` in `dir` (sorted by file name).
pub fn summarize(dir: &Path) -> Result<Summary> {
    let entries = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read results directory {}", dir.display()))?;
    let mut files: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|f| f.starts_with("check-") && f.ends_with(".json"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no check results (check-*.json) in {}", dir.display());
    }
    let mut rows = Vec::with_capacity(files.len());
    for file in files {
        let text = std::fs::read_to_string(dir.join(&file))
            .with_context(|| format!("cannot read {}", dir.join(&file).display()))?;
        let result = CheckResult::from_json(&text)
            .with_context(|| format!("malformed check result {}", dir.join(&file).display()))?;
        rows.push(CheckEntry::new(file, &result));
    }
    Ok(Summary {
        schema: REPORT_SCHEMA.into(),
        overall: overall(rows.iter().map(|r| &r.verdict)),
        rows,
    })
}

/// Static index page; links a row's histogram when the SVG exists.
pub fn index_html(summary: &Summary, dir: &Path) -> String {
    let mut s = String::new();
    s.push_str("<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>causalcheck results</title></head>\n<body>\n");
    writeln!(s, "<h1>Overall: {}</h1>", verdict_word(summary.overall)).unwrap();
    s.push_str("<table border=\"1\" cellpadding=\"4\">\n<tr><th>model</th><th>discrepancy</th><th>tail probability</th><th>verdict</th><th>warnings</th><th>plot</th></tr>\n");
    for row in &summary.rows {
        let svg = row.file.trim_end_matches(".json").to_string() + ".svg";
        let plot = if dir.join(&svg).exists() {
            format!("<a href=\"{svg}\"><img src=\"{svg}\" width=\"240\"></a>")
        } else {
            String::new()
        };
        writeln!(
            s,
            "<tr><td>{}</td><td>{}</td><td>{:.3}</td><td>{}</td><td>{}</td><td>{plot}</td></tr>",
            row.model,
            row.spec,
            row.tail_prob,
            verdict_word(row.verdict),
            row.warnings.join("<br>")
        )
        .unwrap();
    }
    s.push_str("</table>\n</body>\n</html>\n");
    s
}

pub fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Warn => "warn",
        Verdict::Fail => "fail",
    }
}
