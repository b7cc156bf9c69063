//! Observed data, potential-outcome tables and dataset validation.

use std::fmt;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Purpose, SeedStreams};

/// Dense row-major covariate matrix with column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariates {
    names: Vec<String>,
    nrows: usize,
    values: Vec<f64>,
}

impl Covariates {
    pub fn new(names: Vec<String>, nrows: usize, values: Vec<f64>) -> Result<Self> {
        let expected = nrows * names.len();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                what: "covariate values".into(),
                got: values.len(),
                expected,
            });
        }
        Ok(Self {
            names,
            nrows,
            values,
        })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = names.len();
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    what: format!("covariate row {i}"),
                    got: row.len(),
                    expected: d,
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(names, rows.len(), values)
    }

    /// Matrix with zero columns, for models that use no covariates.
    pub fn empty(nrows: usize) -> Self {
        Self {
            names: Vec::new(),
            nrows,
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.ncols();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols() + j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.nrows).map(move |i| self.get(i, j))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.ncols());
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        Self {
            names: self.names.clone(),
            nrows: rows.len(),
            values,
        }
    }
}

/// Pair index and grade per unit, for paired randomized designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStructure {
    /// Zero-based pair index per unit.
    pub pair: Vec<usize>,
    /// Zero-based grade (group) per unit.
    pub grade: Vec<usize>,
}

impl PairStructure {
    pub fn n_pairs(&self) -> usize {
        self.pair.iter().max().map_or(0, |m| m + 1)
    }

    pub fn n_grades(&self) -> usize {
        self.grade.iter().max().map_or(0, |m| m + 1)
    }

    /// Grade of each pair (taken from its first unit).
    pub fn pair_grades(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_pairs()];
        for (p, g) in self.pair.iter().zip(&self.grade).rev() {
            out[*p] = *g;
        }
        out
    }
}

/// Observed data: covariates, binary assignments and the outcome under the
/// realized assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub n: usize,
    pub covariates: Covariates,
    pub assignments: Vec<u8>,
    pub observed_outcomes: Vec<f64>,
    /// Exposure per unit (e.g. trap-days); multiplies count-model means.
    pub offsets: Option<Vec<f64>>,
    pub pairs: Option<PairStructure>,
}

impl Dataset {
    pub fn new(covariates: Covariates, assignments: Vec<u8>, observed_outcomes: Vec<f64>) -> Self {
        Self {
            n: assignments.len(),
            covariates,
            assignments,
            observed_outcomes,
            offsets: None,
            pairs: None,
        }
    }

    pub fn with_offsets(mut self, offsets: Vec<f64>) -> Self {
        self.offsets = Some(offsets);
        self
    }

    pub fn with_pairs(mut self, pairs: PairStructure) -> Self {
        self.pairs = Some(pairs);
        self
    }

    pub fn offset(&self, i: usize) -> f64 {
        self.offsets.as_ref().map_or(1.0, |o| o[i])
    }

    pub fn treated(&self, i: usize) -> bool {
        self.assignments[i] == 1
    }

    pub fn n_treated(&self) -> usize {
        self.assignments.iter().filter(|&&a| a == 1).count()
    }

    /// Same units with outcomes replaced (assignments and covariates kept).
    pub fn with_outcomes(&self, outcomes: Vec<f64>) -> Self {
        let mut out = self.clone();
        out.observed_outcomes = outcomes;
        out
    }

    /// Same units with assignments replaced.
    pub fn with_assignments(&self, assignments: Vec<u8>) -> Self {
        let mut out = self.clone();
        out.assignments = assignments;
        out
    }

    /// Rows `rows`, in order. Pair indices are kept as-is.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            n: rows.len(),
            covariates: self.covariates.select_rows(rows),
            assignments: rows.iter().map(|&i| self.assignments[i]).collect(),
            observed_outcomes: rows.iter().map(|&i| self.observed_outcomes[i]).collect(),
            offsets: self
                .offsets
                .as_ref()
                .map(|o| rows.iter().map(|&i| o[i]).collect()),
            pairs: self.pairs.as_ref().map(|p| PairStructure {
                pair: rows.iter().map(|&i| p.pair[i]).collect(),
                grade: rows.iter().map(|&i| p.grade[i]).collect(),
            }),
        }
    }

    /// Random partition into `(training, held_out)` row indices, each sorted,
    /// with `round(fraction * n)` held-out rows.
    pub fn holdout_split(&self, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Config(format!("held-out fraction must lie in (0, 1), got {fraction}")));
        }
        let held = (fraction * self.n as f64).round() as usize;
        if held == 0 || held == self.n {
            return Err(Error::Config(format!(
                "held-out fraction {fraction} leaves an empty split of {} units",
                self.n
            )));
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        order.shuffle(&mut SeedStreams::new(seed).rng(Purpose::Split, 0));
        let mut held_out = order[..held].to_vec();
        let mut training = order[held..].to_vec();
        held_out.sort_unstable();
        training.sort_unstable();
        Ok((training, held_out))
    }

    /// Copy with every covariate column shifted to mean 0 and scaled to unit
    /// standard deviation. Constant columns are only centered.
    pub fn standardized(&self) -> Self {
        let d = self.covariates.ncols();
        let n = self.covariates.nrows();
        let mut values = self.covariates.values.clone();
        for j in 0..d {
            let mean = self.covariates.column(j).sum::<f64>() / n.max(1) as f64;
            let var = self
                .covariates
                .column(j)
                .map(|v| (v - mean).powi(2))
                .sum::<f64>()
                / n.max(1) as f64;
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for i in 0..n {
                values[i * d + j] = (values[i * d + j] - mean) / sd;
            }
        }
        let mut out = self.clone();
        out.covariates.values = values;
        out
    }

    /// Structural and overlap checks. Never fails; callers decide whether
    /// the findings are fatal.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let n = self.n;
        let mut check_len = |what: &str, len: usize| {
            if len != n {
                issues.push(format!("{what} has length {len}, expected n = {n}"));
            }
        };
        check_len("covariates", self.covariates.nrows());
        check_len("assignments", self.assignments.len());
        check_len("observed_outcomes", self.observed_outcomes.len());
        if let Some(o) = &self.offsets {
            check_len("offsets", o.len());
        }
        if let Some(p) = &self.pairs {
            check_len("pair", p.pair.len());
            check_len("grade", p.grade.len());
        }

        for (i, &a) in self.assignments.iter().enumerate() {
            if a > 1 {
                issues.push(format!("assignment at row {i} is {a}, expected 0 or 1"));
            }
        }
        if !self.assignments.is_empty() {
            let treated = self.assignments.iter().filter(|&&a| a == 1).count();
            let control = self.assignments.iter().filter(|&&a| a == 0).count();
            if treated == 0 {
                issues.push("treatment arm empty (no overlap)".to_string());
            }
            if control == 0 {
                issues.push("control arm empty (no overlap)".to_string());
            }
        }
        for (i, y) in self.observed_outcomes.iter().enumerate() {
            if !y.is_finite() {
                issues.push(format!("observed outcome at row {i} is not finite"));
            }
        }
        let cov = &self.covariates;
        for i in 0..cov.nrows() {
            for (j, v) in cov.row(i).iter().enumerate() {
                if !v.is_finite() {
                    issues.push(format!(
                        "covariate `{}` at row {i} is not finite",
                        cov.names[j]
                    ));
                }
            }
        }
        if cov.nrows() > 1 {
            for j in 0..cov.ncols() {
                let first = cov.get(0, j);
                if cov.column(j).all(|v| v == first) {
                    issues.push(format!("covariate `{}` is constant", cov.names[j]));
                }
            }
        }
        if let Some(offsets) = &self.offsets {
            for (i, t) in offsets.iter().enumerate() {
                if !(t.is_finite() && *t > 0.0) {
                    issues.push(format!("offset at row {i} is {t}, must be positive"));
                }
            }
        }
        ValidationReport::from_issues(issues)
    }

    /// Reads the CSV layout: header row required; columns `a` and `y`,
    /// optional `offset`, `pair`, `grade`; every other column is a numeric
    /// covariate, kept in header order. Empty cells are an error.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let find = |name: &str| header.iter().position(|h| h == name);
        let col_a = find("a").ok_or_else(|| Error::Csv("missing column `a`".into()))?;
        let col_y = find("y").ok_or_else(|| Error::Csv("missing column `y`".into()))?;
        let col_offset = find("offset");
        let col_pair = find("pair");
        let col_grade = find("grade");
        if col_pair.is_some() != col_grade.is_some() {
            return Err(Error::Csv("`pair` and `grade` must appear together".into()));
        }
        let reserved = [Some(col_a), Some(col_y), col_offset, col_pair, col_grade];
        let cov_cols: Vec<usize> = (0..header.len())
            .filter(|j| !reserved.contains(&Some(*j)))
            .collect();

        let mut assignments = Vec::new();
        let mut outcomes = Vec::new();
        let mut offsets = Vec::new();
        let mut pair = Vec::new();
        let mut grade = Vec::new();
        let mut values = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            let cell = |j: usize| -> Result<f64> {
                let raw = record.get(j).unwrap_or("");
                if raw.is_empty() {
                    return Err(Error::Csv(format!(
                        "missing value in column `{}` at data row {row}",
                        header[j]
                    )));
                }
                raw.parse::<f64>().map_err(|_| {
                    Error::Csv(format!(
                        "non-numeric value `{raw}` in column `{}` at data row {row}",
                        header[j]
                    ))
                })
            };
            let a = cell(col_a)?;
            if a != 0.0 && a != 1.0 {
                return Err(Error::Csv(format!(
                    "assignment `{a}` at data row {row} is not 0 or 1"
                )));
            }
            assignments.push(a as u8);
            outcomes.push(cell(col_y)?);
            if let Some(j) = col_offset {
                offsets.push(cell(j)?);
            }
            if let (Some(jp), Some(jg)) = (col_pair, col_grade) {
                pair.push(index_cell(cell(jp)?, "pair", row)?);
                grade.push(index_cell(cell(jg)?, "grade", row)?);
            }
            for &j in &cov_cols {
                values.push(cell(j)?);
            }
        }
        let n = assignments.len();
        let names = cov_cols.iter().map(|&j| header[j].clone()).collect();
        let mut data = Dataset::new(Covariates::new(names, n, values)?, assignments, outcomes);
        if col_offset.is_some() {
            data = data.with_offsets(offsets);
        }
        if col_pair.is_some() {
            data = data.with_pairs(PairStructure { pair, grade });
        }
        Ok(data)
    }

    /// Writes the layout accepted by [`Dataset::read_csv`]. Pair and grade
    /// indices are written as stored (zero-based).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["a".to_string(), "y".to_string()];
        if self.offsets.is_some() {
            header.push("offset".into());
        }
        if self.pairs.is_some() {
            header.push("pair".into());
            header.push("grade".into());
        }
        header.extend(self.covariates.names.iter().cloned());
        w.write_record(&header).map_err(|e| Error::Csv(e.to_string()))?;
        for i in 0..self.n {
            let mut rec = vec![
                self.assignments[i].to_string(),
                self.observed_outcomes[i].to_string(),
            ];
            if let Some(o) = &self.offsets {
                rec.push(o[i].to_string());
            }
            if let Some(p) = &self.pairs {
                rec.push(p.pair[i].to_string());
                rec.push(p.grade[i].to_string());
            }
            rec.extend(self.covariates.row(i).iter().map(f64::to_string));
            w.write_record(&rec).map_err(|e| Error::Csv(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn index_cell(v: f64, what: &str, row: usize) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::Csv(format!(
            "`{what}` at data row {row} must be a non-negative integer, got {v}"
        )))
    }
}

/// Both potential outcomes for every unit. Only synthetic generation and
/// posterior-predictive replication produce these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialOutcomeTable {
    y0: Vec<f64>,
    y1: Vec<f64>,
}

impl PotentialOutcomeTable {
    pub fn new(y0: Vec<f64>, y1: Vec<f64>) -> Result<Self> {
        if y0.len() != y1.len() {
            return Err(Error::LengthMismatch {
                what: "y1".into(),
                got: y1.len(),
                expected: y0.len(),
            });
        }
        if let Some(i) = y0.iter().chain(&y1).position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "potential outcome entry {i} is not finite"
            )));
        }
        Ok(Self { y0, y1 })
    }

    pub fn len(&self) -> usize {
        self.y0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y0.is_empty()
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn y1(&self) -> &[f64] {
        &self.y1
    }

    pub fn arm(&self, arm: u8) -> &[f64] {
        if arm == 1 {
            &self.y1
        } else {
            &self.y0
        }
    }

    /// `y_i = y_i(1)` if `a_i = 1`, else `y_i(0)`.
    pub fn select_observed(&self, assignments: &[u8]) -> Result<Vec<f64>> {
        if assignments.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "assignments".into(),
                got: assignments.len(),
                expected: self.len(),
            });
        }
        Ok(assignments
            .iter()
            .enumerate()
            .map(|(i, &a)| if a == 1 { self.y1[i] } else { self.y0[i] })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn from_issues(issues: Vec<String>) -> Self {
        Self {
            ok: issues.is_empty(),
            issues,
        }
    }

    pub fn into_result(self) -> Result<()> {
        if self.ok {
            Ok(())
        } else {
            Err(Error::Validation(self.issues.join("; ")))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        for issue in &self.issues {
            writeln!(f, "- {issue}")?;
        }
        Ok(())
    }
}
