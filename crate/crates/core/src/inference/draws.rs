use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ParamLayout;

/// One row per draw, named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draws {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Draws {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some((s, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
            return Err(Error::LengthMismatch {
                what: format!("draw {s}"),
                got: row.len(),
                expected: names.len(),
            });
        }
        Ok(Self { names, rows })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.rows[s]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.names.iter().position(|n| n == name).map(|j| self.column(j))
    }

    pub fn mean(&self, j: usize) -> f64 {
        self.rows.iter().map(|r| r[j]).sum::<f64>() / self.rows.len() as f64
    }

    /// `S` rows spread evenly over the stored draws.
    pub fn subsample(&self, s: usize) -> Result<Self> {
        if s == 0 || s > self.len() {
            return Err(Error::Config(format!(
                "cannot take {s} draws from {} available",
                self.len()
            )));
        }
        let rows = (0..s).map(|k| self.rows[k * self.len() / s].clone()).collect();
        Ok(Self {
            names: self.names.clone(),
            rows,
        })
    }

    /// Names must match the layout and every row satisfy its constraints.
    pub fn check_layout(&self, layout: &ParamLayout) -> Result<()> {
        let expected = layout.names();
        if self.names != expected {
            return Err(Error::Config(format!(
                "draw columns {:?} do not match the model parameters {:?}",
                self.names, expected
            )));
        }
        self.rows.iter().try_for_each(|r| layout.check(r))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        w.write_record(&self.names).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        let names: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let row = record
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        Error::Csv(format!("draw {line}, column {}: cannot parse {cell:?}", names[j]))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::new(names, rows)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChainMetadata {
    pub chain_lengths: Vec<usize>,
    pub burn_in: usize,
    pub seed: u64,
}

/// Draws of `phi` and `theta` from separate fits, `S` rows each.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub phi: Draws,
    pub theta: Draws,
}

impl PosteriorDraws {
    pub fn new(phi: Draws, theta: Draws) -> Result<Self> {
        if phi.len() != theta.len() {
            return Err(Error::LengthMismatch {
                what: "theta draws".into(),
                got: theta.len(),
                expected: phi.len(),
            });
        }
        Ok(Self { phi, theta })
    }

    pub fn draw_count(&self) -> usize {
        self.phi.len()
    }
}
