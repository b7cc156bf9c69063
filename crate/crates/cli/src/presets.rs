//! Bundled study tables and their run configurations.
//!
//! Expected schemas (header names exact, any column order, no extra columns):
//!
//! * roaches: `y` (count after treatment), `roach1` (pre-treatment level),
//!   `treatment` (0/1), `senior` (0/1), `exposure2` (trap-days, > 0).
//! * electric: `pair`, `grade` (integer ids), `treatment` (0/1),
//!   `pre_test`, `post_test`; one treated and one control class per pair,
//!   both in the same grade.
//!
//! Loaders reject tables that deviate from these schemas.

use std::collections::BTreeMap;
use std::io::Read;

use anyhow::{bail, Context, Result};
use causalcheck::{Dataset, PairStructure};

use crate::config::{Preset, RunConfig};

const ROACHES_CSV: &str = include_str!("../data/roaches.csv");
const ELECTRIC_CSV: &str = include_str!("../data/electric.csv");
const ROACHES_TOML: &str = include_str!("../presets/roaches.toml");
const ELECTRIC_TOML: &str = include_str!("../presets/electric.toml");

const ROACHES_COLUMNS: [(&str, &str); 5] = [
    ("y", "y"),
    ("roach1", "roach1"),
    ("treatment", "a"),
    ("senior", "senior"),
    ("exposure2", "offset"),
];

const ELECTRIC_COLUMNS: [(&str, &str); 5] = [
    ("pair", "pair"),
    ("grade", "grade"),
    ("treatment", "a"),
    ("pre_test", "pre_test"),
    ("post_test", "y"),
];

pub fn dataset(preset: Preset) -> Result<Dataset> {
    match preset {
        Preset::Roaches => load_roaches(ROACHES_CSV.as_bytes()),
        Preset::Electric => load_electric(ELECTRIC_CSV.as_bytes()),
    }
}

/// The bundled run configuration for `preset`.
pub fn config(preset: Preset) -> RunConfig {
    let text = match preset {
        Preset::Roaches => ROACHES_TOML,
        Preset::Electric => ELECTRIC_TOML,
    };
    RunConfig::from_toml(text).expect("bundled preset config is valid")
}

pub fn load_roaches<R: Read>(reader: R) -> Result<Dataset> {
    let data = read_with_schema(reader, "roaches", &ROACHES_COLUMNS)?;
    let report = data.validate();
    if !report.ok {
        bail!("roaches table: {report}");
    }
    Ok(data)
}

pub fn load_electric<R: Read>(reader: R) -> Result<Dataset> {
    let raw = read_with_schema(reader, "electric", &ELECTRIC_COLUMNS)?;
    let ids = raw.pairs.as_ref().expect("schema has pair and grade");

    let mut pair_of = BTreeMap::new();
    let mut pair = Vec::with_capacity(raw.n);
    for &p in &ids.pair {
        let next = pair_of.len();
        pair.push(*pair_of.entry(p).or_insert(next));
    }
    let grades: BTreeMap<usize, usize> = ids
        .grade
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(k, g)| (g, k))
        .collect();
    let grade: Vec<usize> = ids.grade.iter().map(|g| grades[g]).collect();

    let n_pairs = pair_of.len();
    let mut members = vec![Vec::new(); n_pairs];
    for (i, &p) in pair.iter().enumerate() {
        members[p].push(i);
    }
    let original: BTreeMap<usize, usize> = pair_of.iter().map(|(k, v)| (*v, *k)).collect();
    for (p, rows) in members.iter().enumerate() {
        let id = original[&p];
        if rows.len() != 2 {
            bail!("electric table: pair {id} has {} classes, expected 2", rows.len());
        }
        let treated = rows.iter().filter(|&&i| raw.assignments[i] == 1).count();
        if treated != 1 {
            bail!("electric table: pair {id} has {treated} treated classes, expected 1");
        }
        if grade[rows[0]] != grade[rows[1]] {
            bail!("electric table: pair {id} spans two grades");
        }
    }
    let data = raw.with_pairs(PairStructure { pair, grade });
    let report = data.validate();
    if !report.ok {
        bail!("electric table: {report}");
    }
    Ok(data)
}

/// Checks the header against `schema` (source name, core name), renames the
/// columns to the core CSV layout and parses the table.
fn read_with_schema<R: Read>(mut reader: R, table: &str, schema: &[(&str, &str)]) -> Result<Dataset> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .with_context(|| format!("cannot read {table} table"))?;
    let (header, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    let names: Vec<&str> = header
        .trim_end_matches('\r')
        .split(',')
        .map(|h| h.trim().trim_matches('"'))
        .collect();
    for (expected, _) in schema {
        if !names.contains(expected) {
            bail!(
                "{table} table is missing column `{expected}`; expected columns {:?}, found {names:?}",
                schema.iter().map(|c| c.0).collect::<Vec<_>>()
            );
        }
    }
    let mut renamed = Vec::with_capacity(names.len());
    for name in &names {
        let core = schema
            .iter()
            .find(|(source, _)| source == name)
            .map(|c| c.1)
            .with_context(|| format!("{table} table has unexpected column `{name}`"))?;
        if renamed.contains(&core) {
            bail!("{table} table repeats column `{name}`");
        }
        renamed.push(core);
    }
    let rebuilt = format!("{}\n{body}", renamed.join(","));
    Dataset::read_csv(rebuilt.as_bytes()).with_context(|| format!("malformed {table} table"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_load() {
        let r = dataset(Preset::Roaches).unwrap();
        assert_eq!(r.n, 262);
        assert_eq!(r.covariates.names(), ["roach1", "senior"]);
        assert!(r.offsets.is_some());
        let e = dataset(Preset::Electric).unwrap();
        assert_eq!(e.n, 192);
        let p = e.pairs.as_ref().unwrap();
        assert_eq!((p.n_pairs(), p.n_grades()), (96, 4));
    }

    #[test]
    fn bundled_configs_parse() {
        assert_eq!(config(Preset::Roaches).holdout, Some(0.5));
        assert_eq!(config(Preset::Electric).outcome.len(), 3);
    }

    #[test]
    fn schema_violations_are_reported() {
        let missing = "y,roach1,treatment,senior\n1,2,0,1\n";
        let err = load_roaches(missing.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("exposure2"), "{err}");
        let extra = "y,roach1,treatment,senior,exposure2,stories\n1,2,0,1,1,3\n";
        assert!(load_roaches(extra.as_bytes()).is_err());
        let unpaired = "pair,grade,treatment,pre_test,post_test\n1,1,1,10,20\n1,1,1,11,21\n";
        let err = load_electric(unpaired.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("2 treated"), "{err}");
        let triple = "pair,grade,treatment,pre_test,post_test\n5,2,1,1,2\n5,2,0,1,2\n5,2,0,1,2\n";
        assert!(load_electric(triple.as_bytes()).is_err());
    }

    #[test]
    fn electric_ids_are_compacted() {
        let text = "post_test,pre_test,treatment,grade,pair\n9,1,1,3,40\n8,2,0,3,40\n7,3,0,4,12\n6,4,1,4,12\n";
        let d = load_electric(text.as_bytes()).unwrap();
        let p = d.pairs.unwrap();
        assert_eq!(p.pair, vec![0, 0, 1, 1]);
        assert_eq!(p.grade, vec![0, 0, 1, 1]);
        assert_eq!(d.observed_outcomes, vec![9.0, 8.0, 7.0, 6.0]);
    }
}
