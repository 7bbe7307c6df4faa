//! The JSONL sample format.
//!
//! One JSON object per line:
//!
//! ```text
//! {"schema_version":1,"family":"ER","seed":7,"num_nodes":4,"edges":[[0,1,2,3]],
//!  "attack":"static","failure_order":[0,1,2,3],"label_r":0.375,"eval_count":4,
//!  "label_epsilon":0.0001}
//! ```
//!
//! `cascade` (`{"alpha":..,"beta":..}`) is present only for dynamic attacks.

use std::fs;
use std::io::Write;
use std::path::Path;

use hyperrobust::cascade::{AttackSpec, CascadeParams};
use hyperrobust::model::{build_features, Sample};
use hyperrobust::Hypergraph;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeRecord {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub schema_version: u32,
    pub family: String,
    pub seed: u64,
    pub num_nodes: usize,
    pub edges: Vec<Vec<usize>>,
    pub attack: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cascade: Option<CascadeRecord>,
    pub failure_order: Vec<usize>,
    pub label_r: f64,
    pub eval_count: usize,
    pub label_epsilon: f64,
}

impl SampleRecord {
    pub fn hypergraph(&self) -> Result<Hypergraph> {
        Ok(Hypergraph::from_edge_list(self.num_nodes, &self.edges)?)
    }

    pub fn attack_spec(&self) -> Result<AttackSpec> {
        match (self.attack.as_str(), self.cascade) {
            ("static", _) => Ok(AttackSpec::Static),
            ("dynamic", Some(c)) => Ok(AttackSpec::Dynamic(CascadeParams::new(c.alpha, c.beta)?)),
            ("dynamic", None) => Err(CliError::Data("dynamic record without cascade parameters".into())),
            (other, _) => Err(CliError::Data(format!("unknown attack {other:?}"))),
        }
    }

    /// Structure, features from the stored failure order, and label.
    pub fn to_sample(&self) -> Result<Sample> {
        let hypergraph = self.hypergraph()?;
        let features = build_features(&hypergraph, &self.failure_order)?;
        Ok(Sample {
            hypergraph,
            features,
            label: self.label_r,
        })
    }

    /// Checks the structural invariants that serde cannot.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Data(format!("unsupported schema_version {}", self.schema_version)));
        }
        let h = self.hypergraph()?;
        hyperrobust::cascade::validate_order(&h, &self.failure_order)?;
        self.attack_spec()?;
        if !(0.0..=1.0).contains(&self.label_r) {
            return Err(CliError::Data(format!("label_r {} outside [0, 1]", self.label_r)));
        }
        Ok(())
    }
}

pub fn to_line(record: &SampleRecord) -> String {
    serde_json::to_string(record).expect("records serialize")
}

pub fn write_jsonl(path: &Path, records: &[SampleRecord]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        out.extend(to_line(r).as_bytes());
        out.push(b'\n');
    }
    write_file(path, &out)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

/// Reads and validates every non-blank line.
pub fn read_jsonl(path: &Path) -> Result<Vec<SampleRecord>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let record: SampleRecord = serde_json::from_str(line).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        record
            .validate()
            .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(attack: &str) -> SampleRecord {
        SampleRecord {
            schema_version: SCHEMA_VERSION,
            family: "ER".into(),
            seed: 3,
            num_nodes: 4,
            edges: vec![vec![0, 1, 2, 3], vec![1, 2]],
            attack: attack.into(),
            cascade: (attack == "dynamic").then_some(CascadeRecord { alpha: 0.5, beta: 1.0 }),
            failure_order: vec![1, 2, 0, 3],
            label_r: 0.1 + 0.2,
            eval_count: 4,
            label_epsilon: 1e-4,
        }
    }

    #[test]
    fn round_trip_field_for_field() {
        for attack in ["static", "dynamic"] {
            let r = record(attack);
            let back: SampleRecord = serde_json::from_str(&to_line(&r)).unwrap();
            assert_eq!(back, r);
            back.validate().unwrap();
        }
        assert!(!to_line(&record("static")).contains("cascade"));
    }

    #[test]
    fn validation_catches_bad_records() {
        let mut r = record("static");
        r.failure_order = vec![0, 0, 1, 2];
        assert!(r.validate().is_err());
        let mut r = record("dynamic");
        r.cascade = None;
        assert!(r.validate().is_err());
        let mut r = record("static");
        r.edges.push(vec![5, 1]);
        assert!(r.validate().is_err());
        let mut r = record("static");
        r.label_r = 1.5;
        assert!(r.validate().is_err());
    }

    #[test]
    fn jsonl_files_round_trip_and_report_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/data.jsonl");
        let records = vec![record("static"), record("dynamic")];
        write_jsonl(&path, &records).unwrap();
        assert_eq!(read_jsonl(&path).unwrap(), records);

        fs::write(&path, format!("{}\nnot json\n", to_line(&records[0]))).unwrap();
        let err = read_jsonl(&path).unwrap_err();
        assert!(matches!(err, CliError::Json { line: 2, .. }), "{err}");
    }
}
