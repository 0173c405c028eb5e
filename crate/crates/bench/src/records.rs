//! Result records and their CSV/JSON forms.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back and writing it again reproduces it byte for byte.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use qaco::{validate_tour, Instance, MetricMode, NoiseKind, Tour};
use serde::{Deserialize, Serialize};

use crate::config::SolverKind;
use crate::BenchError;

pub const CSV_HEADER: &str = "dataset,solver,seed,noise_kind,noise_rate,length,iterations,wall_ms";

/// Recorded and recomputed lengths must agree this closely.
pub const LENGTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub solver: SolverKind,
    pub seed: u64,
    pub noise_kind: NoiseKind,
    pub noise_rate: f64,
    pub length: f64,
    pub iterations: usize,
    pub wall_ms: u64,
    /// Absent when the record was read from CSV.
    #[serde(default)]
    pub metric: Option<MetricMode>,
    #[serde(default)]
    pub tour: Vec<usize>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    dataset: String,
    solver: String,
    seed: u64,
    noise_kind: String,
    noise_rate: f64,
    length: f64,
    iterations: usize,
    wall_ms: u64,
}

pub fn to_csv(records: &[RunRecord]) -> Result<String, BenchError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.write_record([
            r.dataset.clone(),
            r.solver.to_string(),
            r.seed.to_string(),
            r.noise_kind.as_str().to_string(),
            r.noise_rate.to_string(),
            r.length.to_string(),
            r.iterations.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| BenchError::Io(e.to_string()))
}

pub fn from_csv(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(BenchError::Format(format!("unexpected CSV header `{}`", header.join(","))));
    }
    rdr.deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            Ok(RunRecord {
                dataset: row.dataset,
                solver: row.solver.parse()?,
                seed: row.seed,
                noise_kind: row.noise_kind.parse().map_err(BenchError::Format)?,
                noise_rate: row.noise_rate,
                length: row.length,
                iterations: row.iterations,
                wall_ms: row.wall_ms,
                metric: None,
                tour: Vec::new(),
            })
        })
        .collect()
}

pub fn to_json(records: &[RunRecord]) -> Result<String, BenchError> {
    let mut s = serde_json::to_string_pretty(records)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    Ok(serde_json::from_str(text)?)
}

/// Re-validate every tour and recompute its length. Records whose dataset
/// is not in `instances` are skipped; returns how many were checked.
pub fn verify_records(records: &[RunRecord], instances: &HashMap<String, Instance>) -> Result<usize, BenchError> {
    let mut checked = 0;
    for r in records {
        let Some(inst) = instances.get(&r.dataset) else { continue };
        let fail = |why: String| BenchError::SelfCheck(format!("{} {} seed {}: {why}", r.dataset, r.solver, r.seed));
        if !validate_tour(&r.tour, inst.dimension()) {
            return Err(fail("tour is not a permutation".into()));
        }
        let metric = r.metric.ok_or_else(|| fail("record carries no metric".into()))?;
        let tour = Tour::new(r.tour.clone()).map_err(|e| fail(e.to_string()))?;
        let len = inst.tour_length(&tour, metric).map_err(|e| fail(e.to_string()))?;
        if (len - r.length).abs() > LENGTH_TOLERANCE * len.max(1.0) {
            return Err(fail(format!("recorded length {} but tour measures {len}", r.length)));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Write `results.csv` and `results.json` under `dir`, then read both back
/// and check they reproduce the same records and bytes.
pub fn write_results(dir: &Path, records: &[RunRecord], instances: &HashMap<String, Instance>) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::Io(format!("{}: {e}", dir.display())))?;
    let csv_text = to_csv(records)?;
    let json_text = to_json(records)?;
    write_file(&dir.join("results.csv"), &csv_text)?;
    write_file(&dir.join("results.json"), &json_text)?;

    if to_csv(&from_csv(&csv_text)?)? != csv_text {
        return Err(BenchError::SelfCheck("results.csv does not round-trip".into()));
    }
    let reloaded = from_json(&json_text)?;
    if to_csv(&reloaded)? != csv_text {
        return Err(BenchError::SelfCheck("results.json disagrees with results.csv".into()));
    }
    verify_records(&reloaded, instances)?;
    Ok(())
}

pub fn write_file(path: &Path, text: &str) -> Result<(), BenchError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| BenchError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))
}

/// A small CSV table with a header row; cells are preformatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| BenchError::Io(e.to_string()))
    }

    /// Aligned plain-text rendering for the terminal.
    pub fn render(&self) -> String {
        let cols = self.header.len();
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (c, cell) in row.iter().enumerate().take(cols) {
                widths[c] = widths[c].max(cell.len());
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(length: f64) -> RunRecord {
        RunRecord {
            dataset: "sq".into(),
            solver: SolverKind::Aco,
            seed: 3,
            noise_kind: NoiseKind::BitFlip,
            noise_rate: 0.001,
            length,
            iterations: 10,
            wall_ms: 5,
            metric: Some(MetricMode::PlainEuclidean),
            tour: vec![0, 1, 2, 3],
        }
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let recs = vec![rec(4.0), rec(1.0 / 3.0), rec(1e-17)];
        let text = to_csv(&recs).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(to_csv(&from_csv(&text).unwrap()).unwrap(), text);
        assert!(from_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn json_keeps_tours() {
        let recs = vec![rec(4.0)];
        let back = from_json(&to_json(&recs).unwrap()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn verify_catches_bad_length() {
        let inst = Instance::new(
            "sq",
            qaco::tsplib::EdgeWeightType::Euc2d,
            vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)],
        )
        .unwrap();
        let map = HashMap::from([("sq".to_string(), inst)]);
        assert_eq!(verify_records(&[rec(4.0)], &map).unwrap(), 1);
        assert!(verify_records(&[rec(4.5)], &map).is_err());
        let mut bad = rec(4.0);
        bad.tour = vec![0, 1, 1, 3];
        assert!(verify_records(&[bad], &map).is_err());
    }
}
