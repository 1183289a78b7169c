//! Experiment reports: `report.json` plus one CSV per table.
//!
//! Nothing time-dependent is serialized, so equal parameters and seed give
//! byte-identical directories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::schatten_analysis::{Diagnosis, DiagnosticThresholds, Verdict};

/// Shortest round-trip rendering, switching to exponent form for very large
/// or small magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn num_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Table {
    pub name: String,
    pub file: String,
    pub columns: Vec<String>,
    pub row_count: usize,
    #[serde(skip)]
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            file: format!("{name}.csv"),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            row_count: 0,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
        self.row_count = self.rows.len();
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictRecord {
    pub name: String,
    pub verdict: Verdict,
    pub diagnosis: Diagnosis,
    pub thresholds: DiagnosticThresholds,
}

/// A pass/fail assertion. Fatal checks are theorem-backed identities whose
/// failure indicates a bug.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub fatal: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub runtime_seconds: f64,
    pub tables: Vec<Table>,
    pub verdicts: Vec<VerdictRecord>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        ExperimentReport {
            name: name.into(),
            parameters: BTreeMap::new(),
            seed: None,
            runtime_seconds: 0.0,
            tables: Vec::new(),
            verdicts: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<String>) {
        self.parameters.insert(key.into(), value.into());
    }

    pub fn verdict(&mut self, name: impl Into<String>, diagnosis: Diagnosis, thresholds: &DiagnosticThresholds) {
        self.verdicts.push(VerdictRecord {
            name: name.into(),
            verdict: diagnosis.verdict,
            diagnosis,
            thresholds: thresholds.clone(),
        });
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, fatal: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            fatal,
            detail: detail.into(),
        });
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verdict_of(&self, name: &str) -> Option<Verdict> {
        self.verdicts.iter().find(|v| v.name == name).map(|v| v.verdict)
    }

    pub fn has_fatal_failure(&self) -> bool {
        self.checks.iter().any(|c| c.fatal && !c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// Write `report.json` and the table CSVs into `dir`, creating it.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json())?;
        for t in &self.tables {
            fs::write(dir.join(&t.file), t.to_csv()?)?;
        }
        Ok(())
    }

    /// Console summary: verdicts, checks, and small tables in full.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.name);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for t in &self.tables {
            let _ = writeln!(out, "-- {} ({} rows)", t.name, t.rows.len());
            if t.rows.len() <= 16 {
                let widths: Vec<usize> = (0..t.columns.len())
                    .map(|i| {
                        t.rows
                            .iter()
                            .map(|r| r[i].len())
                            .chain([t.columns[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                let _ = writeln!(out, "  {}", line(&t.columns));
                for r in &t.rows {
                    let _ = writeln!(out, "  {}", line(r));
                }
            }
        }
        for v in &self.verdicts {
            let t = &v.thresholds;
            let s = v.diagnosis.increment_exponent.map(num).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "verdict {:<40} {:<12} s={s} [plateau {}, converge s>={}, diverge s<={} & growth>={}]",
                v.name,
                v.verdict.to_string(),
                num(t.plateau),
                num(t.converging_exponent),
                num(t.diverging_exponent),
                num(t.growth_factor)
            );
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {}{}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                if c.fatal { " (fatal)" } else { "" },
                c.detail
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1e-20), "1e-20");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(3.0), "3");
        assert_eq!(num(f64::INFINITY), "inf");
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_quotes_and_json_omits_runtime() {
        let mut r = ExperimentReport::new("t");
        r.runtime_seconds = 12.5;
        let mut t = Table::new("a", &["x", "label"]);
        t.push(vec!["1".into(), "z1^2 + z2^2, c0".into()]);
        r.tables.push(t);
        let csv = String::from_utf8(r.tables[0].to_csv().unwrap()).unwrap();
        assert_eq!(csv, "x,label\n1,\"z1^2 + z2^2, c0\"\n");
        assert!(!r.to_json().contains("12.5"));
        assert!(r.to_json().contains("\"rowCount\": 1"));
    }
}
