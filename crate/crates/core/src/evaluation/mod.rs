//! Questionnaire scoring, fixtures and the evaluation metrics.

pub mod expectation;
pub mod metrics;
pub mod questionnaire;
pub mod sweep;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::typology::{Dimension, MbtiType, PsychFunction};
pub use expectation::{expectation_matrix, expected_shift, ExpectedShift, ObservedShift, ShiftPath};
pub use metrics::{dag, dar, psa, taa, AccuracyRow, AccuracyTable, MetricsError, DAR_TOLERANCE};
pub use questionnaire::{dimension_accuracy, Choice, Questionnaire, QuestionnaireItem};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fixture is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("unknown unit {0:?}; expected \"percent\" or \"fraction\"")]
    Unit(String),
}

fn unit_scale(unit: &str) -> Result<f64, FixtureError> {
    match unit {
        "percent" => Ok(100.0),
        "fraction" => Ok(1.0),
        other => Err(FixtureError::Unit(other.to_string())),
    }
}

/// Baseline and framework accuracy tables for one model and questionnaire.
/// Live questionnaire runs are written in the same shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyFile {
    pub name: String,
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub questionnaire: String,
    pub unit: String,
    pub baseline: Vec<AccuracyRow>,
    pub jpaf: Vec<AccuracyRow>,
}

impl AccuracyFile {
    pub fn from_json(s: &str) -> Result<Self, FixtureError> {
        let f: AccuracyFile = serde_json::from_str(s)?;
        unit_scale(&f.unit)?;
        Ok(f)
    }

    /// `(jpaf, baseline)` as fractions.
    pub fn tables(&self) -> Result<(AccuracyTable, AccuracyTable), FixtureError> {
        let scale = unit_scale(&self.unit)?;
        Ok((
            AccuracyTable::from_rows(format!("{}/jpaf", self.name), &self.jpaf, scale)?,
            AccuracyTable::from_rows(format!("{}/baseline", self.name), &self.baseline, scale)?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaaRow {
    #[serde(rename = "type")]
    pub mbti: MbtiType,
    pub taa: BTreeMap<PsychFunction, f64>,
}

/// Per-(profile, scenario) TAA for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaaFile {
    pub name: String,
    #[serde(default)]
    pub model: String,
    pub unit: String,
    pub rows: Vec<TaaRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average: Option<BTreeMap<PsychFunction, f64>>,
}

impl TaaFile {
    pub fn from_json(s: &str) -> Result<Self, FixtureError> {
        let f: TaaFile = serde_json::from_str(s)?;
        unit_scale(&f.unit)?;
        Ok(f)
    }

    /// Entries as fractions.
    pub fn entries(&self) -> Result<Vec<TaaEntry>, FixtureError> {
        let scale = unit_scale(&self.unit)?;
        Ok(self
            .rows
            .iter()
            .flat_map(|r| {
                PsychFunction::ALL.iter().filter_map(move |f| {
                    r.taa.get(f).map(|v| TaaEntry {
                        mbti: r.mbti,
                        target: *f,
                        value: v / scale,
                    })
                })
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaaEntry {
    #[serde(rename = "type")]
    pub mbti: MbtiType,
    pub target: PsychFunction,
    pub value: f64,
}

/// Mean TAA per scenario target over the entries present.
pub fn taa_column_means(entries: &[TaaEntry]) -> BTreeMap<PsychFunction, f64> {
    let mut acc: BTreeMap<PsychFunction, (f64, usize)> = BTreeMap::new();
    for e in entries {
        let s = acc.entry(e.target).or_insert((0.0, 0));
        s.0 += e.value;
        s.1 += 1;
    }
    acc.into_iter().map(|(f, (s, n))| (f, s / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionMetrics {
    pub dimension: Dimension,
    pub dag: f64,
    pub dar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub provenance: Vec<String>,
    pub dar_tolerance: f64,
    /// One block per accuracy file.
    pub accuracy: Vec<AccuracyMetrics>,
    /// One block per TAA source.
    pub taa: Vec<TaaBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psa: Option<PsaSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMetrics {
    pub name: String,
    pub dimensions: Vec<DimensionMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaaBlock {
    pub name: String,
    pub entries: Vec<TaaEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsaSummary {
    pub matched: usize,
    pub cases: usize,
    pub psa: f64,
}

impl AccuracyMetrics {
    pub fn compute(
        name: &str,
        jpaf: &AccuracyTable,
        baseline: &AccuracyTable,
        tolerance: f64,
    ) -> Result<Self, MetricsError> {
        let dimensions = Dimension::ALL
            .into_iter()
            .map(|d| {
                Ok(DimensionMetrics {
                    dimension: d,
                    dag: dag(jpaf, baseline, d)?,
                    dar: dar(jpaf, baseline, d, tolerance)?,
                })
            })
            .collect::<Result<_, MetricsError>>()?;
        Ok(AccuracyMetrics {
            name: name.to_string(),
            dimensions,
        })
    }
}

impl MetricsReport {
    pub fn new(dar_tolerance: f64) -> Self {
        MetricsReport {
            provenance: Vec::new(),
            dar_tolerance,
            accuracy: Vec::new(),
            taa: Vec::new(),
            psa: None,
        }
    }

    /// Checks every value against its declared range.
    pub fn check_ranges(&self) -> Result<(), String> {
        for a in &self.accuracy {
            for m in &a.dimensions {
                if !(-1.0..=1.0).contains(&m.dag) || !(0.0..=1.0).contains(&m.dar) {
                    return Err(format!("{} {}: dag {} dar {}", a.name, m.dimension, m.dag, m.dar));
                }
            }
        }
        for e in self.taa.iter().flat_map(|b| &b.entries) {
            if !(0.0..=1.0).contains(&e.value) {
                return Err(format!("taa {} {}: {}", e.mbti, e.target, e.value));
            }
        }
        if let Some(p) = self.psa {
            if !(0.0..=1.0).contains(&p.psa) {
                return Err(format!("psa {}", p.psa));
            }
        }
        Ok(())
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        if !self.provenance.is_empty() {
            let _ = writeln!(s, "sources: {}", self.provenance.join(", "));
        }
        for a in &self.accuracy {
            let _ = writeln!(s, "\n{}  (DAR tolerance {})", a.name, self.dar_tolerance);
            let _ = writeln!(s, "  dim      DAG%     DAR%");
            for m in &a.dimensions {
                let _ = writeln!(
                    s,
                    "  {:<4} {:>+8.2} {:>8.2}",
                    m.dimension.label(),
                    m.dag * 100.0,
                    m.dar * 100.0
                );
            }
        }
        for block in &self.taa {
            let _ = writeln!(s, "\n{}  TAA%", block.name);
            let mut header = String::from("  type");
            for f in PsychFunction::ALL {
                let _ = write!(header, " {:>7}", f.label());
            }
            let _ = writeln!(s, "{header}");
            for t in MbtiType::ALL {
                let row: Vec<_> = block.entries.iter().filter(|e| e.mbti == t).collect();
                if row.is_empty() {
                    continue;
                }
                let _ = write!(s, "  {t}");
                for f in PsychFunction::ALL {
                    match row.iter().find(|e| e.target == f) {
                        Some(e) => {
                            let _ = write!(s, " {:>7.2}", e.value * 100.0);
                        }
                        None => {
                            let _ = write!(s, " {:>7}", "-");
                        }
                    }
                }
                let _ = writeln!(s);
            }
            let _ = write!(s, "  avg ");
            let means = taa_column_means(&block.entries);
            for f in PsychFunction::ALL {
                match means.get(&f) {
                    Some(v) => {
                        let _ = write!(s, " {:>7.2}", v * 100.0);
                    }
                    None => {
                        let _ = write!(s, " {:>7}", "-");
                    }
                }
            }
            let _ = writeln!(s);
        }
        if let Some(p) = self.psa {
            let _ = writeln!(s, "\nPSA {}/{} = {:.2}%", p.matched, p.cases, p.psa * 100.0);
        }
        s
    }

    /// Per-dimension DAG/DAR series, tab-separated.
    pub fn accuracy_tsv(&self) -> String {
        let mut s = String::from("source\tdimension\tdag\tdar\n");
        for a in &self.accuracy {
            for m in &a.dimensions {
                let _ = writeln!(s, "{}\t{}\t{:.6}\t{:.6}", a.name, m.dimension, m.dag, m.dar);
            }
        }
        s
    }

    pub fn taa_tsv(&self) -> String {
        let mut s = String::from("source\ttype\ttarget\ttaa\n");
        for b in &self.taa {
            for e in &b.entries {
                let _ = writeln!(s, "{}\t{}\t{}\t{:.6}", b.name, e.mbti, e.target, e.value);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GPT70: &str = include_str!("../../data/fixtures/accuracy-gpt-mbti70.json");
    const GPT_TAA: &str = include_str!("../../data/fixtures/taa-gpt.json");

    #[test]
    fn fixture_loads() {
        let f = AccuracyFile::from_json(GPT70).unwrap();
        let (j, b) = f.tables().unwrap();
        assert!(j.is_complete() && b.is_complete());
        assert_eq!(b.get(MbtiType::INFJ, Dimension::EI).unwrap(), 0.9);
    }

    #[test]
    fn taa_average_row_matches_columns() {
        let f = TaaFile::from_json(GPT_TAA).unwrap();
        let entries = f.entries().unwrap();
        assert_eq!(entries.len(), 128);
        let means = taa_column_means(&entries);
        for (func, avg) in f.average.as_ref().unwrap() {
            // published averages are truncated to two decimals of a percent
            assert!((means[func] * 100.0 - avg).abs() < 0.01, "{func}");
        }
    }

    #[test]
    fn report_renders() {
        let f = AccuracyFile::from_json(GPT70).unwrap();
        let (j, b) = f.tables().unwrap();
        let mut r = MetricsReport::new(DAR_TOLERANCE);
        r.provenance.push(f.name.clone());
        r.accuracy
            .push(AccuracyMetrics::compute(&f.name, &j, &b, DAR_TOLERANCE).unwrap());
        r.check_ranges().unwrap();
        let text = r.render_text();
        assert!(text.contains("+9.75"), "{text}");
        assert!(r.accuracy_tsv().lines().count() == 5);
        let json = serde_json::to_string(&r).unwrap();
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn bad_unit_rejected() {
        let src = r#"{"name":"x","unit":"permille","baseline":[],"jpaf":[]}"#;
        assert!(matches!(AccuracyFile::from_json(src), Err(FixtureError::Unit(_))));
    }
}
