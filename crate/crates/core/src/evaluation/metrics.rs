//! Accuracy tables and the DAG/DAR/TAA/PSA metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expectation::{ExpectedShift, ObservedShift};
use crate::engine::EpisodeStep;
use crate::typology::{Dimension, MbtiType, PsychFunction};

/// Default absolute tolerance for DAR equality, in accuracy fractions.
pub const DAR_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("accuracy table {table:?} has no entry for {mbti} {dimension}")]
    MissingEntry {
        table: String,
        mbti: MbtiType,
        dimension: Dimension,
    },
    #[error("accuracy {value} for {mbti} {dimension} is outside [0, 1]")]
    OutOfRange {
        mbti: MbtiType,
        dimension: Dimension,
        value: f64,
    },
    #[error("no observation for expected case {mbti} / {target}")]
    MissingExpectation { mbti: MbtiType, target: PsychFunction },
    #[error("no steps to score")]
    EmptySteps,
}

/// Per-type, per-dimension accuracy for one condition, stored as fractions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccuracyTable {
    pub name: String,
    entries: [[Option<f64>; 4]; 16],
}

impl AccuracyTable {
    pub fn new(name: impl Into<String>) -> Self {
        AccuracyTable {
            name: name.into(),
            entries: [[None; 4]; 16],
        }
    }

    pub fn set(&mut self, mbti: MbtiType, d: Dimension, value: f64) -> Result<(), MetricsError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(MetricsError::OutOfRange {
                mbti,
                dimension: d,
                value,
            });
        }
        self.entries[mbti.index()][d.index()] = Some(value);
        Ok(())
    }

    pub fn get(&self, mbti: MbtiType, d: Dimension) -> Result<f64, MetricsError> {
        self.entries[mbti.index()][d.index()].ok_or_else(|| MetricsError::MissingEntry {
            table: self.name.clone(),
            mbti,
            dimension: d,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.entries.iter().flatten().all(Option::is_some)
    }

    /// Rows as `(type, [EI, SN, TF, JP])`, scaled by `scale`.
    pub fn rows(&self, scale: f64) -> Vec<AccuracyRow> {
        MbtiType::ALL
            .iter()
            .filter(|t| self.entries[t.index()].iter().any(Option::is_some))
            .map(|&t| {
                let e = self.entries[t.index()];
                AccuracyRow {
                    mbti: t,
                    ei: e[0].map(|v| v * scale),
                    sn: e[1].map(|v| v * scale),
                    tf: e[2].map(|v| v * scale),
                    jp: e[3].map(|v| v * scale),
                }
            })
            .collect()
    }

    /// Builds a table from rows whose values are divided by `scale`.
    pub fn from_rows(name: impl Into<String>, rows: &[AccuracyRow], scale: f64) -> Result<Self, MetricsError> {
        let mut t = AccuracyTable::new(name);
        for r in rows {
            for (d, v) in Dimension::ALL.into_iter().zip([r.ei, r.sn, r.tf, r.jp]) {
                if let Some(v) = v {
                    t.set(r.mbti, d, v / scale)?;
                }
            }
        }
        Ok(t)
    }
}

/// One row of an accuracy table file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    #[serde(rename = "type")]
    pub mbti: MbtiType,
    #[serde(rename = "EI", default, skip_serializing_if = "Option::is_none")]
    pub ei: Option<f64>,
    #[serde(rename = "SN", default, skip_serializing_if = "Option::is_none")]
    pub sn: Option<f64>,
    #[serde(rename = "TF", default, skip_serializing_if = "Option::is_none")]
    pub tf: Option<f64>,
    #[serde(rename = "JP", default, skip_serializing_if = "Option::is_none")]
    pub jp: Option<f64>,
}

/// Mean over the 16 types of `jpaf − baseline` on dimension `d`.
pub fn dag(jpaf: &AccuracyTable, baseline: &AccuracyTable, d: Dimension) -> Result<f64, MetricsError> {
    let mut total = 0.0;
    for t in MbtiType::ALL {
        total += jpaf.get(t, d)? - baseline.get(t, d)?;
    }
    Ok(total / 16.0)
}

/// Share of the 16 types whose two accuracies agree within `tolerance`.
pub fn dar(jpaf: &AccuracyTable, baseline: &AccuracyTable, d: Dimension, tolerance: f64) -> Result<f64, MetricsError> {
    let mut equal = 0usize;
    for t in MbtiType::ALL {
        if (jpaf.get(t, d)? - baseline.get(t, d)?).abs() <= tolerance {
            equal += 1;
        }
    }
    Ok(equal as f64 / 16.0)
}

/// Share of steps whose boosted function is `target`.
pub fn taa(steps: &[EpisodeStep], target: PsychFunction) -> Result<f64, MetricsError> {
    if steps.is_empty() {
        return Err(MetricsError::EmptySteps);
    }
    let hits = steps.iter().filter(|s| s.boosted() == target).count();
    Ok(hits as f64 / steps.len() as f64)
}

/// TAA over pre-extracted per-step boosted functions. `None` marks a step
/// whose oracle call failed; such steps count as misses unless
/// `exclude_failed` drops them from the denominator.
pub fn taa_with_failures(
    boosted: &[Option<PsychFunction>],
    target: PsychFunction,
    exclude_failed: bool,
) -> Result<f64, MetricsError> {
    let denom = if exclude_failed {
        boosted.iter().filter(|b| b.is_some()).count()
    } else {
        boosted.len()
    };
    if denom == 0 {
        return Err(MetricsError::EmptySteps);
    }
    let hits = boosted.iter().filter(|b| **b == Some(target)).count();
    Ok(hits as f64 / denom as f64)
}

pub type CaseKey = (MbtiType, PsychFunction);

/// Share of expected cases whose observed outcome is one of the accepted
/// paths. Every expectation needs an observation.
pub fn psa(
    expectations: &BTreeMap<CaseKey, ExpectedShift>,
    observed: &BTreeMap<CaseKey, ObservedShift>,
) -> Result<f64, MetricsError> {
    if expectations.is_empty() {
        return Ok(1.0);
    }
    let mut matched = 0usize;
    for (&(mbti, target), exp) in expectations {
        let obs = observed
            .get(&(mbti, target))
            .ok_or(MetricsError::MissingExpectation { mbti, target })?;
        if exp.accepts(obs) {
            matched += 1;
        }
    }
    Ok(matched as f64 / expectations.len() as f64)
}

/// PSA from plain counts, as published results report it.
pub fn psa_from_counts(matched: usize, cases: usize) -> f64 {
    if cases == 0 {
        1.0
    } else {
        matched as f64 / cases as f64
    }
}
