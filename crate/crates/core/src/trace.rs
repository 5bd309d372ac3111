//! Tab-separated step traces: one row per question, including questions
//! whose oracle call failed.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::{EpisodeStep, Outcome, ReflectionKind};
use crate::typology::{MbtiType, PsychFunction};
use crate::weights::{FunctionWeights, WeightProfile};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("trace line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

/// Formats `v` with at most 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// `v` rounded to 12 significant digits.
pub fn round_sig12(v: f64) -> f64 {
    fmt_sig12(v).parse().expect("formatted float parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    OracleError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub question_index: usize,
    pub target: PsychFunction,
    pub status: RowStatus,
    pub handled_by: Option<PsychFunction>,
    pub outcome: Option<Outcome>,
    pub boosted: Option<PsychFunction>,
    pub base: FunctionWeights,
    pub temp: FunctionWeights,
    /// Rendered trigger, e.g. `Fi>=dominant` or `cap`.
    pub trigger: Option<String>,
    pub reflection: Option<ReflectionKind>,
    pub approved: Option<bool>,
    pub mbti_after: MbtiType,
    pub note: String,
}

impl TraceRecord {
    pub fn from_step(step: &EpisodeStep, target: PsychFunction, after: &WeightProfile) -> Self {
        TraceRecord {
            question_index: step.question_index,
            target,
            status: RowStatus::Ok,
            handled_by: Some(step.handled_by),
            outcome: Some(step.outcome),
            boosted: Some(step.boosted()),
            base: after.base,
            temp: after.temp,
            trigger: step.trigger.map(|t| t.to_string()),
            reflection: step.reflection.as_ref().map(|r| r.kind),
            approved: step.reflection.as_ref().map(|r| r.approved),
            mbti_after: after.mbti(),
            note: String::new(),
        }
    }

    /// A question the engine could not complete; the profile is unchanged.
    pub fn oracle_failure(question_index: usize, target: PsychFunction, profile: &WeightProfile, error: &str) -> Self {
        TraceRecord {
            question_index,
            target,
            status: RowStatus::OracleError,
            handled_by: None,
            outcome: None,
            boosted: None,
            base: profile.base,
            temp: profile.temp,
            trigger: None,
            reflection: None,
            approved: None,
            mbti_after: profile.mbti(),
            note: error.replace(['\t', '\n', '\r'], " "),
        }
    }

    pub fn header() -> String {
        let mut cols: Vec<String> = ["question_index", "target", "status", "handled_by", "outcome", "boosted"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        cols.extend(PsychFunction::ALL.iter().map(|f| format!("base_{f}")));
        cols.extend(PsychFunction::ALL.iter().map(|f| format!("temp_{f}")));
        cols.extend(
            ["trigger", "reflection", "approved", "mbti_after", "note"]
                .iter()
                .map(|s| s.to_string()),
        );
        cols.join("\t")
    }

    pub fn to_line(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "-".to_string(), ToString::to_string)
        }
        let mut s = String::new();
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.question_index,
            self.target,
            match self.status {
                RowStatus::Ok => "ok",
                RowStatus::OracleError => "oracle_error",
            },
            opt(&self.handled_by),
            opt(&self.outcome),
            opt(&self.boosted),
        );
        for w in [&self.base, &self.temp] {
            for (_, v) in w.iter() {
                let _ = write!(s, "\t{}", fmt_sig12(v));
            }
        }
        let _ = write!(
            s,
            "\t{}\t{}\t{}\t{}\t{}",
            opt(&self.trigger),
            opt(&self.reflection),
            opt(&self.approved),
            self.mbti_after,
            if self.note.is_empty() { "-" } else { &self.note },
        );
        s
    }

    pub fn parse_line(line: &str, line_no: usize) -> Result<Self, TraceError> {
        let err = |message: String| TraceError { line: line_no, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 27 {
            return Err(err(format!("expected 27 fields, found {}", cols.len())));
        }
        fn opt<T>(s: &str, f: impl FnOnce(&str) -> Option<T>) -> Result<Option<T>, String> {
            if s == "-" {
                Ok(None)
            } else {
                f(s).map(Some).ok_or_else(|| format!("bad field {s:?}"))
            }
        }
        let func = |s: &str| s.parse::<PsychFunction>().ok();
        let weights = |range: std::ops::Range<usize>| -> Result<FunctionWeights, String> {
            let mut w = [0.0; 8];
            for (slot, c) in w.iter_mut().zip(&cols[range]) {
                *slot = c.parse().map_err(|_| format!("bad weight {c:?}"))?;
            }
            Ok(FunctionWeights::from_array(w))
        };
        Ok(TraceRecord {
            question_index: cols[0].parse().map_err(|_| err(format!("bad index {:?}", cols[0])))?,
            target: func(cols[1]).ok_or_else(|| err(format!("bad target {:?}", cols[1])))?,
            status: match cols[2] {
                "ok" => RowStatus::Ok,
                "oracle_error" => RowStatus::OracleError,
                s => return Err(err(format!("bad status {s:?}"))),
            },
            handled_by: opt(cols[3], func).map_err(err)?,
            outcome: opt(cols[4], |s| match s {
                "success" => Some(Outcome::Success),
                "failure" => Some(Outcome::Failure),
                _ => None,
            })
            .map_err(err)?,
            boosted: opt(cols[5], func).map_err(err)?,
            base: weights(6..14).map_err(err)?,
            temp: weights(14..22).map_err(err)?,
            trigger: opt(cols[22], |s| Some(s.to_string())).map_err(err)?,
            reflection: opt(cols[23], ReflectionKind::parse).map_err(err)?,
            approved: opt(cols[24], |s| s.parse().ok()).map_err(err)?,
            mbti_after: cols[25].parse().map_err(|_| err(format!("bad type {:?}", cols[25])))?,
            note: if cols[26] == "-" {
                String::new()
            } else {
                cols[26].to_string()
            },
        })
    }
}

pub fn render(records: &[TraceRecord]) -> String {
    let mut s = TraceRecord::header();
    s.push('\n');
    for r in records {
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s
}

pub fn parse(src: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut lines = src.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TraceRecord::header() => {}
        _ => {
            return Err(TraceError {
                line: 1,
                message: "missing or unexpected header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| TraceRecord::parse_line(l, i + 1))
        .collect()
}
