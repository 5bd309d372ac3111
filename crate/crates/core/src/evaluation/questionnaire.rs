//! Binary-choice MBTI questionnaires and per-dimension accuracy.
//!
//! Item files are tab-separated text. The first non-blank line names the
//! layout:
//!
//! ```text
//! #layout: tagged
//! <id> TAB <dimension> TAB <pole A> TAB <pole B> TAB <stem> TAB <choice A> TAB <choice B>
//! ```
//!
//! or
//!
//! ```text
//! #layout: cyclic7
//! <number> TAB <stem> TAB <choice A> TAB <choice B>
//! ```
//!
//! The `tagged` layout carries the dimension and poles on every row (the
//! 93-item form is distributed this way). In `cyclic7` the dimension follows
//! from the item number: items are laid out in seven columns, column 1 is
//! EI, columns 2–3 SN, 4–5 TF and 6–7 JP, and choice A is always the E, S,
//! T or J pole (the 70-item form). Other lines starting with `#` are
//! comments.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::typology::{Dimension, MbtiType, Pole};

/// Items per dimension in the 93-item form.
pub const MBTI93_COUNTS: [(Dimension, usize); 4] = [
    (Dimension::EI, 21),
    (Dimension::SN, 26),
    (Dimension::TF, 24),
    (Dimension::JP, 22),
];

/// Items per dimension in the 70-item form.
pub const MBTI70_COUNTS: [(Dimension, usize); 4] = [
    (Dimension::EI, 10),
    (Dimension::SN, 20),
    (Dimension::TF, 20),
    (Dimension::JP, 20),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuestionnaireError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("item {0:?} is not in the questionnaire")]
    UnknownItem(String),
    #[error("questionnaire has no {0} items")]
    EmptyDimension(Dimension),
    #[error("poles {a} and {b} do not form one dimension's opposed pair")]
    PoleMismatch { a: Pole, b: Pole },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
}

impl Choice {
    pub fn parse(s: &str) -> Option<Choice> {
        match s.trim() {
            "A" | "a" => Some(Choice::A),
            "B" | "b" => Some(Choice::B),
            _ => None,
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Choice::A => "A",
            Choice::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemLayout {
    Tagged,
    Cyclic7,
}

impl ItemLayout {
    pub fn label(self) -> &'static str {
        match self {
            ItemLayout::Tagged => "tagged",
            ItemLayout::Cyclic7 => "cyclic7",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireItem {
    pub id: String,
    pub dimension: Dimension,
    pub pole_a: Pole,
    pub pole_b: Pole,
    pub text: String,
    #[serde(default)]
    pub choice_a: String,
    #[serde(default)]
    pub choice_b: String,
}

impl QuestionnaireItem {
    pub fn new(
        id: impl Into<String>,
        dimension: Dimension,
        pole_a: Pole,
        pole_b: Pole,
        text: impl Into<String>,
    ) -> Result<Self, QuestionnaireError> {
        if pole_a.dimension() != dimension || pole_b != pole_a.opposite() {
            return Err(QuestionnaireError::PoleMismatch { a: pole_a, b: pole_b });
        }
        Ok(QuestionnaireItem {
            id: id.into(),
            dimension,
            pole_a,
            pole_b,
            text: text.into(),
            choice_a: String::new(),
            choice_b: String::new(),
        })
    }

    pub fn pole_of(&self, choice: Choice) -> Pole {
        match choice {
            Choice::A => self.pole_a,
            Choice::B => self.pole_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Questionnaire {
    pub layout: ItemLayout,
    pub items: Vec<QuestionnaireItem>,
}

fn cyclic7_dimension(number: usize) -> (Dimension, Pole) {
    match (number - 1) % 7 {
        0 => (Dimension::EI, Pole::E),
        1 | 2 => (Dimension::SN, Pole::S),
        3 | 4 => (Dimension::TF, Pole::T),
        _ => (Dimension::JP, Pole::J),
    }
}

impl Questionnaire {
    pub fn parse(src: &str) -> Result<Self, QuestionnaireError> {
        let mut layout = None;
        let mut items: Vec<QuestionnaireItem> = Vec::new();
        let mut seen = HashMap::new();

        for (i, raw) in src.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| QuestionnaireError::Format { line: line_no, message };
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(name) = rest.trim().strip_prefix("layout:") {
                    if layout.is_some() {
                        return Err(err("layout declared twice".into()));
                    }
                    layout = Some(match name.trim() {
                        "tagged" => ItemLayout::Tagged,
                        "cyclic7" => ItemLayout::Cyclic7,
                        other => return Err(err(format!("unknown layout {other:?}"))),
                    });
                }
                continue;
            }
            let layout = layout.ok_or_else(|| err("item before the #layout line".into()))?;
            let cols: Vec<&str> = line.split('\t').collect();
            let item = match layout {
                ItemLayout::Tagged => {
                    if cols.len() != 7 {
                        return Err(err(format!(
                            "expected 7 tab-separated fields (id, dimension, pole A, pole B, stem, choice A, choice B), found {}",
                            cols.len()
                        )));
                    }
                    let dimension: Dimension = cols[1].parse().map_err(|e| err(format!("{e}")))?;
                    let pa: Pole = cols[2].parse().map_err(|e| err(format!("{e}")))?;
                    let pb: Pole = cols[3].parse().map_err(|e| err(format!("{e}")))?;
                    let mut item = QuestionnaireItem::new(cols[0].trim(), dimension, pa, pb, cols[4])
                        .map_err(|e| err(e.to_string()))?;
                    item.choice_a = cols[5].to_string();
                    item.choice_b = cols[6].to_string();
                    item
                }
                ItemLayout::Cyclic7 => {
                    if cols.len() != 4 {
                        return Err(err(format!(
                            "expected 4 tab-separated fields (number, stem, choice A, choice B), found {}",
                            cols.len()
                        )));
                    }
                    let number: usize = cols[0]
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("item number {:?} is not a positive integer", cols[0])))?;
                    if number != items.len() + 1 {
                        return Err(err(format!(
                            "item number {number} out of sequence, expected {}",
                            items.len() + 1
                        )));
                    }
                    let (dimension, pa) = cyclic7_dimension(number);
                    let mut item = QuestionnaireItem::new(number.to_string(), dimension, pa, pa.opposite(), cols[1])
                        .expect("cyclic poles are opposed");
                    item.choice_a = cols[2].to_string();
                    item.choice_b = cols[3].to_string();
                    item
                }
            };
            if item.text.trim().is_empty() {
                return Err(err("empty item stem".into()));
            }
            if seen.insert(item.id.clone(), line_no).is_some() {
                return Err(err(format!("duplicate item id {:?}", item.id)));
            }
            items.push(item);
        }

        let layout = layout.ok_or(QuestionnaireError::Format {
            line: 0,
            message: "missing #layout line".into(),
        })?;
        Ok(Questionnaire { layout, items })
    }

    /// Renders the questionnaire back to its file layout.
    pub fn render(&self) -> String {
        let mut out = format!("#layout: {}\n", self.layout.label());
        for it in &self.items {
            match self.layout {
                ItemLayout::Tagged => out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    it.id, it.dimension, it.pole_a, it.pole_b, it.text, it.choice_a, it.choice_b
                )),
                ItemLayout::Cyclic7 => {
                    out.push_str(&format!("{}\t{}\t{}\t{}\n", it.id, it.text, it.choice_a, it.choice_b))
                }
            }
        }
        out
    }

    pub fn counts(&self) -> BTreeMap<Dimension, usize> {
        let mut m = BTreeMap::new();
        for it in &self.items {
            *m.entry(it.dimension).or_insert(0) += 1;
        }
        m
    }

    /// Placeholder-text questionnaire with the given per-dimension counts.
    /// Tagged items alternate which choice carries the first pole.
    pub fn synthetic(layout: ItemLayout, counts: &[(Dimension, usize)]) -> Self {
        let mut items = Vec::new();
        match layout {
            ItemLayout::Tagged => {
                for &(d, n) in counts {
                    let (p, q) = d.poles();
                    for k in 0..n {
                        let (pa, pb) = if k % 2 == 0 { (p, q) } else { (q, p) };
                        let id = format!("{}{:02}", d.label(), k + 1);
                        let mut it = QuestionnaireItem::new(id, d, pa, pb, format!("{d} item {}", k + 1))
                            .expect("opposed poles");
                        it.choice_a = format!("option {pa}");
                        it.choice_b = format!("option {pb}");
                        items.push(it);
                    }
                }
            }
            ItemLayout::Cyclic7 => {
                let total: usize = counts.iter().map(|(_, n)| n).sum();
                for number in 1..=total {
                    let (d, pa) = cyclic7_dimension(number);
                    let mut it =
                        QuestionnaireItem::new(number.to_string(), d, pa, pa.opposite(), format!("item {number}"))
                            .expect("opposed poles");
                    it.choice_a = "a".into();
                    it.choice_b = "b".into();
                    items.push(it);
                }
            }
        }
        Questionnaire { layout, items }
    }
}

/// Share of each dimension's items answered with the expected type's
/// letter. Unanswered items count as inconsistent.
pub fn dimension_accuracy(
    answers: &[(String, Choice)],
    items: &[QuestionnaireItem],
    expected: MbtiType,
) -> Result<BTreeMap<Dimension, f64>, QuestionnaireError> {
    let by_id: HashMap<&str, &QuestionnaireItem> = items.iter().map(|i| (i.id.as_str(), i)).collect();
    let mut totals = [0usize; 4];
    for it in items {
        totals[it.dimension.index()] += 1;
    }
    let mut hits = [0usize; 4];
    for (id, choice) in answers {
        let item = by_id
            .get(id.as_str())
            .ok_or_else(|| QuestionnaireError::UnknownItem(id.clone()))?;
        if item.pole_of(*choice) == expected.letter(item.dimension) {
            hits[item.dimension.index()] += 1;
        }
    }
    let mut out = BTreeMap::new();
    for d in Dimension::ALL {
        let n = totals[d.index()];
        if n == 0 {
            return Err(QuestionnaireError::EmptyDimension(d));
        }
        out.insert(d, hits[d.index()] as f64 / n as f64);
    }
    Ok(out)
}
