//! Scenario sets: three scenarios of five questions each, all engineered to
//! call on one target function.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::typology::PsychFunction;

pub const SCENARIOS_PER_SET: usize = 3;
pub const QUESTIONS_PER_SCENARIO: usize = 5;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario set is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scenario set has {0} scenarios, expected 3")]
    ScenarioCount(usize),
    #[error("scenario {index} has {count} questions, expected 5")]
    QuestionCount { index: usize, count: usize },
    #[error("scenario {scenario}, question {question} is empty")]
    EmptyQuestion { scenario: usize, question: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub title: String,
    /// Design principles the scenario exercises.
    #[serde(default)]
    pub principles: Vec<String>,
    pub questions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub target: PsychFunction,
    pub scenarios: Vec<Scenario>,
}

/// One question as the engine sees it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioQuestion {
    /// 0-based position inside its set.
    pub index: usize,
    pub scenario: usize,
    pub target: PsychFunction,
    pub text: String,
}

impl ScenarioSet {
    pub fn from_json(s: &str) -> Result<Self, ScenarioError> {
        let set: ScenarioSet = serde_json::from_str(s)?;
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.scenarios.len() != SCENARIOS_PER_SET {
            return Err(ScenarioError::ScenarioCount(self.scenarios.len()));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if s.questions.len() != QUESTIONS_PER_SCENARIO {
                return Err(ScenarioError::QuestionCount {
                    index: i,
                    count: s.questions.len(),
                });
            }
            if let Some(q) = s.questions.iter().position(|q| q.trim().is_empty()) {
                return Err(ScenarioError::EmptyQuestion {
                    scenario: i,
                    question: q,
                });
            }
        }
        Ok(())
    }

    /// The 15 questions flattened in presentation order.
    pub fn questions(&self) -> Vec<ScenarioQuestion> {
        self.scenarios
            .iter()
            .enumerate()
            .flat_map(|(si, s)| s.questions.iter().map(move |q| (si, q)))
            .enumerate()
            .map(|(index, (scenario, text))| ScenarioQuestion {
                index,
                scenario,
                target: self.target,
                text: text.clone(),
            })
            .collect()
    }

    /// A set whose questions carry only placeholder text. Used by sweeps
    /// driven by the scripted oracle, which never reads the text.
    pub fn synthetic(target: PsychFunction) -> Self {
        ScenarioSet {
            target,
            scenarios: (0..SCENARIOS_PER_SET)
                .map(|s| Scenario {
                    title: format!("{target} scenario {}", s + 1),
                    principles: Vec::new(),
                    questions: (0..QUESTIONS_PER_SCENARIO)
                        .map(|q| format!("{target} scenario {} question {}", s + 1, q + 1))
                        .collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_is_valid() {
        let set = ScenarioSet::synthetic(PsychFunction::Fi);
        set.validate().unwrap();
        let qs = set.questions();
        assert_eq!(qs.len(), 15);
        assert_eq!(qs[7].index, 7);
        assert_eq!(qs[7].scenario, 1);
        assert!(qs.iter().all(|q| q.target == PsychFunction::Fi));
    }

    #[test]
    fn shape_errors() {
        let mut set = ScenarioSet::synthetic(PsychFunction::Se);
        set.scenarios[2].questions.pop();
        assert!(matches!(
            set.validate(),
            Err(ScenarioError::QuestionCount { index: 2, count: 4 })
        ));
        set.scenarios.pop();
        assert!(matches!(set.validate(), Err(ScenarioError::ScenarioCount(2))));
        let json = serde_json::to_string(&ScenarioSet::synthetic(PsychFunction::Ne)).unwrap();
        assert_eq!(ScenarioSet::from_json(&json).unwrap().target, PsychFunction::Ne);
        assert!(matches!(
            ScenarioSet::from_json(r#"{"target":"Xx","scenarios":[]}"#),
            Err(ScenarioError::Parse(_))
        ));
    }
}
