//! Deterministic stand-in for the LLM.
//!
//! The scripted oracle always recognizes the question's target function: the
//! pair succeeds exactly when the target is the dominant or the auxiliary,
//! and otherwise the target itself is recruited as the compensatory
//! function. Responses depend only on the script and the request.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Oracle, OracleError, OracleQuery, OracleRequest, OracleResponse};
use crate::evaluation::questionnaire::Choice;
use crate::typology::PsychFunction;

/// How rewrite proposals are answered.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApprovalPolicy {
    #[default]
    Always,
    Never,
    /// Entry `i` answers a proposal raised at question index `i`; indices
    /// past the end are declined.
    Scripted(Vec<bool>),
}

impl ApprovalPolicy {
    pub fn approves(&self, question_index: usize) -> bool {
        match self {
            ApprovalPolicy::Always => true,
            ApprovalPolicy::Never => false,
            ApprovalPolicy::Scripted(v) => v.get(question_index).copied().unwrap_or(false),
        }
    }
}

/// How questionnaire items are answered.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerPolicy {
    /// Always the pole matching the profile's type letter.
    #[default]
    Perfect,
    /// Like `Perfect`, but flipped on the listed item ids.
    ErrorMask(BTreeSet<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScriptedOracle {
    pub approval: ApprovalPolicy,
    pub answers: AnswerPolicy,
}

impl ScriptedOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_approval(mut self, approval: ApprovalPolicy) -> Self {
        self.approval = approval;
        self
    }

    pub fn with_answers(mut self, answers: AnswerPolicy) -> Self {
        self.answers = answers;
        self
    }
}

impl Oracle for ScriptedOracle {
    fn consult(&self, request: &OracleRequest) -> Result<OracleResponse, OracleError> {
        let profile = &request.profile;
        match &request.query {
            OracleQuery::Handle { question } => {
                let t = question.target;
                let success = t == profile.dominant || t == profile.auxiliary;
                Ok(OracleResponse::Handle {
                    handled_by: if success { t } else { profile.dominant },
                    success,
                })
            }
            OracleQuery::Compensate { question, excluded } => {
                if excluded.contains(&question.target) {
                    return Err(OracleError::Unsupported(format!(
                        "scripted target {} is excluded from compensation",
                        question.target
                    )));
                }
                Ok(OracleResponse::Compensate {
                    function: question.target,
                })
            }
            OracleQuery::ChooseAuxiliary { options, .. } => {
                // options arrive in canonical order, so the first maximum wins ties
                let mut best: PsychFunction = options[0];
                for &f in &options[1..] {
                    if profile.base[f] > profile.base[best] {
                        best = f;
                    }
                }
                Ok(OracleResponse::ChooseAuxiliary { function: best })
            }
            OracleQuery::ApproveRewrite { proposal } => {
                let approved = self.approval.approves(proposal.question_index);
                Ok(OracleResponse::ApproveRewrite {
                    approved,
                    rationale: String::from(if approved {
                        "scripted approve"
                    } else {
                        "scripted decline"
                    }),
                })
            }
            OracleQuery::AnswerItem { item } => {
                let letter = profile.mbti().letter(item.dimension);
                let pole = match &self.answers {
                    AnswerPolicy::ErrorMask(ids) if ids.contains(&item.id) => letter.opposite(),
                    _ => letter,
                };
                let choice = if item.pole_a == pole { Choice::A } else { Choice::B };
                Ok(OracleResponse::AnswerItem { choice })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::questionnaire::QuestionnaireItem;
    use crate::oracle::{answer_questionnaire_item, CoordinationMode, Directive};
    use crate::scenario::ScenarioQuestion;
    use crate::typology::{Dimension, MbtiType, Pole};
    use crate::weights::{RangeParams, WeightProfile};
    use PsychFunction::*;

    fn intp() -> WeightProfile {
        WeightProfile::init(MbtiType::INTP, &RangeParams::default(), 42).unwrap()
    }

    fn handle(target: PsychFunction) -> OracleResponse {
        let p = intp();
        let req = OracleRequest {
            query: OracleQuery::Handle {
                question: ScenarioQuestion {
                    index: 0,
                    scenario: 0,
                    target,
                    text: String::new(),
                },
            },
            directive: Directive::for_profile(&p, CoordinationMode::Both),
            profile: p,
            memory: vec![],
        };
        ScriptedOracle::new().consult(&req).unwrap()
    }

    #[test]
    fn handle_follows_target() {
        assert_eq!(
            handle(Ti),
            OracleResponse::Handle {
                handled_by: Ti,
                success: true
            }
        );
        assert_eq!(
            handle(Ne),
            OracleResponse::Handle {
                handled_by: Ne,
                success: true
            }
        );
        assert!(matches!(handle(Fe), OracleResponse::Handle { success: false, .. }));
    }

    #[test]
    fn approval_script() {
        let p = ApprovalPolicy::Scripted(vec![false, true]);
        assert!(!p.approves(0));
        assert!(p.approves(1));
        assert!(!p.approves(9));
    }

    #[test]
    fn answers_and_mask() {
        let p = intp();
        let item = QuestionnaireItem::new("7", Dimension::EI, Pole::E, Pole::I, "item 7").unwrap();
        let perfect = ScriptedOracle::new();
        assert_eq!(
            answer_questionnaire_item(&perfect, &p, CoordinationMode::Both, &item).unwrap(),
            Choice::B
        );
        let masked =
            ScriptedOracle::new().with_answers(AnswerPolicy::ErrorMask(["7".to_string()].into_iter().collect()));
        assert_eq!(
            answer_questionnaire_item(&masked, &p, CoordinationMode::Both, &item).unwrap(),
            Choice::A
        );
    }
}
