//! Judgments the adaptation loop delegates to an outside intelligence.
//!
//! Every decision the engine cannot make from weights alone goes through
//! [`Oracle::consult`]: whether the dominant/auxiliary pair handles a
//! question, which function compensates when it does not, which auxiliary a
//! reorganized dominant takes, whether a proposed rewrite is accepted, and
//! how a questionnaire item is answered.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EpisodeStep, Structure};
use crate::evaluation::questionnaire::{Choice, QuestionnaireItem};
use crate::scenario::ScenarioQuestion;
use crate::typology::PsychFunction;
use crate::weights::{RewriteRule, WeightProfile};

#[cfg(feature = "http")]
pub mod http;
pub mod llm;
pub mod scripted;

pub use llm::{LlmConfig, LlmOracle, PromptTemplates};
pub use scripted::{AnswerPolicy, ApprovalPolicy, ScriptedOracle};

/// Default number of past steps shown to the oracle; one scenario set.
pub const DEFAULT_MEMORY_WINDOW: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("could not parse a {expected} from the reply after {attempts} attempts; last reply: {last_reply:?}")]
    ParseFailure {
        expected: &'static str,
        attempts: usize,
        last_reply: String,
    },
    #[error("oracle answered a {expected:?} request with a different response kind")]
    UnexpectedResponse { expected: RequestKind },
    #[error("oracle cannot serve this request: {0}")]
    Unsupported(String),
}

/// How the agent is told to lean on its dominant and auxiliary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinationMode {
    DominantOnly,
    AuxiliaryOnly,
    #[default]
    Both,
}

/// Coordination directive bound to the profile's current pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Directive {
    pub mode: CoordinationMode,
    pub dominant: PsychFunction,
    pub auxiliary: PsychFunction,
}

impl Directive {
    pub fn for_profile(profile: &WeightProfile, mode: CoordinationMode) -> Self {
        Directive {
            mode,
            dominant: profile.dominant,
            auxiliary: profile.auxiliary,
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (d, a) = (self.dominant.name(), self.auxiliary.name());
        match self.mode {
            CoordinationMode::DominantOnly => write!(
                f,
                "Rely exclusively on your dominant function, {d} ({}).",
                self.dominant
            ),
            CoordinationMode::AuxiliaryOnly => write!(
                f,
                "Rely exclusively on your auxiliary function, {a} ({}).",
                self.auxiliary
            ),
            CoordinationMode::Both => write!(
                f,
                "Lead with your dominant function, {d} ({}), balanced by your auxiliary function, {a} ({}); use either or both as the situation requires.",
                self.dominant, self.auxiliary
            ),
        }
    }
}

/// A structural rewrite awaiting approval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteProposal {
    pub rule: RewriteRule,
    pub candidate: PsychFunction,
    pub before: Structure,
    pub after: Structure,
    pub question_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequestKind {
    Handle,
    Compensate,
    ChooseAuxiliary,
    ApproveRewrite,
    AnswerItem,
}

impl RequestKind {
    pub fn label(self) -> &'static str {
        match self {
            RequestKind::Handle => "handle",
            RequestKind::Compensate => "compensate",
            RequestKind::ChooseAuxiliary => "choose_auxiliary",
            RequestKind::ApproveRewrite => "approve_rewrite",
            RequestKind::AnswerItem => "answer_item",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleQuery {
    Handle {
        question: ScenarioQuestion,
    },
    /// Pick a function outside `excluded` to take over the question.
    Compensate {
        question: ScenarioQuestion,
        excluded: [PsychFunction; 2],
    },
    ChooseAuxiliary {
        dominant: PsychFunction,
        options: [PsychFunction; 2],
    },
    ApproveRewrite {
        proposal: RewriteProposal,
    },
    AnswerItem {
        item: QuestionnaireItem,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub query: OracleQuery,
    pub profile: WeightProfile,
    pub directive: Directive,
    /// Most recent steps, oldest first.
    pub memory: Vec<EpisodeStep>,
}

impl OracleRequest {
    pub fn kind(&self) -> RequestKind {
        match self.query {
            OracleQuery::Handle { .. } => RequestKind::Handle,
            OracleQuery::Compensate { .. } => RequestKind::Compensate,
            OracleQuery::ChooseAuxiliary { .. } => RequestKind::ChooseAuxiliary,
            OracleQuery::ApproveRewrite { .. } => RequestKind::ApproveRewrite,
            OracleQuery::AnswerItem { .. } => RequestKind::AnswerItem,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleResponse {
    Handle { handled_by: PsychFunction, success: bool },
    Compensate { function: PsychFunction },
    ChooseAuxiliary { function: PsychFunction },
    ApproveRewrite { approved: bool, rationale: String },
    AnswerItem { choice: Choice },
}

pub trait Oracle {
    fn consult(&self, request: &OracleRequest) -> Result<OracleResponse, OracleError>;
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn consult(&self, request: &OracleRequest) -> Result<OracleResponse, OracleError> {
        (**self).consult(request)
    }
}

impl<T: Oracle + ?Sized> Oracle for Box<T> {
    fn consult(&self, request: &OracleRequest) -> Result<OracleResponse, OracleError> {
        (**self).consult(request)
    }
}

/// Asks a questionnaire item outside of any adaptation episode.
pub fn answer_questionnaire_item<O: Oracle + ?Sized>(
    oracle: &O,
    profile: &WeightProfile,
    mode: CoordinationMode,
    item: &QuestionnaireItem,
) -> Result<Choice, OracleError> {
    let request = OracleRequest {
        query: OracleQuery::AnswerItem { item: item.clone() },
        profile: profile.clone(),
        directive: Directive::for_profile(profile, mode),
        memory: Vec::new(),
    };
    match oracle.consult(&request)? {
        OracleResponse::AnswerItem { choice } => Ok(choice),
        _ => Err(OracleError::UnexpectedResponse {
            expected: RequestKind::AnswerItem,
        }),
    }
}
