//! The adaptation loop.
//!
//! Each question goes through coordination (does the dominant/auxiliary
//! pair handle it?), then reinforcement of the handling function or
//! compensation by an outside function, then a trigger check that may start
//! a reflection. Reflection turns a sustained temporary elevation into one
//! of four structural rewrites, or declines and decays the candidate.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{
    CoordinationMode, Directive, Oracle, OracleError, OracleQuery, OracleRequest, OracleResponse, RequestKind,
    RewriteProposal, DEFAULT_MEMORY_WINDOW,
};
use crate::scenario::ScenarioQuestion;
use crate::typology::{mbti_for, valid_auxiliaries, MbtiType, PsychFunction};
use crate::weights::{RangeParams, RewriteRule, Trigger, WeightError, WeightProfile};

/// Margin that keeps post-rewrite weights strictly inside their ranges.
pub const REWRITE_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("oracle named {0} as compensatory, but it belongs to the dominant-auxiliary pair")]
    InvalidCompensation(PsychFunction),
    #[error("oracle reported success by {0}, which is neither dominant nor auxiliary")]
    InvalidHandler(PsychFunction),
    #[error("oracle chose {chosen} as auxiliary for {dominant}; valid choices are {options:?}")]
    InvalidAuxiliary {
        dominant: PsychFunction,
        chosen: PsychFunction,
        options: [PsychFunction; 2],
    },
    #[error("no questions to run")]
    EmptyQuestions,
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl EngineError {
    /// True for failures that originate in the oracle rather than in the
    /// engine itself.
    pub fn is_oracle_failure(&self) -> bool {
        matches!(
            self,
            EngineError::Oracle(_)
                | EngineError::InvalidCompensation(_)
                | EngineError::InvalidHandler(_)
                | EngineError::InvalidAuxiliary { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
        })
    }
}

/// Dominant–auxiliary pair plus its type label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub dominant: PsychFunction,
    pub auxiliary: PsychFunction,
    pub mbti: MbtiType,
}

impl Structure {
    pub fn of(profile: &WeightProfile) -> Self {
        Structure {
            dominant: profile.dominant,
            auxiliary: profile.auxiliary,
            mbti: profile.mbti(),
        }
    }

    fn new(dominant: PsychFunction, auxiliary: PsychFunction) -> Self {
        Structure {
            dominant,
            auxiliary,
            mbti: mbti_for(dominant, auxiliary).expect("rewrites target valid pairings"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReflectionKind {
    DominantReplacement,
    AuxiliaryReplacement,
    RoleSwap,
    StructuralReorganization,
    NoChange,
}

impl ReflectionKind {
    pub fn label(self) -> &'static str {
        match self {
            ReflectionKind::DominantReplacement => "dominant_replacement",
            ReflectionKind::AuxiliaryReplacement => "auxiliary_replacement",
            ReflectionKind::RoleSwap => "role_swap",
            ReflectionKind::StructuralReorganization => "structural_reorganization",
            ReflectionKind::NoChange => "no_change",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ReflectionKind::DominantReplacement,
            ReflectionKind::AuxiliaryReplacement,
            ReflectionKind::RoleSwap,
            ReflectionKind::StructuralReorganization,
            ReflectionKind::NoChange,
        ]
        .into_iter()
        .find(|k| k.label() == s)
    }
}

impl fmt::Display for ReflectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl From<RewriteRule> for ReflectionKind {
    fn from(r: RewriteRule) -> Self {
        match r {
            RewriteRule::RoleSwap => ReflectionKind::RoleSwap,
            RewriteRule::DominantReplacement => ReflectionKind::DominantReplacement,
            RewriteRule::AuxiliaryReplacement => ReflectionKind::AuxiliaryReplacement,
            RewriteRule::StructuralReorganization => ReflectionKind::StructuralReorganization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionEvent {
    pub kind: ReflectionKind,
    /// Rule that was put to the oracle; `None` for a dominance-cap
    /// renormalization.
    pub proposed: Option<RewriteRule>,
    pub before: Structure,
    pub after: Structure,
    pub approved: bool,
    pub question_index: usize,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub rationale: String,
}

impl ReflectionEvent {
    /// True for an approved rewrite that changed the pair.
    pub fn is_structural(&self) -> bool {
        self.kind != ReflectionKind::NoChange
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStep {
    pub question_index: usize,
    pub handled_by: PsychFunction,
    pub outcome: Outcome,
    pub compensatory: Option<PsychFunction>,
    pub trigger: Option<Trigger>,
    pub reflection: Option<ReflectionEvent>,
}

impl EpisodeStep {
    /// The function whose temporary weight this step raised.
    pub fn boosted(&self) -> PsychFunction {
        self.compensatory.unwrap_or(self.handled_by)
    }
}

/// Append-only record of completed steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MemoryLog {
    steps: Vec<EpisodeStep>,
}

impl MemoryLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: EpisodeStep) -> Result<(), EngineError> {
        if let Some(last) = self.steps.last() {
            if step.question_index <= last.question_index {
                return Err(EngineError::Invariant(format!(
                    "step {} appended after step {}",
                    step.question_index, last.question_index
                )));
            }
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn steps(&self) -> &[EpisodeStep] {
        &self.steps
    }

    /// The last `n` steps, oldest first.
    pub fn window(&self, n: usize) -> &[EpisodeStep] {
        &self.steps[self.steps.len().saturating_sub(n)..]
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub params: RangeParams,
    pub memory_window: usize,
    pub coordination: CoordinationMode,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            params: RangeParams::default(),
            memory_window: DEFAULT_MEMORY_WINDOW,
            coordination: CoordinationMode::Both,
        }
    }
}

/// One agent: its profile, configuration and memory.
#[derive(Debug, Clone)]
pub struct Agent {
    pub profile: WeightProfile,
    pub config: EngineConfig,
    pub log: MemoryLog,
    next_index: usize,
}

impl Agent {
    pub fn new(profile: WeightProfile, config: EngineConfig) -> Self {
        Agent {
            profile,
            config,
            log: MemoryLog::new(),
            next_index: 0,
        }
    }

    /// Resumes an agent whose earlier steps are not kept in memory.
    pub fn resume(profile: WeightProfile, config: EngineConfig, next_index: usize) -> Self {
        Agent {
            next_index,
            ..Agent::new(profile, config)
        }
    }

    /// Index the next step will carry.
    pub fn next_index(&self) -> usize {
        self.next_index
    }

    /// Consumes the next question index without running a step, for a
    /// question that could not be completed. Returns the skipped index.
    pub fn skip_question(&mut self) -> usize {
        let i = self.next_index;
        self.next_index += 1;
        i
    }

    fn request(&self, profile: &WeightProfile, query: OracleQuery) -> OracleRequest {
        OracleRequest {
            query,
            profile: profile.clone(),
            directive: Directive::for_profile(profile, self.config.coordination),
            memory: self.log.window(self.config.memory_window).to_vec(),
        }
    }

    /// Runs one question. The profile is only updated when the whole step,
    /// including any reflection, completes.
    pub fn step<O: Oracle + ?Sized>(
        &mut self,
        question: &ScenarioQuestion,
        oracle: &O,
    ) -> Result<EpisodeStep, EngineError> {
        let params = self.config.params;
        let index = self.next_index;
        let mut profile = self.profile.clone();

        let req = self.request(
            &profile,
            OracleQuery::Handle {
                question: question.clone(),
            },
        );
        let (handled_by, success) = match oracle.consult(&req)? {
            OracleResponse::Handle { handled_by, success } => (handled_by, success),
            _ => return Err(unexpected(RequestKind::Handle)),
        };

        let (outcome, compensatory) = if success {
            if handled_by != profile.dominant && handled_by != profile.auxiliary {
                return Err(EngineError::InvalidHandler(handled_by));
            }
            profile.boost(handled_by, &params);
            (Outcome::Success, None)
        } else {
            let excluded = [profile.dominant, profile.auxiliary];
            let req = self.request(
                &profile,
                OracleQuery::Compensate {
                    question: question.clone(),
                    excluded,
                },
            );
            let f = match oracle.consult(&req)? {
                OracleResponse::Compensate { function } => function,
                _ => return Err(unexpected(RequestKind::Compensate)),
            };
            if excluded.contains(&f) {
                return Err(EngineError::InvalidCompensation(f));
            }
            profile.boost(f, &params);
            (Outcome::Failure, Some(f))
        };

        let trigger = profile.trigger_state(&params);
        let reflection = match trigger {
            Some(t) => Some(reflect(
                &mut profile,
                t,
                oracle,
                &self.config,
                self.log.window(self.config.memory_window),
                index,
            )?),
            None => None,
        };

        profile.check_invariants().map_err(EngineError::Invariant)?;

        let step = EpisodeStep {
            question_index: index,
            handled_by,
            outcome,
            compensatory,
            trigger,
            reflection,
        };
        self.log.push(step.clone())?;
        self.profile = profile;
        self.next_index += 1;
        Ok(step)
    }

    /// Folds [`Agent::step`] over `questions`, stopping at the first error.
    pub fn run_scenario_set<O: Oracle + ?Sized>(
        &mut self,
        questions: &[ScenarioQuestion],
        oracle: &O,
    ) -> Result<Vec<EpisodeStep>, EngineError> {
        if questions.is_empty() {
            return Err(EngineError::EmptyQuestions);
        }
        questions.iter().map(|q| self.step(q, oracle)).collect()
    }
}

fn unexpected(expected: RequestKind) -> EngineError {
    EngineError::Oracle(OracleError::UnexpectedResponse { expected })
}

/// Resolves a fired trigger.
///
/// A dominance-cap hit only renormalizes. A candidate trigger is turned into
/// a rewrite proposal (asking the oracle for the auxiliary first when the
/// rewrite is a reorganization) and put to the oracle for approval. Approval
/// applies [`post_rewrite_weights`]; a decline decays the candidate.
pub fn reflect<O: Oracle + ?Sized>(
    profile: &mut WeightProfile,
    trigger: Trigger,
    oracle: &O,
    config: &EngineConfig,
    memory: &[EpisodeStep],
    question_index: usize,
) -> Result<ReflectionEvent, EngineError> {
    let before = Structure::of(profile);
    let request = |profile: &WeightProfile, query| OracleRequest {
        query,
        profile: profile.clone(),
        directive: Directive::for_profile(profile, config.coordination),
        memory: memory.to_vec(),
    };

    let (candidate, rule) = match trigger {
        Trigger::DominanceCapHit => {
            profile.renormalize();
            return Ok(ReflectionEvent {
                kind: ReflectionKind::NoChange,
                proposed: None,
                before,
                after: before,
                approved: true,
                question_index,
                rationale: String::new(),
            });
        }
        Trigger::CandidateExceeds { function, rule, .. } => (function, rule),
    };

    let (dom, aux) = (profile.dominant, profile.auxiliary);
    let (new_dom, new_aux) = match rule {
        RewriteRule::RoleSwap => (aux, dom),
        RewriteRule::DominantReplacement => (candidate, aux),
        RewriteRule::AuxiliaryReplacement => (dom, candidate),
        RewriteRule::StructuralReorganization => {
            let options = valid_auxiliaries(candidate);
            let req = request(
                profile,
                OracleQuery::ChooseAuxiliary {
                    dominant: candidate,
                    options,
                },
            );
            let chosen = match oracle.consult(&req)? {
                OracleResponse::ChooseAuxiliary { function } => function,
                _ => return Err(unexpected(RequestKind::ChooseAuxiliary)),
            };
            if !options.contains(&chosen) {
                return Err(EngineError::InvalidAuxiliary {
                    dominant: candidate,
                    chosen,
                    options,
                });
            }
            (candidate, chosen)
        }
    };

    let proposal = RewriteProposal {
        rule,
        candidate,
        before,
        after: Structure::new(new_dom, new_aux),
        question_index,
    };
    let req = request(
        profile,
        OracleQuery::ApproveRewrite {
            proposal: proposal.clone(),
        },
    );
    let (approved, rationale) = match oracle.consult(&req)? {
        OracleResponse::ApproveRewrite { approved, rationale } => (approved, rationale),
        _ => return Err(unexpected(RequestKind::ApproveRewrite)),
    };

    if approved {
        post_rewrite_weights(profile, rule, new_dom, new_aux, &config.params);
        Ok(ReflectionEvent {
            kind: rule.into(),
            proposed: Some(rule),
            before,
            after: proposal.after,
            approved: true,
            question_index,
            rationale,
        })
    } else {
        profile.decay(candidate, &config.params)?;
        Ok(ReflectionEvent {
            kind: ReflectionKind::NoChange,
            proposed: Some(rule),
            before,
            after: before,
            approved: false,
            question_index,
            rationale,
        })
    }
}

/// Applies an approved rewrite to the weights and installs the new pair.
///
/// Before rescaling, each function holds `max(base, temp)`; the functions
/// the rule moves are then overwritten:
///
/// | role                      | value                         |
/// |---------------------------|-------------------------------|
/// | new dominant              | `max(current, A + margin)`    |
/// | promoted auxiliary        | `A - margin`                  |
/// | demoted former dominant   | `B + margin`                  |
/// | demoted former auxiliary  | `(A + B) / 2`                 |
///
/// If folded temporaries or small normalized values would leave the new
/// auxiliary at or below some other function (or the dominant at or below
/// the auxiliary), the offending role is lifted by the margin above its
/// competitor. The result is rescaled to sum to one and every temporary
/// weight is cleared.
pub fn post_rewrite_weights(
    profile: &mut WeightProfile,
    rule: RewriteRule,
    new_dom: PsychFunction,
    new_aux: PsychFunction,
    params: &RangeParams,
) {
    let (old_dom, old_aux) = (profile.dominant, profile.auxiliary);
    let high = params.a + REWRITE_MARGIN;
    let upper_low = params.a - REWRITE_MARGIN;
    let lower_low = params.b + REWRITE_MARGIN;
    let mid_low = (params.a + params.b) / 2.0;

    let mut merged = profile.base;
    for f in PsychFunction::ALL {
        merged[f] = profile.base[f].max(profile.temp[f]);
    }

    match rule {
        RewriteRule::DominantReplacement => {
            merged[new_dom] = merged[new_dom].max(high);
            merged[old_dom] = lower_low;
        }
        RewriteRule::AuxiliaryReplacement => {
            merged[new_aux] = upper_low;
            merged[old_aux] = mid_low;
        }
        RewriteRule::RoleSwap => {
            merged[new_dom] = merged[new_dom].max(high);
            merged[new_aux] = upper_low;
        }
        RewriteRule::StructuralReorganization => {
            merged[new_dom] = merged[new_dom].max(high);
            merged[new_aux] = upper_low;
            merged[old_dom] = lower_low;
            merged[old_aux] = mid_low;
        }
    }

    let others_max = PsychFunction::ALL
        .into_iter()
        .filter(|f| *f != new_dom && *f != new_aux)
        .map(|f| merged[f])
        .fold(0.0, f64::max);
    if merged[new_aux] <= others_max {
        merged[new_aux] = others_max + REWRITE_MARGIN;
    }
    if merged[new_dom] <= merged[new_aux] {
        merged[new_dom] = merged[new_aux] + REWRITE_MARGIN;
    }

    profile.base = merged;
    profile.temp = crate::weights::FunctionWeights::ZERO;
    profile.renormalize();
    profile.dominant = new_dom;
    profile.auxiliary = new_aux;
}
