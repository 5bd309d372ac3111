//! Oracle backed by an OpenAI-compatible chat completion endpoint.
//!
//! Every request becomes a system prompt describing the current profile plus
//! one user prompt per query kind. Only the first non-empty line of a reply
//! is parsed; an unreadable reply is answered with a format reminder and
//! retried up to `retries` more times.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Oracle, OracleError, OracleQuery, OracleRequest, OracleResponse};
use crate::engine::EpisodeStep;
use crate::evaluation::questionnaire::Choice;
use crate::trace::fmt_sig12;
use crate::typology::PsychFunction;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: &str, content: impl Into<String>) -> Self {
        ChatMessage {
            role: role.to_string(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

/// Sends one chat completion and returns the assistant text.
pub trait ChatTransport {
    fn complete(&self, request: &ChatRequest) -> Result<String, OracleError>;
}

impl<T: ChatTransport + ?Sized> ChatTransport for &T {
    fn complete(&self, request: &ChatRequest) -> Result<String, OracleError> {
        (**self).complete(request)
    }
}

impl<T: ChatTransport + ?Sized> ChatTransport for Box<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, OracleError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// Base URL; `/chat/completions` is appended unless already present.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub temperature: f64,
    /// Extra attempts after an unreadable reply.
    pub retries: usize,
    pub timeout_secs: u64,
    /// Client-side request budget; `None` disables rate limiting.
    pub requests_per_minute: Option<u32>,
    /// Print prompts and replies to stderr.
    pub debug: bool,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "http://localhost:8000/v1".into(),
            model: "gpt-4o".into(),
            api_key_env: "JPAF_API_KEY".into(),
            temperature: 0.6,
            retries: 2,
            timeout_secs: 60,
            requests_per_minute: None,
            debug: false,
        }
    }
}

/// Prompt text with `{placeholder}` fields.
///
/// All templates may use `{function_weights}`, `{dominant}`, `{auxiliary}`,
/// `{directive}`, `{memory}` and `{question}`; query-specific fields are
/// `{excluded}`, `{options}`, `{new_dominant}`, `{rule}`, `{before}`,
/// `{after}`, `{candidate}`, `{choice_a}`, `{choice_b}` and, in the
/// reminder, `{expected}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplates {
    pub system: String,
    pub handle: String,
    pub compensate: String,
    pub choose_auxiliary: String,
    pub approve_rewrite: String,
    pub answer_item: String,
    pub format_reminder: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            system: include_str!("../../templates/system.txt").into(),
            handle: include_str!("../../templates/handle.txt").into(),
            compensate: include_str!("../../templates/compensate.txt").into(),
            choose_auxiliary: include_str!("../../templates/choose_auxiliary.txt").into(),
            approve_rewrite: include_str!("../../templates/approve_rewrite.txt").into(),
            answer_item: include_str!("../../templates/answer_item.txt").into(),
            format_reminder: include_str!("../../templates/format_reminder.txt").into(),
        }
    }
}

/// Replaces each `{key}` with its value. Unknown placeholders are left as is.
pub fn fill(template: &str, vars: &[(&str, String)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) if vars.iter().any(|(k, _)| *k == &after[..end]) => {
                let key = &after[..end];
                out.push_str(&vars.iter().find(|(k, _)| *k == key).expect("checked").1);
                rest = &after[end + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn render_memory(memory: &[EpisodeStep]) -> String {
    if memory.is_empty() {
        return "(none)".into();
    }
    let mut s = String::new();
    for m in memory {
        let _ = write!(s, "#{} {} by {}", m.question_index, m.outcome, m.handled_by);
        if let Some(c) = m.compensatory {
            let _ = write!(s, ", compensated by {c}");
        }
        if let Some(r) = &m.reflection {
            let _ = write!(
                s,
                ", reflection {} ({} -> {}, {})",
                r.kind,
                r.before.mbti,
                r.after.mbti,
                if r.approved { "approved" } else { "declined" }
            );
        }
        s.push('\n');
    }
    s.pop();
    s
}

/// First non-empty line with surrounding markup stripped.
fn first_line(reply: &str) -> &str {
    reply
        .lines()
        .map(|l| {
            l.trim()
                .trim_matches(|c: char| matches!(c, '*' | '`' | '"' | '\'' | '.' | ':' | '#' | '_'))
                .trim()
        })
        .find(|l| !l.is_empty())
        .unwrap_or("")
}

fn parse_function(token: &str) -> Option<PsychFunction> {
    token.trim_matches(|c: char| !c.is_ascii_alphanumeric()).parse().ok()
}

fn parse_reply(request: &OracleRequest, reply: &str) -> Option<OracleResponse> {
    let line = first_line(reply);
    let upper = line.to_ascii_uppercase();
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let p = &request.profile;
    match &request.query {
        OracleQuery::Handle { .. } => {
            if upper.starts_with("FAILURE") {
                return Some(OracleResponse::Handle {
                    handled_by: p.dominant,
                    success: false,
                });
            }
            match tokens.as_slice() {
                [f, verdict, ..] => {
                    let f = parse_function(f)?;
                    let v = verdict
                        .trim_matches(|c: char| !c.is_ascii_alphabetic())
                        .to_ascii_uppercase();
                    match v.as_str() {
                        "SUCCESS" if f == p.dominant || f == p.auxiliary => Some(OracleResponse::Handle {
                            handled_by: f,
                            success: true,
                        }),
                        "FAILURE" => Some(OracleResponse::Handle {
                            handled_by: p.dominant,
                            success: false,
                        }),
                        _ => None,
                    }
                }
                _ => None,
            }
        }
        OracleQuery::Compensate { excluded, .. } => {
            let f = parse_function(tokens.first()?)?;
            (!excluded.contains(&f)).then_some(OracleResponse::Compensate { function: f })
        }
        OracleQuery::ChooseAuxiliary { options, .. } => {
            let f = parse_function(tokens.first()?)?;
            options
                .contains(&f)
                .then_some(OracleResponse::ChooseAuxiliary { function: f })
        }
        OracleQuery::ApproveRewrite { .. } => {
            let approved = if upper.starts_with("APPROVE") {
                true
            } else if upper.starts_with("DECLINE") {
                false
            } else {
                return None;
            };
            let verdict_len = "APPROVE".len();
            let mut rationale = line[verdict_len.min(line.len())..]
                .trim_start_matches(|c: char| !c.is_alphanumeric())
                .to_string();
            if rationale.is_empty() {
                if let Some(next) = reply.lines().skip_while(|l| first_line(l).is_empty()).nth(1) {
                    rationale = next.trim().to_string();
                }
            }
            Some(OracleResponse::ApproveRewrite { approved, rationale })
        }
        OracleQuery::AnswerItem { .. } => {
            let t = tokens.first()?.trim_matches(|c: char| !c.is_ascii_alphanumeric());
            Choice::parse(t).map(|choice| OracleResponse::AnswerItem { choice })
        }
    }
}

fn expected_format(request: &OracleRequest) -> &'static str {
    match request.query {
        OracleQuery::Handle { .. } => "\"<function> SUCCESS\" or \"FAILURE\"",
        OracleQuery::Compensate { .. } => "a function abbreviation",
        OracleQuery::ChooseAuxiliary { .. } => "a function abbreviation",
        OracleQuery::ApproveRewrite { .. } => "APPROVE or DECLINE",
        OracleQuery::AnswerItem { .. } => "A or B",
    }
}

pub struct LlmOracle<T> {
    pub transport: T,
    pub config: LlmConfig,
    pub templates: PromptTemplates,
}

impl<T: ChatTransport> LlmOracle<T> {
    pub fn new(transport: T, config: LlmConfig) -> Self {
        LlmOracle {
            transport,
            config,
            templates: PromptTemplates::default(),
        }
    }

    pub fn with_templates(mut self, templates: PromptTemplates) -> Self {
        self.templates = templates;
        self
    }

    /// System and user messages for `request`.
    pub fn prompt(&self, request: &OracleRequest) -> Vec<ChatMessage> {
        let p = &request.profile;
        let mut weights = String::new();
        for f in p.base.ranking() {
            let _ = writeln!(weights, "{f} ({}): {}", f.name(), fmt_sig12(p.effective(f)));
        }
        weights.pop();
        let mut vars = vec![
            ("function_weights", weights),
            ("dominant", p.dominant.to_string()),
            ("auxiliary", p.auxiliary.to_string()),
            ("directive", request.directive.to_string()),
            ("memory", render_memory(&request.memory)),
        ];
        let list = |fs: &[PsychFunction]| fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ");
        let template = match &request.query {
            OracleQuery::Handle { question } => {
                vars.push(("question", question.text.clone()));
                &self.templates.handle
            }
            OracleQuery::Compensate { question, excluded } => {
                vars.push(("question", question.text.clone()));
                vars.push(("excluded", format!("{} or {}", excluded[0], excluded[1])));
                let options: Vec<_> = PsychFunction::ALL
                    .into_iter()
                    .filter(|f| !excluded.contains(f))
                    .collect();
                vars.push(("options", list(&options)));
                &self.templates.compensate
            }
            OracleQuery::ChooseAuxiliary { dominant, options } => {
                vars.push(("new_dominant", dominant.to_string()));
                vars.push(("options", list(options)));
                &self.templates.choose_auxiliary
            }
            OracleQuery::ApproveRewrite { proposal } => {
                vars.push(("rule", format!("{:?}", proposal.rule)));
                vars.push(("before", proposal.before.mbti.pairing_label()));
                vars.push(("after", proposal.after.mbti.pairing_label()));
                vars.push(("candidate", proposal.candidate.to_string()));
                &self.templates.approve_rewrite
            }
            OracleQuery::AnswerItem { item } => {
                vars.push(("question", item.text.clone()));
                vars.push(("choice_a", item.choice_a.clone()));
                vars.push(("choice_b", item.choice_b.clone()));
                &self.templates.answer_item
            }
        };
        vec![
            ChatMessage::new("system", fill(&self.templates.system, &vars)),
            ChatMessage::new("user", fill(template, &vars)),
        ]
    }
}

impl<T: ChatTransport> Oracle for LlmOracle<T> {
    fn consult(&self, request: &OracleRequest) -> Result<OracleResponse, OracleError> {
        let mut chat = ChatRequest {
            model: self.config.model.clone(),
            messages: self.prompt(request),
            temperature: self.config.temperature,
        };
        let attempts = self.config.retries + 1;
        let mut last_reply = String::new();
        for attempt in 1..=attempts {
            if self.config.debug {
                eprintln!(
                    "[llm] {} attempt {attempt}: {}",
                    request.kind().label(),
                    chat.messages.last().map_or("", |m| &m.content)
                );
            }
            let reply = self.transport.complete(&chat)?;
            if self.config.debug {
                eprintln!("[llm] reply: {reply}");
            }
            if let Some(resp) = parse_reply(request, &reply) {
                return Ok(resp);
            }
            let expected = expected_format(request);
            chat.messages.push(ChatMessage::new("assistant", reply.clone()));
            chat.messages.push(ChatMessage::new(
                "user",
                fill(&self.templates.format_reminder, &[("expected", expected.to_string())]),
            ));
            last_reply = reply;
        }
        Err(OracleError::ParseFailure {
            expected: request.kind().label(),
            attempts,
            last_reply,
        })
    }
}
