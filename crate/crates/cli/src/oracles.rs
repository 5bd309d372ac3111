//! Oracle selection and the optional TOML config file.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use jpaf_core::oracle::http::HttpTransport;
use jpaf_core::oracle::{
    AnswerPolicy, ApprovalPolicy, LlmConfig, LlmOracle, Oracle, OracleError, OracleQuery, OracleRequest,
    OracleResponse, PromptTemplates, ScriptedOracle,
};
use jpaf_core::{PsychFunction, RangeParams};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleSpec {
    /// Scripted responder; with a target it treats every question as
    /// calling on that function.
    Scripted(Option<PsychFunction>),
    Llm,
}

impl FromStr for OracleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "scripted" => Ok(OracleSpec::Scripted(None)),
            "llm" => Ok(OracleSpec::Llm),
            _ => match s.strip_prefix("scripted:") {
                Some(t) => t
                    .parse::<PsychFunction>()
                    .map(|f| OracleSpec::Scripted(Some(f)))
                    .map_err(|e| e.to_string()),
                None => Err(format!(
                    "unknown oracle {s:?}; expected scripted, scripted:<function> or llm"
                )),
            },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub llm: Option<LlmConfig>,
    #[serde(default)]
    pub params: Option<RangeParams>,
    #[serde(default)]
    pub templates: Option<TemplateConfig>,
}

/// Inline template overrides plus an optional directory of `<name>.txt`
/// files; files win over inline text.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct TemplateConfig {
    pub dir: Option<PathBuf>,
    #[serde(flatten)]
    pub inline: PromptTemplates,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&src).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
    }

    pub fn templates(&self, base: &Path) -> Result<PromptTemplates, CliError> {
        let Some(tc) = &self.templates else {
            return Ok(PromptTemplates::default());
        };
        let mut t = tc.inline.clone();
        if let Some(dir) = &tc.dir {
            let dir = if dir.is_relative() { base.join(dir) } else { dir.clone() };
            let slots: [(&str, &mut String); 7] = [
                ("system", &mut t.system),
                ("handle", &mut t.handle),
                ("compensate", &mut t.compensate),
                ("choose_auxiliary", &mut t.choose_auxiliary),
                ("approve_rewrite", &mut t.approve_rewrite),
                ("answer_item", &mut t.answer_item),
                ("format_reminder", &mut t.format_reminder),
            ];
            for (name, slot) in slots {
                let p = dir.join(format!("{name}.txt"));
                if p.exists() {
                    *slot = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                }
            }
        }
        Ok(t)
    }
}

/// Scripted oracle that rewrites every question's target first.
pub struct Retargeted<O> {
    pub inner: O,
    pub target: PsychFunction,
}

impl<O: Oracle> Oracle for Retargeted<O> {
    fn consult(&self, request: &OracleRequest) -> Result<OracleResponse, OracleError> {
        let mut r = request.clone();
        match &mut r.query {
            OracleQuery::Handle { question } | OracleQuery::Compensate { question, .. } => {
                question.target = self.target;
            }
            _ => {}
        }
        self.inner.consult(&r)
    }
}

pub struct OracleSettings {
    pub spec: OracleSpec,
    pub approval: ApprovalPolicy,
    pub error_mask: BTreeSet<String>,
    pub llm: LlmConfig,
    pub templates: PromptTemplates,
}

pub type DynOracle = Box<dyn Oracle + Send + Sync>;

pub fn build(s: &OracleSettings) -> DynOracle {
    match s.spec {
        OracleSpec::Scripted(target) => {
            let answers = if s.error_mask.is_empty() {
                AnswerPolicy::Perfect
            } else {
                AnswerPolicy::ErrorMask(s.error_mask.clone())
            };
            let o = ScriptedOracle::new()
                .with_approval(s.approval.clone())
                .with_answers(answers);
            match target {
                Some(target) => Box::new(Retargeted { inner: o, target }),
                None => Box::new(o),
            }
        }
        OracleSpec::Llm => {
            let transport = HttpTransport::new(&s.llm);
            Box::new(LlmOracle::new(transport, s.llm.clone()).with_templates(s.templates.clone()))
        }
    }
}

pub fn parse_approval(s: &str) -> Result<ApprovalPolicy, String> {
    match s {
        "always" => Ok(ApprovalPolicy::Always),
        "never" => Ok(ApprovalPolicy::Never),
        list => list
            .split(',')
            .map(|t| match t.trim() {
                "1" | "y" | "yes" | "true" => Ok(true),
                "0" | "n" | "no" | "false" => Ok(false),
                o => Err(format!(
                    "bad approval entry {o:?}; expected always, never or a comma list of 0/1"
                )),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ApprovalPolicy::Scripted),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_specs() {
        assert_eq!("scripted".parse(), Ok(OracleSpec::Scripted(None)));
        assert_eq!("scripted:fi".parse(), Ok(OracleSpec::Scripted(Some(PsychFunction::Fi))));
        assert_eq!("llm".parse(), Ok(OracleSpec::Llm));
        assert!("scripted:Xx".parse::<OracleSpec>().is_err());
        assert!("gpt".parse::<OracleSpec>().is_err());
    }

    #[test]
    fn approval_lists() {
        assert_eq!(
            parse_approval("0,1,yes"),
            Ok(ApprovalPolicy::Scripted(vec![false, true, true]))
        );
        assert!(parse_approval("maybe").is_err());
    }

    #[test]
    fn config_file() {
        let c: FileConfig = toml::from_str(
            r#"
            [llm]
            endpoint = "http://example.test/v1"
            model = "m"
            [params]
            a = 0.25
            b = 0.05
            delta_w = 0.06
            decay_factor = 0.2
            dominance_cap = 0.5
            [templates]
            handle = "custom {question}"
            "#,
        )
        .unwrap();
        let llm = c.llm.clone().unwrap();
        assert_eq!(llm.model, "m");
        assert_eq!(llm.temperature, 0.6);
        assert_eq!(c.params.unwrap().a, 0.25);
        let t = c.templates(Path::new(".")).unwrap();
        assert_eq!(t.handle, "custom {question}");
        assert_eq!(t.system, PromptTemplates::default().system);
    }
}
