//! Browser bindings for the personality engine.
//!
//! Every export returns a JSON string; the plain `*_json` functions hold the
//! logic so native tests can call them without a JS runtime.

use jpaf_core::engine::{Agent, EngineConfig};
use jpaf_core::evaluation::sweep::{run_grid, score};
use jpaf_core::oracle::{ApprovalPolicy, ScriptedOracle};
use jpaf_core::scenario::ScenarioSet;
use jpaf_core::weights::ParamViolation;
use jpaf_core::{MbtiType, PsychFunction, RangeParams, WeightProfile};
use serde::Serialize;
use std::collections::BTreeMap;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Weights {
    base: [f64; 8],
    temp: [f64; 8],
}

impl Weights {
    fn of(p: &WeightProfile) -> Self {
        Weights {
            base: *p.base.as_array(),
            temp: *p.temp.as_array(),
        }
    }
}

#[derive(Serialize)]
struct StepView {
    index: usize,
    handled_by: String,
    outcome: String,
    boosted: String,
    trigger: Option<String>,
    reflection: Option<String>,
    approved: Option<bool>,
    mbti: String,
    weights: Weights,
}

#[derive(Serialize)]
struct Trajectory {
    functions: Vec<&'static str>,
    start: String,
    target: String,
    initial: Weights,
    steps: Vec<StepView>,
    finish: String,
}

fn parse_params(a: f64, b: f64, delta_w: f64, decay: f64, cap: f64) -> RangeParams {
    RangeParams {
        a,
        b,
        delta_w,
        decay_factor: decay,
        dominance_cap: cap,
    }
}

/// Runs one 15-question placeholder set aimed at `target` with the scripted
/// oracle and returns every step's weights.
pub fn simulate_json(
    mbti: &str,
    target: &str,
    seed: u64,
    approve: bool,
    params: RangeParams,
) -> Result<String, String> {
    let mbti: MbtiType = mbti.trim().parse().map_err(|e| format!("{e}"))?;
    let target: PsychFunction = target.trim().parse().map_err(|e| format!("{e}"))?;
    let profile = WeightProfile::init(mbti, &params, seed).map_err(|e| e.to_string())?;
    let initial = Weights::of(&profile);
    let config = EngineConfig {
        params,
        ..EngineConfig::default()
    };
    let policy = if approve {
        ApprovalPolicy::Always
    } else {
        ApprovalPolicy::Never
    };
    let oracle = ScriptedOracle::new().with_approval(policy);
    let mut agent = Agent::new(profile, config);
    let mut steps = Vec::new();
    for q in ScenarioSet::synthetic(target).questions() {
        let s = agent.step(&q, &oracle).map_err(|e| e.to_string())?;
        steps.push(StepView {
            index: s.question_index,
            handled_by: s.handled_by.to_string(),
            outcome: s.outcome.to_string(),
            boosted: s.boosted().to_string(),
            trigger: s.trigger.map(|t| t.to_string()),
            reflection: s.reflection.as_ref().map(|r| r.kind.to_string()),
            approved: s
                .reflection
                .as_ref()
                .filter(|r| r.proposed.is_some())
                .map(|r| r.approved),
            mbti: agent.profile.mbti().to_string(),
            weights: Weights::of(&agent.profile),
        });
    }
    let t = Trajectory {
        functions: PsychFunction::ALL.iter().map(|f| f.label()).collect(),
        start: mbti.to_string(),
        target: target.to_string(),
        initial,
        steps,
        finish: agent.profile.mbti().to_string(),
    };
    serde_json::to_string(&t).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Grid {
    targets: Vec<&'static str>,
    rows: BTreeMap<String, Vec<String>>,
    order: Vec<String>,
    matched: usize,
    cases: usize,
    psa: f64,
}

/// Final type for every (type, target) pair under the scripted oracle, with
/// the PSA score against the expected outcomes.
pub fn outcome_matrix_json(seed: u64) -> Result<String, String> {
    let results =
        run_grid(&BTreeMap::new(), seed, EngineConfig::default(), &ScriptedOracle::new()).map_err(|e| e.to_string())?;
    let summary = score(&results).map_err(|e| e.to_string())?;
    let mut rows: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in &results {
        rows.entry(r.mbti.to_string())
            .or_default()
            .push(r.observed.final_type.to_string());
    }
    let g = Grid {
        targets: PsychFunction::ALL.iter().map(|f| f.label()).collect(),
        rows,
        order: MbtiType::ALL.iter().map(|t| t.to_string()).collect(),
        matched: summary.matched,
        cases: summary.cases,
        psa: summary.psa,
    };
    serde_json::to_string(&g).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ParamCheck {
    ok: bool,
    a_bound: f64,
    violations: Vec<String>,
}

/// Every violated parameter constraint, plus the upper bound on A implied
/// by B.
pub fn check_params_json(a: f64, b: f64, delta_w: f64, decay: f64, cap: f64) -> String {
    let p = parse_params(a, b, delta_w, decay, cap);
    let violations: Vec<String> = p
        .violations()
        .into_iter()
        .map(|v| match v {
            ParamViolation::ABelowBound => format!("{v} (bound {:.4})", (1.0 - 6.0 * b) / 2.0),
            other => other.to_string(),
        })
        .collect();
    let c = ParamCheck {
        ok: violations.is_empty(),
        a_bound: (1.0 - 6.0 * b) / 2.0,
        violations,
    };
    serde_json::to_string(&c).expect("plain struct")
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    mbti: &str,
    target: &str,
    seed: u32,
    approve: bool,
    a: f64,
    b: f64,
    delta_w: f64,
    decay: f64,
    cap: f64,
) -> Result<String, JsError> {
    simulate_json(
        mbti,
        target,
        u64::from(seed),
        approve,
        parse_params(a, b, delta_w, decay, cap),
    )
    .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn outcome_matrix(seed: u32) -> Result<String, JsError> {
    outcome_matrix_json(u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn check_params(a: f64, b: f64, delta_w: f64, decay: f64, cap: f64) -> String {
    check_params_json(a, b, delta_w, decay, cap)
}
