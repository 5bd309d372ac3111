//! Reference implementations and helpers shared by the integration tests.
//! Nothing here calls into the library's own versions of the same math.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use jpaf_core::oracle::ScriptedOracle;
use jpaf_core::run::run_set;
use jpaf_core::scenario::ScenarioSet;
use jpaf_core::snapshot::AgentSnapshot;
use jpaf_core::trace;
use jpaf_core::{MbtiType, RangeParams};
use serde_json::Value;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn read_data(rel: &str) -> String {
    let p = data_dir().join(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Sum in ascending magnitude order, so the result does not depend on the
/// canonical function order.
fn sorted_sum(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    v.iter().sum()
}

/// Fold-and-rescale done one element at a time with no shared helpers.
pub fn renormalize_reference(base: &[f64; 8], temp: &[f64; 8]) -> [f64; 8] {
    let mut merged = [0.0; 8];
    for i in 0..8 {
        merged[i] = if temp[i] > base[i] { temp[i] } else { base[i] };
    }
    let total = sorted_sum(&merged);
    let mut out = [0.0; 8];
    for i in 0..8 {
        out[i] = merged[i] / total;
    }
    out
}

/// Extreme-case search for an assignment that respects the sampling ranges
/// yet breaks dominant > auxiliary > others.
///
/// The dominant's share is smallest when the auxiliary sits at A and all
/// six others at B; the auxiliary is closest to the others when it sits
/// just above B. Returns the offending assignment, or `None` when every
/// admissible assignment keeps the hierarchy. Needs `b > 0`, otherwise
/// there is no admissible assignment at all.
pub fn hierarchy_breaker(a: f64, b: f64) -> Option<[f64; 8]> {
    assert!(b > 0.0);
    let aux = a;
    let dom = 1.0 - aux - 6.0 * b;
    let holds = dom > aux && aux > b && dom < 1.0;
    (!holds).then_some([dom, aux, b, b, b, b, b, b])
}

/// True when `w` (dominant first, auxiliary second) respects the hierarchy.
pub fn hierarchy_ok(w: &[f64; 8]) -> bool {
    w[0] > w[1] && w[2..].iter().all(|o| w[1] > *o)
}

/// DAG straight from a fixture's raw JSON, as a percentage.
pub fn reference_dag_percent(fixture: &str, dim: &str) -> f64 {
    let v: Value = serde_json::from_str(&read_data(&format!("fixtures/{fixture}.json"))).unwrap();
    let scale = match v["unit"].as_str() {
        Some("percent") => 1.0,
        Some("fraction") => 100.0,
        u => panic!("unit {u:?}"),
    };
    let col = |cond: &str| -> Vec<(String, f64)> {
        v[cond]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| {
                (
                    r["type"].as_str().unwrap().to_string(),
                    r[dim].as_f64().unwrap() * scale,
                )
            })
            .collect()
    };
    let base = col("baseline");
    let jpaf = col("jpaf");
    assert_eq!(base.len(), 16);
    assert_eq!(jpaf.len(), 16);
    let mut diff = 0.0;
    for (t, j) in &jpaf {
        let (_, b) = base.iter().find(|(bt, _)| bt == t).unwrap();
        diff += j - b;
    }
    diff / 16.0
}

/// Runs `set` from a fresh snapshot with the default scripted oracle and
/// returns the rendered trace and final snapshot JSON.
pub fn recorded_run(mbti: MbtiType, seed: u64, set: &ScenarioSet) -> (String, String) {
    let start = AgentSnapshot::new(mbti, RangeParams::default(), seed).unwrap();
    let out = run_set(&start, set, &ScriptedOracle::new()).unwrap();
    (trace::render(&out.records), out.snapshot.to_json())
}

/// One-connection-at-a-time chat completions stand-in. Replies are served
/// in order; request bodies are kept for inspection.
pub struct MockChatServer {
    pub endpoint: String,
    pub bodies: Arc<Mutex<Vec<Value>>>,
    handle: Option<JoinHandle<()>>,
}

impl MockChatServer {
    pub fn start(replies: Vec<&str>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = format!("http://{}/v1", listener.local_addr().unwrap());
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let seen = Arc::clone(&bodies);
        let replies: Vec<String> = replies.into_iter().map(String::from).collect();
        let handle = std::thread::spawn(move || {
            for reply in replies {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let l = line.trim_end();
                    if l.is_empty() {
                        break;
                    }
                    if let Some((k, v)) = l.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            len = v.trim().parse().unwrap();
                        }
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                seen.lock().unwrap().push(serde_json::from_slice(&body).unwrap());
                let payload = serde_json::json!({
                    "choices": [{"index": 0, "message": {"role": "assistant", "content": reply}}]
                })
                .to_string();
                write!(
                    stream,
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    payload.len(),
                    payload
                )
                .unwrap();
                stream.flush().unwrap();
            }
        });
        MockChatServer {
            endpoint,
            bodies,
            handle: Some(handle),
        }
    }

    /// Waits for every queued reply to be served.
    pub fn finish(mut self) -> Vec<Value> {
        self.handle.take().unwrap().join().unwrap();
        self.bodies.lock().unwrap().clone()
    }
}

pub fn handle_request(profile: &jpaf_core::WeightProfile) -> jpaf_core::oracle::OracleRequest {
    use jpaf_core::oracle::{CoordinationMode, Directive, OracleQuery, OracleRequest};
    use jpaf_core::scenario::ScenarioQuestion;
    OracleRequest {
        query: OracleQuery::Handle {
            question: ScenarioQuestion {
                index: 0,
                scenario: 0,
                target: jpaf_core::PsychFunction::Ti,
                text: "A colleague's proof has a gap in step three. How do you respond?".into(),
            },
        },
        profile: profile.clone(),
        directive: Directive::for_profile(profile, CoordinationMode::Both),
        memory: Vec::new(),
    }
}

pub fn sample_item() -> jpaf_core::evaluation::QuestionnaireItem {
    use jpaf_core::{Dimension, Pole};
    let mut it = jpaf_core::evaluation::QuestionnaireItem::new(
        "EI01",
        Dimension::EI,
        Pole::E,
        Pole::I,
        "After a long week you would rather",
    )
    .unwrap();
    it.choice_a = "go out with a group of friends".into();
    it.choice_b = "spend the evening alone".into();
    it
}

/// One Handle and one AnswerItem round trip through the HTTP client.
/// With `mock` the first Handle reply is deliberately unreadable so the
/// retry path is exercised and every request body is checked.
pub fn llm_round_trip(endpoint: Option<&str>) -> Result<String, String> {
    use jpaf_core::oracle::http::HttpTransport;
    use jpaf_core::oracle::{
        answer_questionnaire_item, CoordinationMode, LlmConfig, LlmOracle, Oracle, OracleResponse,
    };

    let profile = jpaf_core::WeightProfile::init(MbtiType::INTP, &RangeParams::default(), 42).unwrap();
    let mock = match endpoint {
        Some(_) => None,
        None => Some(MockChatServer::start(vec![
            "I think Ti fits here",
            "Ti SUCCESS\nlogic first",
            "B",
        ])),
    };
    let mut config = LlmConfig::default();
    if let Some(e) = endpoint {
        config.endpoint = e.to_string();
        if let Ok(m) = std::env::var("JPAF_LLM_MODEL") {
            config.model = m;
        }
    }
    if let Some(m) = &mock {
        config.endpoint = m.endpoint.clone();
        config.timeout_secs = 10;
    }
    let oracle = LlmOracle::new(HttpTransport::new(&config), config.clone());

    let handle = oracle
        .consult(&handle_request(&profile))
        .map_err(|e| format!("handle: {e}"))?;
    let OracleResponse::Handle { handled_by, success } = handle else {
        return Err(format!("handle: unexpected {handle:?}"));
    };
    let choice = answer_questionnaire_item(&oracle, &profile, CoordinationMode::Both, &sample_item())
        .map_err(|e| format!("answer: {e}"))?;
    let summary = format!(
        "handle -> {handled_by} {}, answer -> {choice}",
        if success { "SUCCESS" } else { "FAILURE" }
    );

    let Some(mock) = mock else {
        return Ok(summary);
    };
    let bodies = mock.finish();
    if bodies.len() != 3 {
        return Err(format!("expected 3 requests (one retry), saw {}", bodies.len()));
    }
    for b in &bodies {
        if b["temperature"].as_f64() != Some(0.6) {
            return Err(format!("temperature {:?}", b["temperature"]));
        }
        let system = b["messages"][0]["content"].as_str().unwrap_or("");
        if b["messages"][0]["role"] != "system" || !system.contains("(Ti)") || !system.contains("(Ne)") {
            return Err("system message does not carry the dominant/auxiliary directive".into());
        }
    }
    let retry = bodies[1]["messages"].as_array().map_or(0, Vec::len);
    let first = bodies[0]["messages"].as_array().map_or(0, Vec::len);
    if retry != first + 2 || bodies[1]["messages"][first]["role"] != "assistant" {
        return Err("retry did not append the reply and a format reminder".into());
    }
    if (handled_by, success) != (jpaf_core::PsychFunction::Ti, true) || choice != jpaf_core::evaluation::Choice::B {
        return Err(format!("parsed wrong values: {summary}"));
    }
    Ok(summary)
}
