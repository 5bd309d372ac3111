mod common;

use jpaf_core::oracle::http::HttpTransport;
use jpaf_core::oracle::{LlmConfig, LlmOracle, Oracle, OracleError};
use jpaf_core::{MbtiType, RangeParams, WeightProfile};

fn profile() -> WeightProfile {
    WeightProfile::init(MbtiType::INTP, &RangeParams::default(), 42).unwrap()
}

fn oracle_for(endpoint: &str) -> LlmOracle<HttpTransport> {
    let config = LlmConfig {
        endpoint: endpoint.to_string(),
        timeout_secs: 10,
        ..LlmConfig::default()
    };
    LlmOracle::new(HttpTransport::new(&config), config)
}

#[test]
fn round_trip_against_mock_server() {
    let summary = common::llm_round_trip(None).unwrap();
    assert_eq!(summary, "handle -> Ti SUCCESS, answer -> B");
}

#[test]
fn retries_exhausted_is_an_error() {
    let server = common::MockChatServer::start(vec!["maybe", "perhaps Ti", "hmm"]);
    let err = oracle_for(&server.endpoint)
        .consult(&common::handle_request(&profile()))
        .unwrap_err();
    assert!(matches!(err, OracleError::ParseFailure { attempts: 3, .. }), "{err}");
    assert_eq!(server.finish().len(), 3);
}

#[test]
fn unreachable_endpoint_is_transport_error() {
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let err = oracle_for(&format!("http://127.0.0.1:{port}/v1"))
        .consult(&common::handle_request(&profile()))
        .unwrap_err();
    assert!(matches!(err, OracleError::Transport(_)), "{err}");
}

#[test]
fn live_endpoint_when_configured() {
    let Ok(endpoint) = std::env::var("JPAF_LLM_ENDPOINT") else {
        eprintln!("JPAF_LLM_ENDPOINT not set; skipping live round trip");
        return;
    };
    let summary = common::llm_round_trip(Some(&endpoint)).unwrap();
    eprintln!("live: {summary}");
}
