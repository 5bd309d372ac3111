use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jpaf_core::snapshot::SnapshotLock;

fn jpaf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jpaf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run jpaf")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(rel)
        .display()
        .to_string()
}

fn closed_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port()
}

#[test]
fn usage_errors_exit_1() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&jpaf(d.path(), &["--help"])), 0);
    assert_eq!(code(&jpaf(d.path(), &["frobnicate"])), 1);
    assert_eq!(code(&jpaf(d.path(), &["init", "--mbti", "XXTP", "--out", "s.json"])), 1);

    let o = jpaf(d.path(), &["init", "--mbti", "INTP", "--A", "0.32", "--out", "s.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("(1-6B)/2 = 0.32"), "{}", stderr(&o));
    assert!(!d.path().join("s.json").exists());

    let o = jpaf(
        d.path(),
        &[
            "run-scenario",
            "--snapshot",
            "missing.json",
            "--scenario",
            "x.json",
            "--out",
            "t.tsv",
        ],
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn init_run_and_replay() {
    let d = tempfile::tempdir().unwrap();
    let o = jpaf(
        d.path(),
        &["init", "--mbti", "INTP", "--seed", "42", "--out", "start.json"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("Ti-Ne (INTP)"), "{}", stdout(&o));
    std::fs::copy(d.path().join("start.json"), d.path().join("agent.json")).unwrap();

    let fi = data("scenarios/fi.json");
    let o = jpaf(
        d.path(),
        &[
            "run-scenario",
            "--snapshot",
            "agent.json",
            "--scenario",
            &fi,
            "--out",
            "trace.tsv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("INTP -> INFP"), "{}", stdout(&o));
    let trace = std::fs::read_to_string(d.path().join("trace.tsv")).unwrap();
    assert_eq!(trace.lines().count(), 16);
    assert!(trace.starts_with("question_index\t"));

    let replay = [
        "replay",
        "--from",
        "start.json",
        "--scenario",
        &fi,
        "--trace",
        "trace.tsv",
        "--snapshot",
        "agent.json",
    ];
    let o = jpaf(d.path(), &replay);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    // a tampered trace is an invariant violation
    std::fs::write(d.path().join("trace.tsv"), trace.replacen("\tFi\t", "\tFe\t", 1)).unwrap();
    let o = jpaf(d.path(), &replay);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    // a second run appends without repeating the header
    let o = jpaf(
        d.path(),
        &[
            "run-scenario",
            "--snapshot",
            "agent.json",
            "--scenario",
            &data("scenarios/ti.json"),
            "--out",
            "more.tsv",
        ],
    );
    assert_eq!(code(&o), 0);
    let o = jpaf(
        d.path(),
        &[
            "run-scenario",
            "--snapshot",
            "agent.json",
            "--scenario",
            &data("scenarios/ne.json"),
            "--out",
            "more.tsv",
        ],
    );
    assert_eq!(code(&o), 0);
    let more = std::fs::read_to_string(d.path().join("more.tsv")).unwrap();
    assert_eq!(more.lines().count(), 31);
    assert_eq!(more.matches("question_index").count(), 1);
}

#[test]
fn locked_snapshot_is_refused() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&jpaf(d.path(), &["init", "--mbti", "ISFJ", "--out", "a.json"])), 0);
    let _held = SnapshotLock::acquire(&d.path().join("a.json")).unwrap();
    let o = jpaf(
        d.path(),
        &[
            "run-scenario",
            "--snapshot",
            "a.json",
            "--scenario",
            &data("scenarios/si.json"),
            "--out",
            "t.tsv",
        ],
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("locked"), "{}", stderr(&o));
}

#[test]
fn oracle_failures_exit_2_with_rows_recorded() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&jpaf(d.path(), &["init", "--mbti", "ENFP", "--out", "a.json"])), 0);
    let before = std::fs::read_to_string(d.path().join("a.json")).unwrap();
    let endpoint = format!("http://127.0.0.1:{}/v1", closed_port());
    let o = jpaf(
        d.path(),
        &[
            "run-scenario",
            "--snapshot",
            "a.json",
            "--scenario",
            &data("scenarios/ti.json"),
            "--oracle",
            "llm",
            "--endpoint",
            &endpoint,
            "--out",
            "t.tsv",
        ],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let trace = std::fs::read_to_string(d.path().join("t.tsv")).unwrap();
    assert_eq!(trace.matches("\toracle_error\t").count(), 15);
    // the question counter advanced even though no weights changed
    let after = std::fs::read_to_string(d.path().join("a.json")).unwrap();
    assert_ne!(before, after);
    assert!(after.contains("\"step_counter\": 15"));
}

#[test]
fn questionnaire_scores_and_format_errors() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&jpaf(d.path(), &["init", "--mbti", "ESTJ", "--out", "a.json"])), 0);
    let items = data("questionnaires/synthetic-70.tsv");
    let o = jpaf(
        d.path(),
        &[
            "questionnaire",
            "--snapshot",
            "a.json",
            "--items",
            &items,
            "--json",
            "acc.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(
        stdout(&o).contains("100.00%  100.00%  100.00%  100.00%"),
        "{}",
        stdout(&o)
    );

    // items 2 and 3 are both SN in the 70-item layout: 18 of 20
    let o = jpaf(
        d.path(),
        &[
            "questionnaire",
            "--snapshot",
            "a.json",
            "--items",
            &items,
            "--error-mask",
            "2,3",
        ],
    );
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("100.00%   90.00%  100.00%  100.00%"),
        "{}",
        stdout(&o)
    );

    std::fs::write(
        d.path().join("bad.tsv"),
        "#layout: tagged\nEI01\tEI\tE\tI\ttext\ta\tb\nbroken\n",
    )
    .unwrap();
    let o = jpaf(
        d.path(),
        &["questionnaire", "--snapshot", "a.json", "--items", "bad.tsv"],
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn report_reproduces_fixture_headlines() {
    let d = tempfile::tempdir().unwrap();
    let o = jpaf(
        d.path(),
        &[
            "report",
            "--accuracy",
            &data("fixtures/accuracy-gpt-mbti70.json"),
            "--accuracy",
            &data("fixtures/accuracy-qwen-mbti70.json"),
            "--taa",
            &data("fixtures/taa-llama.json"),
            "--json",
            "report.json",
            "--plot-dir",
            "plots",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    for needle in ["JP      +9.75", "JP     +13.38", "TF      -0.19", "TF      -0.44"] {
        assert!(out.contains(needle), "missing {needle:?} in\n{out}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["accuracy"].as_array().unwrap().len(), 2);
    assert!(d.path().join("plots/accuracy.tsv").exists());
    assert!(d.path().join("plots/taa.tsv").exists());
}

#[test]
fn sweep_scores_full_psa() {
    let d = tempfile::tempdir().unwrap();
    let scenarios = data("scenarios");
    let o = jpaf(
        d.path(),
        &["sweep", "--seed", "5", "--scenarios", &scenarios, "--out", "sweep.json"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("PSA 128/128 = 100.00%"), "{}", stdout(&o));
    let o = jpaf(d.path(), &["report", "--sweep", "sweep.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("PSA"), "{}", stdout(&o));
}

#[test]
fn expectations_match_shipped_fixture() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&jpaf(d.path(), &["expectations", "--out", "e.json"])), 0);
    let fresh = std::fs::read_to_string(d.path().join("e.json")).unwrap();
    let shipped = std::fs::read_to_string(data("fixtures/expectations.json")).unwrap();
    assert_eq!(fresh, shipped);
}
