use jpaf_core::RangeParams;
use jpaf_wasm::{check_params_json, outcome_matrix_json, simulate_json};
use serde_json::Value;

#[test]
fn simulate_fi_on_intp() {
    let v: Value =
        serde_json::from_str(&simulate_json("INTP", "Fi", 42, true, RangeParams::default()).unwrap()).unwrap();
    assert_eq!(v["start"], "INTP");
    assert_eq!(v["finish"], "INFP");
    let steps = v["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 15);
    assert!(steps.iter().any(|s| s["reflection"] == "dominant_replacement"));
    for s in steps {
        let sum: f64 = s["weights"]["base"]
            .as_array()
            .unwrap()
            .iter()
            .map(|w| w.as_f64().unwrap())
            .sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}

#[test]
fn simulate_declined_keeps_type() {
    let v: Value =
        serde_json::from_str(&simulate_json("INTP", "Fi", 42, false, RangeParams::default()).unwrap()).unwrap();
    assert_eq!(v["finish"], "INTP");
    assert!(v["steps"].as_array().unwrap().iter().any(|s| s["approved"] == false));
}

#[test]
fn simulate_rejects_bad_input() {
    assert!(simulate_json("XNTP", "Fi", 0, true, RangeParams::default()).is_err());
    assert!(simulate_json("INTP", "Fx", 0, true, RangeParams::default()).is_err());
    let bad = RangeParams {
        a: 0.4,
        ..RangeParams::default()
    };
    assert!(simulate_json("INTP", "Fi", 0, true, bad).is_err());
}

#[test]
fn matrix_scores_full_psa() {
    let v: Value = serde_json::from_str(&outcome_matrix_json(42).unwrap()).unwrap();
    assert_eq!(v["psa"], 1.0);
    assert_eq!(v["cases"], 128);
    let intp = v["rows"]["INTP"].as_array().unwrap();
    // Ti Ne Si Fe Te Ni Se Fi
    assert_eq!(intp[0], "INTP");
    assert_eq!(intp[1], "ENTP");
    assert_eq!(intp[6], "ESTP");
    assert_eq!(intp[7], "INFP");
}

#[test]
fn param_check_reports_bound() {
    let ok: Value = serde_json::from_str(&check_params_json(0.30, 0.06, 0.06, 0.2, 0.5)).unwrap();
    assert_eq!(ok["ok"], true);
    assert!((ok["a_bound"].as_f64().unwrap() - 0.32).abs() < 1e-12);
    let bad: Value = serde_json::from_str(&check_params_json(0.32, 0.06, 0.06, 0.2, 0.5)).unwrap();
    assert_eq!(bad["ok"], false);
    assert_eq!(bad["violations"].as_array().unwrap().len(), 1);
}
