mod common;

use jpaf_core::oracle::{ApprovalPolicy, ScriptedOracle};
use jpaf_core::run::run_set;
use jpaf_core::scenario::ScenarioSet;
use jpaf_core::snapshot::AgentSnapshot;
use jpaf_core::trace;
use jpaf_core::{MbtiType, PsychFunction, RangeParams};
use proptest::prelude::*;

fn replay(t: MbtiType, seed: u64, f: PsychFunction, approvals: &[bool]) -> (String, String) {
    let start = AgentSnapshot::new(t, RangeParams::default(), seed).unwrap();
    let oracle = ScriptedOracle::new().with_approval(ApprovalPolicy::Scripted(approvals.to_vec()));
    let out = run_set(&start, &ScenarioSet::synthetic(f), &oracle).unwrap();
    (trace::render(&out.records), out.snapshot.to_json())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn runs_replay_byte_identically(
        ti in 0usize..16,
        fi in 0usize..8,
        seed in any::<u64>(),
        approvals in prop::collection::vec(any::<bool>(), 0..15),
    ) {
        let (t, f) = (MbtiType::ALL[ti], PsychFunction::ALL[fi]);
        let a = replay(t, seed, f, &approvals);
        let b = replay(t, seed, f, &approvals);
        prop_assert_eq!(&a, &b);
        let rows = trace::parse(&a.0).unwrap();
        prop_assert_eq!(rows.len(), 15);
        prop_assert_eq!(trace::render(&rows), a.0);
    }
}

#[test]
fn resumed_runs_continue_the_same_way() {
    // two sets back to back equal the second set run from the saved midpoint
    let start = AgentSnapshot::new(MbtiType::ESFJ, RangeParams::default(), 9).unwrap();
    let oracle = ScriptedOracle::new();
    let first = run_set(&start, &ScenarioSet::synthetic(PsychFunction::Ni), &oracle).unwrap();
    let mid = AgentSnapshot::from_json(&first.snapshot.to_json()).unwrap();
    let a = run_set(&mid, &ScenarioSet::synthetic(PsychFunction::Ti), &oracle).unwrap();
    let b = run_set(&first.snapshot, &ScenarioSet::synthetic(PsychFunction::Ti), &oracle).unwrap();
    assert_eq!(trace::render(&a.records), trace::render(&b.records));
    assert_eq!(a.snapshot.to_json(), b.snapshot.to_json());
    assert_eq!(a.records[0].question_index, 15);
}

#[test]
fn scenario_files_replay() {
    for f in PsychFunction::ALL {
        let set = ScenarioSet::from_json(&common::read_data(&format!(
            "scenarios/{}.json",
            f.label().to_lowercase()
        )))
        .unwrap();
        assert_eq!(
            common::recorded_run(MbtiType::INTP, 42, &set),
            common::recorded_run(MbtiType::INTP, 42, &set)
        );
    }
}
