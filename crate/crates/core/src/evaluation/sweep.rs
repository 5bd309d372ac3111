//! Runs every (profile, target) case through one scenario set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expectation::{expectation_matrix, matrix_by_case, ObservedShift};
use super::metrics::{psa, taa, CaseKey, MetricsError};
use crate::engine::{Agent, EngineConfig, EngineError, EpisodeStep, ReflectionEvent};
use crate::oracle::Oracle;
use crate::scenario::ScenarioSet;
use crate::typology::{MbtiType, PsychFunction};
use crate::weights::WeightProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    #[serde(rename = "type")]
    pub mbti: MbtiType,
    pub target: PsychFunction,
    pub observed: ObservedShift,
    pub taa: f64,
    pub events: Vec<ReflectionEvent>,
    pub final_profile: WeightProfile,
}

pub fn run_case<O: Oracle + ?Sized>(
    mbti: MbtiType,
    set: &ScenarioSet,
    seed: u64,
    config: EngineConfig,
    oracle: &O,
) -> Result<(CaseResult, Vec<EpisodeStep>), EngineError> {
    let profile = WeightProfile::init(mbti, &config.params, seed)?;
    let mut agent = Agent::new(profile, config);
    let steps = agent.run_scenario_set(&set.questions(), oracle)?;
    let events: Vec<ReflectionEvent> = steps.iter().filter_map(|s| s.reflection.clone()).collect();
    let result = CaseResult {
        mbti,
        target: set.target,
        observed: ObservedShift::from_events(mbti, &events),
        taa: taa(&steps, set.target).expect("a scenario set has questions"),
        events,
        final_profile: agent.profile.clone(),
    };
    Ok((result, steps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub matched: usize,
    pub cases: usize,
    pub psa: f64,
    pub mismatches: Vec<CaseKey>,
}

/// Scores sweep results against the generated expectation matrix.
pub fn score(results: &[CaseResult]) -> Result<SweepSummary, MetricsError> {
    let expectations = matrix_by_case(&expectation_matrix());
    let observed: BTreeMap<CaseKey, ObservedShift> = results
        .iter()
        .map(|r| ((r.mbti, r.target), r.observed.clone()))
        .collect();
    let value = psa(&expectations, &observed)?;
    let mismatches: Vec<CaseKey> = expectations
        .iter()
        .filter(|(k, e)| !e.accepts(&observed[k]))
        .map(|(k, _)| *k)
        .collect();
    Ok(SweepSummary {
        matched: expectations.len() - mismatches.len(),
        cases: expectations.len(),
        psa: value,
        mismatches,
    })
}

/// The full 16 × 8 grid, one agent per case, all seeded with `seed`.
pub fn run_grid<O: Oracle + ?Sized>(
    sets: &BTreeMap<PsychFunction, ScenarioSet>,
    seed: u64,
    config: EngineConfig,
    oracle: &O,
) -> Result<Vec<CaseResult>, EngineError> {
    let mut out = Vec::with_capacity(128);
    for mbti in MbtiType::ALL {
        for f in PsychFunction::ALL {
            let set = sets.get(&f).cloned().unwrap_or_else(|| ScenarioSet::synthetic(f));
            out.push(run_case(mbti, &set, seed, config, oracle)?.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ScriptedOracle;

    #[test]
    fn scripted_grid_matches_expectations() {
        let sets = BTreeMap::new();
        for seed in [0, 1, 42] {
            let results = run_grid(&sets, seed, EngineConfig::default(), &ScriptedOracle::new()).unwrap();
            let s = score(&results).unwrap();
            assert_eq!(s.mismatches, vec![], "seed {seed}");
            assert_eq!(s.psa, 1.0);
            assert!(results.iter().all(|r| r.taa == 1.0));
        }
    }
}
