//! One scenario set run from a snapshot to an updated snapshot and trace.

use crate::engine::EngineError;
use crate::oracle::Oracle;
use crate::scenario::ScenarioSet;
use crate::snapshot::AgentSnapshot;
use crate::trace::TraceRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<TraceRecord>,
    pub snapshot: AgentSnapshot,
    /// Questions whose oracle call failed; each still has a trace row.
    pub oracle_failures: usize,
}

/// Runs every question of `set`. Oracle failures are recorded as
/// `oracle_error` rows and the run moves on; any other engine error aborts
/// and nothing is returned.
pub fn run_set<O: Oracle + ?Sized>(
    start: &AgentSnapshot,
    set: &ScenarioSet,
    oracle: &O,
) -> Result<RunOutput, EngineError> {
    let mut agent = start.agent();
    let mut history = start.history.clone();
    let mut records = Vec::new();
    let mut failures = 0;
    for q in set.questions() {
        match agent.step(&q, oracle) {
            Ok(step) => {
                records.push(TraceRecord::from_step(&step, q.target, &agent.profile));
                history.extend(step.reflection);
            }
            Err(e) if e.is_oracle_failure() => {
                let index = agent.skip_question();
                records.push(TraceRecord::oracle_failure(
                    index,
                    q.target,
                    &agent.profile,
                    &e.to_string(),
                ));
                failures += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RunOutput {
        records,
        snapshot: AgentSnapshot::capture(&agent, start.seed, history),
        oracle_failures: failures,
    })
}
