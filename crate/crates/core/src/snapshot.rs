//! Agent snapshots on disk.
//!
//! Snapshots are pretty-printed JSON with a fixed field order and weights
//! rounded to 12 significant digits, so loading and re-saving a snapshot
//! reproduces it byte for byte. Writes go to a temporary file in the same
//! directory and are renamed into place; a sibling `.lock` file guards
//! against two processes mutating one snapshot.

use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Agent, EngineConfig, EpisodeStep, ReflectionEvent};
use crate::oracle::CoordinationMode;
use crate::trace::round_sig12;
use crate::typology::{mbti_for, MbtiType, PsychFunction};
use crate::weights::{FunctionWeights, RangeParams, WeightProfile};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("snapshot is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("snapshot schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("snapshot is inconsistent: {0}")]
    Invalid(String),
    #[error("{0} is locked by another process")]
    Locked(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SnapshotError + '_ {
    move |source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSnapshot {
    pub schema_version: u32,
    pub mbti: MbtiType,
    pub dominant: PsychFunction,
    pub auxiliary: PsychFunction,
    pub base: FunctionWeights,
    pub temp: FunctionWeights,
    pub params: RangeParams,
    pub seed: u64,
    pub step_counter: usize,
    pub memory_window: usize,
    pub coordination: CoordinationMode,
    pub history: Vec<ReflectionEvent>,
    /// Most recent steps, kept so the oracle sees the same context after a
    /// resume.
    pub memory: Vec<EpisodeStep>,
}

fn rounded(w: &FunctionWeights) -> FunctionWeights {
    let mut out = *w;
    for f in PsychFunction::ALL {
        out[f] = round_sig12(w[f]);
    }
    out
}

impl AgentSnapshot {
    pub fn new(mbti: MbtiType, params: RangeParams, seed: u64) -> Result<Self, SnapshotError> {
        let profile = WeightProfile::init(mbti, &params, seed).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
        let config = EngineConfig {
            params,
            ..EngineConfig::default()
        };
        Ok(Self::capture(&Agent::new(profile, config), seed, Vec::new()))
    }

    pub fn capture(agent: &Agent, seed: u64, history: Vec<ReflectionEvent>) -> Self {
        let p = &agent.profile;
        AgentSnapshot {
            schema_version: SCHEMA_VERSION,
            mbti: p.mbti(),
            dominant: p.dominant,
            auxiliary: p.auxiliary,
            base: rounded(&p.base),
            temp: rounded(&p.temp),
            params: agent.config.params,
            seed,
            step_counter: agent.next_index(),
            memory_window: agent.config.memory_window,
            coordination: agent.config.coordination,
            history,
            memory: agent.log.window(agent.config.memory_window).to_vec(),
        }
    }

    pub fn profile(&self) -> WeightProfile {
        WeightProfile {
            base: self.base,
            temp: self.temp,
            dominant: self.dominant,
            auxiliary: self.auxiliary,
        }
    }

    pub fn config(&self) -> EngineConfig {
        EngineConfig {
            params: self.params,
            memory_window: self.memory_window,
            coordination: self.coordination,
        }
    }

    /// Rebuilds the agent, including its recent memory.
    pub fn agent(&self) -> Agent {
        let mut agent = Agent::resume(self.profile(), self.config(), self.step_counter);
        for s in &self.memory {
            agent
                .log
                .push(s.clone())
                .expect("validated snapshot memory is strictly increasing");
        }
        agent
    }

    pub fn validate(&self) -> Result<(), SnapshotError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SnapshotError::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let invalid = |m: String| Err(SnapshotError::Invalid(m));
        self.params.check().map_err(|e| SnapshotError::Invalid(e.to_string()))?;
        match mbti_for(self.dominant, self.auxiliary) {
            Ok(t) if t == self.mbti => {}
            Ok(t) => {
                return invalid(format!(
                    "label {} does not match pair {}-{} ({t})",
                    self.mbti, self.dominant, self.auxiliary
                ))
            }
            Err(e) => return invalid(e.to_string()),
        }
        self.profile().check_invariants().map_err(SnapshotError::Invalid)?;
        let mut last = None;
        for s in &self.memory {
            if last.is_some_and(|l| s.question_index <= l) || s.question_index >= self.step_counter {
                return invalid(format!("memory step {} out of order", s.question_index));
            }
            last = Some(s.question_index);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("snapshot serializes");
        s.push('\n');
        s
    }

    pub fn from_json(src: &str) -> Result<Self, SnapshotError> {
        // check the version before the full schema so old files get a clear error
        #[derive(Deserialize)]
        struct Version {
            schema_version: u32,
        }
        let v: Version = serde_json::from_str(src)?;
        if v.schema_version != SCHEMA_VERSION {
            return Err(SnapshotError::SchemaVersion {
                found: v.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let snap: AgentSnapshot = serde_json::from_str(src)?;
        snap.validate()?;
        Ok(snap)
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        let src = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&src)
    }

    /// Writes the snapshot next to `path` and renames it into place.
    pub fn save_atomic(&self, path: &Path) -> Result<(), SnapshotError> {
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let name = path
            .file_name()
            .ok_or_else(|| SnapshotError::Invalid(format!("{} is not a file path", path.display())))?;
        let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
        let result = (|| {
            let mut f = File::create(&tmp)?;
            f.write_all(self.to_json().as_bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, path)
        })();
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(SnapshotError::Io {
                path: path.to_path_buf(),
                source: e,
            });
        }
        Ok(())
    }
}

/// Exclusive advisory lock on a snapshot, released on drop.
#[derive(Debug)]
pub struct SnapshotLock {
    _file: File,
    path: PathBuf,
}

impl SnapshotLock {
    pub fn acquire(snapshot: &Path) -> Result<Self, SnapshotError> {
        let mut lock_name = snapshot.as_os_str().to_owned();
        lock_name.push(".lock");
        let path = PathBuf::from(lock_name);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(io_err(&path))?;
        match file.try_lock() {
            Ok(()) => Ok(SnapshotLock { _file: file, path }),
            Err(TryLockError::WouldBlock) => Err(SnapshotError::Locked(snapshot.to_path_buf())),
            Err(TryLockError::Error(e)) => Err(SnapshotError::Io { path, source: e }),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ScriptedOracle;
    use crate::scenario::ScenarioSet;

    #[test]
    fn round_trip_is_byte_stable() {
        let snap = AgentSnapshot::new(MbtiType::INTP, RangeParams::default(), 42).unwrap();
        assert_eq!(snap.dominant, PsychFunction::Ti);
        assert_eq!(snap.auxiliary, PsychFunction::Ne);
        let json = snap.to_json();
        let back = AgentSnapshot::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);

        // after a run with reflections and memory
        let mut agent = back.agent();
        let mut history = Vec::new();
        for q in ScenarioSet::synthetic(PsychFunction::Fi).questions() {
            let s = agent.step(&q, &ScriptedOracle::new()).unwrap();
            history.extend(s.reflection);
        }
        let snap2 = AgentSnapshot::capture(&agent, 42, history);
        let json2 = snap2.to_json();
        let back2 = AgentSnapshot::from_json(&json2).unwrap();
        assert_eq!(back2.to_json(), json2);
        assert_eq!(back2.mbti, MbtiType::INFP);
        assert_eq!(back2.agent().next_index(), 15);
    }

    #[test]
    fn version_mismatch_rejected() {
        let snap = AgentSnapshot::new(MbtiType::ENFJ, RangeParams::default(), 1).unwrap();
        let json = snap.to_json().replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            AgentSnapshot::from_json(&json),
            Err(SnapshotError::SchemaVersion { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn inconsistent_label_rejected() {
        let snap = AgentSnapshot::new(MbtiType::ENFJ, RangeParams::default(), 1).unwrap();
        let json = snap.to_json().replace("\"mbti\": \"ENFJ\"", "\"mbti\": \"INTP\"");
        assert!(matches!(
            AgentSnapshot::from_json(&json),
            Err(SnapshotError::Invalid(_))
        ));
    }

    #[test]
    fn atomic_save_and_lock() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agent.json");
        let snap = AgentSnapshot::new(MbtiType::ISTJ, RangeParams::default(), 3).unwrap();
        snap.save_atomic(&path).unwrap();
        assert_eq!(AgentSnapshot::load(&path).unwrap(), snap);
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1, "temporary file left behind: {names:?}");

        let lock = SnapshotLock::acquire(&path).unwrap();
        assert!(matches!(SnapshotLock::acquire(&path), Err(SnapshotError::Locked(_))));
        drop(lock);
        SnapshotLock::acquire(&path).unwrap();
    }
}
