//! Theoretically valid structural outcomes for every (profile, target) case.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{ReflectionEvent, ReflectionKind};
use crate::typology::{mbti_for, same_attitude_opposite_function, valid_auxiliaries, MbtiType, PsychFunction};

/// One acceptable sequence of approved rewrites and where it ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPath {
    pub kinds: Vec<ReflectionKind>,
    #[serde(rename = "final")]
    pub final_type: MbtiType,
}

impl ShiftPath {
    pub fn last_kind(&self) -> ReflectionKind {
        self.kinds.last().copied().unwrap_or(ReflectionKind::NoChange)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedShift {
    #[serde(rename = "type")]
    pub mbti: MbtiType,
    pub target: PsychFunction,
    /// The rewrite the target should provoke first.
    pub kind: ReflectionKind,
    pub paths: Vec<ShiftPath>,
}

impl ExpectedShift {
    /// Scores the final structure: the last approved rewrite kind and the
    /// resulting pairing must match one accepted path.
    pub fn accepts(&self, observed: &ObservedShift) -> bool {
        self.paths
            .iter()
            .any(|p| p.final_type == observed.final_type && p.last_kind() == observed.last_kind())
    }
}

/// What a run actually did, reduced to its approved rewrites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedShift {
    pub kinds: Vec<ReflectionKind>,
    #[serde(rename = "final")]
    pub final_type: MbtiType,
}

impl ObservedShift {
    pub fn from_events<'a>(initial: MbtiType, events: impl IntoIterator<Item = &'a ReflectionEvent>) -> Self {
        let mut kinds = Vec::new();
        let mut final_type = initial;
        for e in events {
            if e.is_structural() {
                kinds.push(e.kind);
                final_type = e.after.mbti;
            }
        }
        ObservedShift { kinds, final_type }
    }

    pub fn last_kind(&self) -> ReflectionKind {
        self.kinds.last().copied().unwrap_or(ReflectionKind::NoChange)
    }
}

fn pair(d: PsychFunction, a: PsychFunction) -> MbtiType {
    mbti_for(d, a).expect("rule semantics only produce valid pairings")
}

pub fn expected_shift(mbti: MbtiType, target: PsychFunction) -> ExpectedShift {
    use ReflectionKind::*;
    let (d, a) = (mbti.dominant(), mbti.auxiliary());
    let path = |kinds: Vec<ReflectionKind>, final_type| ShiftPath { kinds, final_type };
    let (kind, paths) = if target == d {
        (NoChange, vec![path(vec![], mbti)])
    } else if target == a {
        (RoleSwap, vec![path(vec![RoleSwap], pair(a, d))])
    } else if target == same_attitude_opposite_function(d) {
        (
            DominantReplacement,
            vec![path(vec![DominantReplacement], pair(target, a))],
        )
    } else if target == same_attitude_opposite_function(a) {
        (
            AuxiliaryReplacement,
            vec![
                path(vec![AuxiliaryReplacement], pair(d, target)),
                path(vec![AuxiliaryReplacement, RoleSwap], pair(target, d)),
            ],
        )
    } else {
        (
            StructuralReorganization,
            valid_auxiliaries(target)
                .into_iter()
                .map(|y| path(vec![StructuralReorganization], pair(target, y)))
                .collect(),
        )
    };
    ExpectedShift {
        mbti,
        target,
        kind,
        paths,
    }
}

/// The full 16 × 8 grid in table order, then canonical function order.
pub fn expectation_matrix() -> Vec<ExpectedShift> {
    MbtiType::ALL
        .iter()
        .flat_map(|&m| PsychFunction::ALL.iter().map(move |&f| expected_shift(m, f)))
        .collect()
}

pub fn matrix_by_case(matrix: &[ExpectedShift]) -> BTreeMap<(MbtiType, PsychFunction), ExpectedShift> {
    matrix.iter().map(|e| ((e.mbti, e.target), e.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use PsychFunction::*;
    use ReflectionKind::*;

    #[test]
    fn intp_row() {
        let m = MbtiType::INTP;
        let e = |f| expected_shift(m, f);
        assert_eq!(e(Ti).kind, NoChange);
        assert_eq!(e(Ti).paths[0].final_type, MbtiType::INTP);
        assert_eq!(
            e(Fi).paths,
            vec![ShiftPath {
                kinds: vec![DominantReplacement],
                final_type: MbtiType::INFP
            }]
        );
        assert_eq!(e(Ne).paths[0].final_type, MbtiType::ENTP);
        let se = e(Se);
        assert_eq!(se.kind, AuxiliaryReplacement);
        assert_eq!(se.paths[0].final_type, MbtiType::ISTP);
        assert_eq!(se.paths[1].final_type, MbtiType::ESTP);
        let fe: Vec<_> = e(Fe).paths.iter().map(|p| p.final_type).collect();
        assert_eq!(fe, vec![MbtiType::ESFJ, MbtiType::ENFJ]);
        for f in [Ni, Te, Si] {
            assert_eq!(e(f).kind, StructuralReorganization);
            assert!(e(f).paths.iter().all(|p| p.final_type.dominant() == f));
        }
    }

    #[test]
    fn matrix_shape() {
        let m = expectation_matrix();
        assert_eq!(m.len(), 128);
        let mut counts = BTreeMap::new();
        for e in &m {
            *counts.entry(e.kind).or_insert(0) += 1;
        }
        // per profile: one each of no change, swap, dominant and auxiliary
        // replacement, four reorganizations
        assert_eq!(counts[&NoChange], 16);
        assert_eq!(counts[&RoleSwap], 16);
        assert_eq!(counts[&DominantReplacement], 16);
        assert_eq!(counts[&AuxiliaryReplacement], 16);
        assert_eq!(counts[&StructuralReorganization], 64);
    }

    #[test]
    fn acceptance_uses_final_structure() {
        let se = expected_shift(MbtiType::INTP, Se);
        let via = ObservedShift {
            kinds: vec![AuxiliaryReplacement, RoleSwap],
            final_type: MbtiType::ESTP,
        };
        assert!(se.accepts(&via));
        let wrong = ObservedShift {
            kinds: vec![StructuralReorganization],
            final_type: MbtiType::ESTP,
        };
        assert!(!se.accepts(&wrong));
        let none = ObservedShift {
            kinds: vec![],
            final_type: MbtiType::INTP,
        };
        assert!(!se.accepts(&none));
        assert!(expected_shift(MbtiType::INTP, Ti).accepts(&none));
    }
}
