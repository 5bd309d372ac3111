//! The eight Jungian functions, their attitude and kind axes, and the
//! 16 MBTI dominant–auxiliary pairings.
//!
//! All tables here are static. Every structural rewrite performed by the
//! adaptation engine must land on a row of [`PAIRINGS`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypologyError {
    #[error("unknown psychological function label {0:?}")]
    UnknownFunction(String),
    #[error("unknown MBTI label {0:?}")]
    BadLabel(String),
    #[error("unknown dimension label {0:?}")]
    UnknownDimension(String),
    #[error("unknown pole letter {0:?}")]
    UnknownPole(String),
    #[error("{dominant}-{auxiliary} is not a valid dominant-auxiliary pairing")]
    InvalidPairing {
        dominant: PsychFunction,
        auxiliary: PsychFunction,
    },
}

/// Direction of psychic energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attitude {
    Extraverted,
    Introverted,
}

impl Attitude {
    pub fn opposite(self) -> Self {
        match self {
            Attitude::Extraverted => Attitude::Introverted,
            Attitude::Introverted => Attitude::Extraverted,
        }
    }
}

/// Judging (rational) or perceiving (irrational) family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    Judging,
    Perceiving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseFunction {
    Thinking,
    Feeling,
    Sensation,
    Intuition,
}

impl BaseFunction {
    pub fn kind(self) -> FunctionKind {
        match self {
            BaseFunction::Thinking | BaseFunction::Feeling => FunctionKind::Judging,
            BaseFunction::Sensation | BaseFunction::Intuition => FunctionKind::Perceiving,
        }
    }

    /// T↔F, S↔N. Preserves kind.
    pub fn opposite(self) -> Self {
        match self {
            BaseFunction::Thinking => BaseFunction::Feeling,
            BaseFunction::Feeling => BaseFunction::Thinking,
            BaseFunction::Sensation => BaseFunction::Intuition,
            BaseFunction::Intuition => BaseFunction::Sensation,
        }
    }
}

/// One of the eight attitude × base-function combinations.
///
/// Variant order is the canonical iteration order used for every
/// deterministic tie-break in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PsychFunction {
    Ti,
    Ne,
    Si,
    Fe,
    Te,
    Ni,
    Se,
    Fi,
}

impl PsychFunction {
    pub const ALL: [PsychFunction; 8] = [
        PsychFunction::Ti,
        PsychFunction::Ne,
        PsychFunction::Si,
        PsychFunction::Fe,
        PsychFunction::Te,
        PsychFunction::Ni,
        PsychFunction::Se,
        PsychFunction::Fi,
    ];

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn new(attitude: Attitude, base: BaseFunction) -> Self {
        use Attitude::*;
        use BaseFunction::*;
        match (attitude, base) {
            (Extraverted, Thinking) => PsychFunction::Te,
            (Introverted, Thinking) => PsychFunction::Ti,
            (Extraverted, Feeling) => PsychFunction::Fe,
            (Introverted, Feeling) => PsychFunction::Fi,
            (Extraverted, Sensation) => PsychFunction::Se,
            (Introverted, Sensation) => PsychFunction::Si,
            (Extraverted, Intuition) => PsychFunction::Ne,
            (Introverted, Intuition) => PsychFunction::Ni,
        }
    }

    pub fn attitude(self) -> Attitude {
        match self {
            PsychFunction::Te | PsychFunction::Fe | PsychFunction::Se | PsychFunction::Ne => Attitude::Extraverted,
            _ => Attitude::Introverted,
        }
    }

    pub fn base(self) -> BaseFunction {
        match self {
            PsychFunction::Te | PsychFunction::Ti => BaseFunction::Thinking,
            PsychFunction::Fe | PsychFunction::Fi => BaseFunction::Feeling,
            PsychFunction::Se | PsychFunction::Si => BaseFunction::Sensation,
            PsychFunction::Ne | PsychFunction::Ni => BaseFunction::Intuition,
        }
    }

    pub fn kind(self) -> FunctionKind {
        self.base().kind()
    }

    pub fn label(self) -> &'static str {
        match self {
            PsychFunction::Ti => "Ti",
            PsychFunction::Ne => "Ne",
            PsychFunction::Si => "Si",
            PsychFunction::Fe => "Fe",
            PsychFunction::Te => "Te",
            PsychFunction::Ni => "Ni",
            PsychFunction::Se => "Se",
            PsychFunction::Fi => "Fi",
        }
    }

    /// Long human-readable name, used by prompt rendering.
    pub fn name(self) -> &'static str {
        match self {
            PsychFunction::Ti => "Introverted Thinking",
            PsychFunction::Ne => "Extraverted Intuition",
            PsychFunction::Si => "Introverted Sensation",
            PsychFunction::Fe => "Extraverted Feeling",
            PsychFunction::Te => "Extraverted Thinking",
            PsychFunction::Ni => "Introverted Intuition",
            PsychFunction::Se => "Extraverted Sensation",
            PsychFunction::Fi => "Introverted Feeling",
        }
    }
}

impl fmt::Display for PsychFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PsychFunction {
    type Err = TypologyError;

    /// Accepts the two-letter label in any letter case ("Ti", "ti", "TI").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        PsychFunction::ALL
            .into_iter()
            .find(|f| f.label().eq_ignore_ascii_case(t))
            .ok_or_else(|| TypologyError::UnknownFunction(s.to_string()))
    }
}

impl Serialize for PsychFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for PsychFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The function sharing `f`'s attitude but with the opposite base function
/// of the same kind (Ti↔Fi, Ne↔Se, ...). This is the "substitute" that can
/// replace `f` without breaking the pairing rules.
pub fn same_attitude_opposite_function(f: PsychFunction) -> PsychFunction {
    PsychFunction::new(f.attitude(), f.base().opposite())
}

/// Opposite attitude and opposite kind: the only shape a dominant–auxiliary
/// pair may take.
pub fn is_valid_pair(dominant: PsychFunction, auxiliary: PsychFunction) -> bool {
    dominant.attitude() != auxiliary.attitude() && dominant.kind() != auxiliary.kind()
}

/// The two functions that can serve as auxiliary to `dominant`, in
/// canonical order.
pub fn valid_auxiliaries(dominant: PsychFunction) -> [PsychFunction; 2] {
    let attitude = dominant.attitude().opposite();
    let mut out = match dominant.kind() {
        FunctionKind::Judging => [
            PsychFunction::new(attitude, BaseFunction::Sensation),
            PsychFunction::new(attitude, BaseFunction::Intuition),
        ],
        FunctionKind::Perceiving => [
            PsychFunction::new(attitude, BaseFunction::Thinking),
            PsychFunction::new(attitude, BaseFunction::Feeling),
        ],
    };
    out.sort();
    out
}

/// One of the four MBTI dichotomies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimension {
    EI,
    SN,
    TF,
    JP,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Dimension::EI, Dimension::SN, Dimension::TF, Dimension::JP];

    pub fn label(self) -> &'static str {
        match self {
            Dimension::EI => "EI",
            Dimension::SN => "SN",
            Dimension::TF => "TF",
            Dimension::JP => "JP",
        }
    }

    pub fn poles(self) -> (Pole, Pole) {
        match self {
            Dimension::EI => (Pole::E, Pole::I),
            Dimension::SN => (Pole::S, Pole::N),
            Dimension::TF => (Pole::T, Pole::F),
            Dimension::JP => (Pole::J, Pole::P),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Dimension {
    type Err = TypologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| TypologyError::UnknownDimension(s.to_string()))
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Dimension {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A single MBTI letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pole {
    E,
    I,
    S,
    N,
    T,
    F,
    J,
    P,
}

impl Pole {
    pub fn dimension(self) -> Dimension {
        match self {
            Pole::E | Pole::I => Dimension::EI,
            Pole::S | Pole::N => Dimension::SN,
            Pole::T | Pole::F => Dimension::TF,
            Pole::J | Pole::P => Dimension::JP,
        }
    }

    pub fn opposite(self) -> Pole {
        let (a, b) = self.dimension().poles();
        if self == a {
            b
        } else {
            a
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pole::E => 'E',
            Pole::I => 'I',
            Pole::S => 'S',
            Pole::N => 'N',
            Pole::T => 'T',
            Pole::F => 'F',
            Pole::J => 'J',
            Pole::P => 'P',
        }
    }

    pub fn from_letter(c: char) -> Option<Pole> {
        Some(match c.to_ascii_uppercase() {
            'E' => Pole::E,
            'I' => Pole::I,
            'S' => Pole::S,
            'N' => Pole::N,
            'T' => Pole::T,
            'F' => Pole::F,
            'J' => Pole::J,
            'P' => Pole::P,
            _ => return None,
        })
    }
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Pole {
    type Err = TypologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Pole::from_letter(c),
            _ => None,
        }
        .ok_or_else(|| TypologyError::UnknownPole(s.to_string()))
    }
}

impl Serialize for Pole {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pole {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The 16 MBTI types, in the order the result tables list them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MbtiType {
    INFJ,
    INTJ,
    ISFJ,
    ISTJ,
    INFP,
    ISFP,
    INTP,
    ISTP,
    ENFP,
    ENTP,
    ESFP,
    ESTP,
    ENFJ,
    ESFJ,
    ENTJ,
    ESTJ,
}

use PsychFunction::*;

/// MBTI type → (dominant, auxiliary).
pub const PAIRINGS: [(MbtiType, PsychFunction, PsychFunction); 16] = [
    (MbtiType::INFJ, Ni, Fe),
    (MbtiType::INTJ, Ni, Te),
    (MbtiType::ISFJ, Si, Fe),
    (MbtiType::ISTJ, Si, Te),
    (MbtiType::INFP, Fi, Ne),
    (MbtiType::ISFP, Fi, Se),
    (MbtiType::INTP, Ti, Ne),
    (MbtiType::ISTP, Ti, Se),
    (MbtiType::ENFP, Ne, Fi),
    (MbtiType::ENTP, Ne, Ti),
    (MbtiType::ESFP, Se, Fi),
    (MbtiType::ESTP, Se, Ti),
    (MbtiType::ENFJ, Fe, Ni),
    (MbtiType::ESFJ, Fe, Si),
    (MbtiType::ENTJ, Te, Ni),
    (MbtiType::ESTJ, Te, Si),
];

impl MbtiType {
    pub const ALL: [MbtiType; 16] = [
        MbtiType::INFJ,
        MbtiType::INTJ,
        MbtiType::ISFJ,
        MbtiType::ISTJ,
        MbtiType::INFP,
        MbtiType::ISFP,
        MbtiType::INTP,
        MbtiType::ISTP,
        MbtiType::ENFP,
        MbtiType::ENTP,
        MbtiType::ESFP,
        MbtiType::ESTP,
        MbtiType::ENFJ,
        MbtiType::ESFJ,
        MbtiType::ENTJ,
        MbtiType::ESTJ,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            MbtiType::INFJ => "INFJ",
            MbtiType::INTJ => "INTJ",
            MbtiType::ISFJ => "ISFJ",
            MbtiType::ISTJ => "ISTJ",
            MbtiType::INFP => "INFP",
            MbtiType::ISFP => "ISFP",
            MbtiType::INTP => "INTP",
            MbtiType::ISTP => "ISTP",
            MbtiType::ENFP => "ENFP",
            MbtiType::ENTP => "ENTP",
            MbtiType::ESFP => "ESFP",
            MbtiType::ESTP => "ESTP",
            MbtiType::ENFJ => "ENFJ",
            MbtiType::ESFJ => "ESFJ",
            MbtiType::ENTJ => "ENTJ",
            MbtiType::ESTJ => "ESTJ",
        }
    }

    pub fn dominant(self) -> PsychFunction {
        pair_for(self).0
    }

    pub fn auxiliary(self) -> PsychFunction {
        pair_for(self).1
    }

    /// The letter of this type on dimension `d`.
    pub fn letter(self, d: Dimension) -> Pole {
        let l = self.label().as_bytes()[d.index()] as char;
        Pole::from_letter(l).expect("type labels are made of pole letters")
    }

    /// Label in the "Ti-Ne (INTP)" form used by result tables.
    pub fn pairing_label(self) -> String {
        let (d, a) = pair_for(self);
        format!("{d}-{a} ({})", self.label())
    }
}

impl fmt::Display for MbtiType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MbtiType {
    type Err = TypologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MbtiType::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| TypologyError::BadLabel(s.to_string()))
    }
}

impl Serialize for MbtiType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for MbtiType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn pair_for(mbti: MbtiType) -> (PsychFunction, PsychFunction) {
    let (_, d, a) = PAIRINGS[mbti.index()];
    (d, a)
}

pub fn mbti_for(dominant: PsychFunction, auxiliary: PsychFunction) -> Result<MbtiType, TypologyError> {
    PAIRINGS
        .iter()
        .find(|(_, d, a)| *d == dominant && *a == auxiliary)
        .map(|(m, _, _)| *m)
        .ok_or(TypologyError::InvalidPairing { dominant, auxiliary })
}
