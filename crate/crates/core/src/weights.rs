//! Numeric personality state.
//!
//! A [`WeightProfile`] holds a persistent base weight and a temporary
//! (episode-scoped) weight for each of the eight functions. Base weights
//! always sum to one at rest. A temporary weight of exactly `0.0` means the
//! function has not been activated since the last renormalization.

use std::fmt;
use std::ops::{Index, IndexMut};

use rand::distributions::{Distribution, Open01, OpenClosed01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::typology::{is_valid_pair, mbti_for, pair_for, same_attitude_opposite_function, MbtiType, PsychFunction};

/// Tolerance for Σ base = 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("{0} has no active temporary weight")]
    InactiveFunction(PsychFunction),
    #[error("invalid range parameters: {}", list_violations(.0))]
    BadParams(Vec<ParamViolation>),
}

fn list_violations(v: &[ParamViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// One value per function, indexed by [`PsychFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FunctionWeights([f64; 8]);

impl FunctionWeights {
    pub const ZERO: FunctionWeights = FunctionWeights([0.0; 8]);

    pub fn from_array(values: [f64; 8]) -> Self {
        FunctionWeights(values)
    }

    pub fn as_array(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// (function, value) pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (PsychFunction, f64)> + '_ {
        PsychFunction::ALL.into_iter().map(move |f| (f, self[f]))
    }

    /// Functions sorted by descending value, canonical order on ties.
    pub fn ranking(&self) -> [PsychFunction; 8] {
        let mut fs = PsychFunction::ALL;
        fs.sort_by(|a, b| self[*b].total_cmp(&self[*a]).then(a.cmp(b)));
        fs
    }
}

impl Index<PsychFunction> for FunctionWeights {
    type Output = f64;

    fn index(&self, f: PsychFunction) -> &f64 {
        &self.0[f.index()]
    }
}

impl IndexMut<PsychFunction> for FunctionWeights {
    fn index_mut(&mut self, f: PsychFunction) -> &mut f64 {
        &mut self.0[f.index()]
    }
}

impl Serialize for FunctionWeights {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(8))?;
        for (f, w) in self.iter() {
            map.serialize_entry(f.label(), &w)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FunctionWeights {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = std::collections::BTreeMap::<PsychFunction, f64>::deserialize(deserializer)?;
        let mut out = FunctionWeights::ZERO;
        for f in PsychFunction::ALL {
            out[f] = *raw
                .get(&f)
                .ok_or_else(|| serde::de::Error::custom(format!("missing weight for {f}")))?;
        }
        if raw.len() != 8 {
            return Err(serde::de::Error::custom("expected exactly eight weights"));
        }
        Ok(out)
    }
}

/// Differentiation range limits and update constants.
///
/// `a` separates the high range from the low range, `b` the low range from
/// the undifferentiated one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeParams {
    pub a: f64,
    pub b: f64,
    pub delta_w: f64,
    pub decay_factor: f64,
    pub dominance_cap: f64,
}

impl Default for RangeParams {
    fn default() -> Self {
        RangeParams {
            a: 0.30,
            b: 0.06,
            delta_w: 0.06,
            decay_factor: 0.2,
            dominance_cap: 0.5,
        }
    }
}

/// A violated inequality of the parameter constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamViolation {
    /// 0 < B
    BPositive,
    /// B < 1/8
    BBelowEighth,
    /// B < A
    BBelowA,
    /// A < (1 − 6B)/2
    ABelowBound,
    /// Δw > 0
    DeltaPositive,
    /// 0 ≤ decay < 1
    DecayRange,
    /// 0.5 ≤ cap < 1
    CapRange,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamViolation::BPositive => "0 < B",
            ParamViolation::BBelowEighth => "B < 1/8",
            ParamViolation::BBelowA => "B < A",
            ParamViolation::ABelowBound => "A < (1-6B)/2",
            ParamViolation::DeltaPositive => "delta_w > 0",
            ParamViolation::DecayRange => "0 <= decay_factor < 1",
            ParamViolation::CapRange => "0.5 <= dominance_cap < 1",
        })
    }
}

impl RangeParams {
    /// Every violated inequality, empty when the parameters are usable.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn violations(&self) -> Vec<ParamViolation> {
        let mut v = Vec::new();
        let (a, b) = (self.a, self.b);
        // NaN fails every comparison and so lands in every relevant bucket.
        if !(b > 0.0) {
            v.push(ParamViolation::BPositive);
        }
        if !(b < 1.0 / 8.0) {
            v.push(ParamViolation::BBelowEighth);
        }
        if !(b < a) {
            v.push(ParamViolation::BBelowA);
        }
        if !(a < (1.0 - 6.0 * b) / 2.0) {
            v.push(ParamViolation::ABelowBound);
        }
        if !(self.delta_w > 0.0) {
            v.push(ParamViolation::DeltaPositive);
        }
        if !(self.decay_factor >= 0.0 && self.decay_factor < 1.0) {
            v.push(ParamViolation::DecayRange);
        }
        if !(self.dominance_cap >= 0.5 && self.dominance_cap < 1.0) {
            v.push(ParamViolation::CapRange);
        }
        v
    }

    pub fn check(&self) -> Result<(), WeightError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(WeightError::BadParams(v))
        }
    }
}

/// Which base weight a candidate's temporary weight was compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Dominant,
    Auxiliary,
}

/// The four structural rewrites, in precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RewriteRule {
    RoleSwap,
    DominantReplacement,
    AuxiliaryReplacement,
    StructuralReorganization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "trigger", rename_all = "snake_case")]
pub enum Trigger {
    CandidateExceeds {
        function: PsychFunction,
        against: Threshold,
        rule: RewriteRule,
    },
    DominanceCapHit,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::CandidateExceeds { function, against, .. } => {
                let vs = match against {
                    Threshold::Dominant => "dominant",
                    Threshold::Auxiliary => "auxiliary",
                };
                write!(f, "{function}>={vs}")
            }
            Trigger::DominanceCapHit => f.write_str("cap"),
        }
    }
}

/// The full personality state of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub base: FunctionWeights,
    pub temp: FunctionWeights,
    pub dominant: PsychFunction,
    pub auxiliary: PsychFunction,
}

impl WeightProfile {
    /// Draws base weights inside their differentiation ranges and
    /// normalizes them to sum to one.
    ///
    /// Draws happen in canonical function order from a ChaCha8 stream
    /// seeded with `seed`, so a (type, params, seed) triple always yields the
    /// same profile on every platform.
    pub fn init(mbti: MbtiType, params: &RangeParams, seed: u64) -> Result<Self, WeightError> {
        params.check()?;
        let raw = sample_raw(mbti, params, seed);
        let total = raw.sum();
        let mut base = FunctionWeights::ZERO;
        for (f, w) in raw.iter() {
            base[f] = w / total;
        }
        let (dominant, auxiliary) = pair_for(mbti);
        Ok(WeightProfile {
            base,
            temp: FunctionWeights::ZERO,
            dominant,
            auxiliary,
        })
    }

    pub fn mbti(&self) -> MbtiType {
        mbti_for(self.dominant, self.auxiliary).expect("profile holds a valid pairing")
    }

    /// Temporary weight when active, base weight otherwise.
    pub fn effective(&self, f: PsychFunction) -> f64 {
        if self.temp[f] > 0.0 {
            self.temp[f]
        } else {
            self.base[f]
        }
    }

    pub fn is_active(&self, f: PsychFunction) -> bool {
        self.temp[f] != 0.0
    }

    /// First activation seeds the temporary weight from the base weight;
    /// later ones add to it.
    pub fn boost(&mut self, f: PsychFunction, params: &RangeParams) {
        if self.temp[f] == 0.0 {
            self.temp[f] = self.base[f] + params.delta_w;
        } else {
            self.temp[f] += params.delta_w;
        }
    }

    pub fn decay(&mut self, f: PsychFunction, params: &RangeParams) -> Result<(), WeightError> {
        if self.temp[f] <= 0.0 {
            return Err(WeightError::InactiveFunction(f));
        }
        self.temp[f] *= params.decay_factor;
        Ok(())
    }

    /// Folds active temporary weights into the base and rescales so the base
    /// sums to one. Every temporary weight is cleared.
    ///
    /// Each function contributes `max(base, temp)`; with no active
    /// temporaries this is a plain rescale by Σ base.
    pub fn renormalize(&mut self) {
        let mut merged = [0.0; 8];
        for (i, f) in PsychFunction::ALL.into_iter().enumerate() {
            merged[i] = self.base[f].max(self.temp[f]);
        }
        let total: f64 = merged.iter().sum();
        for (i, f) in PsychFunction::ALL.into_iter().enumerate() {
            self.base[f] = merged[i] / total;
        }
        self.temp = FunctionWeights::ZERO;
    }

    /// The rewrite rule `f` is currently eligible for, if any.
    ///
    /// The dominant is never a candidate. The auxiliary is compared against
    /// the dominant (role swap). The dominant's substitute is compared against
    /// the dominant, the auxiliary's substitute against the auxiliary, and any
    /// other function against the dominant (reorganization).
    pub fn candidate_rule(&self, f: PsychFunction) -> Option<(RewriteRule, Threshold)> {
        let t = self.temp[f];
        if t <= 0.0 || f == self.dominant {
            return None;
        }
        let dom = self.base[self.dominant];
        let aux = self.base[self.auxiliary];
        if f == self.auxiliary {
            (t >= dom).then_some((RewriteRule::RoleSwap, Threshold::Dominant))
        } else if f == same_attitude_opposite_function(self.dominant) {
            (t >= dom).then_some((RewriteRule::DominantReplacement, Threshold::Dominant))
        } else if f == same_attitude_opposite_function(self.auxiliary) {
            (t >= aux).then_some((RewriteRule::AuxiliaryReplacement, Threshold::Auxiliary))
        } else {
            (t >= dom).then_some((RewriteRule::StructuralReorganization, Threshold::Dominant))
        }
    }

    /// Highest-priority reflection trigger, or `None` when the profile is at
    /// rest.
    ///
    /// Candidates are ranked by rule precedence (role swap, dominant
    /// replacement, auxiliary replacement, reorganization) and then by
    /// canonical function order. Only when no candidate fires is the
    /// dominance cap checked.
    pub fn trigger_state(&self, params: &RangeParams) -> Option<Trigger> {
        let best = PsychFunction::ALL
            .into_iter()
            .filter_map(|f| self.candidate_rule(f).map(|(rule, against)| (rule, f, against)))
            .min_by_key(|(rule, f, _)| (*rule, *f));
        if let Some((rule, function, against)) = best {
            return Some(Trigger::CandidateExceeds {
                function,
                against,
                rule,
            });
        }
        if self.effective(self.dominant) >= params.dominance_cap {
            return Some(Trigger::DominanceCapHit);
        }
        None
    }

    /// Checks the invariants that must hold at every step: valid pairing,
    /// finite non-negative weights, positive base weights, Σ base = 1.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !is_valid_pair(self.dominant, self.auxiliary) {
            return Err(format!("{}-{} is not a valid pairing", self.dominant, self.auxiliary));
        }
        for (f, w) in self.base.iter() {
            if !(w.is_finite() && w > 0.0) {
                return Err(format!("base({f}) = {w}"));
            }
        }
        for (f, w) in self.temp.iter() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(format!("temp({f}) = {w}"));
            }
        }
        let s = self.base.sum();
        if (s - 1.0).abs() > SUM_TOLERANCE {
            return Err(format!("base weights sum to {s}"));
        }
        Ok(())
    }

    /// True when base(dominant) > base(auxiliary) > every other base.
    pub fn hierarchy_holds(&self) -> bool {
        let d = self.base[self.dominant];
        let a = self.base[self.auxiliary];
        d > a
            && self
                .base
                .iter()
                .filter(|(f, _)| *f != self.dominant && *f != self.auxiliary)
                .all(|(_, w)| a > w)
    }
}

/// Pre-normalization draws: dominant in (A, 1), auxiliary in (B, A],
/// the rest in (0, B].
pub fn sample_raw(mbti: MbtiType, params: &RangeParams, seed: u64) -> FunctionWeights {
    let (dominant, auxiliary) = pair_for(mbti);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = FunctionWeights::ZERO;
    for f in PsychFunction::ALL {
        raw[f] = if f == dominant {
            let u: f64 = Open01.sample(&mut rng);
            params.a + u * (1.0 - params.a)
        } else if f == auxiliary {
            let u: f64 = OpenClosed01.sample(&mut rng);
            params.b + u * (params.a - params.b)
        } else {
            let u: f64 = OpenClosed01.sample(&mut rng);
            u * params.b
        };
    }
    raw
}
