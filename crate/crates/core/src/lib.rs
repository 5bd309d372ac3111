//! Adaptive Jungian personality state for conversational agents.
//!
//! The crate is organized bottom-up:
//!
//! - [`typology`]: the eight functions and the 16 dominant–auxiliary pairings.
//! - [`weights`]: base/temporary weights, boosts, decay, renormalization and
//!   reflection triggers.
//! - [`engine`]: the per-question adaptation loop and the four structural
//!   rewrites.
//! - [`oracle`]: every judgment the loop delegates, with a scripted
//!   implementation and an LLM-backed one.
//! - [`evaluation`]: questionnaires, accuracy tables and the DAG/DAR/TAA/PSA
//!   metrics.
//! - [`scenario`], [`snapshot`], [`trace`]: file formats.

pub mod engine;
pub mod evaluation;
pub mod oracle;
pub mod run;
pub mod scenario;
pub mod snapshot;
pub mod trace;
pub mod typology;
pub mod weights;

pub use engine::{Agent, EpisodeStep, Outcome, ReflectionEvent, ReflectionKind};
pub use typology::{Dimension, MbtiType, Pole, PsychFunction};
pub use weights::{RangeParams, Trigger, WeightProfile};
