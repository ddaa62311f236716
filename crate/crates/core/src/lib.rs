//! Deterministic discrete-event simulation of failure handling on fog
//! devices.
//!
//! The fuzzy engine in [`fuzzy`] is generic over [`Scalar`]; the simulator
//! and everything that consumes its output work in `f64`.

// `!(x > 0.0)` is the NaN-rejecting form used throughout validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod device;
pub mod experiment;
pub mod fuzzy;
pub mod metrics;
pub mod policy;
pub mod scalar;
pub mod sim;
pub mod trace;

pub use scalar::Scalar;

pub type TrapezoidSetF64 = fuzzy::TrapezoidSet<f64>;
pub type TrapezoidSetF32 = fuzzy::TrapezoidSet<f32>;
pub type FuzzyVariableF64 = fuzzy::FuzzyVariable<f64>;
pub type FuzzyVariableF32 = fuzzy::FuzzyVariable<f32>;
pub type OutputVariableF64 = fuzzy::OutputVariable<f64>;
pub type OutputVariableF32 = fuzzy::OutputVariable<f32>;
pub type ScorerF64 = fuzzy::Scorer<f64>;
pub type ScorerF32 = fuzzy::Scorer<f32>;
pub type ScorerPairF64 = fuzzy::ScorerPair<f64>;
pub type ScorerPairF32 = fuzzy::ScorerPair<f32>;
pub type ActivationF64 = fuzzy::Activation<f64>;
pub type ActivationF32 = fuzzy::Activation<f32>;
