//! Mamdani-style fuzzy scoring of device telemetry.
//!
//! Inputs are percentages on a common `[0, 100]` scale where larger means
//! worse (more mobile, slower, poorer power, busier CPU, slower network).
//! Each input carries three trapezoidal sets (GOOD, MID, BAD). Rules use
//! min for AND and max for OR, activations are accumulated per output set
//! with max, and the crisp score is the activation-weighted mean of the
//! output-set centers.

mod inference;
mod membership;
mod rules;
mod scorer;

pub use inference::{defuzzify, infer, Activation};
pub use membership::{membership, normalize, Memberships, SetLabel, TrapezoidSet};
pub use rules::{build_rule_base, Clause, Connective, OutputLabel, Rule, RuleBase};
pub use scorer::{
    cpmnr_score, mrp_score, FuzzyVariable, OutputVariable, Scorer, ScorerPair, CPMNR_INPUTS,
    MRP_INPUTS,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("{param} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        param: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid normalization range: beta ({beta}) must exceed alpha ({alpha})")]
    InvalidRange { alpha: f64, beta: f64 },
    #[error("invalid trapezoid breakpoints a={a} b={b} c={c} d={d}")]
    InvalidBreakpoints { a: f64, b: f64, c: f64, d: f64 },
    #[error("rule base needs at least one input parameter")]
    EmptyRuleBase,
    #[error("rule base arity {0} too large")]
    ArityTooLarge(usize),
    #[error("missing input value for variable `{0}`")]
    MissingInput(String),
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("every output activation is zero; score undefined")]
    UndefinedScore,
}
