use serde::{Deserialize, Serialize};

use super::{Connective, FuzzyError, Memberships, OutputLabel, RuleBase};
use crate::Scalar;

/// Per-output-set activation after max accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Activation<T> {
    pub low: T,
    pub normal: T,
    pub high: T,
}

impl<T: Scalar> Activation<T> {
    pub fn new(low: T, normal: T, high: T) -> Self {
        Self { low, normal, high }
    }

    pub fn get(&self, label: OutputLabel) -> T {
        match label {
            OutputLabel::Low => self.low,
            OutputLabel::Normal => self.normal,
            OutputLabel::High => self.high,
        }
    }

    fn raise(&mut self, label: OutputLabel, strength: T) {
        let slot = match label {
            OutputLabel::Low => &mut self.low,
            OutputLabel::Normal => &mut self.normal,
            OutputLabel::High => &mut self.high,
        };
        if strength > *slot {
            *slot = strength;
        }
    }
}

/// Fires every rule against pre-computed memberships.
///
/// `memberships[v]` holds the GOOD/MID/BAD degrees of input `v`. The slice
/// must cover the rule base's arity.
pub fn infer<T: Scalar>(rules: &RuleBase, memberships: &[Memberships<T>]) -> Activation<T> {
    debug_assert!(memberships.len() >= rules.arity);
    let mut act = Activation::new(T::zero(), T::zero(), T::zero());
    // Memberships are never NaN, so plain comparisons implement min/max.
    // A rule cannot raise a saturated output, an AND stops at 0 and an OR
    // stops at 1; the early exits leave the result unchanged.
    for rule in &rules.rules {
        if act.get(rule.consequent) >= T::one() {
            continue;
        }
        let strength = match rule.connective {
            Connective::And => {
                let mut s = T::one();
                for c in &rule.antecedent {
                    let m = memberships[c.variable][c.set.index()];
                    if m < s {
                        s = m;
                        if s <= T::zero() {
                            break;
                        }
                    }
                }
                s
            }
            Connective::Or => {
                let mut s = T::zero();
                for c in &rule.antecedent {
                    let m = memberships[c.variable][c.set.index()];
                    if m > s {
                        s = m;
                        if s >= T::one() {
                            break;
                        }
                    }
                }
                s
            }
        };
        act.raise(rule.consequent, strength);
    }
    act
}

/// Activation-weighted mean of the output-set centers.
pub fn defuzzify<T: Scalar>(act: &Activation<T>, centers: &[T; 3]) -> Result<T, FuzzyError> {
    let weight = act.low + act.normal + act.high;
    if !(weight > T::zero()) {
        return Err(FuzzyError::UndefinedScore);
    }
    let moment = act.low * centers[0] + act.normal * centers[1] + act.high * centers[2];
    Ok(moment / weight)
}
