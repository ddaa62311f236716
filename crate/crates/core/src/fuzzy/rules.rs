use serde::{Deserialize, Serialize};

use super::{FuzzyError, SetLabel};

/// Output set a rule concludes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OutputLabel {
    Low,
    Normal,
    High,
}

impl OutputLabel {
    pub const ALL: [OutputLabel; 3] = [OutputLabel::Low, OutputLabel::Normal, OutputLabel::High];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            OutputLabel::Low => 0,
            OutputLabel::Normal => 1,
            OutputLabel::High => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Connective {
    And,
    Or,
}

/// `variable` indexes the owning scorer's input list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub variable: usize,
    pub set: SetLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: Vec<Clause>,
    pub connective: Connective,
    pub consequent: OutputLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleBase {
    pub arity: usize,
    pub rules: Vec<Rule>,
}

impl RuleBase {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn count(&self, consequent: OutputLabel) -> usize {
        self.rules
            .iter()
            .filter(|r| r.consequent == consequent)
            .count()
    }
}

const MAX_ARITY: usize = 16;

/// Builds the failure-score rule base over `k` parameters.
///
/// Order: the OR rule (any BAD → HIGH), the AND rule (all GOOD → LOW), then
/// one AND rule per non-empty subset of parameters sitting in MID with the
/// rest in GOOD (→ NORMAL). Subsets are enumerated by an ascending bitmask
/// whose most significant bit is the first parameter, so the first NORMAL
/// rule places only the last parameter in MID.
pub fn build_rule_base(k: usize) -> Result<RuleBase, FuzzyError> {
    if k == 0 {
        return Err(FuzzyError::EmptyRuleBase);
    }
    if k > MAX_ARITY {
        return Err(FuzzyError::ArityTooLarge(k));
    }
    let uniform = |set| (0..k).map(|variable| Clause { variable, set }).collect();
    let mut rules = Vec::with_capacity((1 << k) + 2);
    rules.push(Rule {
        antecedent: uniform(SetLabel::Bad),
        connective: Connective::Or,
        consequent: OutputLabel::High,
    });
    rules.push(Rule {
        antecedent: uniform(SetLabel::Good),
        connective: Connective::And,
        consequent: OutputLabel::Low,
    });
    for mask in 1u32..(1u32 << k) {
        let antecedent = (0..k)
            .map(|variable| {
                let bit = 1u32 << (k - 1 - variable);
                let set = if mask & bit != 0 {
                    SetLabel::Mid
                } else {
                    SetLabel::Good
                };
                Clause { variable, set }
            })
            .collect();
        rules.push(Rule {
            antecedent,
            connective: Connective::And,
            consequent: OutputLabel::Normal,
        });
    }
    Ok(RuleBase { arity: k, rules })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_counts() {
        for (k, total, normal) in [(1, 3, 1), (3, 9, 7), (5, 33, 31)] {
            let rb = build_rule_base(k).unwrap();
            assert_eq!(rb.len(), total);
            assert_eq!(rb.count(OutputLabel::Normal), normal);
            assert_eq!(rb.count(OutputLabel::High), 1);
            assert_eq!(rb.count(OutputLabel::Low), 1);
        }
    }

    #[test]
    fn zero_arity_rejected() {
        assert_eq!(build_rule_base(0), Err(FuzzyError::EmptyRuleBase));
        assert!(build_rule_base(17).is_err());
    }

    #[test]
    fn first_normal_rule_puts_last_parameter_in_mid() {
        let rb = build_rule_base(3).unwrap();
        let sets: Vec<_> = rb.rules[2].antecedent.iter().map(|c| c.set).collect();
        assert_eq!(sets, vec![SetLabel::Good, SetLabel::Good, SetLabel::Mid]);
    }

    #[test]
    fn normal_rules_are_distinct_and_never_bad() {
        let rb = build_rule_base(5).unwrap();
        let normals: Vec<_> = rb
            .rules
            .iter()
            .filter(|r| r.consequent == OutputLabel::Normal)
            .collect();
        for r in &normals {
            assert_eq!(r.connective, Connective::And);
            assert!(r.antecedent.iter().all(|c| c.set != SetLabel::Bad));
            assert!(r.antecedent.iter().any(|c| c.set == SetLabel::Mid));
        }
        for (i, a) in normals.iter().enumerate() {
            for b in &normals[i + 1..] {
                assert_ne!(a.antecedent, b.antecedent);
            }
        }
    }
}
