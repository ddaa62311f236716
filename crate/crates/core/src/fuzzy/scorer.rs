use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{
    build_rule_base, defuzzify, infer, Activation, FuzzyError, Memberships, RuleBase, SetLabel,
    TrapezoidSet,
};
use crate::Scalar;

pub const MRP_INPUTS: [&str; 3] = ["mobility", "response", "power"];
pub const CPMNR_INPUTS: [&str; 5] = ["cpu", "power", "mobility", "network", "response"];

/// A named input with its three sets and the raw range `[alpha, beta]`
/// that maps onto `[0, 100]` percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyVariable<T> {
    pub name: String,
    pub good: TrapezoidSet<T>,
    pub mid: TrapezoidSet<T>,
    pub bad: TrapezoidSet<T>,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> FuzzyVariable<T> {
    /// Default breakpoints (GOOD 0-30-50, MID 30-50-70-90, BAD 70-90-100)
    /// over raw readings already expressed in percent.
    pub fn with_defaults(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            good: TrapezoidSet::default_good(),
            mid: TrapezoidSet::default_mid(),
            bad: TrapezoidSet::default_bad(),
            alpha: T::zero(),
            beta: T::lit(100.0),
        }
    }

    pub fn set(&self, label: SetLabel) -> &TrapezoidSet<T> {
        match label {
            SetLabel::Good => &self.good,
            SetLabel::Mid => &self.mid,
            SetLabel::Bad => &self.bad,
        }
    }

    /// Raw reading to percent. Readings that fall outside `[alpha, beta]`
    /// are clamped to the scale ends and logged.
    pub fn percent(&self, raw: T) -> Result<T, FuzzyError> {
        if !(self.beta > self.alpha) {
            return Err(FuzzyError::InvalidRange {
                alpha: self.alpha.as_f64(),
                beta: self.beta.as_f64(),
            });
        }
        if raw.is_nan() {
            return Err(FuzzyError::OutOfRange {
                param: "raw",
                value: f64::NAN,
                lo: self.alpha.as_f64(),
                hi: self.beta.as_f64(),
            });
        }
        let hundred = T::lit(100.0);
        let pct = (raw - self.alpha) / (self.beta - self.alpha) * hundred;
        if pct < T::zero() || pct > hundred {
            warn!(
                "{} reading {} outside [{}, {}]; clamped",
                self.name, raw, self.alpha, self.beta
            );
            return Ok(pct.max(T::zero()).min(hundred));
        }
        Ok(pct)
    }

    pub fn fuzzify(&self, raw: T) -> Result<Memberships<T>, FuzzyError> {
        let x = self.percent(raw)?;
        Ok([self.good.eval(x), self.mid.eval(x), self.bad.eval(x)])
    }
}

/// Output sets and the crisp representative used for each during
/// defuzzification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputVariable<T> {
    pub low: TrapezoidSet<T>,
    pub normal: TrapezoidSet<T>,
    pub high: TrapezoidSet<T>,
    /// Centers for LOW, NORMAL, HIGH, strictly increasing.
    pub centers: [T; 3],
}

impl<T: Scalar> Default for OutputVariable<T> {
    /// Zones 0-50 / 50-80 / 80-100 with centers at their midpoints 25 / 65 / 90.
    fn default() -> Self {
        Self {
            low: TrapezoidSet::from_f64(0.0, 0.0, 50.0, 50.0, SetLabel::Good),
            normal: TrapezoidSet::from_f64(50.0, 50.0, 80.0, 80.0, SetLabel::Mid),
            high: TrapezoidSet::from_f64(80.0, 80.0, 100.0, 100.0, SetLabel::Bad),
            centers: [T::lit(25.0), T::lit(65.0), T::lit(90.0)],
        }
    }
}

impl<T: Scalar> OutputVariable<T> {
    pub fn with_centers(low: T, normal: T, high: T) -> Result<Self, FuzzyError> {
        if !(low < normal && normal < high) {
            return Err(FuzzyError::InvalidBreakpoints {
                a: low.as_f64(),
                b: normal.as_f64(),
                c: normal.as_f64(),
                d: high.as_f64(),
            });
        }
        Ok(Self {
            centers: [low, normal, high],
            ..Self::default()
        })
    }
}

/// One complete fuzzy scorer: inputs, rule base and output variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorer<T> {
    pub name: String,
    pub inputs: Vec<FuzzyVariable<T>>,
    pub rules: RuleBase,
    pub output: OutputVariable<T>,
}

const MAX_INPUTS: usize = 16;

impl<T: Scalar> Scorer<T> {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<FuzzyVariable<T>>,
        output: OutputVariable<T>,
    ) -> Result<Self, FuzzyError> {
        let rules = build_rule_base(inputs.len())?;
        Ok(Self {
            name: name.into(),
            inputs,
            rules,
            output,
        })
    }

    fn with_default_inputs(name: &str, names: &[&str]) -> Self {
        let inputs = names
            .iter()
            .map(|n| FuzzyVariable::with_defaults(*n))
            .collect();
        Self::new(name, inputs, OutputVariable::default()).expect("default arity is valid")
    }

    /// Unpredicted-failure scorer over mobility, response time and power.
    pub fn mrp() -> Self {
        Self::with_default_inputs("mrp", &MRP_INPUTS)
    }

    /// Predicted-failure scorer over CPU, power, mobility, network and
    /// response time.
    pub fn cpmnr() -> Self {
        Self::with_default_inputs("cpmnr", &CPMNR_INPUTS)
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    /// Rule activations for raw readings given in input order.
    pub fn activation(&self, raw: &[T]) -> Result<Activation<T>, FuzzyError> {
        if raw.len() != self.inputs.len() {
            return Err(FuzzyError::InputCount {
                expected: self.inputs.len(),
                got: raw.len(),
            });
        }
        let mut buf = [[T::zero(); 3]; MAX_INPUTS];
        for ((slot, var), &x) in buf.iter_mut().zip(&self.inputs).zip(raw) {
            *slot = var.fuzzify(x)?;
        }
        Ok(infer(&self.rules, &buf[..self.inputs.len()]))
    }

    /// Rule activations for readings keyed by variable name.
    pub fn activation_named(
        &self,
        inputs: &BTreeMap<String, T>,
    ) -> Result<Activation<T>, FuzzyError> {
        let raw = self
            .inputs
            .iter()
            .map(|v| {
                inputs
                    .get(&v.name)
                    .copied()
                    .ok_or_else(|| FuzzyError::MissingInput(v.name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.activation(&raw)
    }

    pub fn score(&self, raw: &[T]) -> Result<T, FuzzyError> {
        let act = self.activation(raw)?;
        defuzzify(&act, &self.output.centers)
    }
}

/// The two scorers consulted by the failure policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerPair<T> {
    pub mrp: Scorer<T>,
    pub cpmnr: Scorer<T>,
}

impl<T: Scalar> Default for ScorerPair<T> {
    fn default() -> Self {
        Self {
            mrp: Scorer::mrp(),
            cpmnr: Scorer::cpmnr(),
        }
    }
}

impl<T: Scalar> ScorerPair<T> {
    pub fn mrp_score(&self, mobility: T, response: T, power: T) -> Result<T, FuzzyError> {
        self.mrp.score(&[mobility, response, power])
    }

    pub fn cpmnr_score(
        &self,
        cpu: T,
        power: T,
        mobility: T,
        network: T,
        response: T,
    ) -> Result<T, FuzzyError> {
        self.cpmnr.score(&[cpu, power, mobility, network, response])
    }
}

/// Unpredicted-failure score with default sets.
pub fn mrp_score<T: Scalar>(mobility: T, response: T, power: T) -> Result<T, FuzzyError> {
    Scorer::mrp().score(&[mobility, response, power])
}

/// Predicted-failure score with default sets.
pub fn cpmnr_score<T: Scalar>(
    cpu: T,
    power: T,
    mobility: T,
    network: T,
    response: T,
) -> Result<T, FuzzyError> {
    Scorer::cpmnr().score(&[cpu, power, mobility, network, response])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mrp_examples() {
        let s = Scorer::<f64>::mrp();
        assert_eq!(
            s.activation(&[10.0, 10.0, 10.0]).unwrap(),
            Activation::new(1.0, 0.0, 0.0)
        );
        assert_eq!(
            s.activation(&[40.0, 20.0, 20.0]).unwrap(),
            Activation::new(0.5, 0.5, 0.0)
        );
        assert_eq!(
            s.activation(&[80.0, 20.0, 20.0]).unwrap(),
            Activation::new(0.0, 0.5, 0.5)
        );
        assert_eq!(mrp_score(10.0, 10.0, 10.0).unwrap(), 25.0);
        assert_eq!(mrp_score(40.0, 20.0, 20.0).unwrap(), 45.0);
        assert_eq!(mrp_score(80.0, 20.0, 20.0).unwrap(), 77.5);
    }

    #[test]
    fn cpmnr_examples() {
        assert_eq!(cpmnr_score(10.0, 10.0, 10.0, 10.0, 10.0).unwrap(), 25.0);
        // 85 is 0.75 BAD and 0.25 MID, so the all-MID NORMAL rule fires too.
        assert_eq!(cpmnr_score(85.0, 85.0, 85.0, 85.0, 85.0).unwrap(), 83.75);
        assert_eq!(cpmnr_score(95.0, 95.0, 95.0, 95.0, 95.0).unwrap(), 90.0);
        // cpu fully in MID, everything else fully GOOD: only the NORMAL rule
        // with cpu in MID fires.
        assert_eq!(cpmnr_score(60.0, 10.0, 10.0, 10.0, 10.0).unwrap(), 65.0);
    }

    #[test]
    fn f32_agrees() {
        assert_eq!(mrp_score(80.0_f32, 20.0, 20.0).unwrap(), 77.5_f32);
    }

    #[test]
    fn named_inputs() {
        let s = Scorer::<f64>::mrp();
        let mut m = BTreeMap::new();
        m.insert("mobility".to_string(), 40.0);
        m.insert("response".to_string(), 20.0);
        assert_eq!(
            s.activation_named(&m),
            Err(FuzzyError::MissingInput("power".into()))
        );
        m.insert("power".to_string(), 20.0);
        assert_eq!(
            s.activation_named(&m).unwrap(),
            Activation::new(0.5, 0.5, 0.0)
        );
    }

    #[test]
    fn out_of_scale_readings_clamp() {
        let s = Scorer::<f64>::mrp();
        assert_eq!(s.score(&[120.0, 10.0, 10.0]).unwrap(), 90.0);
        assert_eq!(s.score(&[-5.0, 10.0, 10.0]).unwrap(), 25.0);
        assert!(s.score(&[f64::NAN, 10.0, 10.0]).is_err());
    }

    #[test]
    fn input_count_checked() {
        let s = Scorer::<f64>::cpmnr();
        assert_eq!(
            s.score(&[1.0, 2.0]),
            Err(FuzzyError::InputCount {
                expected: 5,
                got: 2
            })
        );
    }

    #[test]
    fn custom_centers_must_increase() {
        assert!(OutputVariable::<f64>::with_centers(30.0, 20.0, 90.0).is_err());
        let out = OutputVariable::<f64>::with_centers(20.0, 60.0, 95.0).unwrap();
        assert_eq!(out.centers, [20.0, 60.0, 95.0]);
    }
}
