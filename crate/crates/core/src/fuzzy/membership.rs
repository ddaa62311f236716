use serde::{Deserialize, Serialize};

use super::FuzzyError;
use crate::Scalar;

/// Which of the three linguistic sets a trapezoid represents.
///
/// GOOD is the low/fast/rich set, MID the normal/medium/standard set and
/// BAD the high/slow/poor set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SetLabel {
    Good,
    Mid,
    Bad,
}

impl SetLabel {
    pub const ALL: [SetLabel; 3] = [SetLabel::Good, SetLabel::Mid, SetLabel::Bad];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            SetLabel::Good => 0,
            SetLabel::Mid => 1,
            SetLabel::Bad => 2,
        }
    }
}

/// Membership degrees of one crisp input, indexed by [`SetLabel::index`].
pub type Memberships<T> = [T; 3];

/// Trapezoid over the percent scale with breakpoints `a <= b <= c <= d`.
///
/// The label selects the evaluation rule: GOOD is a left shoulder (only `c`
/// and `d` matter), BAD a right shoulder (only `a` and `b` matter) and MID the
/// full trapezoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidSet<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub label: SetLabel,
}

impl<T: Scalar> TrapezoidSet<T> {
    pub fn new(a: T, b: T, c: T, d: T, label: SetLabel) -> Result<Self, FuzzyError> {
        let lo = T::zero();
        let hi = T::lit(100.0);
        let ordered = a <= b && b <= c && c <= d;
        let bounded = a >= lo && d <= hi;
        if !ordered || !bounded {
            return Err(FuzzyError::InvalidBreakpoints {
                a: a.as_f64(),
                b: b.as_f64(),
                c: c.as_f64(),
                d: d.as_f64(),
            });
        }
        Ok(Self { a, b, c, d, label })
    }

    /// Default GOOD set: plateau until 30, zero from 50.
    pub fn default_good() -> Self {
        Self::from_f64(0.0, 0.0, 30.0, 50.0, SetLabel::Good)
    }

    /// Default MID set: rises 30..50, plateau 50..70, falls 70..90.
    pub fn default_mid() -> Self {
        Self::from_f64(30.0, 50.0, 70.0, 90.0, SetLabel::Mid)
    }

    /// Default BAD set: rises 70..90, plateau 90..100.
    pub fn default_bad() -> Self {
        Self::from_f64(70.0, 90.0, 100.0, 100.0, SetLabel::Bad)
    }

    pub(crate) fn from_f64(a: f64, b: f64, c: f64, d: f64, label: SetLabel) -> Self {
        Self {
            a: T::lit(a),
            b: T::lit(b),
            c: T::lit(c),
            d: T::lit(d),
            label,
        }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        membership(self, x)
    }
}

/// Maps a raw reading in `[alpha, beta]` onto `[0, 1]`.
pub fn normalize<T: Scalar>(raw: T, alpha: T, beta: T) -> Result<T, FuzzyError> {
    if !(beta > alpha) {
        return Err(FuzzyError::InvalidRange {
            alpha: alpha.as_f64(),
            beta: beta.as_f64(),
        });
    }
    if !(raw >= alpha && raw <= beta) {
        return Err(FuzzyError::OutOfRange {
            param: "raw",
            value: raw.as_f64(),
            lo: alpha.as_f64(),
            hi: beta.as_f64(),
        });
    }
    Ok((raw - alpha) / (beta - alpha))
}

#[inline]
fn falling<T: Scalar>(x: T, c: T, d: T) -> T {
    if x < c {
        T::one()
    } else if x > d {
        T::zero()
    } else if d == c {
        // Vertical edge: x == c == d sits on the plateau.
        T::one()
    } else {
        (d - x) / (d - c)
    }
}

#[inline]
fn rising<T: Scalar>(x: T, a: T, b: T) -> T {
    if x < a {
        T::zero()
    } else if x > b || b == a {
        // Past the edge, or on a vertical one.
        T::one()
    } else {
        (x - a) / (b - a)
    }
}

/// Degree of membership of `x` (percent) in `set`.
#[inline]
pub fn membership<T: Scalar>(set: &TrapezoidSet<T>, x: T) -> T {
    match set.label {
        SetLabel::Good => falling(x, set.c, set.d),
        SetLabel::Bad => rising(x, set.a, set.b),
        SetLabel::Mid => {
            if x < set.a || x > set.d {
                T::zero()
            } else if x < set.b {
                rising(x, set.a, set.b)
            } else if x <= set.c {
                T::one()
            } else {
                falling(x, set.c, set.d)
            }
        }
    }
}
