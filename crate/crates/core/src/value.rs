//! Criterion values on the extended real line.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A criterion value that may diverge. Divergences are results, not
/// overflow: `-inf` marks an absorbing bankruptcy, `+inf` an unbounded
/// expectation, and `Indeterminate` the form `-inf + inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInf,
    NegInf,
    Indeterminate,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Plain `f64` view; `Indeterminate` maps to NaN.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(x) => x,
            Extended::PosInf => f64::INFINITY,
            Extended::NegInf => f64::NEG_INFINITY,
            Extended::Indeterminate => f64::NAN,
        }
    }

    /// Ordering used for ranking: `-inf` below every finite value, `+inf`
    /// above. `Indeterminate` is unordered.
    pub fn partial_cmp_value(&self, other: &Self) -> Option<Ordering> {
        if matches!(self, Extended::Indeterminate) || matches!(other, Extended::Indeterminate) {
            return None;
        }
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl From<f64> for Extended {
    fn from(x: f64) -> Self {
        if x.is_nan() {
            Extended::Indeterminate
        } else if x == f64::INFINITY {
            Extended::PosInf
        } else if x == f64::NEG_INFINITY {
            Extended::NegInf
        } else {
            Extended::Finite(x)
        }
    }
}

impl Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Extended) -> Extended {
        use Extended::*;
        match (self, rhs) {
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            (PosInf, NegInf) | (NegInf, PosInf) => Indeterminate,
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Finite(a), Finite(b)) => Extended::from(a + b),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => f.write_str(&crate::io::render::number(*x)),
            Extended::PosInf => f.write_str("inf"),
            Extended::NegInf => f.write_str("-inf"),
            Extended::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

/// Stable ranking, best first. Values within `1e-12` of each other keep
/// their input order; `-inf` ranks last and `Indeterminate` after that.
pub fn rank(values: &[Extended]) -> Vec<usize> {
    const TIE: f64 = 1e-12;
    let key = |v: Extended| match v {
        Extended::Indeterminate => None,
        other => Some(other.to_f64()),
    };
    let mut order: Vec<usize> = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let pos = match key(v) {
            None => order.len(),
            Some(x) => order
                .iter()
                .position(|&j| match key(values[j]) {
                    None => true,
                    Some(y) => x - y > TIE,
                })
                .unwrap_or(order.len()),
        };
        order.insert(pos, i);
    }
    order
}
