//! The exponent `p ∈ [1, ∞]` and the normalized power mean shared by `ρ_{F,p}` and `ρ_p`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Aggregation exponent `p` with `1 ≤ p ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(PExponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(PExponent::Infinity)
        } else {
            Err(Error::invalid(format!("exponent p must satisfy 1 <= p <= inf, got {p}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PExponent::Infinity)
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            PExponent::Finite(p) => 1.0 / p,
            PExponent::Infinity => 0.0,
        }
    }

    /// Aggregates `n` nonnegative terms `term(0..n)`.
    ///
    /// Finite exponents are evaluated as `m · (1/n Σ (x/m)^p)^{1/p}` with `m` the
    /// largest term, so every result is at most the `p = ∞` value bit for bit.
    pub fn mean_by(self, n: usize, term: impl Fn(usize) -> f64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let m = (0..n).map(&term).fold(0.0_f64, f64::max);
        match self {
            PExponent::Infinity => m,
            PExponent::Finite(_) if m == 0.0 => 0.0,
            PExponent::Finite(p) => {
                let sum: f64 = if p == 1.0 {
                    (0..n).map(|i| term(i) / m).sum()
                } else if p == 2.0 {
                    (0..n).map(|i| (term(i) / m) * (term(i) / m)).sum()
                } else {
                    (0..n).map(|i| (term(i) / m).powf(p)).sum()
                };
                let mean = (sum / n as f64).min(1.0);
                let root = if p == 1.0 {
                    mean
                } else if p == 2.0 {
                    mean.sqrt()
                } else {
                    mean.powf(1.0 / p)
                };
                m * root
            }
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for PExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(PExponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("cannot parse exponent `{s}`")))
                .and_then(PExponent::finite),
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PExponent::Finite(p) => serializer.serialize_f64(*p),
            PExponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(p) => PExponent::finite(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_terms_do_not_exceed_the_maximum() {
        // 0.1 + 0.1 + 0.1 overshoots 0.3 in binary; normalization keeps the mean exact.
        for p in [1.0, 2.0, 5.0] {
            let v = PExponent::Finite(p).mean_by(3, |_| 0.1);
            assert_eq!(v, 0.1);
        }
    }

    #[test]
    fn two_point_values() {
        let terms = [0.0, 1.0];
        let at = |p: PExponent| p.mean_by(2, |i| terms[i]);
        assert_eq!(at(PExponent::Finite(1.0)), 0.5);
        assert!((at(PExponent::Finite(2.0)) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(at(PExponent::Infinity), 1.0);
    }

    #[test]
    fn parse_and_reject() {
        assert_eq!("inf".parse::<PExponent>().unwrap(), PExponent::Infinity);
        assert_eq!("2".parse::<PExponent>().unwrap(), PExponent::Finite(2.0));
        assert!("0.5".parse::<PExponent>().is_err());
        let p: PExponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(p.is_infinite());
        let q: PExponent = serde_json::from_str("5").unwrap();
        assert_eq!(q, PExponent::Finite(5.0));
    }
}
