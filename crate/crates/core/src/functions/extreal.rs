//! Extended reals `(-inf, +inf]` for convex potentials.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in `ℝ ∪ {+∞}`.
///
/// `+∞` sorts above every finite value and absorbs addition. `NaN` and `-∞`
/// cannot be constructed.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    /// Returns `None` for `NaN` or `-∞`.
    pub fn new(value: f64) -> Option<Self> {
        if value.is_nan() || value == f64::NEG_INFINITY {
            None
        } else {
            Some(ExtReal(value))
        }
    }

    /// Panics on `NaN` or `-∞`.
    pub fn finite(value: f64) -> Self {
        assert!(value.is_finite(), "expected a finite value, got {value}");
        ExtReal(value)
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        !self.0.is_finite()
    }

    /// Raw value; `+∞` maps to `f64::INFINITY`.
    pub fn get(self) -> f64 {
        self.0
    }

    /// `e^{-self}`, which is `0` at `+∞`.
    pub fn exp_neg(self) -> f64 {
        (-self.0).exp()
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_infinite() || rhs.is_infinite() {
            ExtReal::INFINITY
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl From<ExtReal> for f64 {
    fn from(v: ExtReal) -> f64 {
        v.0
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Serialized as a JSON number, or the string `"inf"` for `+∞`.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str(INF_TOKEN)
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Token {
            Num(f64),
            Str(String),
        }
        match Token::deserialize(deserializer)? {
            Token::Num(v) => ExtReal::new(v)
                .ok_or_else(|| serde::de::Error::custom("potential values must not be NaN or -inf")),
            Token::Str(s) if s == INF_TOKEN || s == "+inf" || s == "Infinity" => Ok(ExtReal::INFINITY),
            Token::Str(s) => Err(serde::de::Error::custom(format!("unknown token {s:?}"))),
        }
    }
}

pub const INF_TOKEN: &str = "inf";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_and_dominates() {
        let a = ExtReal::finite(3.0);
        assert_eq!(a + ExtReal::INFINITY, ExtReal::INFINITY);
        assert!(ExtReal::INFINITY > ExtReal::finite(1e300));
        assert_eq!((a + ExtReal::finite(1.5)).get(), 4.5);
        assert_eq!(ExtReal::INFINITY.exp_neg(), 0.0);
    }

    #[test]
    fn rejects_nan_and_negative_infinity() {
        assert!(ExtReal::new(f64::NAN).is_none());
        assert!(ExtReal::new(f64::NEG_INFINITY).is_none());
        assert!(ExtReal::new(f64::INFINITY).is_some());
    }

    #[test]
    fn json_token() {
        let v = vec![ExtReal::finite(0.5), ExtReal::INFINITY];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[0.5,"inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExtReal>(r#""-inf""#).is_err());
    }
}
