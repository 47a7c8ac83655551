use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Real number extended by `±∞`, with `log 0 = −∞`, `exp(−∞) = 0`, `0·log 0 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn log(x: f64) -> Self {
        if x == 0.0 {
            ExtendedReal::NegInfinity
        } else {
            ExtendedReal::Finite(x.ln())
        }
    }

    pub fn exp(&self) -> f64 {
        match *self {
            ExtendedReal::NegInfinity => 0.0,
            ExtendedReal::Finite(x) => x.exp(),
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }

    /// `x log x` with `0 log 0 = 0`.
    pub fn x_log_x(x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            x * x.ln()
        }
    }

    /// Sum; `+∞ + −∞` is undefined and returns `None`.
    pub fn checked_add(self, other: Self) -> Option<Self> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
            (PosInfinity, NegInfinity) | (NegInfinity, PosInfinity) => None,
            (PosInfinity, _) | (_, PosInfinity) => Some(PosInfinity),
            _ => Some(NegInfinity),
        }
    }

    pub fn neg(self) -> Self {
        use ExtendedReal::*;
        match self {
            NegInfinity => PosInfinity,
            Finite(a) => Finite(-a),
            PosInfinity => NegInfinity,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Some(Ordering::Equal),
            (NegInfinity, _) | (_, PosInfinity) => Some(Ordering::Less),
            (PosInfinity, _) | (_, NegInfinity) => Some(Ordering::Greater),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInfinity => f.write_str("-inf"),
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            ExtendedReal::NegInfinity => s.serialize_str("-inf"),
            ExtendedReal::PosInfinity => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ExtendedReal::Finite(x)),
            Raw::Str(s) => match s.as_str() {
                "+inf" | "inf" => Ok(ExtendedReal::PosInfinity),
                "-inf" => Ok(ExtendedReal::NegInfinity),
                other => Err(serde::de::Error::custom(format!("invalid extended real `{other}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        assert_eq!(ExtendedReal::log(0.0), ExtendedReal::NegInfinity);
        assert_eq!(ExtendedReal::NegInfinity.exp(), 0.0);
        assert_eq!(ExtendedReal::x_log_x(0.0), 0.0);
        assert!(ExtendedReal::Finite(1e300) < ExtendedReal::PosInfinity);
        assert_eq!(ExtendedReal::PosInfinity.checked_add(ExtendedReal::NegInfinity), None);
    }

    #[test]
    fn json_round_trip() {
        for v in [ExtendedReal::Finite(0.25), ExtendedReal::PosInfinity, ExtendedReal::NegInfinity] {
            let s = serde_json::to_string(&v).unwrap();
            assert_eq!(serde_json::from_str::<ExtendedReal>(&s).unwrap(), v);
        }
    }
}
