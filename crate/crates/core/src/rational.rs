//! Exact rational payoffs and their textual form.
//!
//! Every payoff, regret and threshold in the crate is a [`Rational`]. The
//! textual form is `"p/q"` (or `"p"` when the denominator is one), which is
//! what `Display` on [`num_rational::Ratio`] produces.

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rational = num_rational::Ratio<i64>;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Parses `"p/q"`, `"p"`, or surrounding whitespace thereof.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
            let d: i64 = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
            if d == 0 {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Rational::new(n, d)
        }
        None => Rational::from_integer(
            s.parse()
                .map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?,
        ),
    };
    Ok(parsed)
}

/// Reads a rational from a JSON integer or a `"p/q"` string.
pub fn from_json(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(Rational::from_integer).ok_or_else(|| {
            Error::Parse(format!(
                "payoff {n} is not an integer; use a \"p/q\" string"
            ))
        }),
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected rational, found {other}"))),
    }
}

/// Integers become JSON numbers, everything else a `"p/q"` string.
pub fn to_json(r: &Rational) -> serde_json::Value {
    if r.is_integer() {
        serde_json::Value::from(*r.numer())
    } else {
        serde_json::Value::String(r.to_string())
    }
}

/// Smallest integer not below `r`.
pub fn ceil_int(r: &Rational) -> i64 {
    r.ceil().to_integer()
}

/// Least common multiple of all denominators, checked against `i64` overflow.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Result<i128> {
    let mut acc: i128 = 1;
    for v in values {
        let d = *v.denom() as i128;
        if acc % d != 0 {
            acc = acc
                .checked_mul(d / acc.gcd(&d))
                .filter(|a| *a <= i64::MAX as i128)
                .ok_or_else(|| Error::Overflow("common payoff denominator".into()))?;
        }
    }
    Ok(acc)
}

/// Numerator of `r` over the common denominator `den` (which `r.denom()` divides).
pub fn scaled(r: &Rational, den: i128) -> i128 {
    *r.numer() as i128 * (den / *r.denom() as i128)
}

/// Inverse of [`scaled`].
pub fn unscale(v: i128, den: i128) -> Result<Rational> {
    let g = v.abs().gcd(&den).max(1);
    let (n, d) = (v / g, den / g);
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(n), Ok(d)) => Ok(Rational::new_raw(n, d)),
        _ => Err(Error::Overflow(format!(
            "{v}/{den} does not fit in 64 bits"
        ))),
    }
}

/// Serde adapter writing a rational as its `"p/q"` string.
pub mod as_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_json(&v).map_err(serde::de::Error::custom)
    }
}

pub mod opt_as_string {
    use super::*;

    pub fn serialize<S: Serializer>(
        r: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.collect_str(r),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        let v = Option::<serde_json::Value>::deserialize(d)?;
        v.map(|v| from_json(&v).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod vec_as_string {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter()
            .map(|v| from_json(v).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!(parse_rational("3/10").unwrap(), ratio(3, 10));
        assert_eq!(parse_rational(" -4 ").unwrap(), int(-4));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn ceiling() {
        assert_eq!(ceil_int(&ratio(5, 2)), 3);
        assert_eq!(ceil_int(&int(2)), 2);
        assert_eq!(ceil_int(&ratio(-1, 2)), 0);
    }

    #[test]
    fn scaling_round_trips() {
        let vals = [ratio(1, 10), ratio(1, 4), int(3)];
        let d = common_denominator(&vals).unwrap();
        assert_eq!(d, 20);
        for v in &vals {
            assert_eq!(unscale(scaled(v, d), d).unwrap(), *v);
        }
    }
}
