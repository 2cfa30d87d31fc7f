//! Exact rational helpers.
//!
//! Every quantity the protocols compare against a fairness threshold is an
//! arbitrary-precision rational; floating point appears only in derived
//! statistical constants (logarithms, probability floors).

use std::str::FromStr;

use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::Error;

pub type Rational = RBig;
pub type Integer = IBig;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    ratio(IBig::from(num), IBig::from(den))
}

/// `num / den` for big integers. Panics on a zero denominator.
pub fn ratio(num: IBig, den: IBig) -> Rational {
    RBig::from_parts_signed(num, den)
}

pub fn int(v: i64) -> Rational {
    RBig::from(IBig::from(v))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^-k`.
pub fn half_pow(k: u32) -> Rational {
    RBig::from_parts(IBig::ONE, UBig::ONE << k as usize)
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.125"` or `"-3.5"`.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let parse_int = |t: &str| {
        let t = t.trim();
        let t = t.strip_prefix('+').unwrap_or(t);
        IBig::from_str(t).map_err(|_| bad())
    };
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_int(num)?;
        let den = parse_int(den)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(ratio(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !digits.chars().all(|c| c.is_ascii_digit())
            || (digits.is_empty() && frac.is_empty())
        {
            return Err(bad());
        }
        let whole = if digits.is_empty() { IBig::ZERO } else { parse_int(digits)? };
        let scale = IBig::from(10u8).pow(frac.len());
        let frac = if frac.is_empty() { IBig::ZERO } else { parse_int(frac)? };
        let mag = ratio(whole * &scale + frac, scale);
        return Ok(if negative { -mag } else { mag });
    }
    parse_int(s).map(RBig::from)
}

/// Canonical text form: `"p/q"` in lowest terms, or a bare integer.
pub fn format_rational(r: &Rational) -> String {
    if r.denominator().is_one() {
        r.numerator().to_string()
    } else {
        format!("{}/{}", r.numerator(), r.denominator())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().value()
}

pub fn ceil_to_u64(r: &Rational) -> u64 {
    u64::try_from(r.ceil()).expect("ceiling does not fit in u64")
}

pub fn floor_to_u64(r: &Rational) -> u64 {
    u64::try_from(r.floor()).expect("floor does not fit in u64")
}

/// A twelve-digit decimal truncation of 1/e; it lies strictly below 1/e.
pub fn inv_e_lower() -> Rational {
    rat(36_787_944_117, 100_000_000_000)
}

/// Serde adapter storing a rational as its canonical string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = RawRational::deserialize(d)?;
        raw.into_rational().map_err(serde::de::Error::custom)
    }

    /// Accepts JSON strings as well as bare numbers.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RawRational {
        Text(String),
        Int(i64),
        Float(f64),
    }

    impl RawRational {
        pub(crate) fn into_rational(self) -> Result<Rational, Error> {
            match self {
                RawRational::Text(s) => parse_rational(&s),
                RawRational::Int(v) => Ok(int(v)),
                // Shortest round-trip decimal form, so 0.1 reads as 1/10.
                RawRational::Float(v) => parse_rational(&format!("{v}")),
            }
        }
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_rational_vec {
    use super::serde_rational::RawRational;
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<RawRational>::deserialize(d)?;
        raw.into_iter()
            .map(|r| r.into_rational().map_err(serde::de::Error::custom))
            .collect()
    }
}
