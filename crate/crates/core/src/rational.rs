//! Exact rational scalars and their canonical text form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn half() -> Rational {
    rat(1, 2)
}

/// `"p/q"` with `q > 0` in lowest terms, or just `"p"` for integers.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rational::new(n, d))
    } else if let Ok(n) = t.parse::<BigInt>() {
        Ok(Rational::from_integer(n))
    } else if let Some((a, b)) = t.split_once('.') {
        // terminating decimals are exact
        let neg = a.starts_with('-');
        let a = a.trim_start_matches('-');
        if b.is_empty() || !b.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: BigInt = if a.is_empty() { BigInt::zero() } else { a.parse().map_err(|_| bad())? };
        let frac: BigInt = b.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), b.len());
        let v = Rational::new(whole * &scale + frac, scale);
        Ok(if neg { -v } else { v })
    } else {
        Err(bad())
    }
}

/// Accepts a JSON string or an integer/decimal number.
pub fn from_json(v: &serde_json::Value) -> Result<Rational, Error> {
    match v {
        serde_json::Value::String(s) => parse(s),
        serde_json::Value::Number(n) => parse(&n.to_string()),
        _ => Err(Error::Parse(format!("expected a rational, got {v}"))),
    }
}

pub fn to_json(r: &Rational) -> serde_json::Value {
    serde_json::Value::String(format(r))
}

pub fn floor_i64(r: &Rational) -> i64 {
    r.floor().to_integer().to_i64().expect("integer part overflows i64")
}

pub fn ceil_i64(r: &Rational) -> i64 {
    r.ceil().to_integer().to_i64().expect("integer part overflows i64")
}

/// Remainder of `y` modulo `m > 0`, in `[0, m)`.
pub fn rem_euclid(y: &Rational, m: &Rational) -> Rational {
    y - (y / m).floor() * m
}

pub fn lcm_of_denominators<'a>(it: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    it.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text() {
        assert_eq!(format(&rat(6, -4)), "-3/2");
        assert_eq!(format(&rat(4, 2)), "2");
        assert_eq!(format(&int(0)), "0");
        assert_eq!(parse("-3/2").unwrap(), rat(-3, 2));
        assert_eq!(parse("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse("-1.5").unwrap(), rat(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("pi").is_err());
    }

    #[test]
    fn remainder() {
        assert_eq!(rem_euclid(&int(-3), &int(2)), int(1));
        assert_eq!(rem_euclid(&rat(7, 2), &int(2)), rat(3, 2));
        assert_eq!(rem_euclid(&int(4), &int(2)), int(0));
    }
}
