//! Exact rational scalars.
//!
//! [`Rat`] is an arbitrary-precision rational kept in lowest terms with a
//! positive denominator (the representation `num-rational` maintains
//! canonically). Serialization is the string `"num/den"`, abbreviated to
//! `"num"` when the denominator is one.

use crate::error::Error;
use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rat = num_rational::BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `n/d`, reduced. Panics on `d == 0`.
pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical string form: `"3"`, `"-3"`, `"3/4"`.
pub fn rat_to_string(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `"3"`, `"-3/4"`, `"+5/10"` (reduced on construction).
pub fn rat_from_str(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = |_| Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        None => Ok(Rat::from_integer(BigInt::from_str(s).map_err(bad)?)),
        Some((n, d)) => {
            let num = BigInt::from_str(n.trim()).map_err(bad)?;
            let den = BigInt::from_str(d.trim()).map_err(bad)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Natural log of a positive rational, robust to magnitudes far outside the
/// `f64` range (uses bit-length scaling of numerator and denominator).
pub fn ln_rat(x: &Rat) -> f64 {
    assert!(x.is_positive(), "ln of non-positive rational");
    ln_big(x.numer()) - ln_big(x.denom())
}

fn ln_big(n: &BigInt) -> f64 {
    debug_assert!(n.sign() == Sign::Plus);
    let bits = n.bits();
    if bits <= 52 {
        return n.to_f64().unwrap().ln();
    }
    // n = m * 2^shift with m holding the top 52 bits.
    let shift = bits - 52;
    let m = (n >> shift).to_f64().unwrap();
    m.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Best rational approximation to `x` with denominator at most `max_den`,
/// by continued fractions.
pub fn rationalize(x: f64, max_den: u64) -> Rat {
    assert!(max_den >= 1);
    if !x.is_finite() {
        return Rat::zero();
    }
    let neg = x < 0.0;
    let mut x = x.abs();
    // convergents p/q
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let cap = BigInt::from(max_den);
    for _ in 0..64 {
        let a = x.floor();
        let ab = BigInt::from(a as i128);
        let p2 = &ab * &p1 + &p0;
        let q2 = &ab * &q1 + &q0;
        if q2 > cap {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let fract = x - a;
        if fract < 1e-15 {
            break;
        }
        x = 1.0 / fract;
        if !x.is_finite() {
            break;
        }
    }
    if q1.is_zero() {
        return Rat::zero();
    }
    let r = Rat::new(p1, q1);
    if neg {
        -r
    } else {
        r
    }
}

/// Serde helpers: a `Rat` as the canonical string.
pub mod serde_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&rat_to_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        rat_from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde helpers for `Vec<Rat>`.
pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rat], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(xs.iter().map(rat_to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rat>, D::Error> {
        let ss = Vec::<String>::deserialize(de)?;
        ss.iter()
            .map(|s| rat_from_str(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
