//! Exact rational carrier for spectrum values and their differences.
//!
//! [`Rational`] is always stored reduced with a positive denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a p/q rational"));
    let (p, q) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(Error::Parse(format!("`{text}` has a zero denominator")));
    }
    Ok(Rational::new(p, q))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Simplest rational within `tol` of `x`, found by walking the continued
/// fraction expansion of `x` until a convergent lands inside the window.
pub fn nearest_rational(x: f64, tol: f64) -> Result<Rational> {
    if !x.is_finite() || tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "cannot approximate {x} with tolerance {tol}"
        )));
    }
    let exact = Rational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("{x}")))?;
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rem = exact.clone();
    loop {
        let a = rem.floor().to_integer();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let candidate = Rational::new(h.clone(), k.clone());
        let err = (&candidate - &exact).abs();
        if to_f64(&err) <= tol || err.is_zero() {
            return Ok(candidate);
        }
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            return Ok(candidate);
        }
        rem = frac.recip();
    }
}

/// Largest positive `g` such that every value is an integer multiple of `g`.
///
/// Uses gcd(p/q, r/s) = gcd(p·s, r·q)/(q·s), folded over the list.
pub fn rational_gcd<'a, I>(values: I) -> Result<Rational>
where
    I: IntoIterator<Item = &'a Rational>,
{
    let mut acc: Option<Rational> = None;
    for v in values {
        if !v.is_positive() {
            return Err(Error::InvalidInput(format!(
                "gcd input {} is not positive",
                format_rational(v)
            )));
        }
        acc = Some(match acc {
            None => v.clone(),
            Some(g) => gcd_pair(&g, v),
        });
    }
    acc.ok_or_else(|| Error::InvalidInput("gcd of an empty list".into()))
}

pub(crate) fn gcd_pair(a: &Rational, b: &Rational) -> Rational {
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    Rational::new(num, a.denom() * b.denom())
}

/// True when `value / unit` is an integer.
pub fn is_integer_multiple(value: &Rational, unit: &Rational) -> bool {
    !unit.is_zero() && (value / unit).is_integer()
}
