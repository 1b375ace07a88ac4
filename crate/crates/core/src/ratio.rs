//! Exact rational helpers and the `"p/q"` string encoding used in every
//! serialized output.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Ratio = BigRational;

pub fn ratio(n: u64, d: u64) -> Ratio {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_uint(n: &BigUint) -> Ratio {
    Ratio::from_integer(BigInt::from(n.clone()))
}

/// Encode as `"p/q"` (always with an explicit denominator).
pub fn to_string(r: &Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Ratio> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a fraction: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10u32), frac.len());
        let r = Ratio::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(p))
}

/// Float value of a rational whose numerator and denominator may both be
/// far outside `f64` range.
pub fn to_f64(r: &Ratio) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let ln = ln_uint(r.numer().magnitude()) - ln_uint(r.denom().magnitude());
    sign * ln.exp()
}

/// Natural logarithm of an arbitrary-size positive integer.
pub fn ln_uint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map_or(f64::NEG_INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(0.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn log2_uint(n: &BigUint) -> f64 {
    ln_uint(n) / std::f64::consts::LN_2
}

/// `log2` of a positive rational, robust to huge numerators/denominators.
pub fn log2(r: &Ratio) -> f64 {
    log2_uint(r.numer().magnitude()) - log2_uint(r.denom().magnitude())
}

pub fn is_unit_interval(r: &Ratio) -> bool {
    !r.is_negative() && *r <= Ratio::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_decimal() {
        assert_eq!(parse("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("3").unwrap(), ratio(3, 1));
        assert!(parse("1/0").is_err());
        assert!(parse("a/b").is_err());
    }

    #[test]
    fn string_encoding_keeps_denominator() {
        assert_eq!(to_string(&ratio(6, 3)), "2/1");
        assert_eq!(to_string(&ratio(6, 7)), "6/7");
    }

    #[test]
    fn huge_ln() {
        let n = BigUint::one() << 5000u32;
        assert!((log2_uint(&n) - 5000.0).abs() < 1e-9);
        let r = Ratio::new(BigInt::from(n.clone()) * 3, BigInt::from(n));
        assert!((to_f64(&r) - 3.0).abs() < 1e-12);
    }
}
