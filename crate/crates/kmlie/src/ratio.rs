//! Exact rational scalars: construction, parsing, and the canonical
//! `"p/q"` string form used in all JSON output.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{KmError, Result};

/// The scalar type of the whole crate. No floating point anywhere.
pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Canonical string form: `"p"` when the denominator is 1, else `"p/q"`
/// with q > 0 and gcd(p,q) = 1. `BigRational` keeps that normal form.
pub fn rat_to_string(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `"p"` or `"p/q"`.
pub fn rat_from_str(s: &str) -> Result<Rat> {
    let s = s.trim();
    let mk_err = || KmError::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        None => {
            let p: BigInt = s.parse().map_err(|_| mk_err())?;
            Ok(Rat::from_integer(p))
        }
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| mk_err())?;
            let q: BigInt = q.trim().parse().map_err(|_| mk_err())?;
            if q.is_zero() {
                return Err(mk_err());
            }
            Ok(Rat::new(p, q))
        }
    }
}

/// t^n for nonzero t and possibly negative n.
pub fn rat_pow(t: &Rat, n: i64) -> Rat {
    if n >= 0 {
        num::pow::pow(t.clone(), n as usize)
    } else {
        num::pow::pow(t.recip(), (-n) as usize)
    }
}

pub fn is_zero(x: &Rat) -> bool {
    x.is_zero()
}

/// Factorial as a rational, for exponential series coefficients.
pub fn factorial(n: usize) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

#[allow(unused)]
pub fn rat_abs(x: &Rat) -> Rat {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_strings() {
        assert_eq!(rat_to_string(&rat(1, 2)), "1/2");
        assert_eq!(rat_to_string(&rat(-2, 4)), "-1/2");
        assert_eq!(rat_to_string(&rat_int(7)), "7");
        assert_eq!(rat_to_string(&rat(3, -6)), "-1/2");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["0", "5", "-3", "1/2", "-7/3"] {
            let x = rat_from_str(s).unwrap();
            assert_eq!(rat_to_string(&x), s);
        }
        assert!(rat_from_str("1/0").is_err());
        assert!(rat_from_str("abc").is_err());
    }

    #[test]
    fn powers() {
        assert_eq!(rat_pow(&rat(2, 3), -2), rat(9, 4));
        assert_eq!(rat_pow(&rat(2, 1), 3), rat_int(8));
        assert_eq!(rat_pow(&rat(5, 7), 0), rat_int(1));
    }
}
