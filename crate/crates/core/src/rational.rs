//! Small rational helpers shared across modules.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponents, quadratic-form values and weights.
pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Reduce into `[0, 1)`.
pub fn mod1(x: Q) -> Q {
    x - Q::from_integer(x.floor().to_integer())
}

pub fn big(x: Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub fn big_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Converts an exact rational to a `Q`, failing if it does not fit.
pub fn small(x: &BigRational) -> Option<Q> {
    Some(Q::new(x.numer().to_i64()?, x.denom().to_i64()?))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// e(x) = exp(2 pi i x).
pub fn e(x: Q) -> Complex64 {
    let r = mod1(x);
    let t = 2.0 * std::f64::consts::PI * (*r.numer() as f64) / (*r.denom() as f64);
    Complex64::new(t.cos(), t.sin())
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn fmt_big(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn parse_big(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// via continued-fraction convergents and semiconvergents.
pub fn rationalize(x: f64, max_den: i64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let floor = x.floor();
    if floor.abs() > 9.0e15 {
        return None;
    }
    let base = floor as i64;
    let frac = x - floor;
    // convergents of frac in [0,1)
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, 0i64, 1i64);
    let mut y = frac;
    let mut best = Q::zero();
    let mut best_err = frac.abs();
    for _ in 0..64 {
        if y.abs() < 1e-300 {
            break;
        }
        let inv = 1.0 / y;
        if inv > 1e18 {
            break;
        }
        let a = inv.floor() as i64;
        y = inv - a as f64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den {
            // semiconvergent
            let k = (max_den - q0) / q1.max(1);
            if k > 0 {
                let (ps, qs) = (k * p1 + p0, k * q1 + q0);
                let err = (frac - ps as f64 / qs as f64).abs();
                if err < best_err {
                    best = Q::new(ps, qs);
                }
            }
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let err = (frac - p1 as f64 / q1 as f64).abs();
        if err < best_err {
            best_err = err;
            best = Q::new(p1, q1);
        }
        if err == 0.0 {
            break;
        }
    }
    Some(best + Q::from_integer(base))
}

pub fn is_half_integer(x: &Q) -> bool {
    (x * Q::from_integer(2)).is_integer()
}

pub fn abs_big(x: &BigRational) -> BigRational {
    x.abs()
}

pub fn one_big() -> BigRational {
    BigRational::one()
}
