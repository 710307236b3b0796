//! Exact rational arithmetic and the extended-real budget value.
//!
//! Probabilities are kept as arbitrary-precision rationals end to end;
//! logarithms are applied only when a value is rendered or converted to a
//! float. Budget values of the form `ln(arg)/divisor` keep `arg` symbolic so
//! that comparisons against closed-form bounds stay exact.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Shorthand constructor from signed integers. Panics on zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_zero() -> Rational {
    Rational::zero()
}

pub fn rat_one() -> Rational {
    Rational::one()
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rat_pow(r: &Rational, exp: u32) -> Rational {
    Rational::new(
        num_traits::pow(r.numer().clone(), exp as usize),
        num_traits::pow(r.denom().clone(), exp as usize),
    )
}

/// Natural log of a positive rational, robust to arguments whose float
/// conversion would overflow.
pub fn ln_rational(r: &Rational) -> f64 {
    assert!(r.is_positive(), "ln of non-positive rational");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1023 {
        n.to_f64().expect("positive bigint fits f64 range").ln()
    } else {
        // ln(m · 2^s) = ln m + s ln 2 for the top 64 bits m.
        let shift = bits - 64;
        let top: BigInt = n >> shift;
        top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Parses `"a/b"`, decimal (`"0.05"`) and scientific (`"1e-10"`) literals into
/// an exact rational. Decimal forms are read base-10 exactly, so `"0.3"` is
/// 3/10, not the nearest binary float.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidParameter("empty numeric literal".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let numer: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad numerator in {s:?}")))?;
        let denom: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad denominator in {s:?}")))?;
        if denom.is_zero() {
            return Err(Error::InvalidParameter(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(numer, denom));
    }
    parse_decimal(s).ok_or_else(|| Error::InvalidParameter(format!("bad numeric literal {s:?}")))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (mantissa, sign) = match mantissa.strip_prefix('-') {
        Some(rest) => (rest, -1),
        None => (mantissa.strip_prefix('+').unwrap_or(mantissa), 1),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .unwrap_or_else(|_| BigInt::zero());
    let scale = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value * Rational::from(BigInt::from(sign)))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Renders a float with 10 significant digits.
pub fn sig10(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.000000000".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-4..10).contains(&exp) {
        format!("{v:.9e}")
    } else {
        let decimals = (9 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

/// Extended non-negative budget value.
///
/// Multiplicative-divergence budgets are carried as `ln(arg)/divisor` with the
/// log argument an exact rational at least 1; Rényi-family results are plain
/// floats. Comparing two exact values never touches floating point:
/// `ln(a)/p <= ln(b)/q` iff `a^q <= b^p`.
#[derive(Clone, Debug)]
pub enum PlbValue {
    Exact { arg: Rational, divisor: u64 },
    Approx(f64),
    Infinite,
}

impl PlbValue {
    pub fn zero() -> Self {
        PlbValue::Exact {
            arg: rat_one(),
            divisor: 1,
        }
    }

    /// `ln(arg)` for a rational argument `>= 1`.
    pub fn from_ln_arg(arg: Rational) -> Self {
        assert!(arg >= rat_one(), "log argument below 1: {arg}");
        PlbValue::Exact { arg, divisor: 1 }
    }

    pub fn approx(v: f64) -> Self {
        if v.is_infinite() {
            PlbValue::Infinite
        } else {
            PlbValue::Approx(v)
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PlbValue::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PlbValue::Exact { arg, .. } => arg.is_one(),
            PlbValue::Approx(v) => *v == 0.0,
            PlbValue::Infinite => false,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            PlbValue::Exact { arg, divisor } => ln_rational(arg) / *divisor as f64,
            PlbValue::Approx(v) => *v,
            PlbValue::Infinite => f64::INFINITY,
        }
    }

    /// Divides by a positive input distance; infinity is absorbing.
    pub fn divide(self, distance: u64) -> Self {
        assert!(distance > 0, "division by zero distance");
        match self {
            PlbValue::Exact { arg, divisor } => PlbValue::Exact {
                arg,
                divisor: divisor
                    .checked_mul(distance)
                    .expect("distance divisor overflow"),
            },
            PlbValue::Approx(v) => PlbValue::Approx(v / distance as f64),
            PlbValue::Infinite => PlbValue::Infinite,
        }
    }

    /// Total order; exact when both sides are exact and the cross exponents
    /// stay small, floating point otherwise.
    pub fn total_cmp(&self, other: &PlbValue) -> Ordering {
        use PlbValue::*;
        match (self, other) {
            (Infinite, Infinite) => Ordering::Equal,
            (Infinite, _) => Ordering::Greater,
            (_, Infinite) => Ordering::Less,
            (
                Exact { arg: a, divisor: p },
                Exact { arg: b, divisor: q },
            ) => match (u32::try_from(*p), u32::try_from(*q)) {
                (Ok(p32), Ok(q32)) if *p <= 4096 && *q <= 4096 => {
                    rat_pow(a, q32).cmp(&rat_pow(b, p32))
                }
                _ => self.to_f64().total_cmp(&other.to_f64()),
            },
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    /// `self <= other`, exact where possible, else within `tol`.
    pub fn le_with_tol(&self, other: &PlbValue, tol: f64) -> bool {
        use PlbValue::*;
        match (self, other) {
            (_, Infinite) => true,
            (Infinite, _) => false,
            (Exact { .. }, Exact { .. }) => self.total_cmp(other) != Ordering::Greater,
            _ => self.to_f64() <= other.to_f64() + tol,
        }
    }

    /// The symbolic form, when the value is exact.
    pub fn exact_parts(&self) -> Option<(&Rational, u64)> {
        match self {
            PlbValue::Exact { arg, divisor } => Some((arg, *divisor)),
            _ => None,
        }
    }
}

impl PartialEq for PlbValue {
    fn eq(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}
