//! Scalar modes.
//!
//! Three scalar modes back the grid machinery: `i64` for Haar sums (always
//! integral), `Rat = Ratio<i128>` for zero-tolerance identity checks, and
//! `f64` for large scans. Promotions between modes are explicit, never
//! silent.
//!
//! Every exact quantity in scope is a dyadic rational with small numerators
//! (grid budgets bound the instance sizes), so `i128` numerators are ample.
//! The workspace compiles with overflow checks on in every profile, and the
//! Riesz builders pre-check a conservative bit bound before entering exact
//! mode, so an overflow can only ever abort loudly, never wrap.

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar. Denominators stay powers of two in practice.
pub type Rat = Ratio<i128>;

/// Rational p/q from integer parts, reduced.
pub fn rat(num: i128, den: i128) -> Rat {
    Ratio::new(num, den)
}

/// Shared scalar interface for the rational and float grid modes.
pub trait Scalar:
    Clone
    + Send
    + Sync
    + PartialOrd
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Div<Output = Self>
    + std::fmt::Debug
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_u64(v: u64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// Report rendering; exact scalars keep their num/den form.
    fn to_value(&self) -> Value;
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rat::from_integer(v as i128)
    }
    fn from_u64(v: u64) -> Self {
        Rat::from_integer(v as i128)
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn to_value(&self) -> Value {
        Value::Exact(*self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_u64(v: u64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_value(&self) -> Value {
        Value::Float(*self)
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// A computed quantity as it appears in reports: exact when the pipeline ran
/// in rational mode, float otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i128),
    Exact(Rat),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Int(v) => *v as f64,
            Value::Exact(r) => rat_to_f64(r),
            Value::Float(x) => *x,
        }
    }

    /// Canonical exact string: integer, `num/den`, or empty for floats.
    pub fn exact_string(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Exact(r) => fmt_rat(r),
            Value::Float(_) => String::new(),
        }
    }
}

/// `num/den` with `/1` elided.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// 17 significant digits, scientific, stable across runs. Negative zero is
/// canonicalized so equal values always render identically.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.16e}", x)
}

/// Parse "n", "n/d", or a plain integer as an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: i128 = num_str
        .parse()
        .map_err(|_| Error::Usage(format!("cannot parse rational '{}'", s)))?;
    let den: i128 = den_str
        .parse()
        .map_err(|_| Error::Usage(format!("cannot parse rational '{}'", s)))?;
    if den == 0 {
        return Err(Error::Usage(format!("zero denominator in '{}'", s)));
    }
    Ok(rat(num, den))
}

/// True if the reduced denominator is a power of two (dyadic rational).
pub fn is_dyadic(r: &Rat) -> bool {
    let d = *r.denom();
    d > 0 && (d & (d - 1)) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rat_basics() {
        assert_eq!(rat(4, 32), rat(1, 8));
        assert_eq!(fmt_rat(&rat(3, 1)), "3");
        assert_eq!(fmt_rat(&rat(-3, 8)), "-3/8");
        assert!(is_dyadic(&rat(5, 16)));
        assert!(is_dyadic(&rat(7, 1)));
        assert!(!is_dyadic(&rat(1, 3)));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("1/8").unwrap(), rat(1, 8));
        assert_eq!(parse_rat("0").unwrap(), Rat::zero());
        assert_eq!(parse_rat("-3/16").unwrap(), rat(-3, 16));
        assert_eq!(parse_rat(" 2 / 4 ").unwrap(), rat(1, 2));
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn float_format_is_stable() {
        assert_eq!(fmt_f64(0.375), "3.7500000000000000e-1");
        assert_eq!(fmt_f64(-0.0), fmt_f64(0.0));
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }
}
