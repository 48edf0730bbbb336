use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial division bound for big integers; any cofactor left below
/// `TRIAL_BOUND^2` is prime.
const TRIAL_BOUND: u64 = 1 << 20;

/// Factorization of a machine integer by trial division.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Factorization of a big integer whose prime factors are small (below
/// 2^40 for the largest one).
pub fn factor_biguint(n: &BigUint) -> Result<Vec<(u64, u64)>> {
    if n.is_zero() {
        return Err(Error::Unfactorable("0".into()));
    }
    if let Some(small) = n.to_u64() {
        return Ok(factor_u64(small));
    }
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut p = 2u64;
    while p < TRIAL_BOUND && !n.is_one() {
        let bp = BigUint::from(p);
        if (&n % &bp).is_zero() {
            let mut e = 0;
            while (&n % &bp).is_zero() {
                n /= &bp;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        match n.to_u64() {
            Some(r) if r < TRIAL_BOUND * TRIAL_BOUND => out.push((r, 1)),
            _ => return Err(Error::Unfactorable(n.to_string())),
        }
    }
    Ok(out)
}

/// How a log quantity is shown numerically. The exact value never depends
/// on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DisplayBase {
    Natural,
    Base(u64),
}

impl DisplayBase {
    pub fn ln(self) -> f64 {
        match self {
            DisplayBase::Natural => 1.0,
            DisplayBase::Base(b) => (b as f64).ln(),
        }
    }
}

impl fmt::Display for DisplayBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisplayBase::Natural => f.write_str("e"),
            DisplayBase::Base(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for DisplayBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "e" | "natural" | "ln" => Ok(DisplayBase::Natural),
            t => match t.parse::<u64>() {
                Ok(b) if b >= 2 => Ok(DisplayBase::Base(b)),
                _ => Err(Error::Parse(format!(
                    "display base must be `natural` or an integer >= 2, got `{t}`"
                ))),
            },
        }
    }
}

impl Serialize for DisplayBase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DisplayBase::Natural => s.serialize_str("e"),
            DisplayBase::Base(b) => s.serialize_u64(*b),
        }
    }
}

impl<'de> Deserialize<'de> for DisplayBase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => match n.as_u64() {
                Some(b) if b >= 2 => Ok(DisplayBase::Base(b)),
                _ => Err(serde::de::Error::custom("display base must be >= 2")),
            },
            _ => Err(serde::de::Error::custom("display base must be a string or integer")),
        }
    }
}

/// Formats a rational as `"num/den"`.
pub fn rational_to_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"num/den"` or `"num"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in `{s}`")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(n, d))
}

/// An exact real number `sum_p c_p ln(p)` with rational coefficients over
/// primes. Logarithms of distinct primes are linearly independent over the
/// rationals, so coefficient-wise equality is equality of real numbers.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LogQuantity {
    coeffs: BTreeMap<u64, BigRational>,
}

impl LogQuantity {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `ln(k)` for `k >= 1`.
    pub fn log_of_integer(k: u64) -> Self {
        assert!(k >= 1, "log of zero");
        Self::from_exponents(factor_u64(k))
    }

    pub fn log_of_biguint(k: &BigUint) -> Result<Self> {
        Ok(Self::from_exponents(factor_biguint(k)?))
    }

    /// `ln(q)` for a positive rational `q`.
    pub fn log_of_rational(q: &BigRational) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::Precondition(format!(
                "logarithm of non-positive rational {}",
                rational_to_string(q)
            )));
        }
        let num = Self::log_of_biguint(q.numer().magnitude())?;
        let den = Self::log_of_biguint(q.denom().magnitude())?;
        Ok(num - den)
    }

    pub fn from_factorization(f: &BTreeMap<u64, u64>) -> Self {
        Self::from_exponents(f.iter().map(|(&p, &e)| (p, e)))
    }

    fn from_exponents(f: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut q = Self::zero();
        for (p, e) in f {
            q.add_term(p, BigRational::from_integer(BigInt::from(e)));
        }
        q
    }

    /// A single term `c * ln(p)`; `p` must be prime.
    pub fn term(p: u64, c: BigRational) -> Self {
        let mut q = Self::zero();
        q.add_term(p, c);
        q
    }

    fn add_term(&mut self, p: u64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(p).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&p);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, BigRational> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LogQuantity {
            coeffs: self.coeffs.iter().map(|(&p, v)| (p, v * c)).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(c)))
    }

    pub fn scale_big(&self, c: &BigInt) -> Self {
        self.scale(&BigRational::from_integer(c.clone()))
    }

    /// Numerical value in nats.
    pub fn approx(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(&p, c)| c.to_f64().unwrap_or(f64::NAN) * (p as f64).ln())
            .sum::<f64>()
            + 0.0
    }

    pub fn approx_in(&self, base: DisplayBase) -> f64 {
        self.approx() / base.ln()
    }

    /// `self / other` when the two are rational multiples of each other.
    pub fn ratio(&self, other: &LogQuantity) -> Option<BigRational> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        let (p, c) = other.coeffs.iter().next()?;
        let r = self.coeffs.get(p)? / c;
        if other.scale(&r) == *self {
            Some(r)
        } else {
            None
        }
    }

    /// The exact value in base `b` when it is rational.
    pub fn in_base(&self, base: DisplayBase) -> Option<BigRational> {
        match base {
            DisplayBase::Natural => None,
            DisplayBase::Base(b) => self.ratio(&LogQuantity::log_of_integer(b)),
        }
    }

    /// `c * ln(b)`, the inverse of [`in_base`](Self::in_base).
    pub fn from_base_value(c: BigRational, b: u64) -> Self {
        LogQuantity::log_of_integer(b).scale(&c)
    }

    pub fn to_json(&self, base: DisplayBase) -> serde_json::Value {
        let coeffs: serde_json::Map<String, serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(p, c)| (p.to_string(), serde_json::Value::String(rational_to_string(c))))
            .collect();
        let mut obj = serde_json::Map::new();
        obj.insert("coeffs".into(), serde_json::Value::Object(coeffs));
        obj.insert("approx".into(), serde_json::json!(self.approx_in(base)));
        obj.insert("display_base".into(), serde_json::to_value(base).unwrap());
        if let Some(exact) = self.in_base(base) {
            obj.insert(
                "exact_in_base".into(),
                serde_json::Value::String(rational_to_string(&exact)),
            );
        }
        serde_json::Value::Object(obj)
    }

    /// Parses the JSON form written by [`to_json`](Self::to_json). Only
    /// `coeffs` carries the value; `approx` is checked for consistency when
    /// present.
    pub fn from_json(v: &serde_json::Value) -> Result<(Self, DisplayBase)> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("log quantity must be a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "coeffs" | "approx" | "display_base" | "exact_in_base") {
                return Err(Error::Parse(format!("unknown field `{key}` in log quantity")));
            }
        }
        let coeffs = obj
            .get("coeffs")
            .and_then(|c| c.as_object())
            .ok_or_else(|| Error::Parse("missing `coeffs` object".into()))?;
        let mut q = LogQuantity::zero();
        for (p, c) in coeffs {
            let p: u64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad prime key `{p}`")))?;
            if p < 2 || factor_u64(p) != vec![(p, 1)] {
                return Err(Error::Parse(format!("coefficient key {p} is not a prime")));
            }
            let c = c
                .as_str()
                .ok_or_else(|| Error::Parse("coefficients must be \"num/den\" strings".into()))?;
            q.add_term(p, parse_rational(c)?);
        }
        let base = match obj.get("display_base") {
            Some(b) => serde_json::from_value(b.clone())
                .map_err(|e| Error::Parse(format!("display_base: {e}")))?,
            None => DisplayBase::Natural,
        };
        if let Some(a) = obj.get("approx") {
            let a = a
                .as_f64()
                .ok_or_else(|| Error::Parse("`approx` must be a number".into()))?;
            let expect = q.approx_in(base);
            if (a - expect).abs() > 1e-9 * expect.abs().max(1.0) {
                return Err(Error::Parse(format!(
                    "`approx` {a} disagrees with coefficients ({expect})"
                )));
            }
        }
        Ok((q, base))
    }
}

impl fmt::Display for LogQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "ln{p}")?;
            } else {
                write!(f, "{a}·ln{p}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LogQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogQuantity({self})")
    }
}

impl Add for LogQuantity {
    type Output = LogQuantity;
    fn add(mut self, rhs: LogQuantity) -> LogQuantity {
        self += &rhs;
        self
    }
}

impl Add<&LogQuantity> for &LogQuantity {
    type Output = LogQuantity;
    fn add(self, rhs: &LogQuantity) -> LogQuantity {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&LogQuantity> for LogQuantity {
    fn add_assign(&mut self, rhs: &LogQuantity) {
        for (&p, c) in &rhs.coeffs {
            self.add_term(p, c.clone());
        }
    }
}

impl Sub for LogQuantity {
    type Output = LogQuantity;
    fn sub(mut self, rhs: LogQuantity) -> LogQuantity {
        self -= &rhs;
        self
    }
}

impl Sub<&LogQuantity> for &LogQuantity {
    type Output = LogQuantity;
    fn sub(self, rhs: &LogQuantity) -> LogQuantity {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl SubAssign<&LogQuantity> for LogQuantity {
    fn sub_assign(&mut self, rhs: &LogQuantity) {
        for (&p, c) in &rhs.coeffs {
            self.add_term(p, -c.clone());
        }
    }
}

impl Neg for LogQuantity {
    type Output = LogQuantity;
    fn neg(self) -> LogQuantity {
        self.scale_int(-1)
    }
}

impl Mul<&BigRational> for &LogQuantity {
    type Output = LogQuantity;
    fn mul(self, rhs: &BigRational) -> LogQuantity {
        self.scale(rhs)
    }
}

impl std::iter::Sum for LogQuantity {
    fn sum<I: Iterator<Item = LogQuantity>>(iter: I) -> Self {
        iter.fold(LogQuantity::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn log_of_integer_uses_factorization() {
        let l12 = LogQuantity::log_of_integer(12);
        assert_eq!(l12.coeffs().get(&2), Some(&q(2, 1)));
        assert_eq!(l12.coeffs().get(&3), Some(&q(1, 1)));
        assert!(LogQuantity::log_of_integer(1).is_zero());
    }

    #[test]
    fn base_display_is_exact_when_rational() {
        let x = LogQuantity::log_of_integer(3).scale_int(-2);
        assert_eq!(x.in_base(DisplayBase::Base(3)), Some(q(-2, 1)));
        assert_eq!(x.in_base(DisplayBase::Base(9)), Some(q(-1, 1)));
        assert_eq!(x.in_base(DisplayBase::Base(2)), None);
        assert!((x.approx_in(DisplayBase::Base(3)) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let x = LogQuantity::log_of_integer(6).scale(&q(-5, 7));
        let v = x.to_json(DisplayBase::Base(5));
        let (y, b) = LogQuantity::from_json(&v).unwrap();
        assert_eq!(x, y);
        assert_eq!(b, DisplayBase::Base(5));
        let bad = serde_json::json!({"coeffs": {"4": "1/1"}});
        assert!(LogQuantity::from_json(&bad).is_err());
        let bad = serde_json::json!({"coeffs": {}, "extra": 1});
        assert!(LogQuantity::from_json(&bad).is_err());
    }

    #[test]
    fn rational_logs() {
        let x = LogQuantity::log_of_rational(&q(3, 8)).unwrap();
        assert_eq!(x, LogQuantity::log_of_integer(3) - LogQuantity::log_of_integer(8));
        assert!(LogQuantity::log_of_rational(&q(0, 1)).is_err());
    }

    #[test]
    fn big_factorization() {
        let n = BigUint::from(3u32).pow(200) * BigUint::from(7u32);
        let f = factor_biguint(&n).unwrap();
        assert_eq!(f, vec![(3, 200), (7, 1)]);
    }

    proptest! {
        #[test]
        fn log_is_additive(a in 1u64..100_000, b in 1u64..100_000) {
            prop_assert_eq!(
                LogQuantity::log_of_integer(a * b),
                LogQuantity::log_of_integer(a) + LogQuantity::log_of_integer(b)
            );
        }

        #[test]
        fn addition_is_associative(a in 1u64..5000, b in 1u64..5000, c in 1u64..5000, k in -5i64..5) {
            let x = LogQuantity::log_of_integer(a);
            let y = LogQuantity::log_of_integer(b).scale_int(k);
            let z = LogQuantity::log_of_integer(c).scale(&q(1, 3));
            prop_assert_eq!((&x + &y) + z.clone(), x.clone() + (&y + &z));
            prop_assert!((&x - &x).is_zero());
        }
    }
}
