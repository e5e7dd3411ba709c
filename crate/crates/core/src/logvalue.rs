//! Signed real numbers stored as `sign · exp(ln_mag)`.
//!
//! Direction schedules produce magnitudes such as `|ξ|^{-2k}` or `t_k` whose
//! exponents leave double range after a couple of stages. Every scalar in the
//! certificate pipelines is therefore carried in this form.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// `sign · e^{ln_mag}`; `ln_mag` is ignored when `sign == 0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogValue {
    sign: i8,
    #[serde(with = "ln_or_null")]
    ln_mag: f64,
}

/// JSON has no infinities; zero is written with a null magnitude.
mod ln_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { sign: 0, ln_mag: f64::NEG_INFINITY };
    pub const ONE: LogValue = LogValue { sign: 1, ln_mag: 0.0 };

    /// Positive value `e^{ln}`. `ln = -inf` gives zero.
    pub fn from_ln(ln: f64) -> Self {
        Self::signed(1, ln)
    }

    pub fn signed(sign: i8, ln_mag: f64) -> Self {
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            debug_assert!(!ln_mag.is_nan(), "NaN log magnitude");
            LogValue { sign: sign.signum(), ln_mag: ln_mag + 0.0 }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::signed(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        if x.is_zero() {
            Self::ZERO
        } else {
            Self::from_ln(ln_biguint(x))
        }
    }

    pub fn from_bigint(x: &BigInt) -> Self {
        let v = Self::from_biguint(x.magnitude());
        if x.sign() == Sign::Minus {
            -v
        } else {
            v
        }
    }

    pub fn from_ratio(x: &BigRational) -> Self {
        if x.is_zero() {
            return Self::ZERO;
        }
        let ln = ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude());
        Self::signed(if x.is_negative() { -1 } else { 1 }, ln)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    /// Natural log of the magnitude (`-inf` for zero).
    pub fn ln_abs(&self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.ln_mag
        }
    }

    /// Natural log of a positive value.
    pub fn ln(&self) -> f64 {
        debug_assert!(self.sign > 0, "ln of non-positive LogValue");
        self.ln_abs()
    }

    pub fn abs(&self) -> Self {
        Self::signed(self.sign.abs(), self.ln_mag)
    }

    /// Lossy conversion; underflows to `±0` and overflows to `±inf`.
    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_mag.exp(),
        }
    }

    pub fn powf(&self, p: f64) -> Self {
        match self.sign {
            0 if p > 0.0 => Self::ZERO,
            0 => Self::from_f64(f64::INFINITY),
            1 => Self::from_ln(self.ln_mag * p),
            _ => panic!("powf of negative LogValue"),
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { self.sign.abs() };
        Self::signed(sign, self.ln_mag * n as f64)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// `e^{-x}` for this value `x`, computed without forming `x` when it is
    /// astronomically large.
    pub fn exp_neg(&self) -> Self {
        match self.sign {
            0 => Self::ONE,
            s => {
                let x = self.ln_mag.exp();
                Self::from_ln(-f64::from(s) * x)
            }
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Relative difference of two positive values measured in the log domain.
    pub fn log_distance(&self, other: &Self) -> f64 {
        (self.ln_abs() - other.ln_abs()).abs()
    }

    /// Exact rational `q` with `q <= self`, accounting for a relative rounding
    /// slack of `rel` in the stored log magnitude.
    pub fn rational_below(&self, rel: f64) -> BigRational {
        self.rational_bound(rel, false)
    }

    /// Exact rational `q` with `q >= self` under the same slack model.
    pub fn rational_above(&self, rel: f64) -> BigRational {
        self.rational_bound(rel, true)
    }

    fn rational_bound(&self, rel: f64, upper: bool) -> BigRational {
        if self.sign == 0 {
            return BigRational::zero();
        }
        // Widening the magnitude in the direction away from the bound.
        let grow = (self.sign > 0) == upper;
        let slack = rel * (1.0 + self.ln_mag.abs()) + 4.0 * f64::EPSILON;
        let ln = if grow { self.ln_mag + slack } else { self.ln_mag - slack };
        let mag = exp_to_rational(ln, grow);
        if self.sign > 0 {
            mag
        } else {
            -mag
        }
    }

    /// Sum of many terms without intermediate overflow.
    pub fn sum<I: IntoIterator<Item = LogValue>>(terms: I) -> Self {
        let terms: Vec<LogValue> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        if terms.is_empty() {
            return Self::ZERO;
        }
        let pivot = terms.iter().map(|t| t.ln_mag).fold(f64::NEG_INFINITY, f64::max);
        if pivot == f64::INFINITY {
            let s: i32 = terms.iter().filter(|t| t.ln_mag == f64::INFINITY).map(|t| i32::from(t.sign)).sum();
            return Self::signed(s.signum() as i8, f64::INFINITY);
        }
        let acc: f64 = terms.iter().map(|t| f64::from(t.sign) * (t.ln_mag - pivot).exp()).sum();
        if acc == 0.0 {
            Self::ZERO
        } else {
            Self::signed(if acc > 0.0 { 1 } else { -1 }, pivot + acc.abs().ln())
        }
    }
}

/// Bounded rational for `e^{ln}`: `m · 2^e` with `m` an exact double in `[1, 2)`.
fn exp_to_rational(ln: f64, round_up: bool) -> BigRational {
    let ln2 = std::f64::consts::LN_2;
    let e2 = (ln / ln2).floor();
    let frac = ln - e2 * ln2;
    let mut m = frac.exp();
    // exp() is faithfully rounded; nudge one ulp the safe way.
    m = if round_up { next_up(m) } else { next_down(m) };
    let mut e2 = e2 as i64;
    let (mant, exp) = decompose(m);
    e2 += exp;
    let mant = BigRational::from_integer(BigInt::from(mant));
    if e2 >= 0 {
        mant * BigRational::from_integer(BigInt::one() << (e2 as usize))
    } else {
        mant / BigRational::from_integer(BigInt::one() << ((-e2) as usize))
    }
}

/// Splits a finite positive double into `mant · 2^exp` with integer `mant`.
pub(crate) fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

/// `ln x` for an arbitrarily large positive integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

impl PartialEq for LogValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for LogValue {}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln_mag.total_cmp(&other.ln_mag),
                _ => other.ln_mag.total_cmp(&self.ln_mag),
            },
            o => o,
        }
    }
}

impl Neg for LogValue {
    type Output = LogValue;
    fn neg(self) -> LogValue {
        LogValue::signed(-self.sign, self.ln_mag)
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        LogValue::signed(self.sign * rhs.sign, self.ln_mag + rhs.ln_mag)
    }
}

impl Mul<f64> for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: f64) -> LogValue {
        self * LogValue::from_f64(rhs)
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.is_zero(), "LogValue division by zero");
        LogValue::signed(self.sign * rhs.sign, self.ln_mag - rhs.ln_mag)
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        LogValue::sum([self, rhs])
    }
}

impl Sub for LogValue {
    type Output = LogValue;
    fn sub(self, rhs: LogValue) -> LogValue {
        self + (-rhs)
    }
}

impl From<f64> for LogValue {
    fn from(x: f64) -> Self {
        LogValue::from_f64(x)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => {
                let s = if s < 0 { "-" } else { "" };
                if self.ln_mag.abs() < 700.0 {
                    write!(f, "{s}{:e}", self.ln_mag.exp())
                } else {
                    let log10 = self.ln_mag / std::f64::consts::LN_10;
                    let e = log10.floor();
                    write!(f, "{s}{:.6}e{}", 10f64.powf(log10 - e), e as i64)
                }
            }
        }
    }
}
