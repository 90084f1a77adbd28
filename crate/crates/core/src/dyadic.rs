//! Exact non-negative dyadic rationals `m / 2^n`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{CheckedSub, One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::strings::BinString;

/// A non-negative rational of the form `numerator / 2^exponent`.
///
/// Values are kept in canonical form: the numerator is odd, or the value is
/// zero and the exponent is `0`. Structural equality is therefore value
/// equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyadicParseError {
    #[error("malformed dyadic literal {0:?} (expected \"m/2^n\")")]
    Malformed(String),
    #[error("{0:?} is not a dyadic rational")]
    NotDyadic(String),
}

impl Dyadic {
    pub fn new(num: impl Into<BigUint>, exp: u32) -> Self {
        Self::canonical(num.into(), exp)
    }

    fn canonical(mut num: BigUint, mut exp: u32) -> Self {
        if num.is_zero() {
            return Dyadic { num, exp: 0 };
        }
        let tz = num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(u64::from(exp)) as u32;
        if shift > 0 {
            num >>= shift;
            exp -= shift;
        }
        Dyadic { num, exp }
    }

    /// `2^-n`.
    pub fn pow2_neg(n: u32) -> Self {
        Dyadic {
            num: BigUint::one(),
            exp: n,
        }
    }

    pub fn from_integer(n: u64) -> Self {
        Self::canonical(BigUint::from(n), 0)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// Multiply by `2^-k`.
    pub fn shr(&self, k: u32) -> Self {
        Self::canonical(self.num.clone(), self.exp + k)
    }

    /// Multiply by `2^k`.
    pub fn shl(&self, k: u32) -> Self {
        if k <= self.exp {
            Self::canonical(self.num.clone(), self.exp - k)
        } else {
            Self::canonical(&self.num << (k - self.exp), 0)
        }
    }

    pub fn half(&self) -> Self {
        self.shr(1)
    }

    pub fn saturating_sub(&self, other: &Self) -> Self {
        self.checked_sub(other).unwrap_or_else(Dyadic::zero)
    }

    pub fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// The smallest `k` with `2^k >= self`, for `self >= 1`.
    pub fn ceil_log2(&self) -> Option<u32> {
        if *self < Dyadic::one() {
            return None;
        }
        let mut k = 0;
        let mut pow = Dyadic::one();
        while pow < *self {
            pow = pow.shl(1);
            k += 1;
        }
        Some(k)
    }

    /// The first `n` bits of the binary expansion of a value in `[0, 1)`.
    pub fn binary_prefix(&self, n: u32) -> Option<BinString> {
        if *self >= Dyadic::one() {
            return None;
        }
        let scaled = if n >= self.exp {
            &self.num << (n - self.exp)
        } else {
            &self.num >> (self.exp - n)
        };
        Some(BinString::from_biguint(&scaled, n as usize))
    }

    pub fn to_f64(&self) -> f64 {
        let mut num = self.num.clone();
        let mut exp = self.exp as i32;
        // keep the mantissa inside f64 range
        let bits = num.bits();
        if bits > 64 {
            let drop = (bits - 64) as u32;
            num >>= drop;
            exp -= drop as i32;
        }
        num.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-exp)
    }

    pub fn is_at_most_one(&self) -> bool {
        *self <= Dyadic::one()
    }

    fn aligned(&self, other: &Self) -> (BigUint, BigUint, u32) {
        let e = self.exp.max(other.exp);
        (
            &self.num << (e - self.exp),
            &other.num << (e - other.exp),
            e,
        )
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic {
            num: BigUint::zero(),
            exp: 0,
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic {
            num: BigUint::one(),
            exp: 0,
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(rhs);
        Dyadic::canonical(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::canonical(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl CheckedSub for Dyadic {
    fn checked_sub(&self, other: &Self) -> Option<Self> {
        let (a, b, e) = self.aligned(other);
        if a < b {
            None
        } else {
            Some(Dyadic::canonical(a - b, e))
        }
    }
}

/// Panics when the result would be negative, like unsigned integer subtraction.
impl Sub for Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: Dyadic) -> Dyadic {
        self.checked_sub(&rhs)
            .expect("attempt to subtract a larger dyadic from a smaller one")
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self.checked_sub(rhs)
            .expect("attempt to subtract a larger dyadic from a smaller one")
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + x)
    }
}

impl From<u64> for Dyadic {
    fn from(n: u64) -> Self {
        Dyadic::from_integer(n)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = DyadicParseError;

    /// Accepts `m/2^n`, `m/d` with `d` a power of two, and plain integers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let malformed = || DyadicParseError::Malformed(s.to_string());
        let parse_int = |t: &str| -> Result<BigUint, DyadicParseError> {
            let t = t.trim();
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            t.parse::<BigUint>().map_err(|_| malformed())
        };
        match text.split_once('/') {
            None => Ok(Dyadic::canonical(parse_int(text)?, 0)),
            Some((num, den)) => {
                let num = parse_int(num)?;
                let den = den.trim();
                if let Some(exp) = den.strip_prefix("2^") {
                    let exp: u32 = exp.trim().parse().map_err(|_| malformed())?;
                    return Ok(Dyadic::canonical(num, exp));
                }
                let den = parse_int(den)?;
                if den.is_zero() {
                    return Err(malformed());
                }
                if den.count_ones() != 1 {
                    // a reduced fraction with an odd factor in the denominator is not dyadic
                    let g = num_integer::Integer::gcd(&num, &den);
                    let reduced = &den / &g;
                    if reduced.count_ones() != 1 {
                        return Err(DyadicParseError::NotDyadic(s.to_string()));
                    }
                    let exp = reduced.trailing_zeros().unwrap_or(0) as u32;
                    return Ok(Dyadic::canonical(num / g, exp));
                }
                let exp = den.trailing_zeros().unwrap_or(0) as u32;
                Ok(Dyadic::canonical(num, exp))
            }
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
