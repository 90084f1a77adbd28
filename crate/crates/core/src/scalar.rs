//! The scalar abstraction the semi-measure machinery is generic over.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::dyadic::Dyadic;

/// Mass values: exact ([`Dyadic`], [`BigRational`]) or approximate (`f64`, `f32`).
///
/// Subtraction is only ever applied with a minuend at least as large as the
/// subtrahend.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_dyadic(d: &Dyadic) -> Self;

    fn to_f64(&self) -> f64;

    /// `2^-n`.
    fn pow2_neg(n: u32) -> Self {
        Self::from_dyadic(&Dyadic::pow2_neg(n))
    }

    fn half(&self) -> Self {
        self.clone() * Self::pow2_neg(1)
    }

    fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            n >>= 1;
        }
        acc
    }

    /// The smallest `k` with `2^k >= self`, or `None` below one.
    fn ceil_log2(&self) -> Option<u32> {
        if *self < Self::one() {
            return None;
        }
        let two = Self::one() + Self::one();
        let mut k = 0;
        let mut pow = Self::one();
        while pow < *self {
            pow = pow * two.clone();
            k += 1;
            if k > 4096 {
                return None;
            }
        }
        Some(k)
    }
}

pub fn min_scalar<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max_scalar<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

impl Scalar for Dyadic {
    fn from_dyadic(d: &Dyadic) -> Self {
        d.clone()
    }

    fn to_f64(&self) -> f64 {
        Dyadic::to_f64(self)
    }

    fn pow2_neg(n: u32) -> Self {
        Dyadic::pow2_neg(n)
    }

    fn half(&self) -> Self {
        Dyadic::half(self)
    }
}

impl Scalar for f64 {
    fn from_dyadic(d: &Dyadic) -> Self {
        d.to_f64()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn pow2_neg(n: u32) -> Self {
        2f64.powi(-(n as i32))
    }
}

impl Scalar for f32 {
    fn from_dyadic(d: &Dyadic) -> Self {
        d.to_f64() as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn pow2_neg(n: u32) -> Self {
        2f32.powi(-(n as i32))
    }
}

impl Scalar for BigRational {
    fn from_dyadic(d: &Dyadic) -> Self {
        let den = BigUint::one() << d.exponent();
        BigRational::new(
            BigInt::from(d.numerator().clone()),
            BigInt::from(den),
        )
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exact conversion back to a dyadic, when the rational has a power-of-two denominator.
pub fn rational_to_dyadic(r: &BigRational) -> Option<Dyadic> {
    let num = r.numer().to_biguint()?;
    let den = r.denom().to_biguint()?;
    if den.count_ones() != 1 {
        return None;
    }
    Some(Dyadic::new(num, den.trailing_zeros().unwrap_or(0) as u32))
}
