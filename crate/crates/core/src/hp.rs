//! High-precision real and complex scalars.
//!
//! Thin layer over `dashu_float::FBig` in binary: conversions from the
//! exact types used elsewhere in the crate, a complex type, and a few
//! numeric helpers. Precision is carried per value, in bits; every
//! constructor here sets it explicitly so downstream arithmetic never
//! degenerates to exact (unbounded) mode.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;

/// High-precision binary float, round-half-even.
pub type R = FBig<HalfEven, 2>;

/// Bits of working precision for a requested count of decimal digits,
/// with guard bits.
pub fn bits_for_digits(digits: u32) -> usize {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 32
}

pub fn ibig_from_bigint(x: &BigInt) -> IBig {
    let (sign, bytes) = x.to_bytes_le();
    let mag = dashu_int::UBig::from_le_bytes(&bytes);
    match sign {
        num_bigint::Sign::Minus => -IBig::from(mag),
        _ => IBig::from(mag),
    }
}

pub fn from_bigint(x: &BigInt, bits: usize) -> R {
    R::from(ibig_from_bigint(x)).with_precision(bits).value()
}

pub fn bigint_from_ibig(x: &IBig) -> BigInt {
    let (sign, mag) = x.clone().into_parts();
    let bytes = mag.to_le_bytes();
    let b = BigInt::from_bytes_le(num_bigint::Sign::Plus, &bytes);
    match sign {
        dashu_base::Sign::Negative => -b,
        dashu_base::Sign::Positive => b,
    }
}

/// Exact rational value of a binary float: significand * 2^exponent.
pub fn to_rational(x: &R) -> BigRational {
    let repr = x.repr();
    let sig = bigint_from_ibig(repr.significand());
    let exp = repr.exponent();
    if exp >= 0 {
        BigRational::from(sig << exp as usize)
    } else {
        BigRational::new(sig, BigInt::from(1) << (-exp) as usize)
    }
}

pub fn from_rational(q: &BigRational, bits: usize) -> R {
    let num = from_bigint(q.numer(), bits + 8);
    let den = from_bigint(q.denom(), bits + 8);
    (num / den).with_precision(bits).value()
}

pub fn from_f64(x: f64, bits: usize) -> R {
    R::try_from(x)
        .expect("finite float")
        .with_precision(bits)
        .value()
}

pub fn to_f64(x: &R) -> f64 {
    x.to_f64().value()
}

pub fn zero() -> R {
    R::ZERO
}

pub fn one(bits: usize) -> R {
    R::ONE.with_precision(bits).value()
}

pub fn abs(x: &R) -> R {
    if x.sign() == dashu_base::Sign::Negative {
        -x.clone()
    } else {
        x.clone()
    }
}

pub fn max(a: R, b: R) -> R {
    if a >= b {
        a
    } else {
        b
    }
}

/// 2^k at the given working precision.
pub fn pow2(k: i64, bits: usize) -> R {
    let mag = R::from(IBig::ONE << k.unsigned_abs() as usize);
    let mag = mag.with_precision(bits).value();
    if k >= 0 {
        mag
    } else {
        (R::ONE.with_precision(bits).value()) / mag
    }
}

/// Complex number over `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: R,
    pub im: R,
}

impl Complex {
    pub fn new(re: R, im: R) -> Self {
        Complex { re, im }
    }

    pub fn zero() -> Self {
        Complex {
            re: R::ZERO,
            im: R::ZERO,
        }
    }

    pub fn from_real(re: R) -> Self {
        Complex { re, im: R::ZERO }
    }

    pub fn is_zero(&self) -> bool {
        self.re == R::ZERO && self.im == R::ZERO
    }

    pub fn add(&self, o: &Complex) -> Complex {
        Complex::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Complex) -> Complex {
        Complex::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Complex) -> Complex {
        Complex::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    pub fn conj(&self) -> Complex {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> R {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> R {
        self.norm_sqr().sqrt()
    }

    pub fn div(&self, o: &Complex) -> Complex {
        let d = o.norm_sqr();
        let num = self.mul(&o.conj());
        Complex::new(num.re / &d, num.im / &d)
    }

    pub fn scale(&self, s: &R) -> Complex {
        Complex::new(&self.re * s, &self.im * s)
    }

    pub fn neg(&self) -> Complex {
        Complex::new(-self.re.clone(), -self.im.clone())
    }
}
