//! Real algebraic numbers as (irreducible minimal polynomial,
//! isolating interval) pairs.
//!
//! A value is immutable after construction: comparison and formatting
//! refine local copies of the interval, so values can be shared across
//! threads freely. Equality and ordering are exact. Interval
//! refinement is plain sign bisection (rational endpoints of an
//! irreducible polynomial of degree >= 2 are never roots); exactness
//! of equality rests on Sturm counting plus the fact that two distinct
//! irreducible polynomials have no common root.

use crate::factor::{factor, is_irreducible};
use crate::poly::{interpolate_rational, IntPolynomial};
use crate::roots::{count_roots_closed, refine_step, sqrt_bounds};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraicError {
    #[error("polynomial is not irreducible over Q")]
    NotIrreducible,
    #[error("interval does not isolate exactly one real root (found {0})")]
    NotIsolating(usize),
    #[error("operation requires a nonnegative value")]
    NegativeValue,
}

/// A real algebraic number, exactly represented.
#[derive(Clone)]
pub struct AlgebraicReal {
    minpoly: IntPolynomial,
    lo: BigRational,
    hi: BigRational,
}

impl AlgebraicReal {
    /// Construct from an integer polynomial and an isolating interval,
    /// validating irreducibility and isolation.
    pub fn new(
        minpoly: IntPolynomial,
        lo: BigRational,
        hi: BigRational,
    ) -> Result<Self, AlgebraicError> {
        let p = minpoly.normalized();
        if p.deg() == 1 {
            let root = BigRational::new(-p.coeff(0), p.coeff(1));
            if root < lo || root > hi {
                return Err(AlgebraicError::NotIsolating(0));
            }
            return Ok(AlgebraicReal::from_rational(root));
        }
        if !is_irreducible(&p) {
            return Err(AlgebraicError::NotIrreducible);
        }
        let n = count_roots_closed(&p, &lo, &hi);
        if n != 1 {
            return Err(AlgebraicError::NotIsolating(n));
        }
        Ok(Self::from_irreducible(p, lo, hi))
    }

    /// Internal constructor: `p` is already known irreducible (degree
    /// >= 2) with exactly one root in `[lo, hi]`.
    pub(crate) fn from_irreducible(p: IntPolynomial, mut lo: BigRational, mut hi: BigRational) -> Self {
        debug_assert!(count_roots_closed(&p, &lo, &hi) == 1);
        // Shrink until endpoints are non-roots of the sign test; for
        // irreducible degree >= 2 they already are, but make sure the
        // interval has a sign change so bisection is valid.
        while p.sign_at(&lo) * p.sign_at(&hi) >= 0 {
            let (l, h) = split_until_sign_change(&p, &lo, &hi);
            lo = l;
            hi = h;
        }
        AlgebraicReal { minpoly: p, lo, hi }
    }

    pub fn from_rational(q: BigRational) -> Self {
        let minpoly = IntPolynomial::from_coeffs(vec![-q.numer().clone(), q.denom().clone()])
            .normalized();
        AlgebraicReal {
            minpoly,
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn from_int(n: i64) -> Self {
        AlgebraicReal::from_rational(BigRational::from(BigInt::from(n)))
    }

    pub fn one() -> Self {
        AlgebraicReal::from_int(1)
    }

    pub fn minpoly(&self) -> &IntPolynomial {
        &self.minpoly
    }

    pub fn interval(&self) -> (BigRational, BigRational) {
        (self.lo.clone(), self.hi.clone())
    }

    pub fn degree(&self) -> usize {
        self.minpoly.deg()
    }

    pub fn is_rational(&self) -> bool {
        self.minpoly.deg() == 1
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.lo.clone())
        } else {
            None
        }
    }

    /// One bisection step; no-op for rational values.
    pub fn refine(&mut self) {
        if self.is_rational() {
            return;
        }
        let (lo, hi) = refine_step(&self.minpoly, &self.lo, &self.hi);
        self.lo = lo;
        self.hi = hi;
    }

    /// A copy of the isolating interval refined to width <= eps.
    pub fn refined_interval(&self, eps: &BigRational) -> (BigRational, BigRational) {
        if self.is_rational() {
            return (self.lo.clone(), self.hi.clone());
        }
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        while &hi - &lo > *eps {
            let (l, h) = refine_step(&self.minpoly, &lo, &hi);
            lo = l;
            hi = h;
        }
        (lo, hi)
    }

    pub fn sign(&self) -> Ordering {
        self.cmp_rational(&BigRational::zero())
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    /// Exact comparison against a rational.
    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        if let Some(q) = self.as_rational() {
            return q.cmp(r);
        }
        if self.minpoly.sign_at(r) == 0 {
            // cannot happen for irreducible degree >= 2
            unreachable!("rational root of irreducible polynomial of degree >= 2");
        }
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        loop {
            if *r < lo {
                return Ordering::Greater;
            }
            if *r > hi {
                return Ordering::Less;
            }
            let (l, h) = refine_step(&self.minpoly, &lo, &hi);
            lo = l;
            hi = h;
        }
    }

    /// Exact total-order comparison.
    pub fn cmp(&self, other: &AlgebraicReal) -> Ordering {
        if let Some(q) = other.as_rational() {
            return self.cmp_rational(&q);
        }
        if let Some(q) = self.as_rational() {
            return other.cmp_rational(&q).reverse();
        }
        if self.minpoly == other.minpoly {
            // Same minimal polynomial: equal iff a root lies in the
            // intersection of the isolating intervals (each contains
            // exactly one root, so a shared root is the root of both).
            let lo = self.lo.clone().max(other.lo.clone());
            let hi = self.hi.clone().min(other.hi.clone());
            if lo <= hi && count_roots_closed(&self.minpoly, &lo, &hi) >= 1 {
                return Ordering::Equal;
            }
        }
        // Distinct values: refine until the intervals separate.
        let mut a = (self.lo.clone(), self.hi.clone());
        let mut b = (other.lo.clone(), other.hi.clone());
        loop {
            if a.1 < b.0 {
                return Ordering::Less;
            }
            if b.1 < a.0 {
                return Ordering::Greater;
            }
            a = refine_step(&self.minpoly, &a.0, &a.1);
            b = refine_step(&other.minpoly, &b.0, &b.1);
        }
    }

    /// `self^k` for k >= 0; requires `self >= 0` when k >= 2 is used on
    /// moduli (negative bases are accepted only for k = 0, 1).
    pub fn pow(&self, k: u32) -> AlgebraicReal {
        if k == 0 {
            return AlgebraicReal::one();
        }
        if k == 1 {
            return self.clone();
        }
        if let Some(q) = self.as_rational() {
            let mut acc = BigRational::one();
            for _ in 0..k {
                acc *= &q;
            }
            return AlgebraicReal::from_rational(acc);
        }
        assert!(
            !self.is_negative(),
            "pow of negative algebraic value is not supported"
        );
        // Polynomial with roots { y^k : minpoly(y) = 0 }, built by
        // resultant elimination, evaluated by interpolation on integer
        // nodes: q(x) = Res_y(p(y), x - y^k) up to a constant.
        let d = self.minpoly.deg();
        let points: Vec<(BigInt, BigRational)> = (0..=d as i64)
            .map(|j| {
                let xj = BigInt::from(j);
                // g(y) = xj - y^k
                let mut coeffs = vec![BigInt::zero(); k as usize + 1];
                coeffs[0] = xj.clone();
                coeffs[k as usize] = -BigInt::one();
                let g = IntPolynomial::from_coeffs(coeffs);
                let v = self.minpoly.resultant(&g);
                (xj, BigRational::from(v))
            })
            .collect();
        let target = interpolate_rational(&points).normalized();
        debug_assert_eq!(target.deg(), d);
        // Isolate self^k among the roots of target's factors.
        let mut lo = self.lo.clone();
        let hi = self.hi.clone();
        if lo.is_negative() {
            lo = BigRational::zero();
        }
        self.select_root(&target, |lo_hi: (&BigRational, &BigRational)| {
            (pow_rat(lo_hi.0, k), pow_rat(lo_hi.1, k))
        }, lo, hi)
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(&self) -> Result<AlgebraicReal, AlgebraicError> {
        if self.is_negative() {
            return Err(AlgebraicError::NegativeValue);
        }
        if let Some(q) = self.as_rational() {
            // exact rational square root when available
            let ns = q.numer().sqrt();
            let ds = q.denom().sqrt();
            if &ns * &ns == *q.numer() && &ds * &ds == *q.denom() {
                return Ok(AlgebraicReal::from_rational(BigRational::new(ns, ds)));
            }
        }
        let target = self.minpoly.inflate(2);
        let mut lo = self.lo.clone();
        if lo.is_negative() {
            lo = BigRational::zero();
        }
        let hi = self.hi.clone();
        Ok(self.select_root(
            &target,
            |lo_hi: (&BigRational, &BigRational)| {
                let l = sqrt_bounds(lo_hi.0, 32).0;
                let h = sqrt_bounds(lo_hi.1, 32).1;
                (l, h)
            },
            lo,
            hi,
        ))
    }

    /// Shared isolation loop for derived values: `target` is a
    /// polynomial vanishing at f(self); `map` sends an enclosure of
    /// self to an enclosure of f(self), monotone in interval width.
    fn select_root<F>(
        &self,
        target: &IntPolynomial,
        map: F,
        mut lo: BigRational,
        mut hi: BigRational,
    ) -> AlgebraicReal
    where
        F: Fn((&BigRational, &BigRational)) -> (BigRational, BigRational),
    {
        let candidates: Vec<IntPolynomial> = factor(&target.squarefree_part())
            .into_iter()
            .map(|(f, _)| f)
            .collect();
        loop {
            let (tlo, thi) = map((&lo, &hi));
            let mut hits: Vec<&IntPolynomial> = vec![];
            let mut total = 0usize;
            for f in &candidates {
                let c = count_roots_closed(f, &tlo, &thi);
                if c > 0 {
                    hits.push(f);
                    total += c;
                }
            }
            debug_assert!(total >= 1, "image interval lost the root");
            if total == 1 {
                let f = hits[0];
                if f.deg() == 1 {
                    return AlgebraicReal::from_rational(BigRational::new(
                        -f.coeff(0),
                        f.coeff(1),
                    ));
                }
                return AlgebraicReal::from_irreducible(f.clone(), tlo, thi);
            }
            let (l, h) = refine_step(&self.minpoly, &lo, &hi);
            lo = l;
            hi = h;
        }
    }

    /// Closest double; refines internally to 80 bits.
    pub fn to_f64(&self) -> f64 {
        let eps = BigRational::new(BigInt::one(), BigInt::one() << 80);
        let (lo, hi) = self.refined_interval(&eps);
        let mid = (&lo + &hi) / BigRational::from(BigInt::from(2));
        mid.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal approximation to the requested number of fractional
    /// digits, refining as needed.
    pub fn approx_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let eps = BigRational::new(BigInt::one(), &scale * BigInt::from(2));
        let (lo, hi) = self.refined_interval(&eps);
        let mid = (&lo + &hi) / BigRational::from(BigInt::from(2));
        decimal_string(&mid, digits)
    }
}

fn pow_rat(q: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= q;
    }
    acc
}

fn split_until_sign_change(
    p: &IntPolynomial,
    lo: &BigRational,
    hi: &BigRational,
) -> (BigRational, BigRational) {
    // One subdivision step keeping the unique root, by Sturm count.
    let mid = (lo + hi) / BigRational::from(BigInt::from(2));
    if count_roots_closed(p, lo, &mid) == 1 {
        (lo.clone(), mid)
    } else {
        (mid, hi.clone())
    }
}

/// Rounded fixed-point decimal rendering of a rational.
pub fn decimal_string(q: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = q * BigRational::from(scale.clone());
    // round half away from zero
    let (num, den) = (scaled.numer().clone(), scaled.denom().clone());
    let doubled = BigInt::from(2) * &num;
    let rounded = if num.is_negative() {
        (doubled - &den).div_floor(&(BigInt::from(2) * &den)) + BigInt::one()
    } else {
        (doubled + &den).div_floor(&(BigInt::from(2) * &den))
    };
    let negative = rounded.is_negative();
    let mag = rounded.abs();
    let (int_part, frac_part) = mag.div_rem(&scale);
    let frac_str = format!("{:0>width$}", frac_part.to_string(), width = digits as usize);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        format!("{}{}", sign, int_part)
    } else {
        format!("{}{}.{}", sign, int_part, frac_str)
    }
}

/// Exact equality of two real algebraic numbers.
pub fn algebraic_equal(a: &AlgebraicReal, b: &AlgebraicReal) -> bool {
    a.cmp(b) == Ordering::Equal
}

impl PartialEq for AlgebraicReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AlgebraicReal {}

impl PartialOrd for AlgebraicReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AlgebraicReal {
    fn cmp(&self, other: &Self) -> Ordering {
        AlgebraicReal::cmp(self, other)
    }
}

impl fmt::Debug for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            write!(f, "{}", q)
        } else {
            write!(f, "root of {} near {}", self.minpoly, self.approx_decimal(6))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2() -> AlgebraicReal {
        AlgebraicReal::new(
            IntPolynomial::from_i64(&[-2, 0, 1]),
            BigRational::from(BigInt::from(1)),
            BigRational::from(BigInt::from(2)),
        )
        .unwrap()
    }

    #[test]
    fn rational_values() {
        let a = AlgebraicReal::from_int(3);
        let b = AlgebraicReal::from_rational(BigRational::new(BigInt::from(6), BigInt::from(2)));
        assert_eq!(a, b);
        assert_eq!(a.to_f64(), 3.0);
    }

    #[test]
    fn sqrt2_basics() {
        let s = sqrt2();
        assert_eq!(s.sign(), Ordering::Greater);
        assert!((s.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-12);
        let dec = s.approx_decimal(10);
        assert_eq!(dec, "1.4142135624");
    }

    #[test]
    fn equality_independent_construction() {
        let a = sqrt2();
        // same root isolated by a different interval
        let b = AlgebraicReal::new(
            IntPolynomial::from_i64(&[-2, 0, 1]),
            BigRational::new(BigInt::from(7), BigInt::from(5)),
            BigRational::new(BigInt::from(3), BigInt::from(2)),
        )
        .unwrap();
        assert!(algebraic_equal(&a, &b));
        // sqrt2 vs the rational 1.41421356
        let c = AlgebraicReal::from_rational(BigRational::new(
            BigInt::from(141421356i64),
            BigInt::from(100000000i64),
        ));
        assert!(!algebraic_equal(&a, &c));
        assert_eq!(a.cmp(&c), Ordering::Greater);
    }

    #[test]
    fn negative_root_ordering() {
        let neg = AlgebraicReal::new(
            IntPolynomial::from_i64(&[-2, 0, 1]),
            BigRational::from(BigInt::from(-2)),
            BigRational::from(BigInt::from(-1)),
        )
        .unwrap();
        assert!(neg.is_negative());
        assert_eq!(neg.cmp(&sqrt2()), Ordering::Less);
    }

    #[test]
    fn powers() {
        let s = sqrt2();
        let two = s.pow(2);
        assert_eq!(two, AlgebraicReal::from_int(2));
        let eight = s.pow(6);
        assert_eq!(eight, AlgebraicReal::from_int(8));
        // golden-ratio-ish: (3+sqrt5)/2 is a root of x^2-3x+1
        let phi2 = AlgebraicReal::new(
            IntPolynomial::from_i64(&[1, -3, 1]),
            BigRational::from(BigInt::from(2)),
            BigRational::from(BigInt::from(3)),
        )
        .unwrap();
        let sq = phi2.pow(2);
        // x^2-3x+1 has roots (3±sqrt5)/2; squares are roots of x^2-7x+1
        assert_eq!(sq.minpoly(), &IntPolynomial::from_i64(&[1, -7, 1]));
    }

    #[test]
    fn sqrt_roundtrip() {
        let phi2 = AlgebraicReal::new(
            IntPolynomial::from_i64(&[1, -3, 1]),
            BigRational::from(BigInt::from(2)),
            BigRational::from(BigInt::from(3)),
        )
        .unwrap();
        let back = phi2.pow(2).sqrt().unwrap();
        assert!(algebraic_equal(&back, &phi2));
        // rational square root
        let four = AlgebraicReal::from_int(4);
        assert_eq!(four.sqrt().unwrap(), AlgebraicReal::from_int(2));
        // sqrt(2)
        let s = AlgebraicReal::from_int(2).sqrt().unwrap();
        assert!(algebraic_equal(&s, &sqrt2()));
    }

    #[test]
    fn total_order_consistent_with_numeric() {
        use crate::util::XorShift64;
        let mut rng = XorShift64::new(42);
        let polys = [
            IntPolynomial::from_i64(&[-2, 0, 1]),
            IntPolynomial::from_i64(&[-3, 0, 1]),
            IntPolynomial::from_i64(&[1, -3, 1]),
            IntPolynomial::from_i64(&[-1, -1, 1]),
        ];
        let mut values = vec![];
        for p in &polys {
            for (lo, hi) in crate::roots::isolate_real_roots(p) {
                values.push(AlgebraicReal::from_irreducible(p.clone(), lo, hi));
            }
        }
        for _ in 0..200 {
            let i = rng.next_below(values.len() as u64) as usize;
            let j = rng.next_below(values.len() as u64) as usize;
            let exact = values[i].cmp(&values[j]);
            let fa = values[i].to_f64();
            let fb = values[j].to_f64();
            if (fa - fb).abs() > 1e-9 {
                assert_eq!(exact, fa.partial_cmp(&fb).unwrap(), "{} vs {}", fa, fb);
            } else {
                assert_eq!(exact, Ordering::Equal);
            }
        }
    }

    #[test]
    fn decimal_rendering() {
        let q = BigRational::new(BigInt::from(-1), BigInt::from(3));
        assert_eq!(decimal_string(&q, 5), "-0.33333");
        let h = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(decimal_string(&h, 3), "0.500");
    }
}
