//! Dense univariate polynomials over the integers.
//!
//! Coefficients are stored little-endian (index = degree) with no
//! trailing zeros; the zero polynomial has an empty coefficient vector.
//! This module carries the characteristic and minimal polynomials of
//! the rest of the crate, so everything here is exact: pseudo-division,
//! primitive gcd, Yun squarefree decomposition, subresultant
//! resultants, and exact Lagrange interpolation.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn zero() -> Self {
        IntPolynomial { coeffs: vec![] }
    }

    pub fn one() -> Self {
        IntPolynomial::constant(BigInt::one())
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        IntPolynomial::from_coeffs(vec![BigInt::zero(), BigInt::one()])
    }

    pub fn constant(c: BigInt) -> Self {
        IntPolynomial::from_coeffs(vec![c])
    }

    /// Build from little-endian coefficients, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPolynomial::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `c * x^d`.
    pub fn monomial(c: BigInt, d: usize) -> Self {
        if c.is_zero() {
            return IntPolynomial::zero();
        }
        let mut coeffs = vec![BigInt::zero(); d + 1];
        coeffs[d] = c;
        IntPolynomial { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Degree of a known-nonzero polynomial.
    pub fn deg(&self) -> usize {
        self.degree().expect("degree of zero polynomial")
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Leading coefficient; zero for the zero polynomial.
    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rat(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from(c.clone());
        }
        acc
    }

    /// Sign of `p(a/b)` without building rationals: evaluates
    /// `sum c_i a^i b^(d-i)` in integers.
    pub fn sign_at(&self, x: &BigRational) -> i32 {
        if self.is_zero() {
            return 0;
        }
        let a = x.numer();
        let b = x.denom();
        let d = self.deg();
        let mut acc = BigInt::zero();
        // Horner in a with a final scale ladder in b.
        for i in (0..=d).rev() {
            acc = acc * a + &self.coeffs[i] * b.pow((d - i) as u32);
        }
        match acc.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn neg(&self) -> Self {
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) + other.coeff(i));
        }
        IntPolynomial::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) - other.coeff(i));
        }
        IntPolynomial::from_coeffs(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return IntPolynomial::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        IntPolynomial::from_coeffs(coeffs)
    }

    pub fn mul_scalar(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return IntPolynomial::zero();
        }
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiply by `x^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return IntPolynomial::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IntPolynomial { coeffs }
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return IntPolynomial::zero();
        }
        IntPolynomial::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// gcd of all coefficients, nonnegative; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divide out the content, keeping the sign of the leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return IntPolynomial::zero();
        }
        let g = self.content();
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| c / &g).collect(),
        }
    }

    /// Primitive part with positive leading coefficient: the canonical
    /// representative of the rational-multiple class.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return IntPolynomial::zero();
        }
        let p = self.primitive_part();
        if p.lc().is_negative() {
            p.neg()
        } else {
            p
        }
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Self {
        IntPolynomial::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// `p(x^k)`.
    pub fn inflate(&self, k: usize) -> Self {
        assert!(k >= 1);
        if self.is_zero() {
            return IntPolynomial::zero();
        }
        let mut coeffs = vec![BigInt::zero(); (self.coeffs.len() - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = c.clone();
        }
        IntPolynomial { coeffs }
    }

    /// Pseudo-remainder: returns `(k, r)` with
    /// `lc(g)^k * self = q * g + r`, `deg r < deg g`, `k = deg self - deg g + 1`
    /// (or `k = 0` when `deg self < deg g`).
    pub fn pseudo_rem(&self, g: &Self) -> (u32, IntPolynomial) {
        assert!(!g.is_zero(), "pseudo-division by zero");
        let dg = g.deg();
        if self.is_zero() || self.deg() < dg {
            return (0, self.clone());
        }
        let mut r = self.coeffs.clone();
        let glc = g.lc();
        let k = (self.deg() - dg + 1) as u32;
        let mut steps = 0u32;
        while r.len() >= dg + 1 {
            // strip trailing zeros
            while r.last().map_or(false, |c| c.is_zero()) {
                r.pop();
            }
            if r.len() < dg + 1 {
                break;
            }
            let dr = r.len() - 1;
            let lead = r.last().unwrap().clone();
            // r = glc * r - lead * x^(dr-dg) * g
            for c in r.iter_mut() {
                *c *= &glc;
            }
            for (i, gc) in g.coeffs.iter().enumerate() {
                r[dr - dg + i] -= &lead * gc;
            }
            steps += 1;
        }
        // pad multiplier to exactly k applications
        let mut rem = IntPolynomial::from_coeffs(r);
        if steps < k {
            let extra = glc.pow(k - steps);
            rem = rem.mul_scalar(&extra);
        }
        (k, rem)
    }

    /// Exact polynomial division over the integers; `None` if `g` does
    /// not divide `self` in `Z[x]`.
    pub fn exact_div(&self, g: &Self) -> Option<IntPolynomial> {
        assert!(!g.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(IntPolynomial::zero());
        }
        let dg = g.deg();
        if self.deg() < dg {
            return None;
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.deg() - dg + 1];
        let glc = g.lc();
        for qi in (0..q.len()).rev() {
            // current coefficient of degree qi + dg
            let c = r[qi + dg].clone();
            if c.is_zero() {
                continue;
            }
            let (quot, rem) = c.div_rem(&glc);
            if !rem.is_zero() {
                return None;
            }
            q[qi] = quot;
            for (i, gc) in g.coeffs.iter().enumerate() {
                let sub = &q[qi] * gc;
                r[qi + i] -= sub;
            }
        }
        if r.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(IntPolynomial::from_coeffs(q))
    }

    pub fn divides(&self, other: &Self) -> bool {
        other.exact_div(self).is_some()
    }

    /// Primitive gcd with positive leading coefficient (content is
    /// discarded; callers needing the full integer gcd combine contents
    /// themselves).
    pub fn gcd(&self, other: &Self) -> IntPolynomial {
        if self.is_zero() {
            return other.normalized();
        }
        if other.is_zero() {
            return self.normalized();
        }
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.deg() < b.deg() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let (_, r) = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.normalized()
    }

    /// Yun's squarefree decomposition: returns `[(g_1, 1), (g_2, 2), ...]`
    /// with `self ~ prod g_i^i` up to a rational constant, each `g_i`
    /// squarefree, pairwise coprime, normalized; factors with `g_i = 1`
    /// are omitted.
    pub fn squarefree_decomposition(&self) -> Vec<(IntPolynomial, u32)> {
        assert!(!self.is_zero(), "squarefree decomposition of zero");
        let f = self.normalized();
        if f.deg() == 0 {
            return vec![];
        }
        let fp = f.derivative();
        let g = f.gcd(&fp);
        if g.deg() == 0 {
            return vec![(f, 1)];
        }
        let mut out = vec![];
        let mut c = f.exact_div(&g).expect("gcd divides");
        let mut d = fp.exact_div(&g).expect("gcd divides derivative").sub(&c.derivative());
        let mut i = 1u32;
        loop {
            let a = c.gcd(&d);
            if a.deg() > 0 {
                out.push((a.normalized(), i));
            }
            c = c.exact_div(&a).expect("squarefree step divides");
            if c.deg() == 0 {
                break;
            }
            d = d.exact_div(&a).expect("squarefree step divides").sub(&c.derivative());
            i += 1;
        }
        out
    }

    /// Product of the distinct irreducible factors, each once.
    pub fn squarefree_part(&self) -> IntPolynomial {
        let mut out = IntPolynomial::one();
        for (g, _) in self.squarefree_decomposition() {
            out = out.mul(&g);
        }
        out.normalized()
    }

    /// Resultant via the subresultant polynomial remainder sequence.
    pub fn resultant(&self, other: &Self) -> BigInt {
        let f = self;
        let g = other;
        if f.is_zero() || g.is_zero() {
            return BigInt::zero();
        }
        if f.deg() == 0 {
            return f.lc().pow(g.deg() as u32);
        }
        if g.deg() == 0 {
            return g.lc().pow(f.deg() as u32);
        }
        // Collins' subresultant PRS.
        let mut a = f.clone();
        let mut b = g.clone();
        let mut sign = BigInt::one();
        if a.deg() < b.deg() {
            if (a.deg() * b.deg()) % 2 == 1 {
                sign = -sign;
            }
            std::mem::swap(&mut a, &mut b);
        }
        let mut gpar = BigInt::one();
        let mut h = BigInt::one();
        loop {
            let d = a.deg() - b.deg();
            if (a.deg() * b.deg()) % 2 == 1 {
                sign = -sign;
            }
            let (_, r) = a.pseudo_rem(&b);
            if r.is_zero() {
                return BigInt::zero();
            }
            a = b;
            // divide r by g * h^d
            let denom = &gpar * h.pow(d as u32);
            b = IntPolynomial::from_coeffs(
                r.coeffs
                    .iter()
                    .map(|c| {
                        let (q, rem) = c.div_rem(&denom);
                        debug_assert!(rem.is_zero(), "subresultant division not exact");
                        q
                    })
                    .collect(),
            );
            gpar = a.lc();
            // h = g^d * h^(1-d) i.e. h_{i} = lc(a)^d / h^{d-1}
            h = if d == 0 {
                h
            } else {
                let num = gpar.pow(d as u32);
                let den = h.pow((d - 1) as u32);
                let (q, rem) = num.div_rem(&den);
                debug_assert!(rem.is_zero());
                q
            };
            if b.deg() == 0 {
                // final: resultant = sign * lc(b)^deg(a) / h^{deg(a)-1}
                let d = a.deg();
                let num = b.lc().pow(d as u32);
                let den = h.pow((d - 1) as u32);
                let (q, rem) = num.div_rem(&den);
                debug_assert!(rem.is_zero());
                return sign * q;
            }
        }
    }

    /// Cauchy bound `1 + max |c_i| / |lc|` on the absolute value of any
    /// complex root, as a rational.
    pub fn root_bound(&self) -> BigRational {
        assert!(!self.is_zero());
        let lc = self.lc().abs();
        let mut m = BigInt::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        BigRational::one() + BigRational::new(m, lc)
    }

    /// Max absolute coefficient.
    pub fn height(&self) -> BigInt {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

/// Exact Lagrange interpolation through `(x_i, y_i)` with distinct
/// integer nodes; the result is returned cleared to integer
/// coefficients (primitive, sign preserved up to the clearing
/// constant), together with nothing else -- callers normalize.
pub fn interpolate_rational(points: &[(BigInt, BigRational)]) -> IntPolynomial {
    let n = points.len();
    assert!(n > 0);
    // Newton's divided differences over Q.
    let xs: Vec<BigRational> = points
        .iter()
        .map(|(x, _)| BigRational::from(x.clone()))
        .collect();
    let mut table: Vec<BigRational> = points.iter().map(|(_, y)| y.clone()).collect();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = &table[i] - &table[i - 1];
            let den = &xs[i] - &xs[i - j];
            table[i] = num / den;
        }
    }
    // Expand Newton form: poly = sum_j table[j] * prod_{i<j} (x - x_i).
    let mut poly: Vec<BigRational> = vec![BigRational::zero(); n];
    let mut basis: Vec<BigRational> = vec![BigRational::one()];
    for (j, coef) in table.iter().enumerate() {
        for (i, b) in basis.iter().enumerate() {
            poly[i] = &poly[i] + coef * b;
        }
        if j + 1 < n {
            // basis *= (x - x_j)
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] = &next[i + 1] + b;
                next[i] = &next[i] - &xs[j] * b;
            }
            basis = next;
        }
    }
    // Clear denominators.
    let mut den = BigInt::one();
    for c in &poly {
        den = den.lcm(c.denom());
    }
    IntPolynomial::from_coeffs(
        poly.iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect(),
    )
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if i == 0 {
                write!(f, "{}", mag)?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", mag)?;
                }
                if i == 1 {
                    write!(f, "x")?;
                } else {
                    write!(f, "x^{}", i)?;
                }
            }
        }
        Ok(())
    }
}

/// Canonical ordering used when listing factors: by degree, then
/// lexicographically by coefficients from the top.
pub fn cmp_poly(a: &IntPolynomial, b: &IntPolynomial) -> Ordering {
    match a.coeffs.len().cmp(&b.coeffs.len()) {
        Ordering::Equal => {}
        ord => return ord,
    }
    for i in (0..a.coeffs.len()).rev() {
        match a.coeffs[i].cmp(&b.coeffs[i]) {
            Ordering::Equal => {}
            ord => return ord,
        }
    }
    Ordering::Equal
}
