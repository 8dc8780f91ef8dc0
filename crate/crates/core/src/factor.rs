//! Factorization of integer polynomials into irreducibles over Q.
//!
//! Classic Zassenhaus: Yun squarefree decomposition, factorization
//! modulo a small well-chosen prime (distinct-degree plus
//! Cantor-Zassenhaus splitting), linear Hensel lifting past the
//! Mignotte coefficient bound, then subset recombination.

use crate::poly::{cmp_poly, IntPolynomial};
use crate::util::{primes_below, XorShift64};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Full factorization over Q: primitive irreducible factors with
/// positive leading coefficients and their multiplicities, sorted
/// canonically. The product reconstructs the input up to a rational
/// constant. Panics on the zero polynomial.
pub fn factor(p: &IntPolynomial) -> Vec<(IntPolynomial, u32)> {
    assert!(!p.is_zero(), "factor of zero polynomial");
    let mut out: Vec<(IntPolynomial, u32)> = vec![];
    let mut f = p.normalized();
    if f.deg() == 0 {
        return out;
    }
    // powers of x
    let trailing = f.coeffs().iter().take_while(|c| c.is_zero()).count();
    if trailing > 0 {
        out.push((IntPolynomial::x(), trailing as u32));
        f = IntPolynomial::from_coeffs(f.coeffs()[trailing..].to_vec());
    }
    if f.deg() == 0 {
        return out;
    }
    for (g, mult) in f.squarefree_decomposition() {
        for irr in factor_squarefree(&g) {
            out.push((irr, mult));
        }
    }
    out.sort_by(|a, b| cmp_poly(&a.0, &b.0).then(a.1.cmp(&b.1)));
    out
}

pub fn is_irreducible(p: &IntPolynomial) -> bool {
    if p.is_zero() || p.deg() == 0 {
        return false;
    }
    let factors = factor(p);
    factors.len() == 1 && factors[0].1 == 1 && factors[0].0.deg() == p.deg()
}

/// Factor a primitive squarefree polynomial of degree >= 1.
fn factor_squarefree(f: &IntPolynomial) -> Vec<IntPolynomial> {
    let f = f.normalized();
    if f.deg() == 1 {
        return vec![f];
    }
    let (prime, modular) = best_modular_factorization(&f);
    if modular.len() == 1 {
        return vec![f];
    }
    // Hensel lift to p^k beyond twice the Mignotte bound on |lc * factor coefficient|.
    let lc = f.lc();
    let bound = mignotte_bound(&f) * lc.abs() * BigInt::from(2);
    let mut modulus = BigInt::from(prime);
    let mut k = 1u32;
    while modulus <= bound {
        modulus *= BigInt::from(prime);
        k += 1;
    }
    let lifted = hensel_lift(&f, prime, &modular, k);
    recombine(f, lifted, &modulus)
}

/// Mignotte-style bound on the coefficients of any monic-normalized
/// factor: 2^deg * sqrt(deg+1) * height(f), rounded up.
fn mignotte_bound(f: &IntPolynomial) -> BigInt {
    let d = f.deg() as u32;
    let sqrt_part = BigInt::from(d + 2); // >= ceil(sqrt(d+1)) for all d
    (BigInt::one() << d) * sqrt_part * f.height()
}

/// Try a handful of usable primes and keep the factorization with the
/// fewest modular factors.
fn best_modular_factorization(f: &IntPolynomial) -> (u64, Vec<ZpPoly>) {
    let primes = primes_below(20_000);
    let mut best: Option<(u64, Vec<ZpPoly>)> = None;
    let mut tried = 0;
    for &p in primes.iter().skip(1) {
        // skip 2
        if (&f.lc() % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = ZpPoly::from_int_poly(f, p);
        if fp.deg() != f.deg() {
            continue;
        }
        let deriv = fp.derivative();
        if deriv.is_zero() || !fp.gcd(&deriv).is_constant() {
            continue; // not squarefree mod p
        }
        let factors = fp.monic().factor_distinct_degree();
        let count = factors.len();
        let better = match &best {
            None => true,
            Some((_, cur)) => count < cur.len(),
        };
        if better {
            best = Some((p, factors));
        }
        tried += 1;
        if tried >= 4 || best.as_ref().map_or(false, |(_, v)| v.len() == 1) {
            break;
        }
    }
    best.expect("no usable prime found for squarefree polynomial")
}

/// Lift the monic modular factors g_i of f (mod p) to factors mod p^k
/// with f = lc(f) * prod G_i (mod p^k).
fn hensel_lift(f: &IntPolynomial, p: u64, factors: &[ZpPoly], k: u32) -> Vec<IntPolynomial> {
    let pbig = BigInt::from(p);
    let lc_inv = mod_inverse(&f.lc(), p);

    // Bezout basis: sigma_i = (prod_{j != i} g_j)^{-1} mod g_i.
    let mut sigmas: Vec<ZpPoly> = Vec::with_capacity(factors.len());
    for (i, gi) in factors.iter().enumerate() {
        let mut prod = ZpPoly::one(p);
        for (j, gj) in factors.iter().enumerate() {
            if j != i {
                prod = prod.mul(gj).rem(gi);
            }
        }
        sigmas.push(prod.inverse_mod(gi));
    }

    // Current integer lifts, coefficients in [0, p^k_cur).
    let mut lifts: Vec<IntPolynomial> = factors.iter().map(|g| g.to_int_poly()).collect();
    let mut modulus = pbig.clone();
    for _ in 1..k {
        // e = (f - lc * prod lifts) / modulus
        let mut prod = IntPolynomial::constant(f.lc());
        for g in &lifts {
            prod = prod.mul(g);
        }
        let diff = f.sub(&prod);
        let e = IntPolynomial::from_coeffs(
            diff.coeffs()
                .iter()
                .map(|c| {
                    let (q, r) = c.div_rem(&modulus);
                    debug_assert!(r.is_zero(), "hensel invariant broken");
                    q
                })
                .collect(),
        );
        let ebar = ZpPoly::from_int_poly(&e, p).mul_scalar(lc_inv);
        let next_modulus = &modulus * &pbig;
        for i in 0..lifts.len() {
            let gi = &factors[i];
            let delta = ebar.mul(&sigmas[i]).rem(gi);
            // lifts[i] += modulus * delta
            let correction = delta.to_int_poly().mul_scalar(&modulus);
            let mut sum = lifts[i].add(&correction);
            sum = IntPolynomial::from_coeffs(
                sum.coeffs()
                    .iter()
                    .map(|c| c.mod_floor(&next_modulus))
                    .collect(),
            );
            lifts[i] = sum;
        }
        modulus = next_modulus;
    }
    lifts
}

fn mod_inverse(a: &BigInt, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let a = a.mod_floor(&pb).to_u64().unwrap();
    pow_mod_u64(a, p - 2, p)
}

fn pow_mod_u64(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u64 = 1;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Symmetric representative of c mod m, in (-m/2, m/2].
fn symmetric(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * BigInt::from(2) > *m {
        r - m
    } else {
        r
    }
}

fn symmetric_poly(p: &IntPolynomial, m: &BigInt) -> IntPolynomial {
    IntPolynomial::from_coeffs(p.coeffs().iter().map(|c| symmetric(c, m)).collect())
}

/// Subset recombination of Hensel-lifted factors into true factors.
fn recombine(
    mut f: IntPolynomial,
    mut lifted: Vec<IntPolynomial>,
    modulus: &BigInt,
) -> Vec<IntPolynomial> {
    let mut out = vec![];
    let mut size = 1usize;
    'outer: while 2 * size <= lifted.len() {
        let indices: Vec<usize> = (0..lifted.len()).collect();
        for subset in combinations(&indices, size) {
            let mut cand = IntPolynomial::constant(f.lc());
            for &i in &subset {
                cand = cand.mul(&lifted[i]);
                cand = IntPolynomial::from_coeffs(
                    cand.coeffs().iter().map(|c| c.mod_floor(modulus)).collect(),
                );
            }
            let cand = symmetric_poly(&cand, modulus).primitive_part();
            if cand.deg() == 0 {
                continue;
            }
            if let Some(quot) = f.exact_div(&cand) {
                out.push(cand.normalized());
                f = quot.primitive_part();
                let keep: Vec<IntPolynomial> = lifted
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, g)| g.clone())
                    .collect();
                lifted = keep;
                continue 'outer;
            }
        }
        size += 1;
    }
    if f.deg() > 0 {
        out.push(f.normalized());
    }
    out
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let n = items.len();
    if k > n || k == 0 {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // advance to the next combination
        let mut i = k;
        let mut found = false;
        while i > 0 {
            i -= 1;
            if idx[i] != i + n - k {
                found = true;
                break;
            }
        }
        if !found {
            return out;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomials over Z/p for small odd primes.

#[derive(Clone, Debug, PartialEq, Eq)]
struct ZpPoly {
    p: u64,
    // little-endian, no trailing zeros
    c: Vec<u64>,
}

impl ZpPoly {
    fn zero(p: u64) -> Self {
        ZpPoly { p, c: vec![] }
    }

    fn one(p: u64) -> Self {
        ZpPoly { p, c: vec![1] }
    }

    fn x(p: u64) -> Self {
        ZpPoly { p, c: vec![0, 1] }
    }

    fn from_coeffs(p: u64, mut c: Vec<u64>) -> Self {
        for v in c.iter_mut() {
            *v %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        ZpPoly { p, c }
    }

    fn from_int_poly(f: &IntPolynomial, p: u64) -> Self {
        let pb = BigInt::from(p);
        ZpPoly::from_coeffs(
            p,
            f.coeffs()
                .iter()
                .map(|c| c.mod_floor(&pb).to_u64().unwrap())
                .collect(),
        )
    }

    fn to_int_poly(&self) -> IntPolynomial {
        IntPolynomial::from_coeffs(self.c.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    fn lc(&self) -> u64 {
        *self.c.last().unwrap_or(&0)
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn addmod(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn submod(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        let mut c = vec![0u64; n];
        for (i, v) in c.iter_mut().enumerate() {
            let a = self.c.get(i).copied().unwrap_or(0);
            let b = other.c.get(i).copied().unwrap_or(0);
            *v = self.submod(a, b);
        }
        ZpPoly::from_coeffs(self.p, c)
    }

    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return ZpPoly::zero(self.p);
        }
        let mut c = vec![0u64; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] = self.addmod(c[i + j], self.mulmod(a, b));
            }
        }
        ZpPoly::from_coeffs(self.p, c)
    }

    fn mul_scalar(&self, s: u64) -> Self {
        ZpPoly::from_coeffs(self.p, self.c.iter().map(|&a| self.mulmod(a, s)).collect())
    }

    fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = pow_mod_u64(self.lc(), self.p - 2, self.p);
        self.mul_scalar(inv)
    }

    fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return ZpPoly::zero(self.p);
        }
        ZpPoly::from_coeffs(
            self.p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| self.mulmod(c, (i as u64) % self.p))
                .collect(),
        )
    }

    /// Remainder of self divided by g (g nonzero).
    fn rem(&self, g: &Self) -> Self {
        self.divrem(g).1
    }

    fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// self^exp mod f, square-and-multiply over the exponent bits.
    fn pow_mod_big(&self, exp: &num_bigint::BigUint, f: &Self) -> Self {
        let mut acc = ZpPoly::one(self.p);
        let base = self.rem(f);
        let bits = exp.bits();
        for i in (0..bits).rev() {
            acc = acc.mul(&acc).rem(f);
            if exp.bit(i) {
                acc = acc.mul(&base).rem(f);
            }
        }
        acc
    }

    fn pow_mod_u64exp(&self, exp: u64, f: &Self) -> Self {
        self.pow_mod_big(&num_bigint::BigUint::from(exp), f)
    }

    /// Inverse of self modulo g (requires gcd(self, g) = 1).
    fn inverse_mod(&self, g: &Self) -> Self {
        let mut r0 = g.clone();
        let mut r1 = self.rem(g);
        let mut t0 = ZpPoly::zero(self.p);
        let mut t1 = ZpPoly::one(self.p);
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = r1;
            r1 = r;
            let nt = t0.sub(&q.mul(&t1).rem(g));
            t0 = t1;
            t1 = nt;
        }
        assert!(r0.is_constant() && !r0.is_zero(), "not invertible");
        let inv = pow_mod_u64(r0.lc(), self.p - 2, self.p);
        t0.mul_scalar(inv).rem(g)
    }

    fn divrem(&self, g: &Self) -> (Self, Self) {
        assert!(!g.is_zero());
        let dg = g.deg();
        if self.is_zero() || self.deg() < dg {
            return (ZpPoly::zero(self.p), self.clone());
        }
        let mut r = self.c.clone();
        let mut q = vec![0u64; self.deg() - dg + 1];
        let ginv = pow_mod_u64(g.lc(), self.p - 2, self.p);
        loop {
            while r.last() == Some(&0) {
                r.pop();
            }
            if r.len() <= dg {
                break;
            }
            let dr = r.len() - 1;
            let factor = self.mulmod(*r.last().unwrap(), ginv);
            q[dr - dg] = factor;
            for (i, &gc) in g.c.iter().enumerate() {
                let idx = dr - dg + i;
                r[idx] = self.submod(r[idx], self.mulmod(factor, gc));
            }
        }
        (
            ZpPoly::from_coeffs(self.p, q),
            ZpPoly::from_coeffs(self.p, r),
        )
    }

    /// Factor a monic squarefree polynomial into monic irreducibles:
    /// distinct-degree stage followed by Cantor-Zassenhaus splitting.
    fn factor_distinct_degree(&self) -> Vec<ZpPoly> {
        let mut out = vec![];
        let mut f = self.clone();
        let mut h = ZpPoly::x(self.p); // carries x^(p^d) mod f
        let mut d = 0usize;
        while f.deg() >= 1 {
            d += 1;
            if f.deg() < 2 * d {
                out.push(f.monic());
                break;
            }
            h = h.pow_mod_u64exp(self.p, &f);
            let g = h.sub(&ZpPoly::x(self.p)).gcd(&f);
            if g.deg() > 0 {
                // g = product of all irreducible factors of degree d
                let mut rng = XorShift64::new(0x5eed_0000 + d as u64);
                split_equal_degree(&g, d, &mut rng, &mut out);
                f = f.divrem(&g).0;
                h = h.rem(&f);
            }
        }
        out
    }
}

/// Cantor-Zassenhaus equal-degree splitting: f is monic squarefree, a
/// product of irreducibles all of degree d.
fn split_equal_degree(f: &ZpPoly, d: usize, rng: &mut XorShift64, out: &mut Vec<ZpPoly>) {
    if f.deg() == d {
        out.push(f.monic());
        return;
    }
    let p = f.p;
    let exp = (num_bigint::BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
    loop {
        let mut coeffs = vec![0u64; f.deg()];
        for c in coeffs.iter_mut() {
            *c = rng.next_below(p);
        }
        let a = ZpPoly::from_coeffs(p, coeffs);
        if a.is_zero() || a.is_constant() {
            continue;
        }
        let g0 = a.gcd(f);
        if g0.deg() > 0 && g0.deg() < f.deg() {
            split_equal_degree(&g0, d, rng, out);
            split_equal_degree(&f.divrem(&g0).0, d, rng, out);
            return;
        }
        let b = a.pow_mod_big(&exp, f).sub(&ZpPoly::one(p));
        let g = b.gcd(f);
        if g.deg() > 0 && g.deg() < f.deg() {
            split_equal_degree(&g, d, rng, out);
            split_equal_degree(&f.divrem(&g).0, d, rng, out);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(coeffs: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(coeffs)
    }

    #[test]
    fn factor_quadratics() {
        // x^2 + 2 irreducible
        assert_eq!(factor(&p(&[2, 0, 1])), vec![(p(&[2, 0, 1]), 1)]);
        // (x-2)^2 (x+1)
        let f = p(&[-2, 1]).mul(&p(&[-2, 1])).mul(&p(&[1, 1]));
        assert_eq!(factor(&f), vec![(p(&[-2, 1]), 2), (p(&[1, 1]), 1)]);
    }

    #[test]
    fn factor_degree_breakdown() {
        // (x^2+2)(x^2-2)(x-1)
        let f = p(&[2, 0, 1]).mul(&p(&[-2, 0, 1])).mul(&p(&[-1, 1]));
        let fs = factor(&f);
        assert_eq!(
            fs,
            vec![(p(&[-1, 1]), 1), (p(&[-2, 0, 1]), 1), (p(&[2, 0, 1]), 1)]
        );
    }

    #[test]
    fn factor_with_x_power() {
        let f = p(&[0, 0, -4, 0, 1]); // x^2 (x-2)(x+2)
        let fs = factor(&f);
        assert_eq!(
            fs,
            vec![(p(&[-2, 1]), 1), (p(&[0, 1]), 2), (p(&[2, 1]), 1)]
        );
    }

    #[test]
    fn factor_cyclotomic_like() {
        let f = p(&[1, 1, 1, 1, 1]);
        assert!(is_irreducible(&f));
        // x^4 - 1 = (x-1)(x+1)(x^2+1)
        let g = p(&[-1, 0, 0, 0, 1]);
        assert_eq!(
            factor(&g),
            vec![(p(&[-1, 1]), 1), (p(&[1, 1]), 1), (p(&[1, 0, 1]), 1)]
        );
    }

    #[test]
    fn factor_non_monic() {
        // (2x - 3)(3x + 5)
        let f = p(&[-3, 2]).mul(&p(&[5, 3]));
        assert_eq!(factor(&f), vec![(p(&[-3, 2]), 1), (p(&[5, 3]), 1)]);
    }

    #[test]
    fn factor_quartic_irreducible() {
        // minimal polynomial of sqrt(2)+sqrt(3)
        let f = p(&[1, 0, -10, 0, 1]);
        assert!(is_irreducible(&f));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn multiply_back(
            roots in proptest::collection::vec(-6i64..=6, 1..4),
            irr in proptest::sample::select(vec![
                vec![2i64, 0, 1],
                vec![1, 1, 1],
                vec![-2, 0, 0, 1],
                vec![3, -1, 2],
            ]),
        ) {
            let mut f = IntPolynomial::from_i64(&irr);
            for r in &roots {
                f = f.mul(&IntPolynomial::from_i64(&[-r, 1]));
            }
            let factors = factor(&f);
            let mut prod = IntPolynomial::one();
            for (g, m) in &factors {
                for _ in 0..*m {
                    prod = prod.mul(g);
                }
            }
            prop_assert_eq!(prod.normalized(), f.normalized());
            for (g, _) in &factors {
                prop_assert!(g.deg() >= 1);
            }
        }
    }
}
