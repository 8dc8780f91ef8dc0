//! Root machinery for integer polynomials: exact real-root isolation
//! by Sturm sequences, sign-based interval refinement, rational
//! square-root enclosures, and simultaneous complex root approximation
//! with certified error radii at arbitrary precision.

use crate::hp::{self, Complex, R};
use crate::poly::IntPolynomial;
use num_bigint::BigInt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Sturm chain of a squarefree polynomial.
pub struct SturmChain {
    chain: Vec<IntPolynomial>,
}

impl SturmChain {
    /// Build the chain for `p`. For correct root counting `p` must be
    /// squarefree; callers factor first.
    pub fn new(p: &IntPolynomial) -> Self {
        assert!(!p.is_zero());
        let mut chain = vec![p.primitive_part()];
        if p.deg() >= 1 {
            chain.push(p.derivative().primitive_part());
            loop {
                let n = chain.len();
                let f = &chain[n - 2];
                let g = &chain[n - 1];
                if g.is_zero() {
                    chain.pop();
                    break;
                }
                if g.deg() == 0 {
                    break;
                }
                let (k, r) = f.pseudo_rem(g);
                if r.is_zero() {
                    break;
                }
                // keep the sign of the true remainder, then negate
                let mut next = r.primitive_part();
                if g.lc().is_negative() && k % 2 == 1 {
                    // multiplier lc^k was negative: r has flipped sign
                    next = next.neg();
                }
                chain.push(next.neg());
            }
        }
        SturmChain { chain }
    }

    fn variations(signs: impl Iterator<Item = i32>) -> usize {
        let mut count = 0;
        let mut last = 0i32;
        for s in signs {
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn variations_at(&self, x: &BigRational) -> usize {
        Self::variations(self.chain.iter().map(|p| p.sign_at(x)))
    }

    pub fn variations_at_neg_inf(&self) -> usize {
        Self::variations(self.chain.iter().map(|p| {
            let s = match p.lc().sign() {
                num_bigint::Sign::Minus => -1,
                num_bigint::Sign::NoSign => 0,
                num_bigint::Sign::Plus => 1,
            };
            if p.degree().unwrap_or(0) % 2 == 1 {
                -s
            } else {
                s
            }
        }))
    }

    pub fn variations_at_pos_inf(&self) -> usize {
        Self::variations(self.chain.iter().map(|p| match p.lc().sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }))
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots_halfopen(&self, lo: &BigRational, hi: &BigRational) -> usize {
        self.variations_at(lo) - self.variations_at(hi)
    }

    pub fn count_real_roots(&self) -> usize {
        self.variations_at_neg_inf() - self.variations_at_pos_inf()
    }
}

/// Number of real roots of squarefree `p` in the closed interval
/// `[lo, hi]`.
pub fn count_roots_closed(p: &IntPolynomial, lo: &BigRational, hi: &BigRational) -> usize {
    if lo > hi {
        return 0;
    }
    let chain = SturmChain::new(p);
    let mut n = chain.count_roots_halfopen(lo, hi);
    if p.sign_at(lo) == 0 {
        n += 1;
    }
    n
}

/// Isolating intervals for every real root of a squarefree polynomial,
/// in increasing order. Every returned interval `[lo, hi]` contains
/// exactly one root; endpoints are not roots except for point
/// intervals `[r, r]` marking exact rational roots.
pub fn isolate_real_roots(p: &IntPolynomial) -> Vec<(BigRational, BigRational)> {
    assert!(!p.is_zero());
    if p.deg() == 0 {
        return vec![];
    }
    let chain = SturmChain::new(p);
    let bound = p.root_bound() + BigRational::one();
    let lo = -bound.clone();
    let hi = bound;
    let mut out = vec![];
    subdivide(p, &chain, &lo, &hi, &mut out);
    out
}

fn subdivide(
    p: &IntPolynomial,
    chain: &SturmChain,
    lo: &BigRational,
    hi: &BigRational,
    out: &mut Vec<(BigRational, BigRational)>,
) {
    let n = chain.count_roots_halfopen(lo, hi);
    if n == 0 {
        return;
    }
    if n == 1 {
        out.push((lo.clone(), hi.clone()));
        return;
    }
    let mid = pick_nonroot_split(p, lo, hi);
    subdivide(p, chain, lo, &mid, out);
    subdivide(p, chain, &mid, hi, out);
}

/// A point strictly inside `(lo, hi)` where `p` does not vanish.
fn pick_nonroot_split(p: &IntPolynomial, lo: &BigRational, hi: &BigRational) -> BigRational {
    let two = BigRational::from(BigInt::from(2));
    let mut m = (lo + hi) / &two;
    let mut step = (hi - lo) / BigRational::from(BigInt::from(4));
    loop {
        if p.sign_at(&m) != 0 {
            return m;
        }
        m += &step;
        step /= &two;
    }
}

/// One bisection step preserving the unique root of `p` in `[lo, hi]`.
/// Requires a sign change across the interval (or a point interval,
/// which is returned unchanged). Hitting the root exactly collapses to
/// a point interval.
pub fn refine_step(
    p: &IntPolynomial,
    lo: &BigRational,
    hi: &BigRational,
) -> (BigRational, BigRational) {
    if lo == hi {
        return (lo.clone(), hi.clone());
    }
    let mid = (lo + hi) / BigRational::from(BigInt::from(2));
    let sm = p.sign_at(&mid);
    if sm == 0 {
        return (mid.clone(), mid);
    }
    let sl = p.sign_at(lo);
    debug_assert!(sl != 0, "left endpoint is a root");
    if sl * sm < 0 {
        (lo.clone(), mid)
    } else {
        (mid, hi.clone())
    }
}

/// Refine until `hi - lo <= eps`.
pub fn refine_to_width(
    p: &IntPolynomial,
    mut lo: BigRational,
    mut hi: BigRational,
    eps: &BigRational,
) -> (BigRational, BigRational) {
    while &hi - &lo > *eps {
        let (l, h) = refine_step(p, &lo, &hi);
        lo = l;
        hi = h;
    }
    (lo, hi)
}

/// Rational enclosure `(lo, hi)` of sqrt(q) for q >= 0 with
/// `hi - lo <= 2^-bits * max(1, sqrt(q))`.
pub fn sqrt_bounds(q: &BigRational, bits: u32) -> (BigRational, BigRational) {
    assert!(!q.is_negative(), "sqrt of negative rational");
    if q.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    let a = q.numer();
    let b = q.denom();
    // sqrt(a/b) = sqrt(a*b)/b; scale by 4^m for precision
    let scale = BigInt::one() << (2 * bits as usize);
    let s = (a * b * &scale).sqrt();
    let den = BigRational::from(b * (BigInt::one() << bits as usize));
    let lo = BigRational::from(s.clone()) / den.clone();
    let hi = BigRational::from(s + BigInt::one()) / den;
    debug_assert!(&lo * &lo <= *q && &hi * &hi >= *q);
    (lo, hi)
}

/// Simultaneous complex root approximation (Durand-Kerner) at the
/// given precision. Returns one entry per root of `p` (which must be
/// squarefree): the approximation and a certified radius such that the
/// closed disks, when pairwise disjoint, each contain exactly one root
/// of `p`.
pub fn complex_roots(p: &IntPolynomial, bits: usize) -> Vec<(Complex, R)> {
    let d = p.deg();
    assert!(d >= 1);
    let coeffs: Vec<R> = p
        .coeffs()
        .iter()
        .map(|c| hp::from_bigint(c, bits))
        .collect();
    let lc = coeffs.last().unwrap().clone();
    let eval = |z: &Complex| -> Complex {
        let mut acc = Complex::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(z);
            acc.re += c;
        }
        acc
    };

    // Deterministic spiral of starting points inside the root bound.
    let rb = crate::hp::from_rational(&p.root_bound(), 64);
    let rb_f = hp::to_f64(&rb);
    let mut zs: Vec<Complex> = (0..d)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / (d as f64);
            let radius = rb_f * (0.3 + 0.5 * (k as f64 + 1.0) / (d as f64));
            Complex::new(
                hp::from_f64(radius * angle.cos(), bits),
                hp::from_f64(radius * angle.sin(), bits),
            )
        })
        .collect();

    let tol = hp::pow2(-(bits as i64) + 8, bits);
    let max_iter = 200 + 40 * d;
    for _ in 0..max_iter {
        let mut max_step = R::ZERO;
        for i in 0..d {
            let mut denom = Complex::from_real(lc.clone());
            for j in 0..d {
                if j != i {
                    denom = denom.mul(&zs[i].sub(&zs[j]));
                }
            }
            if denom.is_zero() {
                // coincident iterates: nudge deterministically
                zs[i].re += hp::pow2(-7, bits);
                continue;
            }
            let delta = eval(&zs[i]).div(&denom);
            let step = delta.abs();
            if step > max_step {
                max_step = step.clone();
            }
            zs[i] = zs[i].sub(&delta);
        }
        let scale = zs
            .iter()
            .map(|z| z.abs())
            .fold(R::ONE.with_precision(bits).value(), hp::max);
        if max_step < tol.clone() * scale {
            break;
        }
    }

    // Certified radii: d * |p(z_i)| / (|lc| * prod_{j != i} |z_i - z_j|).
    let lc_abs = hp::abs(&lc);
    let df = hp::from_f64(d as f64, bits);
    (0..d)
        .map(|i| {
            let mut prod = lc_abs.clone();
            for j in 0..d {
                if j != i {
                    prod *= zs[i].sub(&zs[j]).abs();
                }
            }
            let radius = eval(&zs[i]).abs() * &df / prod;
            (zs[i].clone(), radius)
        })
        .collect()
}
