//! Absolute Jordan forms of invertible rational matrices.
//!
//! The absolute Jordan form replaces every eigenvalue of the complex
//! Jordan form by its modulus and lists the resulting
//! (modulus, block size) pairs in a canonical order. Block sizes are
//! recovered exactly from nullity sequences over Q; moduli are
//! certified real algebraic numbers obtained from a root-product
//! resultant, with a numeric root cluster step whose only job is
//! isolation (equalities are always decided exactly).

use crate::algebraic::{algebraic_equal, AlgebraicReal};
use crate::factor::factor;
use crate::hp::{self, Complex, R};
use crate::matrix::RationalMatrix;
use crate::poly::{interpolate_rational, IntPolynomial};
use crate::roots::{complex_roots, isolate_real_roots};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JordanError {
    #[error("matrix is singular")]
    Singular,
    #[error("not an eigenfactor: polynomial does not divide the characteristic polynomial")]
    NotAnEigenfactor,
    #[error("polynomial has a root at zero")]
    RootAtZero,
    #[error("modulus certification failed to converge")]
    CertificationFailed,
}

/// Characteristic polynomial det(xI - M), cleared to integer
/// coefficients.
pub fn char_poly(m: &RationalMatrix) -> IntPolynomial {
    m.char_poly()
}

/// Jordan block sizes (with counts) shared by every root of the
/// irreducible factor `p` of the characteristic polynomial of `m`,
/// recovered from the exact nullity sequence of p(M)^k. Sizes are
/// listed largest first.
pub fn block_structure(
    m: &RationalMatrix,
    p: &IntPolynomial,
) -> Result<Vec<(u32, u32)>, JordanError> {
    if m.is_singular() {
        return Err(JordanError::Singular);
    }
    let cp = m.char_poly();
    if !p.normalized().divides(&cp) {
        return Err(JordanError::NotAnEigenfactor);
    }
    let d = p.deg() as u32;
    let a = m.eval_poly(&p.normalized());
    let mut nullities = vec![0u32];
    let mut power = a.clone();
    loop {
        let nu = power.nullity() as u32;
        if nu == *nullities.last().unwrap() {
            break;
        }
        nullities.push(nu);
        power = power.mul(&a).unwrap();
    }
    // count of blocks of size >= k (per root): (nu_k - nu_{k-1}) / deg p
    let mut at_least = vec![];
    for k in 1..nullities.len() {
        let diff = nullities[k] - nullities[k - 1];
        debug_assert_eq!(diff % d, 0, "nullity increments must be multiples of deg p");
        at_least.push(diff / d);
    }
    let mut out = vec![];
    for (i, &c) in at_least.iter().enumerate() {
        let next = at_least.get(i + 1).copied().unwrap_or(0);
        if c > next {
            out.push(((i + 1) as u32, c - next));
        }
    }
    out.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(out)
}

/// The distinct moduli |lambda| over the roots lambda of an
/// irreducible polynomial, each as a certified algebraic real,
/// together with the number of roots attaining that modulus.
/// Sorted by descending modulus.
pub fn modulus_of_root_class(
    p: &IntPolynomial,
) -> Result<Vec<(AlgebraicReal, u32)>, JordanError> {
    let p = p.normalized();
    if p.coeff(0).is_zero() {
        return Err(JordanError::RootAtZero);
    }
    let d = p.deg();
    let mut moduli: Vec<(AlgebraicReal, u32)> = vec![];

    if d == 1 {
        let root = BigRational::new(-p.coeff(0), p.coeff(1));
        push_modulus(&mut moduli, AlgebraicReal::from_rational(root.abs()), 1);
        return Ok(moduli);
    }

    // Real roots contribute |x| directly, with p (or its reflection)
    // as the minimal polynomial.
    let real_intervals = isolate_real_roots(&p);
    for (lo, hi) in &real_intervals {
        let value = AlgebraicReal::from_irreducible(p.clone(), lo.clone(), hi.clone());
        let modulus = if value.is_negative() {
            let refl = p.reflect().normalized();
            AlgebraicReal::from_irreducible(refl, -hi.clone(), -lo.clone())
        } else {
            value
        };
        push_modulus(&mut moduli, modulus, 1);
    }

    let complex_count = d - real_intervals.len();
    debug_assert_eq!(complex_count % 2, 0);
    if complex_count > 0 {
        let squared = certified_complex_moduli_squared(&p, complex_count)?;
        for (msq, pairs) in squared {
            let modulus = msq.sqrt().expect("modulus squared is positive");
            push_modulus(&mut moduli, modulus, 2 * pairs);
        }
    }

    moduli.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(moduli)
}

fn push_modulus(list: &mut Vec<(AlgebraicReal, u32)>, value: AlgebraicReal, count: u32) {
    for (existing, c) in list.iter_mut() {
        if algebraic_equal(existing, &value) {
            *c += count;
            return;
        }
    }
    list.push((value, count));
}

/// Moduli squared of the strictly complex roots of `p`, certified:
/// every candidate is an exact root of the root-product resultant, and
/// the numeric root set of `p` (with rigorous radii) is used only to
/// isolate which candidates occur and how often. Returns pairs
/// (modulus^2, number of conjugate pairs).
fn certified_complex_moduli_squared(
    p: &IntPolynomial,
    complex_count: usize,
) -> Result<Vec<(AlgebraicReal, u32)>, JordanError> {
    let d = p.deg();
    // r(z) = Res_y(p(y), y^d p(z/y)) by interpolation on integer nodes.
    let npoints = d * d + 1;
    let points: Vec<(BigInt, BigRational)> = (0..npoints as i64)
        .map(|j| {
            let zj = BigInt::from(j);
            // q(y) = sum_i a_i z^i y^{d-i}
            let mut coeffs = vec![BigInt::zero(); d + 1];
            let mut zpow = BigInt::one();
            for i in 0..=d {
                coeffs[d - i] = p.coeff(i) * &zpow;
                zpow *= &zj;
            }
            let q = IntPolynomial::from_coeffs(coeffs);
            (zj, BigRational::from(p.resultant(&q)))
        })
        .collect();
    let rproduct = interpolate_rational(&points).normalized();

    // Candidate values: positive real roots of the squarefree part.
    struct Candidate {
        value: AlgebraicReal,
        pairs: u32,
    }
    let mut candidates: Vec<Candidate> = vec![];
    for (f, _) in factor(&rproduct.squarefree_part()) {
        for (lo, hi) in isolate_real_roots(&f) {
            let value = if f.deg() == 1 {
                AlgebraicReal::from_rational(BigRational::new(-f.coeff(0), f.coeff(1)))
            } else {
                AlgebraicReal::from_irreducible(f.clone(), lo, hi)
            };
            if value.sign() == Ordering::Greater {
                candidates.push(Candidate { value, pairs: 0 });
            }
        }
    }

    let mut bits = 128usize;
    'attempt: for _ in 0..8 {
        for c in candidates.iter_mut() {
            c.pairs = 0;
        }
        let roots = complex_roots(p, bits);
        // rigorous radii must give pairwise disjoint disks
        if !disks_disjoint(&roots) {
            bits *= 2;
            continue;
        }
        // classify real vs complex using the radii
        let mut complex_upper: Vec<(Complex, R)> = vec![];
        let mut real_like = 0usize;
        for (z, rad) in &roots {
            if hp::abs(&z.im) <= *rad {
                real_like += 1;
            } else if z.im > R::ZERO {
                complex_upper.push((z.clone(), rad.clone()));
            }
        }
        if real_like != d - complex_count || complex_upper.len() * 2 != complex_count {
            bits *= 2;
            continue;
        }
        // candidate isolating windows, refined against numeric widths
        let eps = BigRational::new(BigInt::one(), BigInt::one() << (bits / 2));
        let windows: Vec<(BigRational, BigRational)> = candidates
            .iter()
            .map(|c| c.value.refined_interval(&eps))
            .collect();
        for (z, rad) in &complex_upper {
            // modulus^2 enclosure with slack for arithmetic rounding
            let msq = z.norm_sqr();
            let zabs = z.abs();
            let err = (hp::from_f64(2.0, bits) * &zabs * rad)
                + rad * rad
                + hp::pow2(-(bits as i64) + 16, bits) * (R::ONE + msq.clone());
            let lo = hp::to_rational(&(msq.clone() - err.clone()));
            let hi = hp::to_rational(&(msq + err));
            let mut hit: Option<usize> = None;
            for (ci, w) in windows.iter().enumerate() {
                if !(hi < w.0 || w.1 < lo) {
                    if hit.is_some() {
                        bits *= 2;
                        continue 'attempt;
                    }
                    hit = Some(ci);
                }
            }
            match hit {
                Some(ci) => candidates[ci].pairs += 1,
                None => {
                    bits *= 2;
                    continue 'attempt;
                }
            }
        }
        return Ok(candidates
            .into_iter()
            .filter(|c| c.pairs > 0)
            .map(|c| (c.value, c.pairs))
            .collect());
    }
    Err(JordanError::CertificationFailed)
}

fn disks_disjoint(roots: &[(Complex, R)]) -> bool {
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let dist = roots[i].0.sub(&roots[j].0).abs();
            if dist <= roots[i].1.clone() + roots[j].1.clone() {
                return false;
            }
        }
    }
    true
}

/// One block of an absolute Jordan form.
#[derive(Clone, Debug)]
pub struct AjfBlock {
    pub modulus: AlgebraicReal,
    pub size: u32,
}

/// Canonical multiset of (modulus, block size) pairs.
///
/// Ordering convention: moduli descending; within a single modulus,
/// sizes descending. For matrices with nonreal eigenvalues this
/// extends the usual all-real-eigenvalue convention; any fixed
/// extension works because equality of forms is what the classifier
/// consumes.
#[derive(Clone)]
pub struct AbsoluteJordanForm {
    dim: usize,
    blocks: Vec<AjfBlock>,
}

impl AbsoluteJordanForm {
    pub fn compute(m: &RationalMatrix) -> Result<Self, JordanError> {
        absolute_jordan_form(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[AjfBlock] {
        &self.blocks
    }

    pub fn total_size(&self) -> u32 {
        self.blocks.iter().map(|b| b.size).sum()
    }

    fn canonicalize(&mut self) {
        self.blocks.sort_by(|a, b| {
            b.modulus
                .cmp(&a.modulus)
                .then_with(|| b.size.cmp(&a.size))
        });
    }

    /// Every modulus raised to the k-th power, sizes unchanged,
    /// re-canonicalized.
    pub fn pow(&self, k: u32) -> AbsoluteJordanForm {
        assert!(k >= 1);
        let mut out = AbsoluteJordanForm {
            dim: self.dim,
            blocks: self
                .blocks
                .iter()
                .map(|b| AjfBlock {
                    modulus: b.modulus.pow(k),
                    size: b.size,
                })
                .collect(),
        };
        out.canonicalize();
        out
    }

    /// Sizes of the blocks with modulus exactly 1, descending.
    pub fn unipotent_sizes(&self) -> Vec<u32> {
        let one = AlgebraicReal::one();
        self.blocks
            .iter()
            .filter(|b| algebraic_equal(&b.modulus, &one))
            .map(|b| b.size)
            .collect()
    }

    /// Total dimensions of the expanding (modulus > 1), unipotent
    /// (= 1) and contracting (< 1) parts.
    pub fn part_dims(&self) -> (u32, u32, u32) {
        let one = BigRational::one();
        let mut expanding = 0;
        let mut unipotent = 0;
        let mut contracting = 0;
        for b in &self.blocks {
            match b.modulus.cmp_rational(&one) {
                Ordering::Greater => expanding += b.size,
                Ordering::Equal => unipotent += b.size,
                Ordering::Less => contracting += b.size,
            }
        }
        (expanding, unipotent, contracting)
    }

    /// True if some modulus equals 1 exactly (an eigenvalue on the
    /// unit circle).
    pub fn has_unit_modulus(&self) -> bool {
        !self.unipotent_sizes().is_empty()
    }

    /// Multiset of block sizes, descending.
    pub fn size_multiset(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.blocks.iter().map(|b| b.size).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    /// Rational enclosure of prod modulus^size, refined until its
    /// width is at most `eps`.
    pub fn det_product_interval(&self, eps: &BigRational) -> (BigRational, BigRational) {
        let mut shrink = BigRational::new(BigInt::one(), BigInt::from(1u32) << 40);
        loop {
            let mut lo = BigRational::one();
            let mut hi = BigRational::one();
            for b in &self.blocks {
                let (mut l, h) = b.modulus.refined_interval(&shrink);
                if l.is_negative() {
                    l = BigRational::zero();
                }
                for _ in 0..b.size {
                    lo *= &l;
                    hi *= &h;
                }
            }
            if &hi - &lo <= *eps {
                return (lo, hi);
            }
            shrink /= BigRational::from(BigInt::from(1u32) << 20);
        }
    }
}

impl PartialEq for AbsoluteJordanForm {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.blocks.len() != other.blocks.len() {
            return false;
        }
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| {
            a.size == b.size && algebraic_equal(&a.modulus, &b.modulus)
        })
    }
}

impl Eq for AbsoluteJordanForm {}

impl fmt::Debug for AbsoluteJordanForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AJF[")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({} sz {})", b.modulus.approx_decimal(4), b.size)?;
        }
        write!(f, "]")
    }
}

/// Compute the canonical absolute Jordan form of an invertible
/// rational matrix.
pub fn absolute_jordan_form(m: &RationalMatrix) -> Result<AbsoluteJordanForm, JordanError> {
    if m.det().is_zero() {
        return Err(JordanError::Singular);
    }
    let cp = m.char_poly();
    let mut blocks = vec![];
    for (p, _mult) in factor(&cp) {
        let bs = block_structure(m, &p)?;
        let mods = modulus_of_root_class(&p)?;
        for &(size, count) in &bs {
            for (modulus, root_count) in &mods {
                for _ in 0..count * root_count {
                    blocks.push(AjfBlock {
                        modulus: modulus.clone(),
                        size,
                    });
                }
            }
        }
    }
    let mut ajf = AbsoluteJordanForm {
        dim: m.dim(),
        blocks,
    };
    ajf.canonicalize();
    debug_assert_eq!(ajf.total_size() as usize, m.dim());
    Ok(ajf)
}

/// Power of an absolute Jordan form (free-function form of
/// [`AbsoluteJordanForm::pow`]).
pub fn ajf_power(f: &AbsoluteJordanForm, k: u32) -> AbsoluteJordanForm {
    f.pow(k)
}

/// Real Jordan structure data: per irreducible factor of the
/// characteristic polynomial, the per-root block sizes with counts.
#[derive(Clone, Debug)]
pub struct RealJordanData {
    pub factors: Vec<(IntPolynomial, Vec<(u32, u32)>)>,
}

impl RealJordanData {
    pub fn compute(m: &RationalMatrix) -> Result<Self, JordanError> {
        if m.det().is_zero() {
            return Err(JordanError::Singular);
        }
        let cp = m.char_poly();
        let mut factors = vec![];
        for (p, _) in factor(&cp) {
            let bs = block_structure(m, &p)?;
            factors.push((p, bs));
        }
        Ok(RealJordanData { factors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::XorShift64;

    fn m(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_i64_rows(rows)
    }

    fn ipoly(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn block_structure_basic() {
        // [[1,1],[0,1]], p = x-1 -> one block of size 2
        let bs = block_structure(&m(&[&[1, 1], &[0, 1]]), &ipoly(&[-1, 1])).unwrap();
        assert_eq!(bs, vec![(2, 1)]);
        // [[2,0],[0,2]], p = x-2 -> two blocks of size 1
        let bs = block_structure(&m(&[&[2, 0], &[0, 2]]), &ipoly(&[-2, 1])).unwrap();
        assert_eq!(bs, vec![(1, 2)]);
        // wrong factor is rejected
        assert!(matches!(
            block_structure(&m(&[&[2]]), &ipoly(&[-3, 1])),
            Err(JordanError::NotAnEigenfactor)
        ));
    }

    #[test]
    fn block_structure_planted() {
        // J = blocks: size 3 and size 1 at eigenvalue 2, size 2 at eigenvalue 3
        let j = m(&[
            &[2, 1, 0, 0, 0, 0],
            &[0, 2, 1, 0, 0, 0],
            &[0, 0, 2, 0, 0, 0],
            &[0, 0, 0, 2, 0, 0],
            &[0, 0, 0, 0, 3, 1],
            &[0, 0, 0, 0, 0, 3],
        ]);
        // conjugate by a fixed unimodular matrix
        let mut s = RationalMatrix::identity(6);
        let mut rng = XorShift64::new(99);
        for _ in 0..12 {
            let i = rng.next_below(6) as usize;
            let k = rng.next_below(6) as usize;
            if i == k {
                continue;
            }
            let c = BigRational::from(BigInt::from(rng.next_range(-2, 2)));
            // s += e_i c e_k^T  (elementary row op keeps det = 1)
            let mut e = RationalMatrix::identity(6);
            e.set(i, k, c);
            s = s.mul(&e).unwrap();
        }
        let a = s.mul(&j).unwrap().mul(&s.inverse().unwrap()).unwrap();
        let bs2 = block_structure(&a, &ipoly(&[-2, 1])).unwrap();
        assert_eq!(bs2, vec![(3, 1), (1, 1)]);
        let bs3 = block_structure(&a, &ipoly(&[-3, 1])).unwrap();
        assert_eq!(bs3, vec![(2, 1)]);
    }

    #[test]
    fn moduli_pure_complex() {
        // x^2 + 2: both roots have modulus sqrt(2)
        let mods = modulus_of_root_class(&ipoly(&[2, 0, 1])).unwrap();
        assert_eq!(mods.len(), 1);
        assert_eq!(mods[0].1, 2);
        let sqrt2 = AlgebraicReal::from_int(2).sqrt().unwrap();
        assert!(algebraic_equal(&mods[0].0, &sqrt2));
    }

    #[test]
    fn moduli_rational_and_real_quadratic() {
        let mods = modulus_of_root_class(&ipoly(&[-2, 1])).unwrap();
        assert_eq!(mods.len(), 1);
        assert_eq!(mods[0].0, AlgebraicReal::from_int(2));
        assert_eq!(mods[0].1, 1);
        // x^2 - 3x + 1: two real roots (3±sqrt5)/2, distinct moduli
        let mods = modulus_of_root_class(&ipoly(&[1, -3, 1])).unwrap();
        assert_eq!(mods.len(), 2);
        assert_eq!(mods[0].1, 1);
        assert_eq!(mods[1].1, 1);
        assert!(mods[0].0.to_f64() > 2.6 && mods[0].0.to_f64() < 2.62);
        assert!(mods[1].0.to_f64() > 0.38 && mods[1].0.to_f64() < 0.39);
    }

    #[test]
    fn moduli_symmetric_real_pair() {
        // x^2 - 2: roots ±sqrt2 share modulus sqrt2, count 2
        let mods = modulus_of_root_class(&ipoly(&[-2, 0, 1])).unwrap();
        assert_eq!(mods.len(), 1);
        assert_eq!(mods[0].1, 2);
    }

    #[test]
    fn ajf_examples() {
        // [[2]] -> {(2, 1)}
        let f = absolute_jordan_form(&m(&[&[2]])).unwrap();
        assert_eq!(f.blocks().len(), 1);
        assert_eq!(f.blocks()[0].size, 1);
        assert_eq!(f.blocks()[0].modulus, AlgebraicReal::from_int(2));

        // [[0,-2],[1,0]] -> {(sqrt2, 1) x2}
        let f = absolute_jordan_form(&m(&[&[0, -2], &[1, 0]])).unwrap();
        assert_eq!(f.blocks().len(), 2);
        let sqrt2 = AlgebraicReal::from_int(2).sqrt().unwrap();
        for b in f.blocks() {
            assert_eq!(b.size, 1);
            assert!(algebraic_equal(&b.modulus, &sqrt2));
        }

        // [[1,1],[0,1]] -> {(1, 2)}
        let f = absolute_jordan_form(&m(&[&[1, 1], &[0, 1]])).unwrap();
        assert_eq!(f.blocks().len(), 1);
        assert_eq!(f.blocks()[0].size, 2);
        assert_eq!(f.unipotent_sizes(), vec![2]);

        // singular matrix rejected
        assert!(matches!(
            absolute_jordan_form(&m(&[&[1, 2], &[2, 4]])),
            Err(JordanError::Singular)
        ));
    }

    #[test]
    fn ajf_power_examples() {
        let f = absolute_jordan_form(&m(&[&[2]])).unwrap();
        let f3 = f.pow(3);
        assert_eq!(f3.blocks()[0].modulus, AlgebraicReal::from_int(8));

        let f = absolute_jordan_form(&m(&[&[0, -2], &[1, 0]])).unwrap();
        let f2 = f.pow(2);
        for b in f2.blocks() {
            assert_eq!(b.modulus, AlgebraicReal::from_int(2));
        }
    }

    #[test]
    fn ajf_power_matches_matrix_power() {
        let mut rng = XorShift64::new(31337);
        let mut tested = 0;
        while tested < 6 {
            let rows: Vec<Vec<BigRational>> = (0..4)
                .map(|_| {
                    (0..4)
                        .map(|_| BigRational::from(BigInt::from(rng.next_range(-4, 4))))
                        .collect()
                })
                .collect();
            let a = RationalMatrix::from_rows(rows).unwrap();
            if a.det().is_zero() {
                continue;
            }
            tested += 1;
            let f = absolute_jordan_form(&a).unwrap();
            for k in [2u32, 3] {
                let fk = f.pow(k);
                let g = absolute_jordan_form(&a.pow(k)).unwrap();
                assert_eq!(fk, g, "power law failed at k={} for {:?}", k, a);
            }
        }
    }

    #[test]
    fn mass_identity() {
        let a = m(&[&[2, 1, 0], &[0, 3, -1], &[1, 1, 4]]);
        let f = absolute_jordan_form(&a).unwrap();
        assert_eq!(f.total_size(), 3);
        let eps = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(12));
        let (lo, hi) = f.det_product_interval(&eps);
        let adet = a.det().abs();
        assert!(lo <= adet && adet <= hi, "det {} not in [{}, {}]", adet, lo, hi);
    }

    #[test]
    fn real_jordan_nullity_identity() {
        let a = m(&[
            &[2, 1, 0, 0],
            &[0, 2, 0, 0],
            &[0, 0, 0, -2],
            &[0, 0, 1, 0],
        ]);
        let data = RealJordanData::compute(&a).unwrap();
        for (p, sizes) in &data.factors {
            let d = p.deg() as u32;
            let pm = a.eval_poly(p);
            let mut power = RationalMatrix::identity(4);
            for k in 1..=4u32 {
                power = power.mul(&pm).unwrap();
                let expected: u32 = sizes.iter().map(|&(s, c)| s.min(k) * c).sum();
                assert_eq!(power.nullity() as u32, d * expected);
            }
        }
    }

    #[test]
    fn conjugation_invariance_spot() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let s = m(&[&[1, 3], &[2, 7]]); // det 1
        let b = s.mul(&a).unwrap().mul(&s.inverse().unwrap()).unwrap();
        assert_eq!(
            absolute_jordan_form(&a).unwrap(),
            absolute_jordan_form(&b).unwrap()
        );
    }
}
