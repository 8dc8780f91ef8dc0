//! Coherent lines in the homogeneous directed tree with d outgoing
//! edges per vertex, addressed by eventually periodic digit streams,
//! and the ultrametric d^(-h) on the boundary they carry.
//!
//! A `TreeAddress` fixes the height at which a line departs from the
//! reference line; below that height (and for a finite digit string,
//! beyond its end) the branch choice is digit 0. The digit at height h
//! selects the outgoing edge taken at the vertex of height h, so two
//! lines share vertices up to and including height h exactly when
//! their digits agree strictly below... precisely: they share the
//! vertex at height h+1 iff digits at heights <= h agree. All
//! computations here are exact.

use crate::classify::{common_base, multiplicative_dependence, DependencePair};
use crate::util::XorShift64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("addresses are equal: the hyperplanes coincide")]
    EqualAddresses,
    #[error("digit {0} out of range for branching degree {1}")]
    DigitOutOfRange(u32, u64),
    #[error("branching degree must be at least 2, got {0}")]
    DegreeTooSmall(u64),
    #[error("malformed address literal: {0}")]
    Parse(String),
}

/// Address of a coherent line: departure height plus an eventually
/// periodic stream of branch choices.
#[derive(Clone, Debug)]
pub struct TreeAddress {
    base_height: i64,
    pre: Vec<u32>,
    period: Vec<u32>, // empty = all zeros past the prefix
}

impl TreeAddress {
    pub fn new(
        degree: u64,
        base_height: i64,
        pre: Vec<u32>,
        period: Vec<u32>,
    ) -> Result<Self, TreeError> {
        for &d in pre.iter().chain(period.iter()) {
            if d as u64 >= degree {
                return Err(TreeError::DigitOutOfRange(d, degree));
            }
        }
        Ok(TreeAddress {
            base_height,
            pre,
            period,
        })
    }

    /// The reference line itself.
    pub fn reference() -> Self {
        TreeAddress {
            base_height: 0,
            pre: vec![],
            period: vec![],
        }
    }

    pub fn base_height(&self) -> i64 {
        self.base_height
    }

    /// Branch choice at the vertex of height h.
    pub fn digit_at(&self, h: i64) -> u32 {
        if h < self.base_height {
            return 0;
        }
        let idx = (h - self.base_height) as usize;
        if idx < self.pre.len() {
            self.pre[idx]
        } else if self.period.is_empty() {
            0
        } else {
            self.period[(idx - self.pre.len()) % self.period.len()]
        }
    }

    /// Heights below which both streams are certainly all-zero.
    fn start(&self) -> i64 {
        self.base_height
    }

    /// A window length past which two eventually periodic streams that
    /// agree must agree forever.
    fn agreement_window(&self, other: &Self) -> i64 {
        let start = self.start().min(other.start());
        let pre_end = (self.base_height + self.pre.len() as i64)
            .max(other.base_height + other.pre.len() as i64);
        let p1 = self.period.len().max(1) as i64;
        let p2 = other.period.len().max(1) as i64;
        (pre_end - start) + lcm_i64(p1, p2) + 1
    }

    pub fn equals(&self, other: &Self) -> bool {
        let start = self.start().min(other.start());
        let window = self.agreement_window(other);
        (0..window).all(|k| self.digit_at(start + k) == other.digit_at(start + k))
    }

    /// Parse the literal `h:d0d1d2(d3d4)` - base height, digit string,
    /// optional parenthesized period. Digits are single characters for
    /// degree <= 10, or comma-separated otherwise.
    pub fn parse(degree: u64, s: &str) -> Result<Self, TreeError> {
        let (h_str, rest) = s
            .split_once(':')
            .ok_or_else(|| TreeError::Parse(format!("missing ':' in {:?}", s)))?;
        let base_height: i64 = h_str
            .trim()
            .parse()
            .map_err(|_| TreeError::Parse(format!("bad height in {:?}", s)))?;
        let (pre_str, period_str) = match rest.split_once('(') {
            Some((p, q)) => {
                let q = q
                    .strip_suffix(')')
                    .ok_or_else(|| TreeError::Parse(format!("unclosed period in {:?}", s)))?;
                (p, Some(q))
            }
            None => (rest, None),
        };
        let parse_digits = |txt: &str| -> Result<Vec<u32>, TreeError> {
            let txt = txt.trim();
            if txt.is_empty() {
                return Ok(vec![]);
            }
            if txt.contains(',') {
                txt.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u32>()
                            .map_err(|_| TreeError::Parse(format!("bad digit {:?}", t)))
                    })
                    .collect()
            } else {
                txt.chars()
                    .map(|c| {
                        c.to_digit(10)
                            .ok_or_else(|| TreeError::Parse(format!("bad digit {:?}", c)))
                    })
                    .collect()
            }
        };
        let pre = parse_digits(pre_str)?;
        let period = match period_str {
            Some(t) => parse_digits(t)?,
            None => vec![],
        };
        TreeAddress::new(degree, base_height, pre, period)
    }
}

impl fmt::Display for TreeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.base_height)?;
        let multi = self
            .pre
            .iter()
            .chain(self.period.iter())
            .any(|&d| d > 9);
        let join = |ds: &[u32]| -> String {
            if multi {
                ds.iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            } else {
                ds.iter().map(|d| d.to_string()).collect()
            }
        };
        write!(f, "{}", join(&self.pre))?;
        if !self.period.is_empty() {
            write!(f, "({})", join(&self.period))?;
        }
        Ok(())
    }
}

fn lcm_i64(a: i64, b: i64) -> i64 {
    a / gcd_i64(a, b) * b
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd_i64(b, a % b)
    }
}

/// The height of the last common vertex level: the smallest height at
/// which the two addresses choose different branches. Errors when the
/// addresses coincide.
pub fn divergence_height(a: &TreeAddress, b: &TreeAddress) -> Result<i64, TreeError> {
    let start = a.start().min(b.start());
    let window = a.agreement_window(b);
    for k in 0..window {
        let h = start + k;
        if a.digit_at(h) != b.digit_at(h) {
            return Ok(h);
        }
    }
    Err(TreeError::EqualAddresses)
}

/// The boundary metric space for branching degree d >= 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryMetric {
    degree: u64,
}

impl BoundaryMetric {
    pub fn new(degree: u64) -> Result<Self, TreeError> {
        if degree < 2 {
            return Err(TreeError::DegreeTooSmall(degree));
        }
        Ok(BoundaryMetric { degree })
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    /// d^(-divergence_height), exactly; 0 for equal addresses.
    pub fn distance(&self, a: &TreeAddress, b: &TreeAddress) -> BigRational {
        match divergence_height(a, b) {
            Ok(h) => pow_signed(self.degree, -h),
            Err(_) => BigRational::zero(),
        }
    }
}

fn pow_signed(base: u64, exp: i64) -> BigRational {
    let mag = BigInt::from(base).pow(exp.unsigned_abs() as u32);
    if exp >= 0 {
        BigRational::from(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// Report from the re-encoding bilipschitz check.
#[derive(Clone, Debug)]
pub struct RescalingReport {
    pub dependence: DependencePair,
    pub common_base: BigInt,
    /// D1 = base^p, D2 = base^q
    pub p: u32,
    pub q: u32,
    /// sup over sampled pairs of max(ratio, 1/ratio), exact
    pub max_distortion: BigRational,
    /// the analytic bound base^max(p, q)
    pub bound: BigRational,
    pub pass: bool,
}

/// Decide whether the two boundary metrics admit a power rescaling
/// (degrees multiplicatively dependent) and, when they do, verify on
/// sampled address pairs that the digit-stream re-encoding through the
/// common base is bilipschitz with constant at most base^max(p,q).
pub fn check_power_rescaling(
    m1: &BoundaryMetric,
    m2: &BoundaryMetric,
    samples: usize,
) -> Option<RescalingReport> {
    let d1 = BigInt::from(m1.degree);
    let d2 = BigInt::from(m2.degree);
    let dependence = multiplicative_dependence(&d1, &d2)?;
    let (base, p, q) = common_base(&d1, &d2).expect("dependent degrees share a base");

    // Exact distance comparison through the common refinement: if the
    // first differing base-d1 digit sits at height h, and within that
    // digit the first differing base-`base` sub-digit is the j-th of p,
    // then the base-`base` divergence position is h*p + j and the
    // base-d2 divergence height is floor((h*p + j) / q).
    let mut rng = XorShift64::new(0x7ee5_0001);
    let mut max_distortion = BigRational::one();
    let mut observed = 0usize;
    while observed < samples {
        let (a, b) = random_distinct_pair(m1.degree, &mut rng);
        let h = match divergence_height(&a, &b) {
            Ok(h) => h,
            Err(_) => continue,
        };
        observed += 1;
        let da = a.digit_at(h);
        let db = b.digit_at(h);
        let j = first_subdigit_difference(da, db, &base, p);
        let pos = h * p as i64 + j as i64;
        let h2 = pos.div_euclid(q as i64);
        let dist1 = pow_signed(m1.degree, -h);
        let dist2 = pow_signed(m2.degree, -h2);
        let ratio = &dist2 / &dist1;
        let inv = BigRational::one() / &ratio;
        let distortion = if ratio > inv { ratio } else { inv };
        if distortion > max_distortion {
            max_distortion = distortion;
        }
    }
    let bound = BigRational::from(base.pow(p.max(q)));
    let pass = max_distortion <= bound;
    Some(RescalingReport {
        dependence,
        common_base: base,
        p,
        q,
        max_distortion,
        bound,
        pass,
    })
}

/// Index of the first differing base-`base` digit (most significant
/// first) in the width-p expansions of a and b.
fn first_subdigit_difference(a: u32, b: u32, base: &BigInt, p: u32) -> u32 {
    use num_traits::ToPrimitive;
    let base = base.to_u64().expect("small base");
    let mut pow = base.pow(p - 1);
    for j in 0..p {
        let da = (a as u64 / pow) % base;
        let db = (b as u64 / pow) % base;
        if da != db {
            return j;
        }
        pow /= base;
    }
    unreachable!("digits were equal")
}

/// Deterministic random pair of distinct addresses of the given degree.
fn random_distinct_pair(degree: u64, rng: &mut XorShift64) -> (TreeAddress, TreeAddress) {
    let gen = |rng: &mut XorShift64| {
        let base_height = rng.next_range(-3, 3);
        let pre_len = rng.next_below(6) as usize;
        let pre: Vec<u32> = (0..pre_len).map(|_| rng.next_below(degree) as u32).collect();
        let per_len = rng.next_below(4) as usize;
        let period: Vec<u32> = (0..per_len).map(|_| rng.next_below(degree) as u32).collect();
        TreeAddress::new(degree, base_height, pre, period).unwrap()
    };
    (gen(rng), gen(rng))
}

/// Random address for property tests.
pub fn random_address(degree: u64, rng: &mut XorShift64) -> TreeAddress {
    let base_height = rng.next_range(-4, 4);
    let pre_len = rng.next_below(8) as usize;
    let pre: Vec<u32> = (0..pre_len).map(|_| rng.next_below(degree) as u32).collect();
    let per_len = rng.next_below(5) as usize;
    let period: Vec<u32> = (0..per_len).map(|_| rng.next_below(degree) as u32).collect();
    TreeAddress::new(degree, base_height, pre, period).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(degree: u64, s: &str) -> TreeAddress {
        TreeAddress::parse(degree, s).unwrap()
    }

    #[test]
    fn digit_stream_semantics() {
        let a = addr(2, "0:01(10)");
        assert_eq!(a.digit_at(-5), 0);
        assert_eq!(a.digit_at(0), 0);
        assert_eq!(a.digit_at(1), 1);
        assert_eq!(a.digit_at(2), 1);
        assert_eq!(a.digit_at(3), 0);
        assert_eq!(a.digit_at(4), 1);
        // finite string continues with zeros
        let b = addr(2, "0:1");
        assert_eq!(b.digit_at(0), 1);
        assert_eq!(b.digit_at(1), 0);
        assert_eq!(b.digit_at(100), 0);
    }

    #[test]
    fn equality_of_representations() {
        // 0:0111... = purely periodic vs shifted representation
        let a = addr(2, "0:0(1)");
        let b = addr(2, "1:(1)");
        assert!(a.equals(&b));
        let c = addr(2, "0:01(11)");
        assert!(a.equals(&c));
        let d = addr(2, "0:0(10)");
        assert!(!a.equals(&d));
    }

    #[test]
    fn divergence_examples() {
        // vertices agree through height 3, differ from height 4 on:
        // digits equal at heights 0..=2, differ at height 3
        let a = addr(2, "0:0000");
        let b = addr(2, "0:0001");
        assert_eq!(divergence_height(&a, &b).unwrap(), 3);

        // differing at the first digit after base 0
        let c = addr(2, "0:1");
        assert_eq!(divergence_height(&a, &c).unwrap(), 0);

        // equal addresses error out
        assert_eq!(
            divergence_height(&a, &addr(2, "0:")),
            Err(TreeError::EqualAddresses)
        );
    }

    #[test]
    fn divergence_matches_digit_scan_oracle() {
        let mut rng = XorShift64::new(404);
        for d in [2u64, 3, 5] {
            for _ in 0..200 {
                let a = random_address(d, &mut rng);
                let b = random_address(d, &mut rng);
                let got = divergence_height(&a, &b);
                // brute-force digit scan over a wide window
                let start = a.base_height().min(b.base_height()) - 1;
                let mut brute = None;
                for h in start..start + 200 {
                    if a.digit_at(h) != b.digit_at(h) {
                        brute = Some(h);
                        break;
                    }
                }
                match (got, brute) {
                    (Ok(h), Some(hb)) => assert_eq!(h, hb),
                    (Err(_), None) => {}
                    (g, b) => panic!("mismatch: {:?} vs {:?}", g, b),
                }
            }
        }
    }

    #[test]
    fn qm_distance_examples() {
        let m2 = BoundaryMetric::new(2).unwrap();
        // divergence height 3 -> 1/8
        let a = addr(2, "0:0000");
        let b = addr(2, "0:0001");
        assert_eq!(
            m2.distance(&a, &b),
            BigRational::new(BigInt::one(), BigInt::from(8))
        );
        // equal -> 0
        assert_eq!(m2.distance(&a, &a), BigRational::zero());
        // divergence height -1 -> 2
        let c = addr(2, "-1:1");
        let r = addr(2, "0:");
        assert_eq!(m2.distance(&c, &r), BigRational::from(BigInt::from(2)));
    }

    #[test]
    fn ultrametric_inequality() {
        let mut rng = XorShift64::new(777);
        for d in [2u64, 3, 4, 8] {
            let metric = BoundaryMetric::new(d).unwrap();
            for _ in 0..500 {
                let a = random_address(d, &mut rng);
                let b = random_address(d, &mut rng);
                let c = random_address(d, &mut rng);
                let ab = metric.distance(&a, &b);
                let bc = metric.distance(&b, &c);
                let ac = metric.distance(&a, &c);
                let max = if ab > bc { ab.clone() } else { bc.clone() };
                assert!(ac <= max, "ultrametric failed d={}", d);
            }
        }
    }

    #[test]
    fn ball_counting_matches_enumeration() {
        // addresses at pairwise distance >= d^-(h-1) within the unit
        // ball: exactly the d^h choices of the first h digits
        for (d, h) in [(3u64, 4usize), (2, 10)] {
            let metric = BoundaryMetric::new(d).unwrap();
            let mut reps = vec![];
            for code in 0..(d as usize).pow(h as u32) {
                let mut digits = vec![];
                let mut c = code;
                for _ in 0..h {
                    digits.push((c % d as usize) as u32);
                    c /= d as usize;
                }
                reps.push(TreeAddress::new(d, 0, digits, vec![]).unwrap());
            }
            let reference = TreeAddress::reference();
            let min = pow_signed(d, -(h as i64 - 1));
            for i in 0..reps.len() {
                assert!(metric.distance(&reps[i], &reference) <= BigRational::one());
                for j in 0..i {
                    let dist = metric.distance(&reps[i], &reps[j]);
                    assert!(dist >= min);
                }
            }
            assert_eq!(reps.len(), (d as usize).pow(h as u32));
        }
    }

    #[test]
    fn rescaling_4_8() {
        let m4 = BoundaryMetric::new(4).unwrap();
        let m8 = BoundaryMetric::new(8).unwrap();
        let report = check_power_rescaling(&m4, &m8, 300).unwrap();
        assert_eq!(report.dependence, DependencePair { a: 3, b: 2 });
        assert_eq!(report.common_base, BigInt::from(2));
        assert_eq!((report.p, report.q), (2, 3));
        assert!(report.pass, "distortion {} bound {}", report.max_distortion, report.bound);
    }

    #[test]
    fn rescaling_identity_and_independent() {
        let m6 = BoundaryMetric::new(6).unwrap();
        let report = check_power_rescaling(&m6, &m6, 100).unwrap();
        assert_eq!(report.dependence, DependencePair { a: 1, b: 1 });
        // identity is an isometry: distortion exactly 1
        assert_eq!(report.max_distortion, BigRational::one());

        let m2 = BoundaryMetric::new(2).unwrap();
        let m3 = BoundaryMetric::new(3).unwrap();
        assert!(check_power_rescaling(&m2, &m3, 10).is_none());
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["0:01(10)", "-2:111", "3:(2)", "0:"] {
            let a = addr(3, s);
            let shown = a.to_string();
            let b = addr(3, &shown);
            assert!(a.equals(&b), "{} vs {}", s, shown);
        }
        // multi-digit parsing for large degree
        let a = TreeAddress::parse(16, "0:3,11,15(0,2)").unwrap();
        assert_eq!(a.digit_at(1), 11);
        assert!(TreeAddress::parse(2, "0:2").is_err());
        assert!(TreeAddress::parse(2, "nope").is_err());
    }
}
