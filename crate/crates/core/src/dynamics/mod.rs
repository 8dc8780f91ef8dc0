//! Numeric laboratory for the solvable group R^n x| R built from an
//! invertible rational matrix: the one-parameter subgroup M^t, the
//! metric family d_t(x, y) = ||M^-t (x - y)||, growth profiling of
//! vectors, reconstruction of the absolute Jordan form from measured
//! growth, pseudo-orbit shadowing onto center leaves, and the uniform
//! bilipschitz comparison of two groups whose matrices share a powered
//! absolute Jordan form.

pub mod linalg;
pub mod splitting;

use crate::hp::{self, R};
use crate::jordan::{absolute_jordan_form, JordanError};
use crate::matrix::RationalMatrix;
use crate::roots::isolate_real_roots;
use crate::util::XorShift64;
use linalg::{expm, logm, numeric_rank, vec_norm, vec_sub, FMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use splitting::{build_splitting, jordan_basis, SpectralData, Splitting};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynError {
    #[error("matrix is singular")]
    Singular,
    #[error("zero vector")]
    ZeroVector,
    #[error("CENTER_PRESENT: an eigenvalue lies on the unit circle")]
    CenterPresent,
    #[error("no real logarithm after squaring twice")]
    NoRealLogarithm,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Jordan(#[from] JordanError),
}

/// Tunables for growth fitting.
#[derive(Clone, Debug)]
pub struct GrowthConfig {
    pub t_max: f64,
    pub samples: usize,
    /// distance-to-integer tolerance for the fitted polynomial degree
    pub degree_threshold: f64,
    /// max absolute regression residual before flagging UNRESOLVED
    pub residual_threshold: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            t_max: 40.0,
            samples: 25,
            degree_threshold: 0.2,
            residual_threshold: 1e-3,
        }
    }
}

/// Outcome of the degree fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DegreeFit {
    Resolved(u32),
    Unresolved { raw: f64 },
}

/// Measured growth of t -> ||M^t v||: exponential rate (natural log)
/// and polynomial degree, with the fit residual.
#[derive(Clone, Debug)]
pub struct GrowthProfile {
    pub rate: f64,
    pub degree: DegreeFit,
    pub residual: f64,
}

/// One envelope measurement: the profile of a probe from filtration
/// layer `level` of modulus class `class`.
#[derive(Clone, Debug)]
pub struct EnvelopeProbe {
    pub class: usize,
    pub level: u32,
    pub log_modulus: f64,
    pub profile: GrowthProfile,
}

impl GrowthProfile {
    pub fn resolved_degree(&self) -> Option<u32> {
        match self.degree {
            DegreeFit::Resolved(d) => Some(d),
            DegreeFit::Unresolved { .. } => None,
        }
    }
}

/// A one-parameter subgroup through (a power of) an invertible
/// rational matrix, realized by its principal logarithm at working
/// precision, together with the exact spectral data and the invariant
/// splitting.
pub struct OneParameterSubgroup {
    original: RationalMatrix,
    base: RationalMatrix,
    squarings: u32,
    digits: u32,
    bits: usize,
    log_m: FMatrix,
    spectral: SpectralData,
    splitting: Splitting,
}

impl OneParameterSubgroup {
    /// Construct at the given decimal working precision. The matrix is
    /// squared (at most twice, recorded in `squarings`) until it has
    /// no negative real eigenvalue, so a principal real logarithm
    /// exists.
    pub fn new(m: &RationalMatrix, digits: u32) -> Result<Self, DynError> {
        if m.det() == BigRational::from(BigInt::from(0)) {
            return Err(DynError::Singular);
        }
        let mut base = m.clone();
        let mut squarings = 0u32;
        while has_negative_real_eigenvalue(&base) {
            if squarings == 2 {
                return Err(DynError::NoRealLogarithm);
            }
            base = base.mul(&base).expect("square dimensions agree");
            squarings += 1;
        }
        let mut bits = hp::bits_for_digits(digits).max(128);
        for _attempt in 0..4 {
            let spectral = SpectralData::compute(&base, bits)?;
            let mf = FMatrix::from_rational_matrix(&base, bits);
            let log_m = match logm(&mf, bits) {
                Some(l) => l,
                None => {
                    bits *= 2;
                    continue;
                }
            };
            // exp(log M) must reproduce M entrywise within 10^(-digits/2)
            let back = expm(&log_m, bits);
            let err = back.sub(&mf).max_abs();
            let threshold = reciprocal_pow10(digits / 2, bits);
            if err > threshold {
                bits *= 2;
                continue;
            }
            let splitting = build_splitting(&base, &spectral, bits)?;
            return Ok(OneParameterSubgroup {
                original: m.clone(),
                base,
                squarings,
                digits,
                bits,
                log_m,
                spectral,
                splitting,
            });
        }
        Err(DynError::Numeric(
            "logarithm verification kept failing at increased precision".into(),
        ))
    }

    pub fn base(&self) -> &RationalMatrix {
        &self.base
    }

    pub fn original(&self) -> &RationalMatrix {
        &self.original
    }

    pub fn squarings(&self) -> u32 {
        self.squarings
    }

    pub fn precision_digits(&self) -> u32 {
        self.digits
    }

    pub fn precision_bits(&self) -> usize {
        self.bits
    }

    pub fn generator(&self) -> &FMatrix {
        &self.log_m
    }

    pub fn splitting(&self) -> &Splitting {
        &self.splitting
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// M^t = exp(t log M) at working precision.
    pub fn evaluate(&self, t: f64) -> FMatrix {
        self.evaluate_r(&hp::from_f64(t, self.bits))
    }

    pub fn evaluate_r(&self, t: &R) -> FMatrix {
        expm(&self.log_m.scale(t), self.bits)
    }

    /// Exact integer power of the base matrix (cross-check surface for
    /// integer times).
    pub fn evaluate_exact_integer(&self, k: u32) -> RationalMatrix {
        self.base.pow(k)
    }

    /// d_t(x, y) = ||M^-t (x - y)||.
    pub fn metric_distance(&self, t: f64, x: &[f64], y: &[f64]) -> f64 {
        let xb: Vec<R> = x.iter().map(|&v| hp::from_f64(v, self.bits)).collect();
        let yb: Vec<R> = y.iter().map(|&v| hp::from_f64(v, self.bits)).collect();
        hp::to_f64(&self.metric_distance_r(&hp::from_f64(t, self.bits), &xb, &yb))
    }

    pub fn metric_distance_r(&self, t: &R, x: &[R], y: &[R]) -> R {
        let flow = expm(&self.log_m.scale(&-t.clone()), self.bits);
        vec_norm(&flow.mul_vec(&vec_sub(x, y)))
    }

    /// Growth profile of one vector, forward time window
    /// [t_max/2, t_max].
    pub fn growth_profile(&self, v: &[f64], cfg: &GrowthConfig) -> Result<GrowthProfile, DynError> {
        if v.iter().all(|&c| c == 0.0) {
            return Err(DynError::ZeroVector);
        }
        let vr: Vec<R> = v.iter().map(|&c| hp::from_f64(c, self.bits)).collect();
        let profiler = GrowthProfiler::new(self, forward_grid(cfg), cfg);
        Ok(profiler.profile(&vr))
    }

    /// Growth profiles of many vectors over one shared time grid; the
    /// flow matrices are computed once.
    pub fn growth_profiles(
        &self,
        vectors: &[Vec<f64>],
        cfg: &GrowthConfig,
    ) -> Result<Vec<GrowthProfile>, DynError> {
        let profiler = GrowthProfiler::new(self, forward_grid(cfg), cfg);
        vectors
            .iter()
            .map(|v| {
                if v.iter().all(|&c| c == 0.0) {
                    return Err(DynError::ZeroVector);
                }
                let vr: Vec<R> = v.iter().map(|&c| hp::from_f64(c, self.bits)).collect();
                Ok(profiler.profile(&vr))
            })
            .collect()
    }

    /// Growth profiles of conjugate pairs (re, im) over one shared
    /// grid, measured through the complex vector norm.
    pub fn growth_profiles_pairs(
        &self,
        pairs: &[(Vec<f64>, Vec<f64>)],
        cfg: &GrowthConfig,
    ) -> Result<Vec<GrowthProfile>, DynError> {
        let profiler = GrowthProfiler::new(self, forward_grid(cfg), cfg);
        pairs
            .iter()
            .map(|(re, im)| {
                if re.iter().all(|&c| c == 0.0) && im.iter().all(|&c| c == 0.0) {
                    return Err(DynError::ZeroVector);
                }
                let rr: Vec<R> = re.iter().map(|&c| hp::from_f64(c, self.bits)).collect();
                let ri: Vec<R> = im.iter().map(|&c| hp::from_f64(c, self.bits)).collect();
                Ok(profiler.profile_pair(&rr, &ri))
            })
            .collect()
    }

    /// Growth profiles of one full-precision probe per fresh filtration
    /// layer of every eigenvalue: the envelope check surface. Probes
    /// are generic combinations of the layer bases, built internally so
    /// no precision is lost on the way in (a rounded probe leaks into
    /// faster directions and ruins slow-class fits).
    pub fn envelope_profiles(&self, cfg: &GrowthConfig) -> Result<Vec<EnvelopeProbe>, DynError> {
        let profiler = GrowthProfiler::new(self, forward_grid(cfg), cfg);
        let mut out = vec![];
        for (ci, class) in self.splitting.classes.iter().enumerate() {
            for rl in &class.root_layers {
                for (level, basis) in rl.levels.iter().enumerate() {
                    let lower = if level == 0 {
                        0
                    } else {
                        rl.levels[level - 1].len()
                    };
                    if basis.len() == lower {
                        continue;
                    }
                    let n = self.dim();
                    let mut re = vec![R::ZERO; n];
                    let mut im = vec![R::ZERO; n];
                    for (j, b) in basis.iter().enumerate() {
                        let c = hp::from_f64((j + 1) as f64, self.bits);
                        for k in 0..n {
                            re[k] += &c * &b[k].re;
                            im[k] += &c * &b[k].im;
                        }
                    }
                    let profile = profiler.profile_pair(&re, &im);
                    out.push(EnvelopeProbe {
                        class: ci,
                        level: level as u32,
                        log_modulus: class.log_modulus,
                        profile,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Sampled (t, log ||M^t v||) pairs for external plotting.
    pub fn growth_samples(&self, v: &[f64], cfg: &GrowthConfig) -> Result<Vec<(f64, f64)>, DynError> {
        if v.iter().all(|&c| c == 0.0) {
            return Err(DynError::ZeroVector);
        }
        let vr: Vec<R> = v.iter().map(|&c| hp::from_f64(c, self.bits)).collect();
        let profiler = GrowthProfiler::new(self, forward_grid(cfg), cfg);
        Ok(profiler
            .flows
            .iter()
            .map(|(t, flow)| {
                let norm = vec_norm(&flow.mul_vec(&vr));
                (*t, hp::to_f64(&norm.ln()))
            })
            .collect())
    }
}

fn forward_grid(cfg: &GrowthConfig) -> Vec<f64> {
    let lo = cfg.t_max / 2.0;
    let hi = cfg.t_max;
    let m = cfg.samples.max(6);
    (0..m)
        .map(|i| lo + (hi - lo) * (i as f64) / ((m - 1) as f64))
        .collect()
}

fn backward_grid(cfg: &GrowthConfig) -> Vec<f64> {
    forward_grid(cfg).into_iter().map(|t| -t).collect()
}

fn reciprocal_pow10(digits: u32, bits: usize) -> R {
    let p = BigInt::from(10u32).pow(digits.max(1));
    hp::one(bits) / hp::from_bigint(&p, bits)
}

fn has_negative_real_eigenvalue(m: &RationalMatrix) -> bool {
    let cp = m.char_poly();
    for (p, _) in crate::factor::factor(&cp) {
        for (lo, hi) in isolate_real_roots(&p) {
            // the root is negative iff its interval sits below zero
            // after refinement
            let alg = if p.deg() == 1 {
                crate::algebraic::AlgebraicReal::from_rational(BigRational::new(
                    -p.coeff(0),
                    p.coeff(1),
                ))
            } else {
                crate::algebraic::AlgebraicReal::from_irreducible(p.clone(), lo, hi)
            };
            if alg.is_negative() {
                return true;
            }
        }
    }
    false
}

/// Shared flow samples for fitting many vectors on one time grid.
struct GrowthProfiler<'a> {
    flows: Vec<(f64, FMatrix)>,
    cfg: &'a GrowthConfig,
    bits: usize,
}

impl<'a> GrowthProfiler<'a> {
    fn new(s: &OneParameterSubgroup, grid: Vec<f64>, cfg: &'a GrowthConfig) -> Self {
        let flows = grid
            .into_iter()
            .map(|t| (t, s.evaluate(t)))
            .collect();
        GrowthProfiler {
            flows,
            cfg,
            bits: s.bits,
        }
    }

    fn profile(&self, v: &[R]) -> GrowthProfile {
        let ys: Vec<R> = self
            .flows
            .iter()
            .map(|(_, flow)| vec_norm(&flow.mul_vec(v)).ln())
            .collect();
        self.fit(ys)
    }

    /// Profile of a conjugate pair (re, im): the series is
    /// log sqrt(||M^t re||^2 + ||M^t im||^2), i.e. the complex vector
    /// norm, which is free of the elliptic-part oscillation that a
    /// single real vector in a rotation plane picks up.
    fn profile_pair(&self, re: &[R], im: &[R]) -> GrowthProfile {
        let half = hp::from_f64(0.5, self.bits);
        let ys: Vec<R> = self
            .flows
            .iter()
            .map(|(_, flow)| {
                let a = flow.mul_vec(re);
                let b = flow.mul_vec(im);
                let sq = a.iter().map(|x| x * x).fold(R::ZERO, |acc, x| acc + x)
                    + b.iter().map(|x| x * x).fold(R::ZERO, |acc, x| acc + x);
                sq.ln() * &half
            })
            .collect();
        self.fit(ys)
    }

    /// Least squares of the log-growth series against
    /// {t, log|t|, 1, 1/t, 1/t^2, 1/t^3}: the inverse powers absorb
    /// the finite-time corrections coming from subdominant polynomial
    /// terms inside the norm, so the rate and degree coefficients
    /// converge fast in t_max.
    fn fit(&self, ys: Vec<R>) -> GrowthProfile {
        const K: usize = 6;
        let bits = self.bits;
        let m = self.flows.len();
        let mut phi: Vec<[R; K]> = Vec::with_capacity(m);
        for (t, _) in &self.flows {
            let tb = hp::from_f64(*t, bits);
            let ta = hp::from_f64(t.abs(), bits);
            let inv = hp::one(bits) / tb.clone();
            phi.push([
                tb,
                ta.ln(),
                hp::one(bits),
                inv.clone(),
                &inv * &inv,
                &inv * &inv * &inv,
            ]);
        }
        // normal equations
        let mut g = FMatrix::zeros(K);
        let mut rhs = vec![R::ZERO; K];
        for (row, y) in phi.iter().zip(&ys) {
            for i in 0..K {
                for j in 0..K {
                    let prod = &row[i] * &row[j];
                    g.e[i * K + j] = &g.e[i * K + j] + prod;
                }
                rhs[i] = &rhs[i] + &row[i] * y;
            }
        }
        let coeffs = match g.inverse(bits) {
            Some(gi) => gi.mul_vec(&rhs),
            None => {
                return GrowthProfile {
                    rate: f64::NAN,
                    degree: DegreeFit::Unresolved { raw: f64::NAN },
                    residual: f64::INFINITY,
                }
            }
        };
        let mut residual = 0.0f64;
        for (row, y) in phi.iter().zip(&ys) {
            let mut pred = R::ZERO;
            for i in 0..K {
                pred += &row[i] * &coeffs[i];
            }
            let err = hp::to_f64(&hp::abs(&(y - pred))).abs();
            residual = residual.max(err);
        }
        let rate = hp::to_f64(&coeffs[0]);
        let raw = hp::to_f64(&coeffs[1]);
        let rounded = raw.round();
        let degree = if (raw - rounded).abs() <= self.cfg.degree_threshold
            && rounded >= -0.5
            && residual <= self.cfg.residual_threshold
        {
            DegreeFit::Resolved(rounded.max(0.0) as u32)
        } else {
            DegreeFit::Unresolved { raw }
        };
        GrowthProfile {
            rate,
            degree,
            residual,
        }
    }
}

/// One block of a reconstructed (numeric) absolute Jordan form.
#[derive(Clone, Debug)]
pub struct ApproxBlock {
    pub modulus: f64,
    pub size: u32,
    pub count: u32,
}

/// Absolute Jordan form recovered from growth measurements alone:
/// numeric moduli and exact block-size counts.
#[derive(Clone, Debug)]
pub struct ApproxAjf {
    /// sorted by descending modulus
    pub blocks: Vec<ApproxBlock>,
}

impl ApproxAjf {
    /// Compare with an exact form: block size multiset must match
    /// exactly, moduli within `tol`.
    pub fn agrees_with(&self, exact: &crate::jordan::AbsoluteJordanForm, tol: f64) -> bool {
        let mut mine: Vec<(f64, u32)> = vec![];
        for b in &self.blocks {
            for _ in 0..b.count {
                mine.push((b.modulus, b.size));
            }
        }
        let theirs: Vec<(f64, u32)> = exact
            .blocks()
            .iter()
            .map(|b| (b.modulus.to_f64(), b.size))
            .collect();
        if mine.len() != theirs.len() {
            return false;
        }
        let key = |x: &(f64, u32)| (-x.0, std::cmp::Reverse(x.1));
        let mut mine_sorted = mine;
        mine_sorted.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        // exact list is already canonical (desc modulus, desc size)
        mine_sorted
            .iter()
            .zip(&theirs)
            .all(|(a, b)| (a.0 - b.0).abs() <= tol && a.1 == b.1)
    }
}

/// Recover the absolute Jordan form of the subgroup's base matrix from
/// growth profiles of random vectors sampled inside the splitting's
/// filtration subspaces, in forward and backward time. Rates and
/// degrees come from the measurements; filtration dimensions are
/// counted as numeric ranks of the profile-bucketed sample sets.
/// Requires no eigenvalue on the unit circle.
pub fn reconstruct_ajf_from_growth(
    s: &OneParameterSubgroup,
    samples_per_layer: usize,
    cfg: &GrowthConfig,
) -> Result<ApproxAjf, DynError> {
    if s.spectral.has_unit_modulus() {
        return Err(DynError::CenterPresent);
    }
    // Precision must cover the dynamic range: sampled vectors carry
    // numeric error ~2^-bits that the dominant class amplifies by
    // (max/min modulus)^t relative to the class signal. The rate
    // refinement below evaluates at time 2k, which sets the budget.
    let (mods_min, mods_max) = {
        let ms: Vec<f64> = s.splitting.classes.iter().map(|c| c.modulus.to_f64()).collect();
        (
            ms.iter().cloned().fold(f64::INFINITY, f64::min),
            ms.iter().cloned().fold(0.0, f64::max),
        )
    };
    let log_ratio = (mods_max / mods_min).log2().max(0.1);
    // largest refinement horizon that keeps the precision bill sane
    let mut refine_k: u32 = 256;
    while refine_k > 32 && (2.0 * refine_k as f64 * log_ratio) > 4000.0 {
        refine_k /= 2;
    }
    let spread_bits = (2.0 * refine_k as f64 * log_ratio)
        .max(cfg.t_max * log_ratio)
        .ceil() as usize;
    let needed_bits = spread_bits + 320;
    let boosted_holder;
    let sub = if needed_bits > s.bits {
        let digits = (needed_bits as f64 * std::f64::consts::LOG10_2).ceil() as u32 + 8;
        boosted_holder = OneParameterSubgroup::new(&s.base, digits)?;
        &boosted_holder
    } else {
        s
    };

    let bits = sub.bits;
    let fwd = GrowthProfiler::new(sub, forward_grid(cfg), cfg);
    let bwd = GrowthProfiler::new(sub, backward_grid(cfg), cfg);
    let mut rng = XorShift64::new(0x9e11_ab0a);

    struct Sample {
        /// real columns carried by this sample (one for a real root,
        /// the re/im pair for a complex one)
        columns: Vec<Vec<R>>,
        rate: f64,
        degree: u32,
    }
    let mut samples: Vec<Sample> = vec![];
    // Sampling unit: one eigenvalue's filtration layer. Random complex
    // combinations within a single root keep the measured series free
    // of cross-eigenvalue beats; the complex norm removes the elliptic
    // oscillation of conjugate pairs.
    for class in &sub.splitting.classes {
        for rl in &class.root_layers {
            for (_level, basis) in rl.levels.iter().enumerate() {
                if basis.is_empty() {
                    continue;
                }
                for _ in 0..samples_per_layer.max(2) {
                    let mut re = vec![R::ZERO; sub.dim()];
                    let mut im = vec![R::ZERO; sub.dim()];
                    for b in basis {
                        let cr = hp::from_f64(rng.next_f64() * 2.0 - 1.0, bits);
                        let ci = if rl.is_real {
                            R::ZERO
                        } else {
                            hp::from_f64(rng.next_f64() * 2.0 - 1.0, bits)
                        };
                        for k in 0..sub.dim() {
                            // (cr + i ci) * (b.re + i b.im)
                            re[k] += &cr * &b[k].re - &ci * &b[k].im;
                            im[k] += &cr * &b[k].im + &ci * &b[k].re;
                        }
                    }
                    if re.iter().all(|c| *c == R::ZERO) && im.iter().all(|c| *c == R::ZERO) {
                        continue;
                    }
                    // profile in both time directions, keep the better fit
                    let pf = fwd.profile_pair(&re, &im);
                    let pb = bwd.profile_pair(&re, &im);
                    let (rate, deg) = match (pf.resolved_degree(), pb.resolved_degree()) {
                        (Some(df), Some(db)) => {
                            if pf.residual <= pb.residual {
                                (pf.rate, df)
                            } else {
                                (pb.rate, db)
                            }
                        }
                        (Some(df), None) => (pf.rate, df),
                        (None, Some(db)) => (pb.rate, db),
                        (None, None) => continue,
                    };
                    let mut columns = vec![re];
                    if !rl.is_real {
                        columns.push(im);
                    }
                    samples.push(Sample {
                        columns,
                        rate,
                        degree: deg,
                    });
                }
            }
        }
    }
    if samples.is_empty() {
        return Err(DynError::Numeric("no resolvable growth samples".into()));
    }

    // Rate refinement: with the degree pinned by the fit, the long-lag
    // quotient [Y(2k) - Y(k) - d ln 2] / k evaluated on exact integer
    // matrix powers has bias O(1/k^2), well under the window fit.
    {
        let k = refine_k;
        let mk = FMatrix::from_rational_matrix(&sub.base.pow(k), sub.bits);
        let m2k = FMatrix::from_rational_matrix(&sub.base.pow(2 * k), sub.bits);
        let half = hp::from_f64(0.5, sub.bits);
        let ln2 = hp::from_f64(2.0, sub.bits).ln();
        let pair_log = |flow: &FMatrix, cols: &[Vec<R>]| -> R {
            let mut sq = R::ZERO;
            for c in cols {
                let image = flow.mul_vec(c);
                sq += image.iter().map(|x| x * x).fold(R::ZERO, |a, b| a + b);
            }
            sq.ln() * &half
        };
        for sm in samples.iter_mut() {
            let y1 = pair_log(&mk, &sm.columns);
            let y2 = pair_log(&m2k, &sm.columns);
            let d = hp::from_f64(sm.degree as f64, sub.bits);
            let kk = hp::from_f64(k as f64, sub.bits);
            let refined = (y2 - y1 - d * &ln2) / kk;
            sm.rate = hp::to_f64(&refined);
        }
    }

    // cluster measured rates
    samples.sort_by(|a, b| a.rate.partial_cmp(&b.rate).unwrap());
    let gap = 5e-3f64;
    let mut clusters: Vec<Vec<usize>> = vec![];
    for (i, sm) in samples.iter().enumerate() {
        match clusters.last_mut() {
            Some(cl) if (sm.rate - samples[*cl.last().unwrap()].rate).abs() < gap => {
                cl.push(i);
            }
            _ => clusters.push(vec![i]),
        }
    }

    let mut blocks = vec![];
    for cluster in &clusters {
        let mean_rate: f64 =
            cluster.iter().map(|&i| samples[i].rate).sum::<f64>() / cluster.len() as f64;
        let max_degree = cluster.iter().map(|&i| samples[i].degree).max().unwrap();
        // D_i = rank of all sample columns with degree <= i
        let mut dims = vec![0usize; (max_degree + 1) as usize];
        for i in 0..=max_degree {
            let set: Vec<Vec<R>> = cluster
                .iter()
                .filter(|&&j| samples[j].degree <= i)
                .flat_map(|&j| samples[j].columns.iter().cloned())
                .collect();
            dims[i as usize] = numeric_rank(&set, bits);
        }
        // blocks of size >= i+1: n_i = D_i - D_{i-1}; size-k count =
        // n_{k-1} - n_k
        let mut n_at = vec![0i64; (max_degree + 2) as usize];
        for i in 0..=max_degree as usize {
            let prev = if i == 0 { 0 } else { dims[i - 1] as i64 };
            n_at[i] = dims[i] as i64 - prev;
        }
        for k in 1..=(max_degree as usize + 1) {
            let count = n_at[k - 1] - n_at.get(k).copied().unwrap_or(0);
            if count > 0 {
                blocks.push(ApproxBlock {
                    modulus: mean_rate.exp(),
                    size: k as u32,
                    count: count as u32,
                });
            }
        }
    }
    blocks.sort_by(|a, b| {
        b.modulus
            .partial_cmp(&a.modulus)
            .unwrap()
            .then(b.size.cmp(&a.size))
    });
    Ok(ApproxAjf { blocks })
}

// ---------------------------------------------------------------------------
// Pseudo-orbits and shadowing.

/// One flow segment: spatial start point, start height, duration.
#[derive(Clone, Debug)]
pub struct Segment {
    pub point: Vec<f64>,
    pub time: f64,
    pub duration: f64,
}

/// A chain of flow segments with bounded jumps.
#[derive(Clone, Debug)]
pub struct PseudoOrbit {
    pub segments: Vec<Segment>,
    pub epsilon: f64,
    pub min_duration: f64,
}

impl PseudoOrbit {
    /// Validate the defining bounds: durations exceed `min_duration`
    /// and consecutive jump distances stay below `epsilon`. The jump
    /// between segment i and i+1 is measured at the landing height as
    /// ||M^-h (x_{i+1} - x_i)|| + |time gap|.
    pub fn validate(&self, s: &OneParameterSubgroup) -> Result<f64, DynError> {
        let mut max_jump = 0.0f64;
        for seg in &self.segments {
            if seg.duration <= self.min_duration {
                return Err(DynError::Precondition(format!(
                    "segment duration {} not above the minimum {}",
                    seg.duration, self.min_duration
                )));
            }
        }
        for w in self.segments.windows(2) {
            let end_h = w[0].time + w[0].duration;
            let spatial = s.metric_distance(end_h, &w[0].point, &w[1].point);
            let temporal = (w[1].time - end_h).abs();
            let jump = spatial + temporal;
            max_jump = max_jump.max(jump);
            if jump >= self.epsilon {
                return Err(DynError::Precondition(format!(
                    "jump {} exceeds epsilon {}",
                    jump, self.epsilon
                )));
            }
        }
        Ok(max_jump)
    }
}

/// Result of shadowing: the center-leaf pseudo-orbit plus the measured
/// and analytic distances.
#[derive(Clone, Debug)]
pub struct ShadowReport {
    pub shadow: PseudoOrbit,
    /// max over segments and sampled times of the distance between the
    /// original and shadow flows
    pub delta: f64,
    /// geometric-series bound from the splitting's contraction rates
    pub bound: f64,
    /// max hyperbolic component of a shadow jump (should be ~0)
    pub center_leak: f64,
}

/// Shadow a pseudo-orbit by one whose spatial jumps lie in the
/// unipotent-modulus subspace (a single center leaf): each start point
/// is corrected by a hyperbolic offset; contracting components of the
/// jumps are summed over the future, expanding components over the
/// past, with zero corrections at the orbit ends.
pub fn shadow_pseudo_orbit(
    s: &OneParameterSubgroup,
    orbit: &PseudoOrbit,
) -> Result<ShadowReport, DynError> {
    let bits = s.bits;
    let n = s.dim();
    let segs = &orbit.segments;
    if segs.is_empty() {
        return Err(DynError::Precondition("empty pseudo-orbit".into()));
    }
    for seg in segs {
        if seg.point.len() != n {
            return Err(DynError::Precondition("point dimension mismatch".into()));
        }
    }
    let split = &s.splitting;
    let to_r = |v: &[f64]| -> Vec<R> { v.iter().map(|&c| hp::from_f64(c, bits)).collect() };

    // jump vectors between consecutive segments
    let jumps: Vec<Vec<R>> = segs
        .windows(2)
        .map(|w| vec_sub(&to_r(&w[1].point), &to_r(&w[0].point)))
        .collect();
    let jplus: Vec<Vec<R>> = jumps.iter().map(|j| split.p_plus.mul_vec(j)).collect();
    let jminus: Vec<Vec<R>> = jumps.iter().map(|j| split.p_minus.mul_vec(j)).collect();

    // corrections: c_i = -sum_{j<i} plus_j + sum_{j>=i} minus_j
    let m = segs.len();
    let mut corrections: Vec<Vec<R>> = vec![vec![R::ZERO; n]; m];
    let mut acc_plus = vec![R::ZERO; n];
    for i in 1..m {
        acc_plus = linalg::vec_add(&acc_plus, &jplus[i - 1]);
        corrections[i] = acc_plus.iter().map(|x| -x.clone()).collect();
    }
    let mut acc_minus = vec![R::ZERO; n];
    for i in (0..m).rev() {
        if i < jumps.len() {
            acc_minus = linalg::vec_add(&acc_minus, &jminus[i]);
        }
        corrections[i] = linalg::vec_add(&corrections[i], &acc_minus);
    }

    // shadow orbit
    let shadow_segments: Vec<Segment> = segs
        .iter()
        .zip(&corrections)
        .map(|(seg, c)| {
            let corrected: Vec<f64> = to_r(&seg.point)
                .iter()
                .zip(c)
                .map(|(x, d)| hp::to_f64(&(x + d)))
                .collect();
            Segment {
                point: corrected,
                time: seg.time,
                duration: seg.duration,
            }
        })
        .collect();

    // measured delta: sup over segments, sampled times, of
    // ||M^{-(s_i + t)} c_i||
    let mut delta = 0.0f64;
    for (seg, c) in segs.iter().zip(&corrections) {
        for k in 0..=8 {
            let t = seg.time + seg.duration * (k as f64) / 8.0;
            let flow = expm(&s.log_m.scale(&hp::from_f64(-t, bits)), bits);
            let dist = hp::to_f64(&vec_norm(&flow.mul_vec(c)));
            delta = delta.max(dist);
        }
    }

    // center leak of the shadow jumps
    let mut center_leak = 0.0f64;
    for w in shadow_segments.windows(2) {
        let j = vec_sub(&to_r(&w[1].point), &to_r(&w[0].point));
        let leak_p = vec_norm(&split.p_plus.mul_vec(&j));
        let leak_m = vec_norm(&split.p_minus.mul_vec(&j));
        center_leak = center_leak.max(hp::to_f64(&leak_p)).max(hp::to_f64(&leak_m));
    }

    // analytic geometric-series bound from measured envelope constants
    let bound = shadow_bound(s, orbit, &jplus, &jminus);

    Ok(ShadowReport {
        shadow: PseudoOrbit {
            segments: shadow_segments,
            epsilon: orbit.epsilon,
            min_duration: orbit.min_duration,
        },
        delta,
        bound,
        center_leak,
    })
}

/// Geometric-series bound on the shadowing distance: jump components
/// measured at their own heights decay under the flow at the extreme
/// expanding/contracting rates, with envelope constants measured from
/// the splitting.
fn shadow_bound(
    s: &OneParameterSubgroup,
    orbit: &PseudoOrbit,
    jplus: &[Vec<R>],
    jminus: &[Vec<R>],
) -> f64 {
    let bits = s.bits;
    let segs = &orbit.segments;
    let (lam_minus, lam_plus) = s.splitting.contraction_rates();
    let span: f64 = segs.iter().map(|sg| sg.duration).sum::<f64>() + 1.0;
    // envelope constants: sup over sampled tau of
    // ||M^-tau P^+|| * lam_plus^tau   and   ||M^tau P^-|| * lam_minus^-tau
    let mut kappa_plus = 0.0f64;
    let mut kappa_minus = 0.0f64;
    for k in 0..=16 {
        let tau = span * (k as f64) / 16.0;
        if lam_plus.is_finite() {
            let fwd = expm(&s.log_m.scale(&hp::from_f64(-tau, bits)), bits);
            let norm = hp::to_f64(&fwd.mul(&s.splitting.p_plus).frobenius());
            kappa_plus = kappa_plus.max(norm * lam_plus.powf(tau));
        }
        if lam_minus > 0.0 {
            let bwd = expm(&s.log_m.scale(&hp::from_f64(tau, bits)), bits);
            let norm = hp::to_f64(&bwd.mul(&s.splitting.p_minus).frobenius());
            kappa_minus = kappa_minus.max(norm * lam_minus.powf(tau));
        }
    }

    // jump sizes at their own (landing) heights
    let jump_heights: Vec<f64> = segs.windows(2).map(|w| w[1].time).collect();
    let eps_plus: Vec<f64> = jplus
        .iter()
        .zip(&jump_heights)
        .map(|(j, &h)| {
            let flow = expm(&s.log_m.scale(&hp::from_f64(-h, bits)), bits);
            hp::to_f64(&vec_norm(&flow.mul_vec(j)))
        })
        .collect();
    let eps_minus: Vec<f64> = jminus
        .iter()
        .zip(&jump_heights)
        .map(|(j, &h)| {
            let flow = expm(&s.log_m.scale(&hp::from_f64(-h, bits)), bits);
            hp::to_f64(&vec_norm(&flow.mul_vec(j)))
        })
        .collect();

    let mut bound = 0.0f64;
    for (i, seg) in segs.iter().enumerate() {
        let start = seg.time;
        let end = seg.time + seg.duration;
        let mut b = 0.0;
        for j in 0..i.min(jump_heights.len()) {
            // expanding parts of past jumps, worst at the segment start
            b += kappa_plus * eps_plus[j] * lam_plus.powf(-(start - jump_heights[j]));
        }
        for j in i..jump_heights.len() {
            // contracting parts of future jumps, worst at the segment end
            b += kappa_minus * eps_minus[j] * lam_minus.powf(jump_heights[j] - end);
        }
        bound = bound.max(b);
    }
    bound
}

// ---------------------------------------------------------------------------
// Uniform bilipschitz verification.

#[derive(Clone, Debug)]
pub struct BilipschitzReport {
    /// sup over samples of max(ratio, 1/ratio)
    pub k: f64,
    /// max distortion over the first third of the time range
    pub first_third: f64,
    /// max distortion over the last third
    pub last_third: f64,
    pub pass: bool,
}

/// Check that the conjugator built from the two real Jordan bases is
/// uniformly bilipschitz from d_{M,t} to d_{N,(s/r) t}: measure the
/// distortion over sampled times and random vector pairs, and require
/// no growth trend between the first and last thirds of the time range
/// (within factor 1.5). The exact precondition ajf(M)^r = ajf(N)^s is
/// verified first.
///
/// The conjugator is B_N W B_M^-1 where the B's are canonical Jordan
/// bases and W intertwines the per-block nilpotent flow generators
/// exactly (the rotation parts stay bounded and need no alignment);
/// without W the nilpotent coefficients of the two flows disagree by a
/// factor and the distortion would grow polynomially in t.
pub fn verify_uniform_bilipschitz(
    m: &RationalMatrix,
    n: &RationalMatrix,
    r: u32,
    s_exp: u32,
    t_samples: &[f64],
    digits: u32,
) -> Result<BilipschitzReport, DynError> {
    assert!(r >= 1 && s_exp >= 1);
    let fm = absolute_jordan_form(m)?;
    let fn_ = absolute_jordan_form(n)?;
    if fm.pow(r) != fn_.pow(s_exp) {
        return Err(DynError::Precondition(
            "powered absolute Jordan forms differ".into(),
        ));
    }
    let sub_m = OneParameterSubgroup::new(m, digits)?;
    let sub_n = OneParameterSubgroup::new(n, digits)?;
    let bits = sub_m.bits.max(sub_n.bits);

    // time scaling: original M-time t corresponds to base-time
    // t / 2^alpha; N runs at (s/r) t in original time.
    let alpha = 2f64.powi(sub_m.squarings as i32);
    let beta = 2f64.powi(sub_n.squarings as i32);
    let ratio = (s_exp as f64) / (r as f64);
    // in base times: w = rho * u with u = t / alpha
    let rho = ratio * alpha / beta;

    let (basis_m, meta_m) = jordan_basis(&sub_m.base, &sub_m.spectral, bits)?;
    let (basis_n, meta_n) = jordan_basis(&sub_n.base, &sub_n.spectral, bits)?;
    let w = block_intertwiner(&meta_m, &meta_n, rho, sub_m.dim(), bits)?;
    let a = basis_n.mul(&w).mul(
        &basis_m
            .inverse(bits)
            .ok_or_else(|| DynError::Numeric("singular jordan basis".into()))?,
    );

    let mut rng = XorShift64::new(0xb111_cafe);
    let dim = m.dim();
    let pairs: Vec<(Vec<R>, Vec<R>)> = (0..12)
        .map(|_| {
            let gen = |rng: &mut XorShift64| -> Vec<R> {
                (0..dim)
                    .map(|_| hp::from_f64(rng.next_f64() * 4.0 - 2.0, bits))
                    .collect()
            };
            (gen(&mut rng), gen(&mut rng))
        })
        .collect();

    let mut sorted_ts: Vec<f64> = t_samples.to_vec();
    sorted_ts.sort_by(f64::total_cmp);
    let len = sorted_ts.len();
    let third = (len / 3).max(1);

    let mut k_all = 0.0f64;
    let mut first_third = 0.0f64;
    let mut last_third = 0.0f64;
    for (idx, &t) in sorted_ts.iter().enumerate() {
        let mut here = 0.0f64;
        let tm = hp::from_f64(t / alpha, bits);
        let tn = hp::from_f64(ratio * t / beta, bits);
        // one flow matrix per side per time, shared by all pairs
        let flow_m = expm(&sub_m.log_m.scale(&-tm), bits);
        let flow_n = expm(&sub_n.log_m.scale(&-tn), bits);
        for (v, w) in &pairs {
            let dm = vec_norm(&flow_m.mul_vec(&vec_sub(v, w)));
            let av = a.mul_vec(v);
            let aw = a.mul_vec(w);
            let dn = vec_norm(&flow_n.mul_vec(&vec_sub(&av, &aw)));
            let ratio_here = hp::to_f64(&dn) / hp::to_f64(&dm);
            let distortion = ratio_here.max(1.0 / ratio_here);
            here = here.max(distortion);
        }
        k_all = k_all.max(here);
        if idx < third {
            first_third = first_third.max(here);
        }
        if idx >= len - third {
            last_third = last_third.max(here);
        }
    }
    let trend = (last_third / first_third).max(first_third / last_third);
    Ok(BilipschitzReport {
        k: k_all,
        first_third,
        last_third,
        pass: trend <= 1.5,
    })
}

/// Block-diagonal correction W in Jordan coordinates: for each aligned
/// pair of block groups, solve W G_m = rho G_n W on the nilpotent log
/// generators via cyclic chains. Groups whose shapes disagree (a real
/// pair against a rotation pair) only occur with block size 1, where
/// no correction is needed.
fn block_intertwiner(
    meta_m: &[splitting::BlockMeta],
    meta_n: &[splitting::BlockMeta],
    rho: f64,
    dim: usize,
    bits: usize,
) -> Result<FMatrix, DynError> {
    use splitting::{block_log_generator, nilpotent_intertwiner};
    let mut w = FMatrix::identity(dim, bits);
    let mut col_m = 0usize; // column cursor in M-basis
    let mut im = 0usize;
    let mut in_ = 0usize;
    // canonical-entry counts consumed so far on each side (a real block
    // is one entry, a conjugate pair two)
    let mut entries_m = 0usize;
    let mut entries_n = 0usize;
    while im < meta_m.len() && in_ < meta_n.len() {
        let gm = &meta_m[im];
        let gn = &meta_n[in_];
        let width_m = if gm.is_real { gm.size } else { 2 * gm.size } as usize;
        if gm.size != gn.size || gm.is_real != gn.is_real || entries_m != entries_n {
            // shape mismatch: only size-1 blocks may disagree (a real
            // pair against a rotation pair); the identity is already
            // the right correction there. Advance the side that lags
            // in consumed entries.
            if (gm.size > 1 || gn.size > 1) && entries_m == entries_n {
                return Err(DynError::Numeric(
                    "jordan block shapes do not align across the pair".into(),
                ));
            }
            if entries_m <= entries_n {
                entries_m += if gm.is_real { 1 } else { 2 };
                col_m += width_m;
                im += 1;
            } else {
                entries_n += if gn.is_real { 1 } else { 2 };
                in_ += 1;
            }
            continue;
        }
        let k = gm.size as usize;
        if k > 1 {
            let g_m = block_log_generator(&gm.value, k, bits);
            let mut g_n = block_log_generator(&gn.value, k, bits);
            let rho_r = hp::from_f64(rho, bits);
            for row in g_n.iter_mut() {
                for e in row.iter_mut() {
                    *e = e.scale(&rho_r);
                }
            }
            let wc = nilpotent_intertwiner(&g_n, &g_m, bits)
                .ok_or_else(|| DynError::Numeric("intertwiner solve failed".into()))?;
            if gm.is_real {
                for i in 0..k {
                    for j in 0..k {
                        w.set(col_m + i, col_m + j, wc[i][j].re.clone());
                    }
                }
            } else {
                // realify: complex entry a+bi acts on (re, im) pairs as
                // [[a, -b], [b, a]]
                for i in 0..k {
                    for j in 0..k {
                        let aij = &wc[i][j];
                        w.set(col_m + 2 * i, col_m + 2 * j, aij.re.clone());
                        w.set(col_m + 2 * i, col_m + 2 * j + 1, -aij.im.clone());
                        w.set(col_m + 2 * i + 1, col_m + 2 * j, aij.im.clone());
                        w.set(col_m + 2 * i + 1, col_m + 2 * j + 1, aij.re.clone());
                    }
                }
            }
        }
        col_m += width_m;
        entries_m += if gm.is_real { 1 } else { 2 };
        entries_n += if gn.is_real { 1 } else { 2 };
        im += 1;
        in_ += 1;
    }
    Ok(w)
}
