//! Dense numeric linear algebra at arbitrary precision: real and
//! complex matrices over `hp::R`, with the matrix exponential,
//! principal logarithm and square root used to realize one-parameter
//! subgroups.

use crate::hp::{self, Complex, R};
use crate::matrix::RationalMatrix;

/// Real matrix at working precision, row-major.
#[derive(Clone, Debug)]
pub struct FMatrix {
    pub n: usize,
    pub e: Vec<R>,
}

impl FMatrix {
    pub fn zeros(n: usize) -> Self {
        FMatrix {
            n,
            e: vec![R::ZERO; n * n],
        }
    }

    pub fn identity(n: usize, bits: usize) -> Self {
        let mut m = FMatrix::zeros(n);
        for i in 0..n {
            m.e[i * n + i] = hp::one(bits);
        }
        m
    }

    pub fn from_rational_matrix(m: &RationalMatrix, bits: usize) -> Self {
        FMatrix {
            n: m.dim(),
            e: m
                .entries()
                .iter()
                .map(|q| hp::from_rational(q, bits))
                .collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.e[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.e[i * self.n + j] = v;
    }

    pub fn add(&self, o: &FMatrix) -> FMatrix {
        FMatrix {
            n: self.n,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &FMatrix) -> FMatrix {
        FMatrix {
            n: self.n,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &R) -> FMatrix {
        FMatrix {
            n: self.n,
            e: self.e.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, o: &FMatrix) -> FMatrix {
        let n = self.n;
        let mut out = FMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if *a == R::ZERO {
                    continue;
                }
                for j in 0..n {
                    let prod = a * o.get(k, j);
                    out.e[i * n + j] = &out.e[i * n + j] + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[R]) -> Vec<R> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = R::ZERO;
                for j in 0..n {
                    acc += self.get(i, j) * &v[j];
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> FMatrix {
        let n = self.n;
        let mut out = FMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.e[j * n + i] = self.e[i * n + j].clone();
            }
        }
        out
    }

    /// Max row sum of absolute values.
    pub fn norm_inf(&self) -> R {
        let n = self.n;
        let mut best = R::ZERO;
        for i in 0..n {
            let mut s = R::ZERO;
            for j in 0..n {
                s += hp::abs(self.get(i, j));
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn max_abs(&self) -> R {
        self.e
            .iter()
            .map(hp::abs)
            .fold(R::ZERO, |a, b| if b > a { b } else { a })
    }

    pub fn frobenius(&self) -> R {
        self.e
            .iter()
            .map(|x| x * x)
            .fold(R::ZERO, |a, b| a + b)
            .sqrt()
    }

    /// Inverse by Gauss-Jordan with partial pivoting; None when a
    /// pivot collapses numerically.
    pub fn inverse(&self, bits: usize) -> Option<FMatrix> {
        let n = self.n;
        let mut a: Vec<Vec<R>> = (0..n)
            .map(|i| {
                let mut row: Vec<R> = self.e[i * n..(i + 1) * n].to_vec();
                let mut aug = vec![R::ZERO; n];
                aug[i] = hp::one(bits);
                row.extend(aug);
                row
            })
            .collect();
        let tiny = hp::pow2(-(bits as i64) - 16, bits);
        for col in 0..n {
            let piv = (col..n).max_by(|&r1, &r2| {
                hp::abs(&a[r1][col])
                    .partial_cmp(&hp::abs(&a[r2][col]))
                    .unwrap()
            })?;
            if hp::abs(&a[piv][col]) <= tiny {
                return None;
            }
            a.swap(piv, col);
            let pv = a[col][col].clone();
            for c in col..2 * n {
                a[col][c] = &a[col][c] / &pv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r][col].clone();
                if f == R::ZERO {
                    continue;
                }
                for c in col..2 * n {
                    let sub = &f * &a[col][c];
                    a[r][c] = &a[r][c] - sub;
                }
            }
        }
        let mut out = FMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.e[i * n + j] = a[i][n + j].clone();
            }
        }
        Some(out)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| hp::to_f64(self.get(i, j))).collect())
            .collect()
    }
}

/// Matrix exponential by scaling and squaring with a Taylor tail cut
/// at the working precision.
pub fn expm(a: &FMatrix, bits: usize) -> FMatrix {
    let n = a.n;
    let norm = hp::to_f64(&a.norm_inf());
    let mut s = 0u32;
    if norm.is_finite() && norm > 0.5 {
        s = (norm / 0.5).log2().ceil() as u32 + 1;
    }
    let scale = hp::pow2(-(s as i64), bits);
    let b = a.scale(&scale);
    let mut term = FMatrix::identity(n, bits);
    let mut sum = FMatrix::identity(n, bits);
    let cutoff = hp::pow2(-(bits as i64) - 16, bits);
    for k in 1..10_000u32 {
        term = term.mul(&b);
        let kinv = hp::one(bits) / hp::from_f64(k as f64, bits);
        term = term.scale(&kinv);
        sum = sum.add(&term);
        if term.norm_inf() < cutoff {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..s {
        out = out.mul(&out);
    }
    out
}

/// Principal square root by the Denman-Beavers iteration. Requires no
/// eigenvalues on the closed negative real axis.
pub fn sqrtm(a: &FMatrix, bits: usize) -> Option<FMatrix> {
    let n = a.n;
    let mut x = a.clone();
    let mut y = FMatrix::identity(n, bits);
    let half = hp::one(bits) / hp::from_f64(2.0, bits);
    let tol = hp::pow2(-(bits as i64) + 12, bits);
    for _ in 0..500 {
        let xi = x.inverse(bits)?;
        let yi = y.inverse(bits)?;
        let nx = x.add(&yi).scale(&half);
        let ny = y.add(&xi).scale(&half);
        let diff = nx.sub(&x).norm_inf();
        x = nx;
        y = ny;
        let scale = x.norm_inf() + hp::one(bits);
        if diff <= tol.clone() * scale {
            return Some(x);
        }
    }
    None
}

/// Principal matrix logarithm by inverse scaling and squaring plus the
/// atanh series. Requires no eigenvalues on the closed negative real
/// axis.
pub fn logm(a: &FMatrix, bits: usize) -> Option<FMatrix> {
    let n = a.n;
    let ident = FMatrix::identity(n, bits);
    let mut b = a.clone();
    let mut k = 0u32;
    let quarter = hp::from_f64(0.25, bits);
    loop {
        let dist = b.sub(&ident).norm_inf();
        if dist <= quarter {
            break;
        }
        b = sqrtm(&b, bits)?;
        k += 1;
        if k > 300 {
            return None;
        }
    }
    // z = (B - I)(B + I)^-1, log B = 2 atanh(z) = 2 sum z^(2j+1)/(2j+1)
    let z = b.sub(&ident).mul(&b.add(&ident).inverse(bits)?);
    let z2 = z.mul(&z);
    let mut term = z.clone();
    let mut sum = z;
    let cutoff = hp::pow2(-(bits as i64) - 16, bits);
    for j in 1..20_000u32 {
        term = term.mul(&z2);
        let coeff = hp::one(bits) / hp::from_f64((2 * j + 1) as f64, bits);
        let contrib = term.scale(&coeff);
        sum = sum.add(&contrib);
        if contrib.norm_inf() < cutoff {
            break;
        }
    }
    let two = hp::from_f64(2.0, bits);
    let mut out = sum.scale(&two);
    // undo the square roots: log A = 2^k log B
    let back = hp::pow2(k as i64, bits);
    out = out.scale(&back);
    Some(out)
}

// ---------------------------------------------------------------------------
// Complex matrices, only what eigenspace extraction needs.

#[derive(Clone, Debug)]
pub struct CMatrix {
    pub n: usize,
    pub e: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            e: vec![Complex::zero(); n * n],
        }
    }

    pub fn identity(n: usize, bits: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.e[i * n + i] = Complex::from_real(hp::one(bits));
        }
        m
    }

    /// M - lambda I from a rational matrix.
    pub fn shifted(m: &RationalMatrix, lambda: &Complex, bits: usize) -> Self {
        let n = m.dim();
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut v = Complex::from_real(hp::from_rational(m.get(i, j), bits));
                if i == j {
                    v = v.sub(lambda);
                }
                out.e[i * n + j] = v;
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> &Complex {
        &self.e[i * self.n + j]
    }

    pub fn mul(&self, o: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = a.mul(o.get(k, j));
                    out.e[i * n + j] = out.e[i * n + j].add(&prod);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32, bits: usize) -> CMatrix {
        let mut acc = CMatrix::identity(self.n, bits);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = Complex::zero();
                for j in 0..n {
                    acc = acc.add(&self.get(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    /// Inverse by Gauss-Jordan with partial pivoting on |.|.
    pub fn inverse(&self, bits: usize) -> Option<CMatrix> {
        let n = self.n;
        let mut a: Vec<Vec<Complex>> = (0..n)
            .map(|i| {
                let mut row: Vec<Complex> = self.e[i * n..(i + 1) * n].to_vec();
                let mut aug = vec![Complex::zero(); n];
                aug[i] = Complex::from_real(hp::one(bits));
                row.extend(aug);
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).max_by(|&r1, &r2| {
                a[r1][col]
                    .norm_sqr()
                    .partial_cmp(&a[r2][col].norm_sqr())
                    .unwrap()
            })?;
            if a[piv][col].is_zero() {
                return None;
            }
            a.swap(piv, col);
            let pv = a[col][col].clone();
            for c in col..2 * n {
                a[col][c] = a[col][c].div(&pv);
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in col..2 * n {
                    let sub = f.mul(&a[col][c]);
                    a[r][c] = a[r][c].sub(&sub);
                }
            }
        }
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.e[i * n + j] = a[i][n + j].clone();
            }
        }
        Some(out)
    }

    /// Kernel basis with a known expected dimension, by full-pivot
    /// Gaussian elimination. The rank is taken to be n - expected, so
    /// the smallest pivots are treated as zero.
    pub fn kernel_basis(&self, expected: usize, bits: usize) -> Vec<Vec<Complex>> {
        let n = self.n;
        let rank = n - expected;
        let mut a: Vec<Vec<Complex>> = (0..n)
            .map(|i| self.e[i * n..(i + 1) * n].to_vec())
            .collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut row = 0usize;
        for step in 0..rank {
            // full pivot over remaining block
            let mut best = (row, step, R::ZERO);
            for r in row..n {
                for c in step..n {
                    let mag = a[r][c].norm_sqr();
                    if mag > best.2 {
                        best = (r, c, mag);
                    }
                }
            }
            a.swap(row, best.0);
            if best.1 != step {
                for r in 0..n {
                    a[r].swap(step, best.1);
                }
                col_perm.swap(step, best.1);
            }
            let pv = a[row][step].clone();
            for r in row + 1..n {
                if a[r][step].is_zero() {
                    continue;
                }
                let f = a[r][step].div(&pv);
                for c in step..n {
                    let sub = f.mul(&a[row][c]);
                    a[r][c] = a[r][c].sub(&sub);
                }
            }
            row += 1;
        }
        // Back-substitute: unknowns in permuted order; free columns are
        // rank..n.
        let mut basis = vec![];
        for free in rank..n {
            let mut x = vec![Complex::zero(); n]; // permuted coordinates
            x[free] = Complex::from_real(hp::one(bits));
            for r in (0..rank).rev() {
                // a[r][r] x_r + sum_{c>r} a[r][c] x_c = 0
                let mut acc = Complex::zero();
                for c in r + 1..n {
                    acc = acc.add(&a[r][c].mul(&x[c]));
                }
                x[r] = acc.neg().div(&a[r][r]);
            }
            // un-permute
            let mut v = vec![Complex::zero(); n];
            for (pos, &orig) in col_perm.iter().enumerate() {
                v[orig] = x[pos].clone();
            }
            basis.push(v);
        }
        basis
    }
}

/// Euclidean norm of a real vector.
pub fn vec_norm(v: &[R]) -> R {
    v.iter()
        .map(|x| x * x)
        .fold(R::ZERO, |a, b| a + b)
        .sqrt()
}

pub fn vec_sub(a: &[R], b: &[R]) -> Vec<R> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add(a: &[R], b: &[R]) -> Vec<R> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Numeric rank of a set of column vectors, by column-pivoted
/// elimination with a relative threshold.
pub fn numeric_rank(columns: &[Vec<R>], bits: usize) -> usize {
    if columns.is_empty() {
        return 0;
    }
    let n = columns[0].len();
    let mut cols: Vec<Vec<R>> = columns.to_vec();
    let scale = cols
        .iter()
        .map(|c| vec_norm(c))
        .fold(R::ZERO, |a, b| if b > a { b } else { a });
    if scale == R::ZERO {
        return 0;
    }
    let thresh = hp::pow2(-(bits as i64) / 3, bits) * scale;
    let mut rank = 0usize;
    for row in 0..n {
        // pick the column with the largest entry in this row among the rest
        let piv = (rank..cols.len()).max_by(|&c1, &c2| {
            hp::abs(&cols[c1][row])
                .partial_cmp(&hp::abs(&cols[c2][row]))
                .unwrap()
        });
        let piv = match piv {
            Some(p) => p,
            None => break,
        };
        if hp::abs(&cols[piv][row]) <= thresh {
            continue;
        }
        cols.swap(rank, piv);
        let pc = cols[rank].clone();
        let pv = pc[row].clone();
        for c in cols.iter_mut().skip(rank + 1) {
            if c[row] == R::ZERO {
                continue;
            }
            let f = &c[row] / &pv;
            for i in 0..n {
                let sub = &f * &pc[i];
                c[i] = &c[i] - sub;
            }
        }
        rank += 1;
        if rank == cols.len() {
            break;
        }
    }
    rank
}
