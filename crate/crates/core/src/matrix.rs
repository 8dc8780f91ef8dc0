//! Exact n x n matrices over Q.
//!
//! Everything is computed exactly: determinants and rank by Gaussian
//! elimination over the rationals, characteristic polynomials by the
//! division-free Berkowitz algorithm on a denominator-cleared integer
//! matrix.

use crate::poly::IntPolynomial;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix must be square and nonempty")]
    BadShape,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Exact rational matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn new(n: usize, data: Vec<BigRational>) -> Result<Self, MatrixError> {
        if n == 0 || data.len() != n * n {
            return Err(MatrixError::BadShape);
        }
        Ok(RationalMatrix { n, data })
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::BadShape);
        }
        Ok(RationalMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from integer rows (panics on bad shape);
    /// used pervasively in tests and small examples.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&v| BigRational::from(BigInt::from(v)))
                        .collect()
                })
                .collect(),
        )
        .expect("square nonempty integer rows")
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![BigRational::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = BigRational::one();
        }
        RationalMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.data
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|e| e.is_integer())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch(self.n, other.n));
        }
        Ok(RationalMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch(self.n, other.n));
        }
        Ok(RationalMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch(self.n, other.n));
        }
        let n = self.n;
        let mut data = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = a * other.get(k, j);
                    data[i * n + j] += prod;
                }
            }
        }
        Ok(RationalMatrix { n, data })
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = BigRational::zero();
                for j in 0..self.n {
                    acc += self.get(i, j) * &v[j];
                }
                acc
            })
            .collect()
    }

    /// Matrix power by repeated squaring, k >= 0.
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = RationalMatrix::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            base = base.mul(&base).unwrap();
            e >>= 1;
        }
        acc
    }

    /// Exact determinant by fraction-free-style elimination over Q.
    pub fn det(&self) -> BigRational {
        let n = self.n;
        let mut m: Vec<Vec<BigRational>> = (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].to_vec())
            .collect();
        let mut det = BigRational::one();
        for col in 0..n {
            let piv = match (col..n).find(|&r| !m[r][col].is_zero()) {
                Some(r) => r,
                None => return BigRational::zero(),
            };
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            let pv = m[col][col].clone();
            det *= &pv;
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &pv;
                for c in col..n {
                    let sub = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
        }
        det
    }

    pub fn is_singular(&self) -> bool {
        self.det().is_zero()
    }

    /// Rank by exact Gaussian elimination. Pivot selection prefers the
    /// entry with the largest numerator magnitude in the column.
    pub fn rank(&self) -> usize {
        let n = self.n;
        let mut m: Vec<Vec<BigRational>> = (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].to_vec())
            .collect();
        let mut rank = 0usize;
        let mut row = 0usize;
        for col in 0..n {
            let piv = (row..n)
                .filter(|&r| !m[r][col].is_zero())
                .max_by_key(|&r| m[r][col].numer().abs());
            let piv = match piv {
                Some(r) => r,
                None => continue,
            };
            m.swap(piv, row);
            let pv = m[row][col].clone();
            for r in row + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &pv;
                for c in col..n {
                    let sub = &factor * &m[row][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
            rank += 1;
            row += 1;
            if row == n {
                break;
            }
        }
        rank
    }

    pub fn nullity(&self) -> usize {
        self.n - self.rank()
    }

    /// Exact inverse, if nonsingular.
    pub fn inverse(&self) -> Result<Self, MatrixError> {
        let n = self.n;
        let mut m: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row = self.data[i * n..(i + 1) * n].to_vec();
                let mut aug = vec![BigRational::zero(); n];
                aug[i] = BigRational::one();
                row.extend(aug);
                row
            })
            .collect();
        for col in 0..n {
            let piv = match (col..n).find(|&r| !m[r][col].is_zero()) {
                Some(r) => r,
                None => return Err(MatrixError::Singular),
            };
            m.swap(piv, col);
            let pv = m[col][col].clone();
            for c in col..2 * n {
                m[col][c] = &m[col][c] / &pv;
            }
            for r in 0..n {
                if r == col || m[r][col].is_zero() {
                    continue;
                }
                let factor = m[r][col].clone();
                for c in col..2 * n {
                    let sub = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
        }
        let data = (0..n)
            .flat_map(|i| m[i][n..2 * n].to_vec())
            .collect();
        Ok(RationalMatrix { n, data })
    }

    /// Characteristic polynomial det(xI - M), cleared to integer
    /// coefficients (primitive, positive leading coefficient; monic
    /// whenever M is integral). Division-free Berkowitz on the
    /// denominator-cleared matrix.
    pub fn char_poly(&self) -> IntPolynomial {
        let n = self.n;
        // clear denominators: A = c * M with integer entries
        let mut c = BigInt::one();
        for e in &self.data {
            c = c.lcm(e.denom());
        }
        let a: Vec<BigInt> = self
            .data
            .iter()
            .map(|e| e.numer() * (&c / e.denom()))
            .collect();
        let q = berkowitz_char_poly(n, &a);
        // det(xI - M) = c^-n * q(c x); clear back to primitive integers
        if c.is_one() {
            return q;
        }
        let coeffs: Vec<BigInt> = q
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, qc)| qc * c.pow(i as u32))
            .collect();
        IntPolynomial::from_coeffs(coeffs).normalized()
    }

    /// Evaluate an integer polynomial at this matrix.
    pub fn eval_poly(&self, p: &IntPolynomial) -> RationalMatrix {
        let n = self.n;
        let mut acc = RationalMatrix {
            n,
            data: vec![BigRational::zero(); n * n],
        };
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self).unwrap();
            let cr = BigRational::from(c.clone());
            for i in 0..n {
                let v = acc.get(i, i) + &cr;
                acc.set(i, i, v);
            }
        }
        acc
    }

    /// Max absolute value of any entry, as f64 (diagnostics only).
    pub fn max_abs_f64(&self) -> f64 {
        self.data
            .iter()
            .map(|e| num_traits::ToPrimitive::to_f64(e).unwrap_or(f64::INFINITY).abs())
            .fold(0.0, f64::max)
    }
}

/// Berkowitz: characteristic polynomial of an integer matrix,
/// division-free, little-endian monic output for det(xI - A).
fn berkowitz_char_poly(n: usize, a: &[BigInt]) -> IntPolynomial {
    let at = |i: usize, j: usize| -> &BigInt { &a[i * n + j] };
    // Polynomial coefficients stored top-down: poly[0] = leading 1.
    let mut poly: Vec<BigInt> = vec![BigInt::one(), -at(0, 0).clone()];
    for r in 1..n {
        // principal (r+1)x(r+1) block: rows/cols 0..=r
        // moments: m_0 = a[r][r], m_k = R * A_r^{k-1} * C
        let dim = r;
        let row: Vec<&BigInt> = (0..dim).map(|j| at(r, j)).collect();
        let col: Vec<BigInt> = (0..dim).map(|i| at(i, r).clone()).collect();
        let mut moments: Vec<BigInt> = Vec::with_capacity(r + 1);
        moments.push(at(r, r).clone());
        let mut v = col;
        for _ in 0..dim {
            let dot: BigInt = row.iter().zip(&v).map(|(x, y)| *x * y).sum();
            moments.push(dot);
            // v = A_r * v
            let mut nv = vec![BigInt::zero(); dim];
            for i in 0..dim {
                for j in 0..dim {
                    nv[i] += at(i, j) * &v[j];
                }
            }
            v = nv;
        }
        // Toeplitz multiply: new[i] = poly[i] - sum_k moments[k] * poly[i-1-k]
        let mut next = vec![BigInt::zero(); poly.len() + 1];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = if i < poly.len() {
                poly[i].clone()
            } else {
                BigInt::zero()
            };
            for (k, m) in moments.iter().enumerate() {
                if i >= k + 1 && i - 1 - k < poly.len() {
                    acc -= m * &poly[i - 1 - k];
                }
            }
            *slot = acc;
        }
        poly = next;
    }
    poly.reverse();
    IntPolynomial::from_coeffs(poly)
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
