//! Small dense matrices over exact rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{c, CMat};
use crate::error::{Error, Result};

/// Dense matrix of arbitrary-precision rationals, row-major.
///
/// `BigRational` normalizes on construction, so entries are always in
/// lowest terms with positive denominators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

/// `num / den` as a rational.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = || Error::NonRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// `"num/den"`, always with an explicit denominator.
pub fn format_ratio(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> BigRational,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    /// Diagonal matrix.
    pub fn diagonal(entries: &[BigRational]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                BigRational::zero()
            }
        })
    }

    /// Exact conversion of a real floating-point matrix (every finite
    /// double is a dyadic rational). Complex or non-finite entries fail.
    pub fn from_real_cmat(m: &CMat) -> Result<Self> {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z.im != 0.0 {
                    return Err(Error::NonRational(format!(
                        "complex entry {z} at ({i},{j})"
                    )));
                }
                let q = BigRational::from_float(z.re)
                    .ok_or_else(|| Error::NonRational(format!("{} at ({i},{j})", z.re)))?;
                out.set(i, j, q);
            }
        }
        Ok(out)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Entrywise product with `s`.
    pub fn scale(&self, s: &BigRational) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * s)
    }

    /// Copy of the `(r0.., k0..)` block.
    pub fn block(&self, r0: usize, k0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, k0 + j).clone())
    }

    /// Writes `b` at offset `(r0, k0)`.
    pub fn set_block(&mut self, r0: usize, k0: usize, b: &RationalMatrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, k0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Pivots of the exact `L D Lᵀ` factorization, or `None` if a zero
    /// pivot appears.
    pub fn ldl_pivots(&self) -> Option<Vec<BigRational>> {
        let n = self.rows;
        let mut a = self.clone();
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let p = a.get(k, k).clone();
            if p.is_zero() {
                return None;
            }
            for i in k + 1..n {
                let f = a.get(i, k) / &p;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a.get(i, j) - &f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
            pivots.push(p);
        }
        Some(pivots)
    }

    /// Exact positive-definiteness certificate: symmetric and every
    /// `L D Lᵀ` pivot strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric()
            && self
                .ldl_pivots()
                .is_some_and(|p| p.iter().all(|x| x.is_positive()))
    }

    /// Exact determinant by fraction-exact elimination with row swaps.
    pub fn determinant(&self) -> Result<BigRational> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = BigRational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a.get(i, k).is_zero()) else {
                return Ok(BigRational::zero());
            };
            if p != k {
                for j in 0..n {
                    let (x, y) = (a.get(k, j).clone(), a.get(p, j).clone());
                    a.set(k, j, y);
                    a.set(p, j, x);
                }
                det = -det;
            }
            let piv = a.get(k, k).clone();
            det *= &piv;
            for i in k + 1..n {
                let f = a.get(i, k) / &piv;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a.get(i, j) - &f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Nearest floating-point matrix (real entries).
    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| {
            c(self.get(i, j).to_f64().unwrap_or(f64::NAN), 0.0)
        })
    }

    /// Entries as `"num/den"` strings, row by row.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| format_ratio(self.get(i, j)))
                    .collect()
            })
            .collect()
    }

    pub fn from_strings(rows: &[Vec<String>]) -> Result<Self> {
        let r = rows.len();
        let k = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != k) {
            return Err(Error::Dimension("ragged rational matrix".into()));
        }
        let mut out = Self::zeros(r, k);
        for (i, row) in rows.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                out.set(i, j, parse_ratio(s)?);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format_ratio(self.get(i, j)))
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;
    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, rhs.rows, "rational matmul: shape mismatch");
        RationalMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut s = BigRational::zero();
            for k in 0..self.cols {
                s += self.get(i, k) * rhs.get(k, j);
            }
            s
        })
    }
}

impl Add for &RationalMatrix {
    type Output = RationalMatrix;
    fn add(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + rhs.get(i, j))
    }
}

impl Sub for &RationalMatrix {
    type Output = RationalMatrix;
    fn sub(self, rhs: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j))
    }
}

impl Neg for &RationalMatrix {
    type Output = RationalMatrix;
    fn neg(self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| -self.get(i, j))
    }
}
