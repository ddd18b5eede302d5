//! Dense complex matrix kernels shared by the rest of the crate.
//!
//! Everything works on [`CMat`], a heap-allocated complex matrix. Real
//! systems are carried in the same type with zero imaginary parts; the
//! [`Field`] tag records which case applies.

mod expm;
mod hermitian;
mod integral;
pub mod rational;
mod schur;
mod subspace;
mod sylvester;

pub use expm::{expm, expm_t};
pub use hermitian::{
    hermitian_eigenvalues, hermitian_inverse, hermitian_inverse_with, inv_sqrt_hpd, sqrt_hpd,
    HermitianInverse, InverseOptions,
};
pub use integral::{convolution_integral, gram_integral};
pub use rational::{format_ratio, parse_ratio, ratio, RationalMatrix};
pub use schur::{
    classify_eigenvalue, default_tau, eigenvalues, ordered_spectral_split,
    ordered_spectral_split_by, schur, EigenClass, SpectralSplit,
};
pub use subspace::{numerical_rank, orthonormal_basis, realify_basis, singular_values, RANK_RTOL};
pub use sylvester::{
    lyapunov_residual, solve_lyapunov, solve_sylvester, solve_sylvester_triangular,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use nalgebra::Complex;

/// Complex double-precision scalar.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = DVector<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Scalar field a system or matrix lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// The field of `m`: real when every imaginary part is exactly zero.
    pub fn of(m: &CMat) -> Field {
        if m.iter().all(|z| z.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds a complex matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols, "real_matrix: wrong data length");
    CMat::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

pub fn real_vector(data: &[f64]) -> CVec {
    CVec::from_iterator(data.len(), data.iter().map(|&x| c(x, 0.0)))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn diag(entries: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(entries))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (max column sum).
pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

/// `(M + M†) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_hermitian(m: &CMat, rtol: f64) -> bool {
    m.is_square() && frobenius(&(m - m.adjoint())) <= rtol * frobenius(m).max(f64::MIN_POSITIVE)
}

/// Drops imaginary parts.
pub fn real_part(m: &CMat) -> CMat {
    m.map(|z| c(z.re, 0.0))
}

/// Block-diagonal matrix from square or rectangular blocks.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut k) = (0, 0);
    for b in blocks {
        out.view_mut((r, k), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        k += b.ncols();
    }
    out
}

/// Stacks blocks vertically.
pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Assembles a matrix from a square grid of blocks with consistent sizes.
pub fn from_blocks(grid: &[Vec<CMat>]) -> CMat {
    let rows: Vec<usize> = grid.iter().map(|row| row[0].nrows()).collect();
    let cols: Vec<usize> = grid[0].iter().map(|b| b.ncols()).collect();
    let mut out = zeros(rows.iter().sum(), cols.iter().sum());
    let mut r = 0;
    for (i, row) in grid.iter().enumerate() {
        let mut k = 0;
        for (j, b) in row.iter().enumerate() {
            debug_assert_eq!((b.nrows(), b.ncols()), (rows[i], cols[j]));
            out.view_mut((r, k), (rows[i], cols[j])).copy_from(b);
            k += cols[j];
        }
        r += rows[i];
    }
    out
}

/// Copies out the `(r0.., k0..)` block of size `rows x cols`.
pub fn sub(m: &CMat, r0: usize, k0: usize, rows: usize, cols: usize) -> CMat {
    m.view((r0, k0), (rows, cols)).into_owned()
}

/// Max distance of a greedy nearest-neighbour pairing between two multisets.
///
/// Pairs are formed by repeatedly taking the globally closest remaining
/// pair. Returns `f64::INFINITY` on length mismatch.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for _ in 0..a.len() {
        let mut best = (f64::INFINITY, 0, 0);
        for (i, x) in a.iter().enumerate().filter(|(i, _)| !used_a[*i]) {
            for (j, y) in b.iter().enumerate().filter(|(j, _)| !used_b[*j]) {
                let d = (x - y).norm();
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        used_a[best.1] = true;
        used_b[best.2] = true;
        worst = worst.max(best.0);
    }
    worst
}
