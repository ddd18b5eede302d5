//! Numerical rank and orthonormal bases from the SVD.

use super::{c, CMat};

/// Default relative rank threshold.
pub const RANK_RTOL: f64 = 1e-8;

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rtol * σ_max`.
pub fn numerical_rank(m: &CMat, rtol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rtol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis of the column space of `m` (numerical rank with
/// threshold `rtol * σ_max`). Returns an `n x r` matrix.
pub fn orthonormal_basis(m: &CMat, rtol: f64) -> CMat {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return CMat::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let s = &svd.singular_values;
    let top = s.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return CMat::zeros(n, 0);
    }
    let keep: Vec<usize> = (0..s.len()).filter(|&k| s[k] > rtol * top).collect();
    CMat::from_fn(n, keep.len(), |i, j| u[(i, keep[j])])
}

/// Real orthonormal basis of the real span of the real and imaginary
/// parts of the columns of `basis`.
pub fn realify_basis(basis: &CMat, rtol: f64) -> CMat {
    let n = basis.nrows();
    let k = basis.ncols();
    let stacked = nalgebra::DMatrix::<f64>::from_fn(n, 2 * k, |i, j| {
        let z = basis[(i, j % k)];
        if j < k {
            z.re
        } else {
            z.im
        }
    });
    if n == 0 || k == 0 {
        return CMat::zeros(n, 0);
    }
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let s = &svd.singular_values;
    let top = s.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return CMat::zeros(n, 0);
    }
    let keep: Vec<usize> = (0..s.len()).filter(|&j| s[j] > rtol * top).collect();
    CMat::from_fn(n, keep.len(), |i, j| c(u[(i, keep[j])], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, real_matrix};

    #[test]
    fn rank_of_outer_product() {
        let m = real_matrix(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, -1.0, -2.0, -3.0]);
        assert_eq!(numerical_rank(&m, RANK_RTOL), 1);
        assert_eq!(numerical_rank(&CMat::zeros(2, 2), RANK_RTOL), 0);
        let b = orthonormal_basis(&m, RANK_RTOL);
        assert_eq!(b.ncols(), 1);
        assert!(frobenius(&(b.adjoint() * &b - CMat::identity(1, 1))) < 1e-14);
    }

    #[test]
    fn realified_span_of_complex_vector() {
        // span_C{[1, i]} realifies to span_R{[1,0],[0,1]}
        let v = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 1.0)]);
        let r = realify_basis(&v, RANK_RTOL);
        assert_eq!(r.ncols(), 2);
        assert!(r.iter().all(|z| z.im == 0.0));
        assert!(frobenius(&(r.adjoint() * &r - CMat::identity(2, 2))) < 1e-14);
    }
}
