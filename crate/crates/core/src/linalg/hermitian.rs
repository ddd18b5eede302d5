//! Hermitian inversion, eigenvalues and square roots.

use nalgebra::SymmetricEigen;

use super::{c, hermitize, CMat, ZERO};
use crate::error::{Error, Result};

/// Tuning for [`hermitian_inverse_with`].
#[derive(Debug, Clone, Copy)]
pub struct InverseOptions {
    /// A pivot with `|d_k| <= abs_floor` is treated as singular.
    pub abs_floor: f64,
    /// A pivot with `|d_k| <= rel_floor * |M_kk|` is treated as singular.
    pub rel_floor: f64,
    /// Condition estimates above this emit a warning.
    pub warn_condition: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions {
            abs_floor: 0.0,
            rel_floor: 64.0 * f64::EPSILON,
            warn_condition: 1e12,
        }
    }
}

/// Result of [`hermitian_inverse`].
#[derive(Debug, Clone)]
pub struct HermitianInverse {
    pub inverse: CMat,
    /// `max |λ| / min |λ|` of the input.
    pub condition: f64,
    /// Smallest pivot of the `L D L†` factorization.
    pub min_pivot: f64,
    /// All pivots strictly positive.
    pub positive_definite: bool,
}

/// Inverse of a Hermitian matrix with default options.
pub fn hermitian_inverse(m: &CMat) -> Result<HermitianInverse> {
    hermitian_inverse_with(m, &InverseOptions::default())
}

/// Inverse of a Hermitian matrix through an unpivoted `L D L†`
/// factorization. The relative pivot test is invariant under symmetric
/// diagonal scaling, so badly scaled but well-conditioned inputs pass.
pub fn hermitian_inverse_with(m: &CMat, opts: &InverseOptions) -> Result<HermitianInverse> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianInverse {
            inverse: CMat::zeros(0, 0),
            condition: 1.0,
            min_pivot: f64::INFINITY,
            positive_definite: true,
        });
    }
    let m = hermitize(m);
    let mut l = CMat::identity(n, n);
    let mut d = vec![0.0f64; n];
    for k in 0..n {
        let mut dk = m[(k, k)].re;
        for j in 0..k {
            dk -= l[(k, j)].norm_sqr() * d[j];
        }
        let scale = m[(k, k)].re.abs();
        if !dk.is_finite() || dk.abs() <= opts.abs_floor || dk.abs() <= opts.rel_floor * scale {
            return Err(Error::Singular {
                pivot: dk.abs(),
                index: k,
            });
        }
        d[k] = dk;
        for i in k + 1..n {
            let mut s = m[(i, k)];
            for j in 0..k {
                s -= l[(i, j)] * l[(k, j)].conj() * d[j];
            }
            l[(i, k)] = s / dk;
        }
    }

    let mut inv = CMat::zeros(n, n);
    for col in 0..n {
        // L y = e_col
        let mut y = vec![ZERO; n];
        y[col] = c(1.0, 0.0);
        for i in col + 1..n {
            let mut s = ZERO;
            for j in col..i {
                s += l[(i, j)] * y[j];
            }
            y[i] = -s;
        }
        for i in 0..n {
            y[i] /= d[i];
        }
        // L† x = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= l[(j, i)].conj() * inv[(j, col)];
            }
            inv[(i, col)] = s;
        }
    }
    let inverse = hermitize(&inv);
    if !super::is_finite(&inverse) {
        return Err(Error::Range { horizon: f64::NAN });
    }

    let condition = condition_estimate(&m);
    if condition > opts.warn_condition {
        log::debug!(
            "Hermitian inverse: condition estimate {condition:.3e} exceeds {:.1e}",
            opts.warn_condition
        );
    }
    let min_pivot = d.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(HermitianInverse {
        inverse,
        condition,
        min_pivot,
        positive_definite: d.iter().all(|&x| x > 0.0),
    })
}

fn condition_estimate(m: &CMat) -> f64 {
    let eig = hermitian_eigenvalues(m);
    let max = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let min = eig.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut v: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn hpd_power(m: &CMat, p: f64) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { eigenvalue: min });
    }
    let v = &eig.eigenvectors;
    let scaled = CMat::from_fn(n, n, |i, j| v[(i, j)] * c(eig.eigenvalues[j].powf(p), 0.0));
    Ok(hermitize(&(scaled * v.adjoint())))
}

/// Principal square root of a Hermitian positive definite matrix.
pub fn sqrt_hpd(m: &CMat) -> Result<CMat> {
    hpd_power(m, 0.5)
}

/// Inverse principal square root of a Hermitian positive definite matrix.
pub fn inv_sqrt_hpd(m: &CMat) -> Result<CMat> {
    hpd_power(m, -0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, real_matrix};

    #[test]
    fn identity_inverse() {
        let r = hermitian_inverse(&CMat::identity(3, 3)).unwrap();
        assert_eq!(r.inverse, CMat::identity(3, 3));
        assert!((r.condition - 1.0).abs() < 1e-14);
        assert!(r.positive_definite);
    }

    #[test]
    fn floor_rejects_tiny_pivot() {
        let m = real_matrix(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
        let opts = InverseOptions {
            abs_floor: 1e-10,
            ..Default::default()
        };
        match hermitian_inverse_with(&m, &opts) {
            Err(Error::Singular { pivot, index }) => {
                assert_eq!(index, 1);
                assert!((pivot - 1e-12).abs() < 1e-24);
            }
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn complex_hermitian_inverse() {
        let m = CMat::from_row_slice(2, 2, &[c(4.0, 0.0), c(1.0, 2.0), c(1.0, -2.0), c(3.0, 0.0)]);
        let r = hermitian_inverse(&m).unwrap();
        assert!(frobenius(&(&m * &r.inverse - CMat::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn badly_scaled_but_benign() {
        let m = real_matrix(2, 2, &[1e20, 1e8, 1e8, 1e-2]);
        let r = hermitian_inverse(&m).unwrap();
        // closed-form 2x2 inverse, compared entrywise
        let det = 1e20 * 1e-2 - 1e16;
        let exact = [1e-2 / det, -1e8 / det, -1e8 / det, 1e20 / det];
        for (k, e) in exact.iter().enumerate() {
            let got = r.inverse[(k / 2, k % 2)].re;
            assert!((got - e).abs() <= 1e-14 * e.abs());
        }
    }

    #[test]
    fn square_roots() {
        let m = real_matrix(2, 2, &[5.0, 2.0, 2.0, 2.0]);
        let s = sqrt_hpd(&m).unwrap();
        assert!(frobenius(&(&s * &s - &m)) < 1e-13);
        let is = inv_sqrt_hpd(&m).unwrap();
        assert!(frobenius(&(&is * &s - CMat::identity(2, 2))) < 1e-13);
        assert!(matches!(
            sqrt_hpd(&real_matrix(1, 1, &[-1.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
