//! Sylvester and Lyapunov equations via Schur forms.

use super::{frobenius, hermitize, schur, CMat, ZERO};
use crate::error::{Error, Result};

/// Solves `A X + X B = C`.
///
/// Fails with [`Error::SpectraOverlap`] when some `λ_i(A) + μ_j(B)` is zero
/// to working precision.
pub fn solve_sylvester(a: &CMat, b: &CMat, rhs: &CMat) -> Result<CMat> {
    check_shapes(a, b, rhs)?;
    if rhs.nrows() == 0 || rhs.ncols() == 0 {
        return Ok(CMat::zeros(rhs.nrows(), rhs.ncols()));
    }
    let (qa, ta) = schur(a)?;
    let (qb, tb) = schur(b)?;
    let ct = qa.adjoint() * rhs * &qb;
    let y = solve_sylvester_triangular(&ta, &tb, &ct)?;
    Ok(qa * y * qb.adjoint())
}

/// Solves `Ta Y + Y Tb = C` for upper triangular `Ta`, `Tb`.
pub fn solve_sylvester_triangular(ta: &CMat, tb: &CMat, rhs: &CMat) -> Result<CMat> {
    check_shapes(ta, tb, rhs)?;
    let m = ta.nrows();
    let n = tb.nrows();
    let scale = frobenius(ta).max(frobenius(tb)).max(1.0);
    let floor = 64.0 * f64::EPSILON * scale;
    let mut gap = f64::INFINITY;
    for i in 0..m {
        for j in 0..n {
            gap = gap.min((ta[(i, i)] + tb[(j, j)]).norm());
        }
    }
    if gap <= floor {
        return Err(Error::SpectraOverlap { gap });
    }

    let mut y = CMat::zeros(m, n);
    for j in 0..n {
        let mut col: Vec<_> = (0..m).map(|i| rhs[(i, j)]).collect();
        for k in 0..j {
            let t = tb[(k, j)];
            if t != ZERO {
                for i in 0..m {
                    col[i] -= y[(i, k)] * t;
                }
            }
        }
        let shift = tb[(j, j)];
        for i in (0..m).rev() {
            let mut s = col[i];
            for l in i + 1..m {
                s -= ta[(i, l)] * y[(l, j)];
            }
            y[(i, j)] = s / (ta[(i, i)] + shift);
        }
    }
    Ok(y)
}

/// Solves `F X + X F† = Q`; the result is Hermitian when `Q` is.
pub fn solve_lyapunov(f: &CMat, q: &CMat) -> Result<CMat> {
    let x = solve_sylvester(f, &f.adjoint(), q)?;
    Ok(if super::is_hermitian(q, 1e-12) {
        hermitize(&x)
    } else {
        x
    })
}

/// `||F X + X F† - Q||_F`.
pub fn lyapunov_residual(f: &CMat, x: &CMat, q: &CMat) -> f64 {
    frobenius(&(f * x + x * f.adjoint() - q))
}

fn check_shapes(a: &CMat, b: &CMat, rhs: &CMat) -> Result<()> {
    for m in [a, b] {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
    }
    if rhs.nrows() != a.nrows() || rhs.ncols() != b.nrows() {
        return Err(Error::Dimension(format!(
            "Sylvester right-hand side is {}x{}, expected {}x{}",
            rhs.nrows(),
            rhs.ncols(),
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_matrix};

    #[test]
    fn sylvester_residual_small() {
        let a = real_matrix(3, 3, &[1.0, 2.0, 0.0, 0.0, 3.0, 1.0, 1.0, 0.0, 4.0]);
        let b = CMat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 0.5 * i as f64 - 0.2));
        let rhs = CMat::from_fn(3, 2, |i, j| c(i as f64 - j as f64, 1.0));
        let x = solve_sylvester(&a, &b, &rhs).unwrap();
        assert!(frobenius(&(&a * &x + &x * &b - &rhs)) < 1e-12);
    }

    #[test]
    fn scalar_lyapunov() {
        // -2x = -1
        let f = real_matrix(1, 1, &[-1.0]);
        let q = real_matrix(1, 1, &[-1.0]);
        let x = solve_lyapunov(&f, &q).unwrap();
        assert!((x[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(lyapunov_residual(&f, &x, &q) < 1e-15);
    }

    #[test]
    fn overlapping_spectra_rejected() {
        let a = real_matrix(1, 1, &[1.0]);
        let b = real_matrix(1, 1, &[-1.0]);
        let rhs = real_matrix(1, 1, &[1.0]);
        assert!(matches!(
            solve_sylvester(&a, &b, &rhs),
            Err(Error::SpectraOverlap { .. })
        ));
    }
}
