//! Matrix exponential.
//!
//! Scaling and squaring with diagonal Padé approximants of degree
//! 3, 5, 7, 9 or 13, following Higham's 2005 selection thresholds.
//! Strictly triangular (hence nilpotent) and diagonal inputs are
//! evaluated exactly.

use super::{c, norm1, CMat, ZERO};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `e^{M t}`.
pub fn expm(m: &CMat, t: f64) -> Result<CMat> {
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
    let a = m * c(t, 0.0);
    let out = if is_diagonal(&a) {
        CMat::from_fn(n, n, |i, j| if i == j { a[(i, i)].exp() } else { ZERO })
    } else if is_strictly_triangular(&a) {
        nilpotent_series(&a)
    } else {
        pade(&a)?
    };
    if !super::is_finite(&out) {
        return Err(Error::Range { horizon: t });
    }
    Ok(out)
}

/// `e^{M}`; shorthand for `expm(m, 1.0)`.
pub fn expm_t(m: &CMat) -> Result<CMat> {
    expm(m, 1.0)
}

fn is_diagonal(a: &CMat) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == ZERO))
}

fn is_strictly_triangular(a: &CMat) -> bool {
    let n = a.nrows();
    let upper = (0..n).all(|i| (0..=i).all(|j| a[(i, j)] == ZERO));
    let lower = (0..n).all(|i| (i..n).all(|j| a[(i, j)] == ZERO));
    upper || lower
}

/// Terminating series `sum_{k<n} A^k / k!` for nilpotent `A`.
fn nilpotent_series(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut out = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..n {
        term = &term * a * c(1.0 / k as f64, 0.0);
        out += &term;
    }
    out
}

fn pade(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let ident = CMat::identity(n, n);
    let norm = norm1(a);
    if !norm.is_finite() {
        return Err(Error::Range { horizon: f64::NAN });
    }
    let a2 = a * a;
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            return low_degree(a, &a2, &ident, coeffs);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = c(2f64.powi(-s), 0.0);
    let a = a * scale;
    let a2 = a2 * (scale * scale);
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| c(PADE_13[k], 0.0);

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1));
    let v_inner = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = v_inner + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let mut r = solve_pade(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn low_degree(a: &CMat, a2: &CMat, ident: &CMat, coeffs: &[f64]) -> Result<CMat> {
    let n = a.nrows();
    let m = coeffs.len() - 1;
    let mut u_even = CMat::zeros(n, n);
    let mut v = CMat::zeros(n, n);
    let mut power = ident.clone();
    for k in 0..=m / 2 {
        if 2 * k < m {
            u_even += &power * c(coeffs[2 * k + 1], 0.0);
        }
        v += &power * c(coeffs[2 * k], 0.0);
        power = &power * a2;
    }
    let u = a * u_even;
    solve_pade(&u, &v)
}

fn solve_pade(u: &CMat, v: &CMat) -> Result<CMat> {
    let q = v - u;
    let p = v + u;
    q.lu().solve(&p).ok_or(Error::Singular {
        pivot: 0.0,
        index: 0,
    })
}
