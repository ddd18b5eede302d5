//! Matrix-exponential integrals evaluated by augmented exponentials on a
//! short base step followed by exact doubling.
//!
//! The base step is chosen so that `h * max(||F||, ||G||) <= 1/2`, which
//! keeps the augmented exponential in its most accurate regime. Doubling
//! then reaches `T = 2^k h` with `k` matrix products per level.

use super::{expm, from_blocks, norm1, sub, CMat};
use crate::error::{Error, Result};

const MAX_DOUBLINGS: u32 = 64;

fn base_step(t: f64, norm: f64) -> (f64, u32) {
    if norm == 0.0 || t == 0.0 {
        return (t, 0);
    }
    let mut k = 0u32;
    let mut h = t;
    while h * norm > 0.5 && k < MAX_DOUBLINGS {
        h *= 0.5;
        k += 1;
    }
    (h, k)
}

fn check(f: &CMat, g: &CMat, q: &CMat, t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::NegativeHorizon(t));
    }
    for m in [f, g] {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
    }
    if q.nrows() != f.nrows() || q.ncols() != g.nrows() {
        return Err(Error::Dimension(format!(
            "integrand weight is {}x{}, expected {}x{}",
            q.nrows(),
            q.ncols(),
            f.nrows(),
            g.nrows()
        )));
    }
    Ok(())
}

/// `∫_0^T e^{F s} Q e^{H s} ds`.
pub fn gram_integral(f: &CMat, h: &CMat, q: &CMat, t: f64) -> Result<CMat> {
    check(f, h, q, t)?;
    let (p, r) = (f.nrows(), h.nrows());
    if t == 0.0 || p == 0 || r == 0 {
        return Ok(CMat::zeros(p, r));
    }
    let (step, k) = base_step(t, norm1(f).max(norm1(h)));
    let aug = from_blocks(&[vec![f.clone(), q.clone()], vec![CMat::zeros(r, p), -h]]);
    let e = expm(&aug, step)?;
    let mut ef = sub(&e, 0, 0, p, p);
    let mut eh = expm(h, step)?;
    let mut x = sub(&e, 0, p, p, r) * &eh;
    for _ in 0..k {
        x = &x + &ef * &x * &eh;
        ef = &ef * &ef;
        eh = &eh * &eh;
        if !super::is_finite(&x) {
            return Err(Error::Range { horizon: t });
        }
    }
    Ok(x)
}

/// `∫_0^T e^{F t} Q e^{G (T - t)} dt`.
pub fn convolution_integral(f: &CMat, g: &CMat, q: &CMat, t: f64) -> Result<CMat> {
    check(f, g, q, t)?;
    let (p, r) = (f.nrows(), g.nrows());
    if t == 0.0 || p == 0 || r == 0 {
        return Ok(CMat::zeros(p, r));
    }
    let (step, k) = base_step(t, norm1(f).max(norm1(g)));
    let aug = from_blocks(&[
        vec![f.clone(), q.clone()],
        vec![CMat::zeros(r, p), g.clone()],
    ]);
    let e = expm(&aug, step)?;
    let mut ef = sub(&e, 0, 0, p, p);
    let mut eg = sub(&e, p, p, r, r);
    let mut z = sub(&e, 0, p, p, r);
    for _ in 0..k {
        z = &z * &eg + &ef * &z;
        ef = &ef * &ef;
        eg = &eg * &eg;
        if !super::is_finite(&z) {
            return Err(Error::Range { horizon: t });
        }
    }
    Ok(z)
}
