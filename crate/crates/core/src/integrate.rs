//! General-purpose adaptive integrators for matrix-valued problems.
//!
//! These exist as oracles: they share no code path with the
//! augmented-exponential routines in [`crate::linalg`], so agreement
//! between the two is meaningful evidence.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, CMat};

/// Error tolerances for the adaptive integrators.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-12,
            atol: 1e-300,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` with the Dormand–Prince
/// 5(4) pair and standard step-size control. Returns `y(t1)` and the
/// number of accepted steps.
pub fn dopri5<F>(mut f: F, t0: f64, t1: f64, y0: &CMat, tol: Tolerance) -> Result<(CMat, usize)>
where
    F: FnMut(f64, &CMat) -> CMat,
{
    if t1 == t0 {
        return Ok((y0.clone(), 0));
    }
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0.clone();
    let mut k1 = f(t, &y);
    let mut h = dir * (span.abs() * 1e-3).min(1e-2);
    let mut accepted = 0usize;
    let max_steps = 5_000_000usize;
    let mut attempts = 0usize;
    loop {
        if (t1 - t) * dir <= 0.0 {
            break;
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        attempts += 1;
        if attempts > max_steps {
            return Err(Error::NoConvergence {
                iterations: attempts,
            });
        }
        let mut k: Vec<CMat> = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    ys += kj * c(h * A[s][j], 0.0);
                }
            }
            k.push(f(t + C[s] * h, &ys));
        }
        // 5th-order solution uses the last stage row of A
        let mut y_new = y.clone();
        for j in 0..6 {
            if A[6][j] != 0.0 {
                y_new += &k[j] * c(h * A[6][j], 0.0);
            }
        }
        let mut err = CMat::zeros(y.nrows(), y.ncols());
        for j in 0..7 {
            if E[j] != 0.0 {
                err += &k[j] * c(h * E[j], 0.0);
            }
        }
        let ymax = y
            .iter()
            .chain(y_new.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let mut acc = 0.0;
        for i in 0..err.len() {
            let sc = tol.atol + tol.rtol * (y[i].norm().max(y_new[i].norm()) + 1e-3 * ymax);
            let r = err[i].norm() / sc.max(f64::MIN_POSITIVE);
            acc += r * r;
        }
        let en = (acc / err.len() as f64).sqrt();
        if !en.is_finite() || !crate::linalg::is_finite(&y_new) {
            return Err(Error::SimulationOverflow { time: t + h });
        }
        if en <= 1.0 {
            t += h;
            y = y_new;
            k1 = k.pop().unwrap();
            accepted += 1;
        }
        let factor = if en == 0.0 {
            5.0
        } else {
            (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-14 * span.abs() {
            return Err(Error::NoConvergence {
                iterations: attempts,
            });
        }
    }
    Ok((y, accepted))
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(CMat, CMat)>
where
    F: FnMut(f64) -> Result<CMat>,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid)?;
    let mut kron = &fc * c(WGK[7], 0.0);
    let mut gauss = &fc * c(WG[3], 0.0);
    for j in 0..7 {
        let x = half * XGK[j];
        let s = f(mid - x)? + f(mid + x)?;
        kron += &s * c(WGK[j], 0.0);
        if j % 2 == 1 {
            gauss += &s * c(WG[j / 2], 0.0);
        }
    }
    Ok((kron * c(half, 0.0), gauss * c(half, 0.0)))
}

struct Piece {
    err: f64,
    a: f64,
    b: f64,
    value: CMat,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of a matrix-valued
/// integrand over `[a, b]`, starting from `initial_pieces` equal panels.
/// Returns the integral and the summed error estimate.
pub fn gauss_kronrod<F>(
    mut f: F,
    a: f64,
    b: f64,
    initial_pieces: usize,
    tol: Tolerance,
) -> Result<(CMat, f64)>
where
    F: FnMut(f64) -> Result<CMat>,
{
    let pieces = initial_pieces.max(1);
    let mut heap = BinaryHeap::new();
    let width = (b - a) / pieces as f64;
    for k in 0..pieces {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == pieces { b } else { lo + width };
        let (kv, gv) = gk15(&mut f, lo, hi)?;
        let err = frobenius(&(&kv - gv));
        heap.push(Piece {
            err,
            a: lo,
            b: hi,
            value: kv,
        });
    }
    let max_pieces = 50_000;
    let sum = |heap: &BinaryHeap<Piece>| -> (CMat, f64) {
        let total = heap
            .iter()
            .map(|p| p.value.clone())
            .reduce(|s, v| s + v)
            .unwrap();
        (total, heap.iter().map(|p| p.err).sum())
    };
    let (mut total, mut err) = sum(&heap);
    loop {
        if err <= tol.atol.max(tol.rtol * frobenius(&total)) {
            return Ok(sum(&heap));
        }
        if heap.len() >= max_pieces {
            log::warn!("quadrature stopped at {max_pieces} panels, error estimate {err:e}");
            return Ok(sum(&heap));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            return Ok(sum(&heap));
        }
        total -= &worst.value;
        err -= worst.err;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (kv, gv) = gk15(&mut f, lo, hi)?;
            let e = frobenius(&(&kv - gv));
            total += &kv;
            err += e;
            heap.push(Piece {
                err: e,
                a: lo,
                b: hi,
                value: kv,
            });
        }
        if heap.len() % 1024 == 0 {
            (total, err) = sum(&heap);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;

    #[test]
    fn exponential_decay_ode() {
        let a = real_matrix(1, 1, &[-2.0]);
        let y0 = real_matrix(1, 1, &[1.0]);
        let (y, steps) = dopri5(|_, y| &a * y, 0.0, 3.0, &y0, Tolerance::default()).unwrap();
        assert!(steps > 0);
        assert!((y[(0, 0)].re - (-6f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn polynomial_quadrature_is_exact() {
        let (v, _) = gauss_kronrod(
            |t| Ok(real_matrix(1, 2, &[t * t, t.powi(5)])),
            0.0,
            2.0,
            1,
            Tolerance::default(),
        )
        .unwrap();
        assert!((v[(0, 0)].re - 8.0 / 3.0).abs() < 1e-14);
        assert!((v[(0, 1)].re - 64.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_quadrature() {
        let (v, _) = gauss_kronrod(
            |t| Ok(real_matrix(1, 1, &[(10.0 * t).cos()])),
            0.0,
            5.0,
            4,
            Tolerance::default(),
        )
        .unwrap();
        assert!((v[(0, 0)].re - (50f64).sin() / 10.0).abs() < 1e-13);
    }
}
