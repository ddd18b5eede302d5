//! Complex Schur decomposition with eigenvalue reordering.
//!
//! The factorization runs in three stages: a permutation pass that
//! isolates eigenvalues already exposed by the sparsity pattern, a
//! Householder reduction of the remaining core to Hessenberg form, and a
//! single-shift implicit QR sweep with Wilkinson shifts. Isolated
//! eigenvalues are read off the diagonal exactly, so structurally
//! triangular inputs (Jordan forms, block-triangular closed loops) keep
//! their eigenvalues bit-for-bit.
//!
//! Reordering swaps adjacent diagonal entries with Givens rotations.

use super::{c, frobenius, CMat, C64, ZERO};
use crate::error::{Error, Result};

/// Sign class of an eigenvalue's real part relative to a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EigenClass {
    Positive,
    Zero,
    Negative,
}

/// `Positive` when `Re λ > τ`, `Negative` when `Re λ < -τ`, `Zero`
/// otherwise (ties at `|Re λ| = τ` count as zero).
pub fn classify_eigenvalue(lambda: C64, tau: f64) -> EigenClass {
    if lambda.re > tau {
        EigenClass::Positive
    } else if lambda.re < -tau {
        EigenClass::Negative
    } else {
        EigenClass::Zero
    }
}

/// Default classification tolerance `1e-8 * max(1, ||M||_F)`.
pub fn default_tau(m: &CMat) -> f64 {
    1e-8 * frobenius(m).max(1.0)
}

/// Ordered Schur form `M = Q T Q†` with eigenvalues grouped by class.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// Unitary transform.
    pub q: CMat,
    /// Upper triangular factor.
    pub t: CMat,
    /// Diagonal of `t`, in order.
    pub eigenvalues: Vec<C64>,
    /// Class tag per eigenvalue.
    pub classes: Vec<EigenClass>,
    pub tau: f64,
}

impl SpectralSplit {
    pub fn count(&self, class: EigenClass) -> usize {
        self.classes.iter().filter(|&&k| k == class).count()
    }

    /// Column range of `q` holding the group `class`.
    pub fn range(&self, class: EigenClass) -> std::ops::Range<usize> {
        let start = self.classes.iter().position(|&k| k == class).unwrap_or(0);
        let len = self.count(class);
        if len == 0 {
            0..0
        } else {
            start..start + len
        }
    }

    /// `Q T Q†`.
    pub fn reconstruct(&self) -> CMat {
        &self.q * &self.t * self.q.adjoint()
    }
}

/// Complex Schur factorization `M = Q T Q†`; returns `(Q, T)`.
pub fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    let mut t = m.clone();
    let mut q = CMat::identity(n, n);
    if n == 0 {
        return Ok((q, t));
    }
    let (lo, hi) = isolate(&mut t, &mut q);
    if hi > lo {
        hessenberg(&mut t, &mut q, lo, hi);
        qr_iterate(&mut t, &mut q, lo, hi)?;
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }
    Ok((q, t))
}

/// Eigenvalues (diagonal of the Schur factor), in Schur order.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Ordered Schur split with groups in the order positive, zero, negative.
pub fn ordered_spectral_split(m: &CMat, tau: f64) -> Result<SpectralSplit> {
    ordered_spectral_split_by(
        m,
        tau,
        [EigenClass::Positive, EigenClass::Zero, EigenClass::Negative],
    )
}

/// Ordered Schur split with a caller-chosen group order. The leading
/// columns of `q` span the invariant subspace of the first group.
pub fn ordered_spectral_split_by(
    m: &CMat,
    tau: f64,
    order: [EigenClass; 3],
) -> Result<SpectralSplit> {
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::Precondition(format!("tau must be >= 0, got {tau}")));
    }
    let (mut q, mut t) = schur(m)?;
    let n = t.nrows();
    let rank = |k: EigenClass| order.iter().position(|&o| o == k).unwrap();
    let key = |z: C64| rank(classify_eigenvalue(z, tau));

    // bubble sort by group key; only adjacent swaps of out-of-order pairs
    let mut swapped = true;
    while swapped {
        swapped = false;
        for k in 0..n.saturating_sub(1) {
            if key(t[(k, k)]) > key(t[(k + 1, k + 1)]) {
                swap_adjacent(&mut t, &mut q, k);
                swapped = true;
            }
        }
    }
    let eigenvalues: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let classes = eigenvalues
        .iter()
        .map(|&z| classify_eigenvalue(z, tau))
        .collect();
    Ok(SpectralSplit {
        q,
        t,
        eigenvalues,
        classes,
        tau,
    })
}

/// Plane rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: C64,
}

impl Givens {
    fn new(x: C64, y: C64) -> Givens {
        let ax = x.norm();
        let ay = y.norm();
        if ay == 0.0 {
            return Givens { c: 1.0, s: ZERO };
        }
        if ax == 0.0 {
            return Givens {
                c: 0.0,
                s: y.conj() / ay,
            };
        }
        let r = ax.hypot(ay);
        Givens {
            c: ax / r,
            s: x * y.conj() / (ax * r),
        }
    }

    /// Rows `i`, `j` of `m` (columns `from..`) <- `G [row_i; row_j]`.
    fn rows(&self, m: &mut CMat, i: usize, j: usize, from: usize) {
        let cc = c(self.c, 0.0);
        for k in from..m.ncols() {
            let a = m[(i, k)];
            let b = m[(j, k)];
            m[(i, k)] = cc * a + self.s * b;
            m[(j, k)] = -self.s.conj() * a + cc * b;
        }
    }

    /// Columns `i`, `j` of `m` (rows `..upto`) <- `[col_i, col_j] G†`.
    fn cols(&self, m: &mut CMat, i: usize, j: usize, upto: usize) {
        let cc = c(self.c, 0.0);
        for k in 0..upto {
            let a = m[(k, i)];
            let b = m[(k, j)];
            m[(k, i)] = cc * a + self.s.conj() * b;
            m[(k, j)] = -self.s * a + cc * b;
        }
    }
}

fn swap_adjacent(t: &mut CMat, q: &mut CMat, k: usize) {
    let a = t[(k, k)];
    let b = t[(k, k + 1)];
    let d = t[(k + 1, k + 1)];
    let x = b;
    let y = d - a;
    if x == ZERO && y == ZERO {
        return;
    }
    let g = Givens::new(x, y);
    let n = t.nrows();
    g.rows(t, k, k + 1, k);
    g.cols(t, k, k + 1, n);
    g.cols(q, k, k + 1, n);
    t[(k, k)] = d;
    t[(k + 1, k + 1)] = a;
    t[(k + 1, k)] = ZERO;
}

fn swap_index(t: &mut CMat, q: &mut CMat, i: usize, j: usize) {
    if i == j {
        return;
    }
    t.swap_rows(i, j);
    t.swap_columns(i, j);
    q.swap_columns(i, j);
}

/// Permutation balancing: pushes rows that isolate an eigenvalue to the
/// bottom and columns that isolate one to the top. Returns the core range
/// `[lo, hi]`; outside it the matrix is already upper triangular.
fn isolate(t: &mut CMat, q: &mut CMat) -> (usize, usize) {
    let n = t.nrows();
    let mut lo = 0usize;
    let mut hi = n - 1;

    // rows with zero off-diagonal entries inside [lo, hi] -> bottom
    'rows: loop {
        if hi == 0 {
            return (0, 0);
        }
        for j in (lo..=hi).rev() {
            if (lo..=hi).all(|k| k == j || t[(j, k)] == ZERO) {
                swap_index(t, q, j, hi);
                if hi == lo {
                    return (lo, hi);
                }
                hi -= 1;
                continue 'rows;
            }
        }
        break;
    }
    // columns with zero off-diagonal entries inside [lo, hi] -> top
    'cols: loop {
        for j in lo..=hi {
            if (lo..=hi).all(|k| k == j || t[(k, j)] == ZERO) {
                swap_index(t, q, j, lo);
                lo += 1;
                if lo >= hi {
                    return (lo.min(hi), hi);
                }
                continue 'cols;
            }
        }
        break;
    }
    (lo, hi)
}

fn hessenberg(t: &mut CMat, q: &mut CMat, lo: usize, hi: usize) {
    let n = t.nrows();
    for col in lo..hi.saturating_sub(1) {
        let len = hi - col;
        let x: Vec<C64> = (0..len).map(|i| t[(col + 1 + i, col)]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let norm = (x[0].norm_sqr() + tail).sqrt();
        let phase = if x[0] == ZERO {
            c(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * norm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        let base = col + 1;
        // left: rows base..=hi, columns col..n
        for k in col..n {
            let mut s = ZERO;
            for i in 0..len {
                s += v[i].conj() * t[(base + i, k)];
            }
            s *= beta;
            for i in 0..len {
                t[(base + i, k)] -= v[i] * s;
            }
        }
        // right: all rows, columns base..=hi
        for mat in [&mut *t, &mut *q] {
            for r in 0..n {
                let mut s = ZERO;
                for i in 0..len {
                    s += mat[(r, base + i)] * v[i];
                }
                s *= beta;
                for i in 0..len {
                    mat[(r, base + i)] -= s * v[i].conj();
                }
            }
        }
        for i in 1..len {
            t[(base + i, col)] = ZERO;
        }
    }
}

fn wilkinson_shift(a: C64, b: C64, cc: C64, d: C64) -> C64 {
    // eigenvalue of [[a, b], [cc, d]] closest to d
    let half = (a - d) * 0.5;
    let disc = (half * half + b * cc).sqrt();
    let mu1 = d + half + disc;
    let mu2 = d + half - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

fn qr_iterate(t: &mut CMat, q: &mut CMat, lo: usize, hi: usize) -> Result<()> {
    let n = t.nrows();
    let eps = f64::EPSILON;
    let max_iter = 60 * (hi - lo + 1);
    let mut total = 0usize;
    let mut h = hi;
    let mut since_deflation = 0usize;
    while h > lo {
        // find the start of the active unreduced block
        let mut s = h;
        while s > lo {
            let sub = t[(s, s - 1)].norm();
            let scale = t[(s - 1, s - 1)].norm() + t[(s, s)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if sub <= eps * scale {
                t[(s, s - 1)] = ZERO;
                break;
            }
            s -= 1;
        }
        if s == h {
            h -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::NoConvergence { iterations: total });
        }
        let mu = if since_deflation % 11 == 10 {
            // exceptional shift
            t[(h, h)] + c(0.75 * t[(h, h - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(t[(h - 1, h - 1)], t[(h - 1, h)], t[(h, h - 1)], t[(h, h)])
        };

        let g = Givens::new(t[(s, s)] - mu, t[(s + 1, s)]);
        g.rows(t, s, s + 1, s);
        g.cols(t, s, s + 1, (s + 3).min(h + 1));
        g.cols(q, s, s + 1, n);
        for k in s + 1..h {
            let g = Givens::new(t[(k, k - 1)], t[(k + 1, k - 1)]);
            g.rows(t, k, k + 1, k - 1);
            g.cols(t, k, k + 1, (k + 3).min(h + 1));
            g.cols(q, k, k + 1, n);
            t[(k + 1, k - 1)] = ZERO;
        }
    }
    Ok(())
}
