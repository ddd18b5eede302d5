//! Seeded random system generators for the property suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c, singular_values, CMat, CVec};
use crate::model::{controllability_report, LtiSystem};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `n x m` matrix of independent standard normals.
pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CMat {
    CMat::from_fn(n, m, |_, _| c(normal(rng), 0.0))
}

pub fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| c(normal(rng), 0.0))
}

/// Real block-diagonal matrix with prescribed real parts: `1x1` blocks for
/// real eigenvalues and `[[a, b], [-b, a]]` for conjugate pairs.
fn real_spectrum_blocks(
    rng: &mut ChaCha8Rng,
    n: usize,
    re: impl Fn(&mut ChaCha8Rng) -> f64,
) -> CMat {
    let mut d = CMat::zeros(n, n);
    let mut i = 0;
    while i < n {
        let a = re(rng);
        if i + 1 < n && rng.random_bool(0.4) {
            let b = rng.random_range(0.2..2.0);
            d[(i, i)] = c(a, 0.0);
            d[(i + 1, i + 1)] = c(a, 0.0);
            d[(i, i + 1)] = c(b, 0.0);
            d[(i + 1, i)] = c(-b, 0.0);
            i += 2;
        } else {
            d[(i, i)] = c(a, 0.0);
            i += 1;
        }
    }
    d
}

/// Orthogonal similarity `Q D Qᵀ` with `Q` from the QR factorization of
/// a Gaussian matrix.
fn rotate(rng: &mut ChaCha8Rng, d: &CMat) -> CMat {
    let n = d.nrows();
    let g = normal_matrix(rng, n, n);
    let q = g.qr().q();
    &q * d * q.adjoint()
}

/// Similarity `S D S^{-1}` with `cond(S) <= 100`.
fn conjugate(rng: &mut ChaCha8Rng, d: &CMat) -> CMat {
    let n = d.nrows();
    loop {
        let s = normal_matrix(rng, n, n);
        let sv = singular_values(&s);
        if sv[n - 1] > 0.0 && sv[0] / sv[n - 1] <= 100.0 {
            let s_inv = s.clone().try_inverse().expect("well-conditioned");
            return &s * d * s_inv;
        }
    }
}

/// Smallest accepted relative Hautus margin for [`hyperbolic_system`].
pub const MIN_HAUTUS_MARGIN: f64 = 0.05;

/// Real controllable pair with `n` states and `m` inputs whose eigenvalues
/// satisfy `gap <= |Re λ| <= 2`, each side of the axis equally likely.
/// `A` is normal (orthogonal eigenbasis of its real block form) and draws
/// with Hautus margin below [`MIN_HAUTUS_MARGIN`] are rejected.
pub fn hyperbolic_system(rng: &mut ChaCha8Rng, n: usize, m: usize, gap: f64) -> LtiSystem {
    loop {
        let d = real_spectrum_blocks(rng, n, |r| {
            let mag = r.random_range(gap..2.0);
            if r.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        });
        let a = rotate(rng, &d);
        let b = normal_matrix(rng, n, m);
        let sys = LtiSystem::new(a, b).expect("finite entries");
        let report = controllability_report(&sys);
        if report.is_ok_and(|r| r.hautus && r.margin >= MIN_HAUTUS_MARGIN) {
            return sys;
        }
    }
}

/// Real pair with eigenvalue real parts in `[-re_max, re_max]` (centers
/// allowed) for Gramian cross-checks.
pub fn general_system(rng: &mut ChaCha8Rng, n: usize, m: usize, re_max: f64) -> LtiSystem {
    let d = real_spectrum_blocks(rng, n, |r| r.random_range(-re_max..re_max));
    let a = conjugate(rng, &d);
    let b = normal_matrix(rng, n, m);
    LtiSystem::new(a, b).expect("finite entries")
}

/// Random sizes `n in 1..=n_max`, `m in 1..=min(3, n)`.
pub fn random_shape(rng: &mut ChaCha8Rng, n_max: usize) -> (usize, usize) {
    let n = rng.random_range(1..=n_max);
    let m = rng.random_range(1..=n.min(3));
    (n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn hyperbolic_spectra_respect_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (n, m) = random_shape(&mut rng, 6);
            let sys = hyperbolic_system(&mut rng, n, m, 0.1);
            for z in sys.eigenvalues().unwrap() {
                assert!(z.re.abs() > 0.1 - 1e-8 && z.re.abs() < 2.0 + 1e-8, "{z}");
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = hyperbolic_system(&mut ChaCha8Rng::seed_from_u64(9), 4, 2, 0.1);
        let b = hyperbolic_system(&mut ChaCha8Rng::seed_from_u64(9), 4, 2, 0.1);
        assert_eq!(a, b);
    }
}
