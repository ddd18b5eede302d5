//! The limit `K = lim_{T→∞} W(T)^{-1}`, the Riccati identity it
//! satisfies, the closed-loop spectral map, the subspaces `V_o` / `V_a`,
//! and existence of the infinite-horizon problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::{infinite_gramian_unstable, partitioned_gramian_inverse};
use crate::linalg::{
    c, eigenvalues, frobenius, hermitian_inverse, hermitize, multiset_distance, orthonormal_basis,
    realify_basis, solve_lyapunov, solve_sylvester, sub, vec_norm, CMat, CVec, Field, C64,
    RANK_RTOL,
};
use crate::model::{
    controllability_matrix, is_controllable, spectral_partition, unstabilizable_modes, LtiSystem,
    SpectralPartition,
};

/// Relative tolerance in the Riccati residual bound.
pub const RICCATI_RTOL: f64 = 1e-9;
/// Default membership tolerance for `x0 ∈ V_a`.
pub const TAU_MEM: f64 = 1e-7;

/// Everything derived from `K`.
#[derive(Debug, Clone)]
pub struct LimitSummary {
    pub k: CMat,
    pub w_u: CMat,
    /// `||A†K + KA - K B B† K||_F`.
    pub riccati_residual: f64,
    /// `RICCATI_RTOL * (2 ||A|| ||K|| + ||K||^2 ||B||^2)`.
    pub riccati_bound: f64,
    /// Eigenvalues of `A - B B† K`.
    pub theta_spectrum: Vec<C64>,
    /// `A - B B† K`.
    pub closed_loop: CMat,
    pub v_u_basis: CMat,
    pub v_o_basis: CMat,
    pub v_a_basis: CMat,
    /// Real basis of `V_a ∩ R^n`, for real systems.
    pub r_a_basis: Option<CMat>,
    pub partition: SpectralPartition,
    pub field: Field,
}

impl LimitSummary {
    /// `K̃ = P† K P`, which equals `diag(W_u^{-1}, 0)`.
    pub fn k_tilde(&self) -> CMat {
        self.partition.p.adjoint() * &self.k * &self.partition.p
    }

    /// `x0† K x0`.
    pub fn cost(&self, x0: &CVec) -> f64 {
        (x0.adjoint() * &self.k * x0)[(0, 0)].re
    }
}

fn not_stabilizable(sys: &LtiSystem) -> Result<()> {
    let bad = unstabilizable_modes(sys)?;
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::NotStabilizable { eigenvalues: bad })
    }
}

/// Builds `K = P^{-†} diag(W_u^{-1}, 0) P^{-1}` from the spectral partition,
/// together with the subspaces of the closed loop `A - B B† K`.
pub fn limit_k(sys: &LtiSystem) -> Result<LimitSummary> {
    not_stabilizable(sys)?;
    let part = spectral_partition(sys)?;
    let n = sys.n();
    let (nu, no, na) = (part.n_u, part.n_o, part.n_a);

    let w_u = infinite_gramian_unstable(&part)?;
    let w_u_inv = if nu > 0 {
        hermitian_inverse(&w_u)?.inverse
    } else {
        CMat::zeros(0, 0)
    };
    let mut kt = CMat::zeros(n, n);
    kt.view_mut((0, 0), (nu, nu)).copy_from(&w_u_inv);
    let k = hermitize(&(part.p_inv.adjoint() * &kt * &part.p_inv));

    let bbh = &sys.b * sys.b.adjoint();
    let residual = frobenius(&(sys.a.adjoint() * &k + &k * &sys.a - &k * &bbh * &k));
    let (na_, nk, nb) = (frobenius(&sys.a), frobenius(&k), frobenius(&sys.b));
    let bound = RICCATI_RTOL * (2.0 * na_ * nk + nk * nk * nb * nb).max(f64::MIN_POSITIVE);
    let closed_loop = &sys.a - &bbh * &k;
    let theta_spectrum = eigenvalues(&closed_loop)?;

    // In the partition frame the closed loop is
    //   [[Λ_u, 0, 0], [X_o, J_o, 0], [X_a, 0, J_a]],
    // with Λ_u = J_u - C_u C_u† W_u^{-1}. Its stable invariant subspace is
    // spanned by [I; Y; 0] and the a-columns, where Y Λ_u - J_o Y = X_o.
    let g = &part.c_u.adjoint() * &w_u_inv;
    let lambda_u = &part.j_u - &part.c_u * &g;
    let x_o = -(&part.c_o * &g);
    let y = if nu > 0 && no > 0 {
        solve_sylvester(&(-&part.j_o), &lambda_u, &x_o)?
    } else {
        CMat::zeros(no, nu)
    };
    let mut frame_a = CMat::zeros(n, nu + na);
    frame_a
        .view_mut((0, 0), (nu, nu))
        .copy_from(&CMat::identity(nu, nu));
    frame_a.view_mut((nu, 0), (no, nu)).copy_from(&y);
    frame_a
        .view_mut((nu + no, nu), (na, na))
        .copy_from(&CMat::identity(na, na));
    let v_a_basis = orthonormal_basis(&(&part.p * frame_a), RANK_RTOL);
    let v_o_basis = orthonormal_basis(&sub(&part.p, 0, nu, n, no), RANK_RTOL);
    let r_a_basis = (sys.field == Field::Real).then(|| realify_basis(&v_a_basis, RANK_RTOL));

    Ok(LimitSummary {
        k,
        w_u,
        riccati_residual: residual,
        riccati_bound: bound,
        theta_spectrum,
        closed_loop,
        v_u_basis: CMat::zeros(n, 0),
        v_o_basis,
        v_a_basis,
        r_a_basis,
        partition: part,
        field: sys.field,
    })
}

/// `a + ib ↦ -|a| + ib`.
pub fn theta_map(spectrum: &[C64]) -> Vec<C64> {
    spectrum.iter().map(|z| c(-z.re.abs(), z.im)).collect()
}

/// Result of comparing `spec(A - BB†K)` with `θ(spec(A))`.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaCheck {
    pub ok: bool,
    pub mismatch: f64,
    pub tolerance: f64,
}

/// Matches `spec(A - BB†K)` against `θ(spec(A))` as multisets.
pub fn verify_theta(sys: &LtiSystem, summary: &LimitSummary) -> Result<ThetaCheck> {
    let expected = theta_map(&sys.eigenvalues()?);
    let mismatch = multiset_distance(&summary.theta_spectrum, &expected);
    let tolerance = 1e-6 * frobenius(&sys.a).max(1.0);
    Ok(ThetaCheck {
        ok: mismatch <= tolerance,
        mismatch,
        tolerance,
    })
}

/// Why the infinite-horizon problem is or is not solvable for every `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceReason {
    NotStabilizable,
    ImaginaryEigenvalues,
    Solvable,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExistenceVerdict {
    pub global_solvable: bool,
    pub reason: ExistenceReason,
    /// Per-`x0` answers are available (the pair is stabilizable).
    pub per_x0: bool,
    pub n_u: usize,
    pub n_o: usize,
    pub n_a: usize,
    /// Eigenvalues failing the stabilizability test.
    pub offending: Vec<[f64; 2]>,
}

/// Solvable for every `x0` iff `(A, B)` is stabilizable and `A` has no
/// eigenvalue on the imaginary axis.
pub fn classify(sys: &LtiSystem) -> Result<ExistenceVerdict> {
    let part = spectral_partition(sys)?;
    let bad = unstabilizable_modes(sys)?;
    let reason = if !bad.is_empty() {
        ExistenceReason::NotStabilizable
    } else if part.n_o > 0 {
        ExistenceReason::ImaginaryEigenvalues
    } else {
        ExistenceReason::Solvable
    };
    Ok(ExistenceVerdict {
        global_solvable: reason == ExistenceReason::Solvable,
        reason,
        per_x0: bad.is_empty(),
        n_u: part.n_u,
        n_o: part.n_o,
        n_a: part.n_a,
        offending: bad.iter().map(|z| [z.re, z.im]).collect(),
    })
}

/// Membership of `x0` in `V_a` (or its real part `R_a` for real systems).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Membership {
    pub member: bool,
    /// `||x0 - proj(x0)|| / ||x0||`.
    pub residual: f64,
    pub tolerance: f64,
}

pub fn membership_v_a(summary: &LimitSummary, x0: &CVec, tau_mem: f64) -> Result<Membership> {
    let n = summary.k.nrows();
    if x0.len() != n {
        return Err(Error::Dimension(format!(
            "x0 has length {}, expected {n}",
            x0.len()
        )));
    }
    let norm = vec_norm(x0);
    if norm == 0.0 {
        return Ok(Membership {
            member: true,
            residual: 0.0,
            tolerance: tau_mem,
        });
    }
    let real_x0 = x0.iter().all(|z| z.im == 0.0);
    let basis = match (&summary.r_a_basis, real_x0) {
        (Some(r), true) => r,
        _ => &summary.v_a_basis,
    };
    let proj = basis * (basis.adjoint() * x0);
    let residual = vec_norm(&(x0 - proj)) / norm;
    Ok(Membership {
        member: residual <= tau_mem,
        residual,
        tolerance: tau_mem,
    })
}

/// `(T, ||W(T)^{-1} - K||_F)` over a grid of horizons.
pub fn verify_gramian_limit(sys: &LtiSystem, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !is_controllable(sys, RANK_RTOL) {
        return Err(Error::NotControllable);
    }
    let summary = limit_k(sys)?;
    gramian_limit_table(&summary, grid)
}

/// Same as [`verify_gramian_limit`] for an already computed summary.
pub fn gramian_limit_table(summary: &LimitSummary, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&t| {
            let inv = partitioned_gramian_inverse(&summary.partition, t)?;
            Ok((t, frobenius(&(inv.inverse - &summary.k))))
        })
        .collect()
}

fn is_hurwitz(m: &CMat) -> Result<bool> {
    Ok(eigenvalues(m)?.iter().all(|z| z.re < 0.0))
}

/// Newton–Kleinman iteration from a stabilizing `K0`; returns the limit
/// when it converges.
fn newton_kleinman(sys: &LtiSystem, k0: &CMat) -> Result<Option<CMat>> {
    let bbh = &sys.b * sys.b.adjoint();
    let mut k = k0.clone();
    for _ in 0..100 {
        let ai = &sys.a - &bbh * &k;
        if !is_hurwitz(&ai)? {
            return Ok(None);
        }
        let rhs = -(&k * &bbh * &k);
        let next = hermitize(&solve_lyapunov(&ai.adjoint(), &rhs)?);
        let step = frobenius(&(&next - &k));
        k = next;
        if step <= 1e-13 * frobenius(&k).max(1.0) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Searches for a second stabilizing Hermitian solution of the Riccati
/// equation by perturbing `K` and iterating; `true` when none is found.
pub fn verify_riccati_uniqueness(sys: &LtiSystem, trials: usize, seed: u64) -> Result<bool> {
    let summary = limit_k(sys)?;
    if summary.partition.n_o > 0 {
        return Err(Error::Precondition(
            "uniqueness check requires no eigenvalues on the imaginary axis".into(),
        ));
    }
    let n = sys.n();
    let k = &summary.k;
    let scale = 1.0 + frobenius(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let complex = sys.field == Field::Complex;
    for trial in 0..trials {
        let mut h = CMat::from_fn(n, n, |_, _| {
            let im = if complex {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            };
            c(rng.random_range(-1.0..1.0), im)
        });
        h = hermitize(&h);
        let hn = frobenius(&h);
        if hn == 0.0 {
            continue;
        }
        let delta = [0.1, 1.0, 10.0][trial % 3] * scale / hn;
        let kp = k + h * c(delta, 0.0);
        if let Some(found) = newton_kleinman(sys, &kp)? {
            if frobenius(&(&found - k)) > 1e-6 * scale {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Controllability matrix rank of `(A, B)`; re-exported for reports.
pub fn controllability_rank(sys: &LtiSystem) -> usize {
    crate::linalg::numerical_rank(&controllability_matrix(sys), RANK_RTOL)
}
