//! Finite-horizon controllability Gramians
//! `W(T) = ∫_0^T e^{-At} B B† e^{-A†t} dt`, their inverses, the
//! infinite-horizon Gramian of the unstable block, and the block
//! Gramians of a spectral partition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{dopri5, gauss_kronrod, Tolerance};
use crate::linalg::{
    block_diag, convolution_integral, expm, frobenius, from_blocks, gram_integral,
    hermitian_eigenvalues, hermitian_inverse, hermitize, norm1, numerical_rank, solve_lyapunov,
    CMat, RANK_RTOL,
};
use crate::model::{controllability_matrix, LtiSystem, SpectralPartition};

/// How a Gramian was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GramianMethod {
    /// Off-diagonal block of the exponential of `[[-A, BB†], [0, A†]]`.
    AugmentedExpm,
    /// Integrates `W' = BB† - AW - WA†` from `W(0) = 0`.
    Ode,
    /// Adaptive Gauss–Kronrod quadrature of the integrand.
    Quadrature,
}

impl GramianMethod {
    pub const ALL: [GramianMethod; 3] = [
        GramianMethod::AugmentedExpm,
        GramianMethod::Ode,
        GramianMethod::Quadrature,
    ];
}

/// `W(T)` at one horizon.
#[derive(Debug, Clone)]
pub struct GramianSample {
    pub t: f64,
    pub w: CMat,
    pub method: GramianMethod,
    /// Largest relative discrepancy against the other methods, when
    /// cross-validation was requested.
    pub est_error: Option<f64>,
}

/// `W_{A,B}(T)` for an arbitrary pair of matrices.
pub fn gramian_of(a: &CMat, b: &CMat, t: f64, method: GramianMethod) -> Result<CMat> {
    if !(t >= 0.0) {
        return Err(Error::NegativeHorizon(t));
    }
    let n = a.nrows();
    if t == 0.0 {
        return Ok(CMat::zeros(n, n));
    }
    let q = b * b.adjoint();
    let w = match method {
        GramianMethod::AugmentedExpm => gram_integral(&(-a), &(-a.adjoint()), &q, t)?,
        GramianMethod::Ode => {
            let ah = a.adjoint();
            let (w, _) = dopri5(
                |_, w| &q - a * w - w * &ah,
                0.0,
                t,
                &CMat::zeros(n, n),
                Tolerance::default(),
            )?;
            w
        }
        GramianMethod::Quadrature => {
            let neg = -a;
            let pieces = ((t * norm1(a).max(1.0)).ceil() as usize).clamp(1, 4096);
            let (w, _) = gauss_kronrod(
                |s| {
                    let e = expm(&neg, s)?;
                    Ok(&e * &q * e.adjoint())
                },
                0.0,
                t,
                pieces,
                Tolerance::default(),
            )?;
            w
        }
    };
    if !crate::linalg::is_finite(&w) {
        return Err(Error::Range { horizon: t });
    }
    Ok(hermitize(&w))
}

/// `W_{A,B}(T)` by the requested method.
pub fn gramian(sys: &LtiSystem, t: f64, method: GramianMethod) -> Result<GramianSample> {
    Ok(GramianSample {
        t,
        w: gramian_of(&sys.a, &sys.b, t, method)?,
        method,
        est_error: None,
    })
}

/// Relative Frobenius distance `||X - Y|| / max(||X||, ||Y||)`.
pub fn relative_gap(x: &CMat, y: &CMat) -> f64 {
    let scale = frobenius(x).max(frobenius(y));
    if scale == 0.0 {
        0.0
    } else {
        frobenius(&(x - y)) / scale
    }
}

/// `W(T)` by `method`, with `est_error` set to the largest relative
/// discrepancy against the two other methods.
pub fn gramian_cross_validated(
    sys: &LtiSystem,
    t: f64,
    method: GramianMethod,
) -> Result<GramianSample> {
    let mut s = gramian(sys, t, method)?;
    let mut worst: f64 = 0.0;
    for other in GramianMethod::ALL.into_iter().filter(|&m| m != method) {
        let w = gramian_of(&sys.a, &sys.b, t, other)?;
        worst = worst.max(relative_gap(&s.w, &w));
    }
    s.est_error = Some(worst);
    Ok(s)
}

/// `W(T)^{-1}` with its condition estimate.
#[derive(Debug, Clone)]
pub struct GramianInverse {
    pub inverse: CMat,
    pub condition: f64,
}

/// Inverts a sampled Gramian.
pub fn gramian_inverse(sample: &GramianSample) -> Result<GramianInverse> {
    invert_pd(&sample.w)
}

fn invert_pd(w: &CMat) -> Result<GramianInverse> {
    let inv = hermitian_inverse(w).map_err(|e| match e {
        Error::Singular { pivot, .. } => Error::SingularGramian { pivot },
        other => other,
    })?;
    if !inv.positive_definite {
        return Err(Error::SingularGramian {
            pivot: inv.min_pivot,
        });
    }
    Ok(GramianInverse {
        inverse: inv.inverse,
        condition: inv.condition,
    })
}

/// `W_u = ∫_0^∞ e^{-J_u t} C_u C_u† e^{-J_u† t} dt`, the solution of
/// `J_u W_u + W_u J_u† = C_u C_u†`. Empty when `n_u = 0`.
pub fn infinite_gramian_unstable(part: &SpectralPartition) -> Result<CMat> {
    if part.n_u == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let sub_sys = LtiSystem::new(part.j_u.clone(), part.c_u.clone())?;
    if numerical_rank(&controllability_matrix(&sub_sys), RANK_RTOL) < part.n_u {
        return Err(Error::NotControllable);
    }
    let q = &part.c_u * part.c_u.adjoint();
    solve_lyapunov(&part.j_u, &q)
}

/// Block Gramians of the partitioned pair `(J, C)` at horizon `T`:
/// `V_ij = ∫_0^T e^{-J_i t} C_i C_j† e^{-J_j† t} dt`.
#[derive(Debug, Clone)]
pub struct BlockGramians {
    pub t: f64,
    pub v_u: CMat,
    pub v_o: CMat,
    pub v_a: CMat,
    pub v_uo: CMat,
    pub v_ua: CMat,
    pub v_oa: CMat,
}

impl BlockGramians {
    /// `V_us = [V_uo, V_ua]`.
    pub fn v_us(&self) -> CMat {
        from_blocks(&[vec![self.v_uo.clone(), self.v_ua.clone()]])
    }

    /// `V_s = [[V_o, V_oa], [V_oa†, V_a]]`.
    pub fn v_s(&self) -> CMat {
        from_blocks(&[
            vec![self.v_o.clone(), self.v_oa.clone()],
            vec![self.v_oa.adjoint(), self.v_a.clone()],
        ])
    }

    /// The full `W_{J,C}(T)`.
    pub fn assemble(&self) -> CMat {
        let v_us = self.v_us();
        from_blocks(&[
            vec![self.v_u.clone(), v_us.clone()],
            vec![v_us.adjoint(), self.v_s()],
        ])
    }
}

fn cross(ji: &CMat, ci: &CMat, jj: &CMat, cj: &CMat, t: f64) -> Result<CMat> {
    gram_integral(&(-ji), &(-jj.adjoint()), &(ci * cj.adjoint()), t)
}

/// All six blocks of `W_{J,C}(T)` by the augmented-exponential method.
pub fn block_gramians(part: &SpectralPartition, t: f64) -> Result<BlockGramians> {
    if !(t >= 0.0) {
        return Err(Error::NegativeHorizon(t));
    }
    let (ju, jo, ja) = (&part.j_u, &part.j_o, &part.j_a);
    let (cu, co, ca) = (&part.c_u, &part.c_o, &part.c_a);
    Ok(BlockGramians {
        t,
        v_u: hermitize(&cross(ju, cu, ju, cu, t)?),
        v_o: hermitize(&cross(jo, co, jo, co, t)?),
        v_a: hermitize(&cross(ja, ca, ja, ca, t)?),
        v_uo: cross(ju, cu, jo, co, t)?,
        v_ua: cross(ju, cu, ja, ca, t)?,
        v_oa: cross(jo, co, ja, ca, t)?,
    })
}

/// Blocks of `Λ W_{J,C}(T) Λ†` with `Λ = diag(I, I, e^{J_a T})`. Every
/// block stays bounded or grows polynomially in `T`, even though `V_a`,
/// `V_ua` and `V_oa` themselves grow or shrink exponentially.
#[derive(Debug, Clone)]
pub struct BufferedGramians {
    pub t: f64,
    pub v_u: CMat,
    pub v_o: CMat,
    pub v_uo: CMat,
    /// `V_ua e^{J_a† T}`.
    pub vt_ua: CMat,
    /// `V_oa e^{J_a† T}`.
    pub vt_oa: CMat,
    /// `e^{J_a T} V_a e^{J_a† T}`.
    pub vt_a: CMat,
    /// `e^{J_a T}`.
    pub e_ja: CMat,
    /// `e^{J_o T}`.
    pub e_jo: CMat,
}

/// Evaluates [`BufferedGramians`] directly from integrals whose
/// integrands never grow exponentially.
pub fn buffered_gramians(part: &SpectralPartition, t: f64) -> Result<BufferedGramians> {
    if !(t >= 0.0) {
        return Err(Error::NegativeHorizon(t));
    }
    let (ju, jo, ja) = (&part.j_u, &part.j_o, &part.j_a);
    let (cu, co, ca) = (&part.c_u, &part.c_o, &part.c_a);
    Ok(BufferedGramians {
        t,
        v_u: hermitize(&cross(ju, cu, ju, cu, t)?),
        v_o: hermitize(&cross(jo, co, jo, co, t)?),
        v_uo: cross(ju, cu, jo, co, t)?,
        vt_ua: convolution_integral(&(-ju), &ja.adjoint(), &(cu * ca.adjoint()), t)?,
        vt_oa: convolution_integral(&(-jo), &ja.adjoint(), &(co * ca.adjoint()), t)?,
        vt_a: hermitize(&gram_integral(ja, &ja.adjoint(), &(ca * ca.adjoint()), t)?),
        e_ja: expm(ja, t)?,
        e_jo: expm(jo, t)?,
    })
}

impl BufferedGramians {
    /// `Λ W_{J,C}(T) Λ†`.
    pub fn scaled(&self) -> CMat {
        let vt_us = from_blocks(&[vec![self.v_uo.clone(), self.vt_ua.clone()]]);
        let vt_s = from_blocks(&[
            vec![self.v_o.clone(), self.vt_oa.clone()],
            vec![self.vt_oa.adjoint(), self.vt_a.clone()],
        ]);
        from_blocks(&[
            vec![self.v_u.clone(), vt_us.clone()],
            vec![vt_us.adjoint(), vt_s],
        ])
    }

    /// `Λ = diag(I, I, e^{J_a T})`.
    pub fn lambda(&self) -> CMat {
        let nu = self.v_u.nrows();
        let no = self.v_o.nrows();
        block_diag(&[&CMat::identity(nu, nu), &CMat::identity(no, no), &self.e_ja])
    }
}

/// `W_{A,B}(T)^{-1}` evaluated in the partitioned frame:
/// `W^{-1} = P^{-†} Λ† (Λ W_{J,C} Λ†)^{-1} Λ P^{-1}`. Usable at horizons
/// where `W(T)` itself is too ill-conditioned to invert or overflows.
pub fn partitioned_gramian_inverse(part: &SpectralPartition, t: f64) -> Result<GramianInverse> {
    if !(t > 0.0) {
        return Err(Error::NegativeHorizon(t));
    }
    let buf = buffered_gramians(part, t)?;
    let m_inv = invert_pd(&buf.scaled())?;
    let lam = buf.lambda();
    let v_inv = lam.adjoint() * &m_inv.inverse * &lam;
    let w_inv = part.p_inv.adjoint() * v_inv * &part.p_inv;
    if !crate::linalg::is_finite(&w_inv) {
        return Err(Error::Range { horizon: t });
    }
    Ok(GramianInverse {
        inverse: hermitize(&w_inv),
        condition: m_inv.condition,
    })
}

/// Smallest eigenvalue of the Hermitian part, for PSD checks.
pub fn min_eigenvalue(w: &CMat) -> f64 {
    hermitian_eigenvalues(w).first().copied().unwrap_or(0.0)
}

/// `W_{J,C}(T)` read back from the original coordinates, for checks.
pub fn partitioned_gramian(part: &SpectralPartition, sys_w: &CMat) -> CMat {
    &part.p_inv * sys_w * part.p_inv.adjoint()
}
