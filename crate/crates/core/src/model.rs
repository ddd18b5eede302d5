//! Linear time-invariant systems `x' = A x + B u`, controllability tests
//! and the unstable / center / stable spectral partition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, c, default_tau, frobenius, identity, numerical_rank, ordered_spectral_split,
    singular_values, solve_sylvester_triangular, sub, CMat, EigenClass, Field, C64, RANK_RTOL,
    ZERO,
};

/// How the caller declared `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeclaredForm {
    General,
    Jordan,
}

/// One Jordan block: eigenvalue on the diagonal, ones on the superdiagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanBlock {
    pub eig: C64,
    pub size: usize,
}

impl JordanBlock {
    pub fn new(eig: C64, size: usize) -> Self {
        JordanBlock { eig, size }
    }

    pub fn matrix(&self) -> CMat {
        CMat::from_fn(self.size, self.size, |i, j| {
            if i == j {
                self.eig
            } else if j == i + 1 {
                c(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }
}

/// Block-diagonal Jordan matrix.
pub fn jordan_matrix(blocks: &[JordanBlock]) -> CMat {
    let mats: Vec<CMat> = blocks.iter().map(JordanBlock::matrix).collect();
    let refs: Vec<&CMat> = mats.iter().collect();
    block_diag(&refs)
}

/// The pair `(A, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    pub a: CMat,
    pub b: CMat,
    pub field: Field,
    pub form: DeclaredForm,
    pub jordan_blocks: Option<Vec<JordanBlock>>,
}

impl LtiSystem {
    /// General-form system; the field is real when both matrices are.
    pub fn new(a: CMat, b: CMat) -> Result<Self> {
        let field = if Field::of(&a) == Field::Real && Field::of(&b) == Field::Real {
            Field::Real
        } else {
            Field::Complex
        };
        Self::with_field(a, b, field)
    }

    pub fn with_field(a: CMat, b: CMat, field: Field) -> Result<Self> {
        let sys = LtiSystem {
            a,
            b,
            field,
            form: DeclaredForm::General,
            jordan_blocks: None,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// System whose `A` is the Jordan matrix of `blocks`.
    pub fn jordan(blocks: Vec<JordanBlock>, b: CMat) -> Result<Self> {
        let a = jordan_matrix(&blocks);
        let field = if Field::of(&a) == Field::Real && Field::of(&b) == Field::Real {
            Field::Real
        } else {
            Field::Complex
        };
        let sys = LtiSystem {
            a,
            b,
            field,
            form: DeclaredForm::Jordan,
            jordan_blocks: Some(blocks),
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Checks shapes, field consistency and any declared Jordan structure.
    pub fn validate(&self) -> Result<()> {
        if !self.a.is_square() {
            return Err(Error::NotSquare {
                rows: self.a.nrows(),
                cols: self.a.ncols(),
            });
        }
        if self.b.nrows() != self.a.nrows() {
            return Err(Error::Dimension(format!(
                "B has {} rows but A is {}x{}",
                self.b.nrows(),
                self.a.nrows(),
                self.a.ncols()
            )));
        }
        if self.n() == 0 {
            return Err(Error::Dimension("empty state space".into()));
        }
        if !crate::linalg::is_finite(&self.a) || !crate::linalg::is_finite(&self.b) {
            return Err(Error::Input("A and B must have finite entries".into()));
        }
        if self.field == Field::Real
            && (Field::of(&self.a) != Field::Real || Field::of(&self.b) != Field::Real)
        {
            return Err(Error::Field(
                "real field declared but A or B has nonzero imaginary parts".into(),
            ));
        }
        match (self.form, &self.jordan_blocks) {
            (DeclaredForm::General, _) => Ok(()),
            (DeclaredForm::Jordan, None) => Err(Error::InvalidJordan(
                "jordan form declared without blocks".into(),
            )),
            (DeclaredForm::Jordan, Some(blocks)) => {
                if blocks.iter().any(|b| b.size == 0) {
                    return Err(Error::InvalidJordan("block of size 0".into()));
                }
                let j = jordan_matrix(blocks);
                if j.shape() != self.a.shape() || j != self.a {
                    return Err(Error::InvalidJordan(
                        "A differs from the matrix built from the declared blocks".into(),
                    ));
                }
                let tau = default_tau(&self.a);
                for b in blocks {
                    if b.eig.re != 0.0 && b.eig.re.abs() < tau {
                        return Err(Error::InvalidJordan(format!(
                            "eigenvalue {} has real part within tau = {tau:e} of zero but not zero",
                            b.eig
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Eigenvalues of `A`: the declared ones for Jordan systems, otherwise
    /// from the Schur form.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        match &self.jordan_blocks {
            Some(blocks) if self.form == DeclaredForm::Jordan => Ok(blocks
                .iter()
                .flat_map(|b| std::iter::repeat_n(b.eig, b.size))
                .collect()),
            _ => crate::linalg::eigenvalues(&self.a),
        }
    }
}

/// `[B, AB, ..., A^{n-1} B]`.
pub fn controllability_matrix(sys: &LtiSystem) -> CMat {
    let n = sys.n();
    let m = sys.m();
    let mut out = CMat::zeros(n, n * m);
    let mut block = sys.b.clone();
    for k in 0..n {
        out.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = &sys.a * block;
    }
    out
}

/// Kalman rank test with threshold `tau_rank * σ_max`.
pub fn is_controllable(sys: &LtiSystem, tau_rank: f64) -> bool {
    numerical_rank(&controllability_matrix(sys), tau_rank) == sys.n()
}

fn hautus_matrix(sys: &LtiSystem, lambda: C64) -> CMat {
    let n = sys.n();
    let mut m = CMat::zeros(n, n + sys.m());
    m.view_mut((0, 0), (n, n))
        .copy_from(&(identity(n) * lambda - &sys.a));
    m.view_mut((0, n), (n, sys.m())).copy_from(&sys.b);
    m
}

/// Smallest singular value of `[λI - A, B]` relative to its largest.
fn hautus_margin(sys: &LtiSystem, lambda: C64) -> (usize, f64) {
    let m = hautus_matrix(sys, lambda);
    let s = singular_values(&m);
    let top = s.first().copied().unwrap_or(0.0);
    let rank = numerical_rank(&m, RANK_RTOL);
    let margin = if top > 0.0 {
        s.get(sys.n() - 1).copied().unwrap_or(0.0) / top
    } else {
        0.0
    };
    (rank, margin)
}

fn distinct(eigs: &[C64], tol: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    for &z in eigs {
        if !out.iter().any(|w| (w - z).norm() <= tol) {
            out.push(z);
        }
    }
    out
}

/// Hautus test: `rank [λI - A, B] = n` at every eigenvalue of `A`.
pub fn is_controllable_hautus(sys: &LtiSystem, tau_rank: f64) -> Result<bool> {
    let eigs = sys.eigenvalues()?;
    let tol = 1e-10 * frobenius(&sys.a).max(1.0);
    Ok(distinct(&eigs, tol)
        .into_iter()
        .all(|l| numerical_rank(&hautus_matrix(sys, l), tau_rank) == sys.n()))
}

/// Eigenvalues with `Re λ >= -τ` at which the Hautus rank test fails.
pub fn unstabilizable_modes(sys: &LtiSystem) -> Result<Vec<C64>> {
    let eigs = sys.eigenvalues()?;
    let tau = default_tau(&sys.a);
    let tol = 1e-10 * frobenius(&sys.a).max(1.0);
    Ok(distinct(&eigs, tol)
        .into_iter()
        .filter(|l| l.re >= -tau)
        .filter(|&l| hautus_margin(sys, l).0 < sys.n())
        .collect())
}

/// Hautus test restricted to eigenvalues with `Re λ >= -τ`.
pub fn is_stabilizable(sys: &LtiSystem) -> Result<bool> {
    Ok(unstabilizable_modes(sys)?.is_empty())
}

/// Subspace form of stabilizability: the invariant subspace of `A` for
/// `Re λ >= -τ` lies in the range of the controllability matrix.
pub fn is_stabilizable_subspace(sys: &LtiSystem) -> Result<bool> {
    let tau = default_tau(&sys.a);
    let split = ordered_spectral_split(&sys.a, tau)?;
    let k = split.count(EigenClass::Positive) + split.count(EigenClass::Zero);
    if k == 0 {
        return Ok(true);
    }
    let ctrb = controllability_matrix(sys);
    let basis = sub(&split.q, 0, 0, sys.n(), k);
    let mut joined = CMat::zeros(sys.n(), ctrb.ncols() + k);
    joined
        .view_mut((0, 0), (sys.n(), ctrb.ncols()))
        .copy_from(&ctrb);
    joined
        .view_mut((0, ctrb.ncols()), (sys.n(), k))
        .copy_from(&basis);
    Ok(numerical_rank(&joined, RANK_RTOL) == numerical_rank(&ctrb, RANK_RTOL))
}

/// Both controllability verdicts with the Hautus margin.
#[derive(Debug, Clone, Serialize)]
pub struct ControllabilityReport {
    pub kalman: bool,
    pub hautus: bool,
    /// Smallest relative singular value of `[λI - A, B]` over eigenvalues.
    pub margin: f64,
    pub kalman_rank: usize,
}

pub fn controllability_report(sys: &LtiSystem) -> Result<ControllabilityReport> {
    let ctrb = controllability_matrix(sys);
    let kalman_rank = numerical_rank(&ctrb, RANK_RTOL);
    let hautus = is_controllable_hautus(sys, RANK_RTOL)?;
    let tol = 1e-10 * frobenius(&sys.a).max(1.0);
    let margin = distinct(&sys.eigenvalues()?, tol)
        .into_iter()
        .map(|l| hautus_margin(sys, l).1)
        .fold(f64::INFINITY, f64::min);
    let kalman = kalman_rank == sys.n();
    if kalman != hautus {
        log::warn!("Kalman and Hautus controllability tests disagree (margin {margin:e})");
    }
    Ok(ControllabilityReport {
        kalman,
        hautus,
        margin,
        kalman_rank,
    })
}

/// `P^{-1} A P = diag(J_u, J_o, J_a)` and `P^{-1} B = [C_u; C_o; C_a]`,
/// with `Re spec(J_u) > τ`, `|Re spec(J_o)| <= τ`, `Re spec(J_a) < -τ`.
#[derive(Debug, Clone)]
pub struct SpectralPartition {
    pub p: CMat,
    pub p_inv: CMat,
    pub j_u: CMat,
    pub j_o: CMat,
    pub j_a: CMat,
    pub c_u: CMat,
    pub c_o: CMat,
    pub c_a: CMat,
    pub n_u: usize,
    pub n_o: usize,
    pub n_a: usize,
    pub tau: f64,
    /// Declared Jordan blocks per group, for Jordan-form input.
    pub blocks: Option<[Vec<JordanBlock>; 3]>,
}

impl SpectralPartition {
    pub fn n(&self) -> usize {
        self.n_u + self.n_o + self.n_a
    }

    /// `diag(J_u, J_o, J_a)`.
    pub fn j(&self) -> CMat {
        block_diag(&[&self.j_u, &self.j_o, &self.j_a])
    }

    /// `[C_u; C_o; C_a]`.
    pub fn c(&self) -> CMat {
        crate::linalg::vstack(&[&self.c_u, &self.c_o, &self.c_a])
    }

    /// `J_s = diag(J_o, J_a)`.
    pub fn j_s(&self) -> CMat {
        block_diag(&[&self.j_o, &self.j_a])
    }

    /// `C_s = [C_o; C_a]`.
    pub fn c_s(&self) -> CMat {
        crate::linalg::vstack(&[&self.c_o, &self.c_a])
    }

    /// `||P diag(J) P^{-1} - A||_F`.
    pub fn reconstruction_error(&self, a: &CMat) -> f64 {
        frobenius(&(&self.p * self.j() * &self.p_inv - a))
    }
}

/// Ordered partition of the spectrum of `A` into unstable, center and
/// stable parts.
pub fn spectral_partition(sys: &LtiSystem) -> Result<SpectralPartition> {
    let tau = default_tau(&sys.a);
    match (&sys.form, &sys.jordan_blocks) {
        (DeclaredForm::Jordan, Some(blocks)) => Ok(jordan_partition(sys, blocks, tau)),
        _ => schur_partition(sys, tau),
    }
}

fn jordan_partition(sys: &LtiSystem, blocks: &[JordanBlock], tau: f64) -> SpectralPartition {
    let n = sys.n();
    let mut groups: [Vec<JordanBlock>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut perm: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut offset = 0;
    for blk in blocks {
        let g = match crate::linalg::classify_eigenvalue(blk.eig, tau) {
            EigenClass::Positive => 0,
            EigenClass::Zero => 1,
            EigenClass::Negative => 2,
        };
        groups[g].push(*blk);
        perm[g].extend(offset..offset + blk.size);
        offset += blk.size;
    }
    let order: Vec<usize> = perm.iter().flatten().copied().collect();
    // column k of P is e_{order[k]}
    let p = CMat::from_fn(n, n, |i, k| if order[k] == i { c(1.0, 0.0) } else { ZERO });
    let p_inv = p.transpose();
    let cb = &p_inv * &sys.b;
    let (nu, no) = (perm[0].len(), perm[1].len());
    let na = n - nu - no;
    let m = sys.m();
    SpectralPartition {
        j_u: jordan_matrix(&groups[0]),
        j_o: jordan_matrix(&groups[1]),
        j_a: jordan_matrix(&groups[2]),
        c_u: sub(&cb, 0, 0, nu, m),
        c_o: sub(&cb, nu, 0, no, m),
        c_a: sub(&cb, nu + no, 0, na, m),
        p,
        p_inv,
        n_u: nu,
        n_o: no,
        n_a: na,
        tau,
        blocks: Some(groups),
    }
}

/// Block-diagonalizes an upper triangular `[[T11, T12], [0, T22]]` at
/// `k`: returns `X` with `T11 X - X T22 = -T12`.
fn decouple(t: &CMat, k: usize) -> Result<CMat> {
    let n = t.nrows();
    let t11 = sub(t, 0, 0, k, k);
    let t12 = sub(t, 0, k, k, n - k);
    let t22 = sub(t, k, k, n - k, n - k);
    solve_sylvester_triangular(&t11, &(-t22), &(-t12))
}

fn schur_partition(sys: &LtiSystem, tau: f64) -> Result<SpectralPartition> {
    let n = sys.n();
    let split = ordered_spectral_split(&sys.a, tau)?;
    let nu = split.count(EigenClass::Positive);
    let no = split.count(EigenClass::Zero);
    let na = split.count(EigenClass::Negative);
    let t = &split.t;

    // first level: u | (o, a)
    let x = decouple(t, nu)?;
    let mut e1 = identity(n);
    e1.view_mut((0, nu), (nu, n - nu)).copy_from(&x);
    let mut e1_inv = identity(n);
    e1_inv.view_mut((0, nu), (nu, n - nu)).copy_from(&(-&x));

    // second level: o | a inside the stable-or-center block
    let ts = sub(t, nu, nu, n - nu, n - nu);
    let y = decouple(&ts, no)?;
    let mut e2 = identity(n);
    e2.view_mut((nu, nu + no), (no, na)).copy_from(&y);
    let mut e2_inv = identity(n);
    e2_inv.view_mut((nu, nu + no), (no, na)).copy_from(&(-&y));

    let p = &split.q * e1 * e2;
    let p_inv = e2_inv * e1_inv * split.q.adjoint();
    let m = sys.m();
    let cb = &p_inv * &sys.b;
    Ok(SpectralPartition {
        j_u: sub(t, 0, 0, nu, nu),
        j_o: sub(t, nu, nu, no, no),
        j_a: sub(t, nu + no, nu + no, na, na),
        c_u: sub(&cb, 0, 0, nu, m),
        c_o: sub(&cb, nu, 0, no, m),
        c_a: sub(&cb, nu + no, 0, na, m),
        p,
        p_inv,
        n_u: nu,
        n_o: no,
        n_a: na,
        tau,
        blocks: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_matrix};

    fn a_eps(eps: f64) -> LtiSystem {
        let b = real_matrix(
            6,
            2,
            &[0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
        );
        LtiSystem::jordan(
            vec![
                JordanBlock::new(c(3.0, 0.0), 1),
                JordanBlock::new(c(2.0, 0.0), 1),
                JordanBlock::new(c(eps, 0.0), 3),
                JordanBlock::new(c(-1.0, 0.0), 1),
            ],
            b,
        )
        .unwrap()
    }

    #[test]
    fn double_integrator_controllability_matrix() {
        let sys = LtiSystem::new(
            real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            real_matrix(2, 1, &[0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(
            controllability_matrix(&sys),
            real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
        assert!(is_controllable(&sys, RANK_RTOL));
    }

    #[test]
    fn a_eps_has_full_controllability_rank() {
        for eps in [-0.5, 0.0, 0.5] {
            let sys = a_eps(eps);
            let k = controllability_matrix(&sys);
            assert_eq!(k.shape(), (6, 12));
            assert_eq!(numerical_rank(&k, RANK_RTOL), 6);
            assert!(is_controllable_hautus(&sys, RANK_RTOL).unwrap());
        }
    }

    #[test]
    fn zero_input_has_rank_zero() {
        let sys = LtiSystem::new(identity(2), CMat::zeros(2, 1)).unwrap();
        assert_eq!(numerical_rank(&controllability_matrix(&sys), RANK_RTOL), 0);
    }

    #[test]
    fn repeated_scalar_blocks_are_uncontrollable() {
        let sys = LtiSystem::jordan(
            vec![JordanBlock::new(ZERO, 1), JordanBlock::new(ZERO, 1)],
            real_matrix(2, 1, &[1.0, 1.0]),
        )
        .unwrap();
        assert!(!is_controllable(&sys, RANK_RTOL));
        assert!(!is_controllable_hautus(&sys, RANK_RTOL).unwrap());
    }

    #[test]
    fn stabilizability_examples() {
        let hurwitz =
            LtiSystem::new(diag(&[c(-1.0, 0.0), c(-2.0, 0.0)]), CMat::zeros(2, 1)).unwrap();
        assert!(is_stabilizable(&hurwitz).unwrap());
        assert!(is_stabilizable_subspace(&hurwitz).unwrap());
        let bad = LtiSystem::new(
            diag(&[c(1.0, 0.0), c(-1.0, 0.0)]),
            real_matrix(2, 1, &[0.0, 1.0]),
        )
        .unwrap();
        assert!(!is_stabilizable(&bad).unwrap());
        assert!(!is_stabilizable_subspace(&bad).unwrap());
        assert_eq!(unstabilizable_modes(&bad).unwrap(), vec![c(1.0, 0.0)]);
        assert!(is_stabilizable(&a_eps(0.0)).unwrap());
    }

    #[test]
    fn a0_partition_counts() {
        let sys = a_eps(0.0);
        let part = spectral_partition(&sys).unwrap();
        assert_eq!((part.n_u, part.n_o, part.n_a), (2, 3, 1));
        assert!(part.reconstruction_error(&sys.a) == 0.0);
        let general = LtiSystem::new(sys.a.clone(), sys.b.clone()).unwrap();
        let part = spectral_partition(&general).unwrap();
        assert_eq!((part.n_u, part.n_o, part.n_a), (2, 3, 1));
        assert!(part.reconstruction_error(&sys.a) < 1e-12);
        let cb = &part.p_inv * &sys.b;
        assert!(frobenius(&(cb - part.c())) < 1e-14);
    }

    #[test]
    fn imaginary_identity_is_all_center() {
        let sys = LtiSystem::new(identity(2) * c(0.0, 1.0), identity(2)).unwrap();
        let part = spectral_partition(&sys).unwrap();
        assert_eq!((part.n_u, part.n_o, part.n_a), (0, 2, 0));
    }

    #[test]
    fn inconsistent_jordan_rejected() {
        let r = LtiSystem::jordan(
            vec![JordanBlock::new(c(1e-12, 0.0), 1)],
            real_matrix(1, 1, &[1.0]),
        );
        assert!(matches!(r, Err(Error::InvalidJordan(_))));
    }
}
