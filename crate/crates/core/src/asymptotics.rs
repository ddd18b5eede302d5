//! Divergence rate of Gramians of imaginary-spectrum Jordan systems, the
//! exact constants of the scaled limit, and numerical probes for the
//! buffered products that appear when inverting partitioned Gramians.

use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::gramian_of;
use crate::gramian::GramianMethod;
use crate::linalg::{
    c, convolution_integral, expm, frobenius, gram_integral, hermitian_inverse, hermitize,
    numerical_rank, solve_lyapunov, CMat, RationalMatrix, C64, RANK_RTOL,
};
use crate::model::{is_controllable_hautus, JordanBlock, LtiSystem, SpectralPartition};

/// A declared Jordan system whose eigenvalues are all purely imaginary.
#[derive(Debug, Clone)]
pub struct JordanImaginarySystem {
    pub blocks: Vec<JordanBlock>,
    /// Input matrix, one row per state.
    pub c: CMat,
    offsets: Vec<usize>,
}

impl JordanImaginarySystem {
    pub fn new(blocks: Vec<JordanBlock>, c: CMat) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.size).sum();
        if c.nrows() != n {
            return Err(Error::Dimension(format!(
                "C has {} rows, expected {n}",
                c.nrows()
            )));
        }
        for b in &blocks {
            if b.size == 0 {
                return Err(Error::InvalidJordan("empty Jordan block".into()));
            }
            if b.eig.re != 0.0 {
                return Err(Error::Precondition(format!(
                    "declared eigenvalue {} is not purely imaginary",
                    b.eig
                )));
            }
        }
        // equal eigenvalues must sit in one contiguous run
        for i in 0..blocks.len() {
            for j in i + 2..blocks.len() {
                if blocks[i].eig == blocks[j].eig
                    && blocks[i + 1..j].iter().any(|b| b.eig != blocks[i].eig)
                {
                    return Err(Error::InvalidJordan(format!(
                        "blocks with eigenvalue {} are not contiguous",
                        blocks[i].eig
                    )));
                }
            }
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut off = 0;
        for b in &blocks {
            offsets.push(off);
            off += b.size;
        }
        Ok(JordanImaginarySystem { blocks, c, offsets })
    }

    /// From a system declared in Jordan form.
    pub fn from_system(sys: &LtiSystem) -> Result<Self> {
        let blocks = sys
            .jordan_blocks
            .clone()
            .ok_or_else(|| Error::Precondition("system must be declared in Jordan form".into()))?;
        Self::new(blocks, sys.b.clone())
    }

    pub fn system(&self) -> Result<LtiSystem> {
        LtiSystem::jordan(self.blocks.clone(), self.c.clone())
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn m(&self) -> usize {
        self.c.ncols()
    }

    /// State indices of block `i`.
    pub fn states(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i] + self.blocks[i].size
    }

    /// `g_i`, the last row of the block's input rows.
    pub fn g(&self, i: usize) -> CMat {
        let last = self.states(i).end - 1;
        self.c.rows(last, 1).into_owned()
    }

    /// All `g_i` stacked.
    pub fn g_matrix(&self) -> CMat {
        let mut g = CMat::zeros(self.blocks.len(), self.m());
        for i in 0..self.blocks.len() {
            g.row_mut(i).copy_from(&self.g(i).row(0));
        }
        g
    }

    /// Block indices grouped by eigenvalue, in order of appearance.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            match out.last_mut() {
                Some(g) if self.blocks[g[0]].eig == b.eig => g.push(i),
                _ => out.push(vec![i]),
            }
        }
        out
    }
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, v| acc * BigInt::from(v))
}

fn rational(num: i64, den: i64) -> BigRational {
    crate::linalg::ratio(num, den)
}

/// Constants for one group of blocks sharing an eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingGroup {
    pub eigenvalue: [f64; 2],
    pub blocks: Vec<usize>,
    pub states: Range<usize>,
    /// 2-norm condition number of the group's diagonal block of `S`.
    pub condition: f64,
}

/// Exact members available when every `g_i` is real and rational.
#[derive(Debug, Clone)]
pub struct ExactConstants {
    pub gamma: RationalMatrix,
    pub phi: RationalMatrix,
    pub s: RationalMatrix,
    /// Determinant of each group's diagonal block of `S`.
    pub group_determinants: Vec<BigRational>,
}

/// The scaling matrices and the limit `S` of `(1/T) D^{-1} W D^{-1}`.
#[derive(Debug, Clone)]
pub struct ScalingData {
    pub sizes: Vec<usize>,
    pub eigenvalues: Vec<C64>,
    /// Block diagonal, entries `(-1)^{d-α} / (d-α)!`.
    pub delta: RationalMatrix,
    /// Blockwise `1 / (d_i + d_j - α - β + 1)`.
    pub psi: RationalMatrix,
    /// Diagonal, entries `(2d - 2α + 1) / 2`.
    pub pi: RationalMatrix,
    /// Row `(i, α)` equals `g_i`.
    pub gamma: CMat,
    /// Blockwise `g_i g_j† Ψ_ij`.
    pub phi: CMat,
    /// `Δ Φ Δ` on same-eigenvalue blocks, zero across distinct eigenvalues.
    pub s: CMat,
    pub groups: Vec<ScalingGroup>,
    pub exact: Option<ExactConstants>,
}

impl ScalingData {
    /// `D(T)`, block diagonal with `diag(T^{d-1}, ..., T, 1)`.
    pub fn d_matrix(&self, t: f64) -> CMat {
        let n: usize = self.sizes.iter().sum();
        let mut d = CMat::zeros(n, n);
        let mut off = 0;
        for &size in &self.sizes {
            for a in 0..size {
                d[(off + a, off + a)] = c(t.powi((size - 1 - a) as i32), 0.0);
            }
            off += size;
        }
        d
    }
}

/// Builds every constant from block sizes and the `g_i`.
pub fn build_scaling(sys: &JordanImaginarySystem) -> Result<ScalingData> {
    let n = sys.n();
    let k = sys.blocks.len();
    let sizes: Vec<usize> = sys.blocks.iter().map(|b| b.size).collect();
    // (block, α) for each state, α counted from 1
    let index: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (1..=sizes[i]).map(move |a| (i, a)))
        .collect();

    let mut delta = RationalMatrix::zeros(n, n);
    let mut pi = RationalMatrix::zeros(n, n);
    for (s, &(i, a)) in index.iter().enumerate() {
        let d = sizes[i];
        let sign = if (d - a).is_multiple_of(2) { 1 } else { -1 };
        delta.set(s, s, BigRational::new(BigInt::from(sign), factorial(d - a)));
        pi.set(s, s, rational((2 * d - 2 * a + 1) as i64, 2));
    }
    let psi = RationalMatrix::from_fn(n, n, |r, s| {
        let (i, a) = index[r];
        let (j, b) = index[s];
        rational(1, (sizes[i] + sizes[j] + 1 - a - b) as i64)
    });

    let g = sys.g_matrix();
    let gamma = CMat::from_fn(n, sys.m(), |r, col| g[(index[r].0, col)]);
    let ggh = &g * g.adjoint();
    let psi_f = psi.to_cmat();
    let delta_f = delta.to_cmat();
    let phi = CMat::from_fn(n, n, |r, s| ggh[(index[r].0, index[s].0)] * psi_f[(r, s)]);

    let group_list = sys.groups();
    let mut group_of_state = vec![0usize; n];
    let mut groups = Vec::new();
    for (p, blocks) in group_list.iter().enumerate() {
        let start = sys.states(blocks[0]).start;
        let end = sys.states(*blocks.last().unwrap()).end;
        for st in start..end {
            group_of_state[st] = p;
        }
        groups.push(ScalingGroup {
            eigenvalue: [sys.blocks[blocks[0]].eig.re, sys.blocks[blocks[0]].eig.im],
            blocks: blocks.clone(),
            states: start..end,
            condition: f64::NAN,
        });
    }
    let same = |r: usize, s: usize| group_of_state[r] == group_of_state[s];

    let dpd = &delta_f * &phi * &delta_f;
    let s_mat = CMat::from_fn(
        n,
        n,
        |r, s| if same(r, s) { dpd[(r, s)] } else { c(0.0, 0.0) },
    );
    for gr in groups.iter_mut() {
        let len = gr.states.len();
        let blk = s_mat.view((gr.states.start, gr.states.start), (len, len));
        let sv = blk.into_owned().svd(false, false).singular_values;
        let (mx, mn) = (sv.max(), sv.min());
        gr.condition = if mn > 0.0 { mx / mn } else { f64::INFINITY };
    }

    let exact = match RationalMatrix::from_real_cmat(&g) {
        Ok(gq) => {
            let gqt = gq.transpose();
            let ggt = &gq * &gqt;
            let phi_q = RationalMatrix::from_fn(n, n, |r, s| {
                ggt.get(index[r].0, index[s].0) * psi.get(r, s)
            });
            let gamma_q =
                RationalMatrix::from_fn(n, sys.m(), |r, col| gq.get(index[r].0, col).clone());
            let full = &(&delta * &phi_q) * &delta;
            let s_q = RationalMatrix::from_fn(n, n, |r, s| {
                if same(r, s) {
                    full.get(r, s).clone()
                } else {
                    BigRational::zero()
                }
            });
            let mut dets = Vec::new();
            for gr in &groups {
                let len = gr.states.len();
                dets.push(
                    s_q.block(gr.states.start, gr.states.start, len, len)
                        .determinant()?,
                );
            }
            Some(ExactConstants {
                gamma: gamma_q,
                phi: phi_q,
                s: s_q,
                group_determinants: dets,
            })
        }
        Err(_) => None,
    };

    Ok(ScalingData {
        sizes,
        eigenvalues: sys.blocks.iter().map(|b| b.eig).collect(),
        delta,
        psi,
        pi,
        gamma,
        phi,
        s: s_mat,
        groups,
        exact,
    })
}

/// Result of the exact Gramian oracle for `(Π, Γ)`.
#[derive(Debug, Clone)]
pub struct PhiOracle {
    /// `[Γ Γ†]_{ab} / (π_a + π_b)`.
    pub phi: RationalMatrix,
    /// Exact positive-definiteness certificate per eigenvalue group.
    pub group_positive_definite: Vec<bool>,
}

/// Computes the infinite-horizon Gramian of `(Π, Γ)` in exact arithmetic
/// and checks it equals the blockwise `Φ`.
pub fn phi_exact_oracle(sys: &JordanImaginarySystem) -> Result<PhiOracle> {
    let scaling = build_scaling(sys)?;
    let exact = scaling.exact.as_ref().ok_or_else(|| {
        Error::NonRational("every g_i must be real and rational for the exact oracle".into())
    })?;
    let n = sys.n();
    let gg = &exact.gamma * &exact.gamma.transpose();
    let phi = RationalMatrix::from_fn(n, n, |a, b| {
        gg.get(a, b) / (scaling.pi.get(a, a) + scaling.pi.get(b, b))
    });
    if phi != exact.phi {
        return Err(Error::OracleMismatch(
            "Gramian of (Π, Γ) differs from the blockwise construction".into(),
        ));
    }
    let group_positive_definite = scaling
        .groups
        .iter()
        .map(|g| {
            let len = g.states.len();
            phi.block(g.states.start, g.states.start, len, len)
                .is_positive_definite()
        })
        .collect();
    Ok(PhiOracle {
        phi,
        group_positive_definite,
    })
}

/// Rank test on the stacked `g_i` of each eigenvalue group.
pub fn g_rank_check(sys: &JordanImaginarySystem) -> bool {
    sys.groups().iter().all(|blocks| {
        let rows: Vec<CMat> = blocks.iter().map(|&i| sys.g(i)).collect();
        let mut stacked = CMat::zeros(rows.len(), sys.m());
        for (r, row) in rows.iter().enumerate() {
            stacked.row_mut(r).copy_from(&row.row(0));
        }
        numerical_rank(&stacked, RANK_RTOL) == blocks.len()
    })
}

/// Agreement of the rank test with the Hautus test.
pub fn g_rank_matches_hautus(sys: &JordanImaginarySystem) -> Result<bool> {
    Ok(g_rank_check(sys) == is_controllable_hautus(&sys.system()?, RANK_RTOL)?)
}

/// `(T, ||(1/T) D^{-1} W(T) D^{-1} - S||_F)` and the fitted log-log slope.
#[derive(Debug, Clone, Serialize)]
pub struct ScaledLimitTable {
    pub rows: Vec<(f64, f64)>,
    /// Fitted over errors above the rounding floor; `None` when fewer
    /// than two remain.
    pub slope: Option<f64>,
}

pub fn scaled_gramian(sys: &JordanImaginarySystem, scaling: &ScalingData, t: f64) -> Result<CMat> {
    let w = gramian_of(&jordan(sys), &sys.c, t, GramianMethod::AugmentedExpm)?;
    let d_inv = CMat::from_diagonal(&scaling.d_matrix(t).diagonal().map(|z| c(1.0 / z.re, 0.0)));
    Ok(&d_inv * w * &d_inv * c(1.0 / t, 0.0))
}

fn jordan(sys: &JordanImaginarySystem) -> CMat {
    crate::model::jordan_matrix(&sys.blocks)
}

pub fn verify_scaled_limit(sys: &JordanImaginarySystem, grid: &[f64]) -> Result<ScaledLimitTable> {
    let scaling = build_scaling(sys)?;
    let rows = grid
        .iter()
        .map(|&t| {
            Ok((
                t,
                frobenius(&(scaled_gramian(sys, &scaling, t)? - &scaling.s)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    // single blocks driven only through their last state reach S exactly;
    // rounding noise carries no rate information
    let floor = 64.0 * f64::EPSILON * frobenius(&scaling.s).max(1.0);
    let above: Vec<(f64, f64)> = rows.iter().copied().filter(|r| r.1 > floor).collect();
    let slope = loglog_slope(&above);
    Ok(ScaledLimitTable { rows, slope })
}

/// Least-squares slope of `log y` against `log x` over points with
/// `y > 0`; `None` with fewer than two such points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Whether the last `k` values never grow by more than `factor`.
pub fn tail_nonincreasing(values: &[f64], k: usize, factor: f64) -> bool {
    let start = values.len().saturating_sub(k);
    values[start..].windows(2).all(|w| w[1] <= w[0] * factor)
}

/// Geometric grid `2^0, ..., 2^max_exp`.
pub fn dyadic_grid(max_exp: u32) -> Vec<f64> {
    (0..=max_exp).map(|k| 2f64.powi(k as i32)).collect()
}

/// One monitored quantity over a horizon grid, or the reason it does not
/// apply to the given partition.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeTable {
    pub name: &'static str,
    pub quantity: &'static str,
    /// `(T, Frobenius norm)`; `None` when not applicable.
    pub rows: Option<Vec<(f64, f64)>>,
}

impl ProbeTable {
    pub fn values(&self) -> Option<Vec<f64>> {
        self.rows.as_ref().map(|r| r.iter().map(|p| p.1).collect())
    }
}

/// Names and descriptions of the vanishing probes, in output order.
pub const VANISHING_PROBES: [(&str, &str); 7] = [
    ("schur_inverse", "(V_s/V_o)^{-1}"),
    ("schur_cross", "(V_s/V_o)^{-1} V_oa† V_o^{-1}"),
    (
        "center_block",
        "V_o^{-1} + V_o^{-1} V_oa (V_s/V_o)^{-1} V_oa† V_o^{-1}",
    ),
    ("stable_inverse", "V_s^{-1}"),
    ("coupling", "V_us V_s^{-1}"),
    ("coupling_quadratic", "V_us V_s^{-1} V_us†"),
    ("buffered_ua", "V_ua e^{J_a† T}"),
];

/// Inverse of a Hermitian positive definite matrix after symmetric
/// diagonal equilibration; blocks grow at very different polynomial rates.
fn inv_equilibrated(m: &CMat) -> Result<CMat> {
    let n = m.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let s: Vec<f64> = (0..n)
        .map(|i| {
            let d = m[(i, i)].re;
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let scaled = CMat::from_fn(n, n, |i, j| m[(i, j)] * c(s[i] * s[j], 0.0));
    let inv = hermitian_inverse(&hermitize(&scaled))?.inverse;
    Ok(CMat::from_fn(n, n, |i, j| {
        inv[(i, j)] * c(s[i] * s[j], 0.0)
    }))
}

/// The bounded factors from which every probe is assembled.
struct BufferedFactors {
    /// `V_o`
    v_o: CMat,
    /// `V_uo`
    v_uo: CMat,
    /// `e^{J_a T}`
    e_ja: CMat,
    /// `e^{J_a T} (V_s/V_o) e^{J_a† T}`
    sigma: CMat,
    sigma_inv: CMat,
    /// `Ṽ_oa† Ṽ_o^{-1} e^{J_o T}`, which equals `e^{J_a T} V_oa† V_o^{-1}`
    r: CMat,
    /// `V_ua e^{J_a† T}`
    vt_ua: CMat,
}

fn buffered_factors(part: &SpectralPartition, t: f64) -> Result<BufferedFactors> {
    let (ju, jo, ja) = (&part.j_u, &part.j_o, &part.j_a);
    let (cu, co, ca) = (&part.c_u, &part.c_o, &part.c_a);
    let v_o = hermitize(&gram_integral(
        &(-jo),
        &(-jo.adjoint()),
        &(co * co.adjoint()),
        t,
    )?);
    let v_uo = gram_integral(&(-ju), &(-jo.adjoint()), &(cu * co.adjoint()), t)?;
    let e_ja = expm(ja, t)?;
    let e_jo = expm(jo, t)?;
    // Ṽ_o = e^{J_o T} V_o e^{J_o† T},  Ṽ_oa = e^{J_o T} V_oa e^{J_a† T}
    let vt_o = hermitize(&gram_integral(jo, &jo.adjoint(), &(co * co.adjoint()), t)?);
    let vt_oa = gram_integral(jo, &ja.adjoint(), &(co * ca.adjoint()), t)?;
    let vt_a = hermitize(&gram_integral(ja, &ja.adjoint(), &(ca * ca.adjoint()), t)?);
    let vt_ua = convolution_integral(&(-ju), &ja.adjoint(), &(cu * ca.adjoint()), t)?;

    let vt_o_inv = inv_equilibrated(&vt_o)?;
    let sigma = hermitize(&(&vt_a - vt_oa.adjoint() * &vt_o_inv * &vt_oa));
    let sigma_inv = inv_equilibrated(&sigma)?;
    let r = (vt_oa.adjoint() * &vt_o_inv) * &e_jo;
    Ok(BufferedFactors {
        v_o,
        v_uo,
        e_ja,
        sigma,
        sigma_inv,
        r,
        vt_ua,
    })
}

/// `||e^{J_a T}(V_s/V_o)e^{J_a† T} - W_{-J_a,C_a}(∞)||_F` over `grid`.
pub fn buffer_probe_stable_schur(part: &SpectralPartition, grid: &[f64]) -> Result<ProbeTable> {
    const NAME: &str = "stable_schur";
    const QUANTITY: &str = "e^{J_a T} (V_s/V_o) e^{J_a† T} - W_{-J_a,C_a}(inf)";
    if part.n_a == 0 {
        return Err(Error::EmptyBlock("the stable block is empty".into()));
    }
    let q = &part.c_a * part.c_a.adjoint();
    let limit = hermitize(&solve_lyapunov(&(-&part.j_a), &q)?);
    let rows = grid
        .iter()
        .map(|&t| {
            let f = buffered_factors(part, t)?;
            Ok((t, frobenius(&(&f.sigma - &limit))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeTable {
        name: NAME,
        quantity: QUANTITY,
        rows: Some(rows),
    })
}

/// The seven vanishing quantities, each evaluated through bounded
/// groupings of buffered factors.
pub fn buffer_probe_vanishing(part: &SpectralPartition, grid: &[f64]) -> Result<Vec<ProbeTable>> {
    let (nu, no, na) = (part.n_u, part.n_o, part.n_a);
    let applicable = [
        no > 0 && na > 0,
        no > 0 && na > 0,
        no > 0 && na > 0,
        nu > 0 && no + na > 0,
        nu > 0 && no + na > 0,
        nu > 0 && no + na > 0,
        nu > 0 && na > 0,
    ];
    let mut rows: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 7];
    for &t in grid {
        let f = buffered_factors(part, t)?;
        let e_ja_h = f.e_ja.adjoint();
        // (V_s/V_o)^{-1} = e^{J_a† T} Σ^{-1} e^{J_a T}
        let schur_inv = &e_ja_h * &f.sigma_inv * &f.e_ja;
        // (V_s/V_o)^{-1} V_oa† V_o^{-1} = e^{J_a† T} Σ^{-1} R
        let cross = &e_ja_h * (&f.sigma_inv * &f.r);
        // V_o^{-1} + R† Σ^{-1} R
        let center = inv_equilibrated(&f.v_o)? + f.r.adjoint() * (&f.sigma_inv * &f.r);
        let v_s_inv = crate::linalg::from_blocks(&[
            vec![center.clone(), -cross.adjoint()],
            vec![-cross.clone(), schur_inv.clone()],
        ]);
        // V_us V_s^{-1} = [V_uo C - Ṽ_ua Σ^{-1} R,  -V_uo R† Σ^{-1} e^{J_a T} + Ṽ_ua Σ^{-1} e^{J_a T}]
        let ua_sigma = &f.vt_ua * &f.sigma_inv;
        let left = &f.v_uo * &center - &ua_sigma * &f.r;
        let right = -(&f.v_uo * (f.r.adjoint() * &f.sigma_inv)) * &f.e_ja + &ua_sigma * &f.e_ja;
        let coupling = crate::linalg::from_blocks(&[vec![left, right]]);
        // V_us V_s^{-1} V_us†
        //   = V_uo C V_uo† - V_uo R† Σ^{-1} Ṽ_ua† - Ṽ_ua Σ^{-1} R V_uo† + Ṽ_ua Σ^{-1} Ṽ_ua†
        let mixed = &ua_sigma * &f.r * f.v_uo.adjoint();
        let quadratic = &f.v_uo * &center * f.v_uo.adjoint() - mixed.adjoint() - &mixed
            + &ua_sigma * f.vt_ua.adjoint();
        let values = [
            frobenius(&schur_inv),
            frobenius(&cross),
            frobenius(&center),
            frobenius(&v_s_inv),
            frobenius(&coupling),
            frobenius(&quadratic),
            frobenius(&f.vt_ua),
        ];
        for (k, v) in values.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Range { horizon: t });
            }
            rows[k].push((t, v));
        }
    }
    Ok(VANISHING_PROBES
        .iter()
        .zip(rows)
        .zip(applicable)
        .map(|(((name, quantity), r), ok)| ProbeTable {
            name,
            quantity,
            rows: ok.then_some(r),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::{ratio, real_matrix};
    use crate::model::spectral_partition;

    fn imaginary(name: &str) -> JordanImaginarySystem {
        JordanImaginarySystem::from_system(&fixtures::fixture(name).unwrap()).unwrap()
    }

    #[test]
    fn single_integrator_constants() {
        let s = build_scaling(&imaginary("jordan1")).unwrap();
        let ex = s.exact.unwrap();
        assert_eq!(ex.s, RationalMatrix::identity(1));
        assert_eq!(ex.phi, RationalMatrix::identity(1));
    }

    #[test]
    fn double_integrator_constants() {
        let s = build_scaling(&imaginary("jordan2")).unwrap();
        let mut want = RationalMatrix::zeros(2, 2);
        want.set(0, 0, ratio(1, 3));
        want.set(0, 1, ratio(-1, 2));
        want.set(1, 0, ratio(-1, 2));
        want.set(1, 1, ratio(1, 1));
        assert_eq!(s.exact.unwrap().s, want);
        assert_eq!(*s.delta.get(0, 0), ratio(-1, 1));
        assert_eq!(*s.psi.get(0, 1), ratio(1, 2));
    }

    #[test]
    fn triple_block_pi() {
        let s = build_scaling(&imaginary("jordan3")).unwrap();
        let diag: Vec<_> = (0..3).map(|i| s.pi.get(i, i).clone()).collect();
        assert_eq!(diag, vec![ratio(5, 2), ratio(3, 2), ratio(1, 2)]);
    }

    #[test]
    fn oracle_matches_and_certifies() {
        for name in fixtures::IMAGINARY_FIXTURES {
            let sys = imaginary(name);
            let oracle = phi_exact_oracle(&sys).unwrap();
            assert!(oracle.group_positive_definite.iter().all(|&b| b), "{name}");
            assert!(g_rank_matches_hautus(&sys).unwrap(), "{name}");
        }
    }

    #[test]
    fn rank_test_is_per_eigenvalue() {
        let one = real_matrix(2, 1, &[1.0, 1.0]);
        let same = JordanImaginarySystem::new(
            vec![
                JordanBlock::new(c(0.0, 0.0), 1),
                JordanBlock::new(c(0.0, 0.0), 1),
            ],
            one.clone(),
        )
        .unwrap();
        assert!(!g_rank_check(&same));
        assert!(g_rank_matches_hautus(&same).unwrap());
        let split = JordanImaginarySystem::new(
            vec![
                JordanBlock::new(c(0.0, 0.0), 1),
                JordanBlock::new(c(0.0, 1.0), 1),
            ],
            one,
        )
        .unwrap();
        assert!(g_rank_check(&split));
        assert!(g_rank_matches_hautus(&split).unwrap());
    }

    #[test]
    fn rejects_real_parts_and_split_groups() {
        let b = real_matrix(1, 1, &[1.0]);
        assert!(JordanImaginarySystem::new(vec![JordanBlock::new(c(-1.0, 0.0), 1)], b).is_err());
        let b3 = real_matrix(3, 1, &[1.0, 1.0, 1.0]);
        let split = vec![
            JordanBlock::new(c(0.0, 0.0), 1),
            JordanBlock::new(c(0.0, 1.0), 1),
            JordanBlock::new(c(0.0, 0.0), 1),
        ];
        assert!(JordanImaginarySystem::new(split, b3).is_err());
    }

    #[test]
    fn scaled_limit_decays_like_inverse_t() {
        let sys = imaginary("jordan2");
        let table = verify_scaled_limit(&sys, &[100.0, 400.0]).unwrap();
        for (t, e) in &table.rows {
            assert!(*e <= 5.0 / t, "T={t}: {e}");
        }
        let table = verify_scaled_limit(&imaginary("jordan1"), &[1.0, 10.0]).unwrap();
        assert!(table.rows.iter().all(|r| r.1 < 1e-14));
    }

    #[test]
    fn scaled_limit_matches_on_all_fixtures() {
        let grid = dyadic_grid(10);
        for name in fixtures::IMAGINARY_FIXTURES {
            let sys = imaginary(name);
            let table = verify_scaled_limit(&sys, &grid).unwrap();
            let s = build_scaling(&sys).unwrap();
            let (t, e) = *table.rows.last().unwrap();
            assert!(e <= 2.0 / t * frobenius(&s.s), "{name}: {e} at {t}");
            if let Some(slope) = table.slope {
                assert!((-1.3..=-0.7).contains(&slope), "{name}: slope {slope}");
            }
        }
    }

    #[test]
    fn stable_schur_limit() {
        let part = spectral_partition(&fixtures::schur2()).unwrap();
        let table = buffer_probe_stable_schur(&part, &[20.0, 40.0]).unwrap();
        let rows = table.rows.unwrap();
        assert!(rows[0].1 < 0.05, "{rows:?}");
        assert!(rows[1].1 < rows[0].1);
    }

    #[test]
    fn vanishing_probes_on_buffer3() {
        let part = spectral_partition(&fixtures::buffer3()).unwrap();
        let grid = dyadic_grid(12);
        let tables = buffer_probe_vanishing(&part, &grid).unwrap();
        assert_eq!(tables.len(), 7);
        for tb in &tables {
            let v = tb.values().unwrap();
            assert!(tail_nonincreasing(&v, 4, 1.0 + 1e-3), "{}: {v:?}", tb.name);
            assert!(*v.last().unwrap() < 1e-3, "{}: {v:?}", tb.name);
        }
    }

    #[test]
    fn center_block_closed_form_on_buffer3() {
        // center and stable blocks are scalars: V_o = T, V_oa = e^T - 1,
        // V_a = (e^{2T} - 1)/2, and the (o,o) entry of V_s^{-1} is
        // V_a / (T V_a - V_oa^2)
        let part = spectral_partition(&fixtures::buffer3()).unwrap();
        for t in [2.0f64, 5.0, 10.0] {
            let v_a = ((2.0 * t).exp() - 1.0) / 2.0;
            let v_oa = t.exp() - 1.0;
            let want = v_a / (t * v_a - v_oa * v_oa);
            let tables = buffer_probe_vanishing(&part, &[t]).unwrap();
            let got = tables[2].rows.as_ref().unwrap()[0].1;
            assert!((got - want).abs() < 1e-12 * want, "T={t}: {got} vs {want}");
        }
    }

    #[test]
    fn probes_without_center_block() {
        let part = spectral_partition(&fixtures::fig2(0.5)).unwrap();
        let tables = buffer_probe_vanishing(&part, &[1.0, 2.0]).unwrap();
        assert!(tables[0].rows.is_none());
        assert!(tables[3].rows.is_some());
    }

    #[test]
    fn unstable_stable_buffer_scalar() {
        // J_u = [1], J_a = [-1], C = ones: V_ua e^{-T} = T e^{-T}
        let sys = LtiSystem::jordan(
            vec![
                JordanBlock::new(c(1.0, 0.0), 1),
                JordanBlock::new(c(-1.0, 0.0), 1),
            ],
            real_matrix(2, 1, &[1.0, 1.0]),
        )
        .unwrap();
        let part = spectral_partition(&sys).unwrap();
        let tables = buffer_probe_vanishing(&part, &[3.0, 10.0]).unwrap();
        let rows = tables[6].rows.clone().unwrap();
        for (t, v) in rows {
            assert!((v - t * (-t).exp()).abs() < 1e-13, "T={t}");
        }
    }
}
