//! Optimal controls, trajectory simulation and energy accounting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::{partitioned_gramian_inverse, GramianInverse};
use crate::limitk::{limit_k, membership_v_a, LimitSummary, Membership, TAU_MEM};
use crate::linalg::{
    c, convolution_integral, eigenvalues, expm, inv_sqrt_hpd, is_hermitian, sqrt_hpd, vec_norm,
    CMat, CVec, Field,
};
use crate::model::{is_controllable, spectral_partition, LtiSystem, SpectralPartition};

/// A control input, either a precomputed open-loop signal or state feedback.
#[derive(Debug, Clone)]
pub enum ControlLaw {
    /// `u(t) = -B† e^{-A†t} λ` on `[0, T]`, zero afterwards, with
    /// `λ = W(T)^{-1} (x0 - e^{-AT} x1)`.
    OpenLoop {
        horizon: f64,
        x0: CVec,
        x1: CVec,
        lambda: CVec,
        /// `(x0 - e^{-AT} x1)† W(T)^{-1} (x0 - e^{-AT} x1)`.
        predicted_cost: f64,
        gramian_condition: f64,
    },
    /// `u = G x` with `G = -B† K`.
    Feedback { gain: CMat, closed_loop: CMat },
}

impl ControlLaw {
    /// Closed-loop generator for feedback laws.
    pub fn closed_loop(&self) -> Option<&CMat> {
        match self {
            ControlLaw::Feedback { closed_loop, .. } => Some(closed_loop),
            ControlLaw::OpenLoop { .. } => None,
        }
    }

    /// `u(t)` for the open-loop law.
    pub fn open_loop_input(&self, sys: &LtiSystem, t: f64) -> Result<Option<CVec>> {
        match self {
            ControlLaw::OpenLoop {
                horizon, lambda, ..
            } => {
                if t > *horizon {
                    return Ok(Some(CVec::zeros(sys.m())));
                }
                let e = expm(&(-sys.a.adjoint()), t)?;
                Ok(Some(-(sys.b.adjoint() * (e * lambda))))
            }
            ControlLaw::Feedback { .. } => Ok(None),
        }
    }
}

/// `W(T)^{-1}` through the partitioned, buffered evaluation.
fn gramian_inverse_at(part: &SpectralPartition, t: f64) -> Result<GramianInverse> {
    partitioned_gramian_inverse(part, t)
}

/// The minimum-energy open-loop input steering `x0` to `x1` in time `T`.
pub fn finite_horizon_control(sys: &LtiSystem, x0: &CVec, x1: &CVec, t: f64) -> Result<ControlLaw> {
    if !(t > 0.0) {
        return Err(Error::NegativeHorizon(t));
    }
    check_len(sys, x0, "x0")?;
    check_len(sys, x1, "x1")?;
    if !is_controllable(sys, crate::linalg::RANK_RTOL) {
        return Err(Error::NotControllable);
    }
    let part = spectral_partition(sys)?;
    let inv = gramian_inverse_at(&part, t)?;
    let v = x0 - expm(&(-&sys.a), t)? * x1;
    let lambda = &inv.inverse * &v;
    let predicted_cost = (v.adjoint() * &lambda)[(0, 0)].re;
    Ok(ControlLaw::OpenLoop {
        horizon: t,
        x0: x0.clone(),
        x1: x1.clone(),
        lambda,
        predicted_cost,
        gramian_condition: inv.condition,
    })
}

/// `u = -B† K x`.
pub fn feedback_control(sys: &LtiSystem, summary: &LimitSummary) -> ControlLaw {
    let gain = -(sys.b.adjoint() * &summary.k);
    let closed_loop = &sys.a + &sys.b * &gain;
    ControlLaw::Feedback { gain, closed_loop }
}

fn check_len(sys: &LtiSystem, x: &CVec, name: &str) -> Result<()> {
    if x.len() != sys.n() {
        return Err(Error::Dimension(format!(
            "{name} has length {}, expected {}",
            x.len(),
            sys.n()
        )));
    }
    Ok(())
}

/// A simulated trajectory on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<CVec>,
    pub u: Vec<CVec>,
    /// `∫ ||u||^2 dt` by composite Simpson quadrature.
    pub energy: f64,
    /// Running energy by the trapezoid rule, one entry per grid point.
    pub cumulative: Vec<f64>,
    pub terminal_norm: f64,
}

/// Grid resolution rule: at least 20 points per period of the fastest
/// oscillation and `h ρ <= 0.02` for spectral radius `ρ`; `max_steps` caps
/// the count.
pub fn default_steps(generators: &[&CMat], t_sim: f64, max_steps: usize) -> Result<usize> {
    let mut rho: f64 = 0.0;
    let mut omega: f64 = 0.0;
    for g in generators {
        for z in eigenvalues(g)? {
            rho = rho.max(z.norm());
            omega = omega.max(z.im.abs());
        }
    }
    let mut h = t_sim;
    if rho > 0.0 {
        h = h.min(0.02 / rho);
    }
    if omega > 0.0 {
        h = h.min(2.0 * std::f64::consts::PI / (20.0 * omega));
    }
    let steps = (t_sim / h).ceil() as usize;
    let steps = steps.clamp(2, max_steps.max(2));
    Ok(steps + steps % 2)
}

/// Reruns `run` with doubled step counts until two successive energies
/// agree within `rtol (1 + E)` or `max_steps` is reached. Returns the
/// finer trajectory.
pub fn refine_energy<F>(mut run: F, steps: usize, rtol: f64, max_steps: usize) -> Result<Trajectory>
where
    F: FnMut(usize) -> Result<Trajectory>,
{
    let mut steps = steps.max(2);
    let mut coarse = run(steps)?;
    while steps * 2 <= max_steps {
        steps *= 2;
        let fine = run(steps)?;
        let settled = (fine.energy - coarse.energy).abs() <= rtol * (1.0 + fine.energy);
        coarse = fine;
        if settled {
            break;
        }
    }
    Ok(coarse)
}

/// Composite Simpson rule on a uniform grid with an even number of
/// intervals; falls back to the trapezoid rule on the final interval
/// when the count is odd.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    if even >= 2 {
        s = values[0] + values[even];
        for (k, v) in values.iter().enumerate().take(even).skip(1) {
            s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s *= h / 3.0;
    }
    if even < intervals {
        s += 0.5 * h * (values[intervals - 1] + values[intervals]);
    }
    s
}

fn sq(u: &CVec) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum()
}

struct Builder {
    t: Vec<f64>,
    x: Vec<CVec>,
    u: Vec<CVec>,
    energy: f64,
    cumulative: Vec<f64>,
}

impl Builder {
    fn new(x0: CVec, u0: CVec) -> Self {
        Builder {
            t: vec![0.0],
            x: vec![x0],
            u: vec![u0],
            energy: 0.0,
            cumulative: vec![0.0],
        }
    }

    fn push(&mut self, t: f64, x: CVec, u: CVec) -> Result<()> {
        if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::SimulationOverflow { time: t });
        }
        let h = t - self.t.last().unwrap();
        let prev = sq(self.u.last().unwrap());
        let run = self.cumulative.last().unwrap() + 0.5 * h * (prev + sq(&u));
        self.t.push(t);
        self.x.push(x);
        self.u.push(u);
        self.cumulative.push(run);
        Ok(())
    }

    /// Adds the Simpson energy of points `from..` (one smooth segment).
    fn close_segment(&mut self, from: usize) {
        let vals: Vec<f64> = self.u[from..].iter().map(sq).collect();
        if vals.len() >= 2 {
            let h = (self.t[self.t.len() - 1] - self.t[from]) / (vals.len() - 1) as f64;
            self.energy += simpson(&vals, h);
        }
    }

    fn finish(self) -> Trajectory {
        let terminal_norm = vec_norm(self.x.last().unwrap());
        Trajectory {
            t: self.t,
            x: self.x,
            u: self.u,
            energy: self.energy,
            cumulative: self.cumulative,
            terminal_norm,
        }
    }
}

/// Simulates `law` from `x0` over `[0, t_sim]` on a uniform grid of
/// `steps` intervals (the open-loop horizon is always a grid point).
pub fn simulate(
    sys: &LtiSystem,
    law: &ControlLaw,
    x0: &CVec,
    t_sim: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(t_sim > 0.0) {
        return Err(Error::NegativeHorizon(t_sim));
    }
    check_len(sys, x0, "x0")?;
    let steps = steps.max(2);
    match law {
        ControlLaw::Feedback { gain, closed_loop } => {
            let h = t_sim / steps as f64;
            let step = expm(closed_loop, h)?;
            let mut b = Builder::new(x0.clone(), gain * x0);
            let mut x = x0.clone();
            for k in 1..=steps {
                x = &step * x;
                let u = gain * &x;
                b.push(k as f64 * h, x.clone(), u)?;
            }
            b.close_segment(0);
            Ok(b.finish())
        }
        ControlLaw::OpenLoop {
            horizon, lambda, ..
        } => {
            let horizon = *horizon;
            let on = horizon.min(t_sim);
            let on_steps = if horizon >= t_sim {
                steps
            } else {
                (((horizon / t_sim) * steps as f64).round() as usize).max(2)
            };
            let on_steps = on_steps + on_steps % 2;
            let bh = sys.b.adjoint();
            let mut mu = lambda.clone();
            let mut x = x0.clone();
            let mut b = Builder::new(x0.clone(), -(&bh * &mu));

            // x(t+h) = e^{Ah} x(t) - Z(h) μ(t),  μ(t+h) = e^{-A†h} μ(t),
            // Z(h) = ∫_0^h e^{As} BB† e^{-A†(h-s)} ds
            let h = on / on_steps as f64;
            let ea = expm(&sys.a, h)?;
            let em = expm(&(-sys.a.adjoint()), h)?;
            let z = convolution_integral(&sys.a, &(-sys.a.adjoint()), &(&sys.b * &bh), h)?;
            for k in 1..=on_steps {
                x = &ea * &x - &z * &mu;
                mu = &em * &mu;
                let t = if k == on_steps { on } else { k as f64 * h };
                // at the horizon this is the left limit of the input
                b.push(t, x.clone(), -(&bh * &mu))?;
            }
            b.close_segment(0);

            if horizon < t_sim {
                let rest = t_sim - horizon;
                let off_steps = steps.saturating_sub(on_steps).max(2);
                let off_steps = off_steps + off_steps % 2;
                let h = rest / off_steps as f64;
                let ea = expm(&sys.a, h)?;
                let start = b.t.len() - 1;
                // zero input on the tail; restart the energy segment
                *b.u.last_mut().unwrap() = CVec::zeros(sys.m());
                for k in 1..=off_steps {
                    x = &ea * &x;
                    b.push(horizon + k as f64 * h, x.clone(), CVec::zeros(sys.m()))?;
                }
                b.close_segment(start);
            }
            Ok(b.finish())
        }
    }
}

/// Thresholds for the finite-horizon admissibility surrogate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmissibilityThresholds {
    /// Terminal-state bound; `None` means `1e-5 ||x0||`.
    pub delta_adm: Option<f64>,
    /// Allowed fraction of energy spent in the last 10% of the horizon.
    pub eps_tail: f64,
}

impl Default for AdmissibilityThresholds {
    fn default() -> Self {
        AdmissibilityThresholds {
            delta_adm: None,
            eps_tail: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub terminal_norm: f64,
    pub tail_fraction: f64,
    pub delta_adm: f64,
    pub eps_tail: f64,
}

/// Admissible when the state has decayed below `δ_adm` and the last
/// tenth of the horizon carries at most `ε_tail` of the energy.
pub fn check_admissibility(
    traj: &Trajectory,
    thresholds: &AdmissibilityThresholds,
) -> AdmissibilityReport {
    let x0n = vec_norm(&traj.x[0]);
    let delta = thresholds.delta_adm.unwrap_or(1e-5 * x0n);
    let t_end = *traj.t.last().unwrap();
    let cut = 0.9 * t_end;
    let idx = traj
        .t
        .iter()
        .position(|&t| t >= cut)
        .unwrap_or(traj.t.len() - 1);
    let total = *traj.cumulative.last().unwrap();
    let tail = total - traj.cumulative[idx];
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    AdmissibilityReport {
        admissible: traj.terminal_norm <= delta && tail_fraction <= thresholds.eps_tail,
        terminal_norm: traj.terminal_norm,
        tail_fraction,
        delta_adm: delta,
        eps_tail: thresholds.eps_tail,
    }
}

/// Simulation horizon `50 / α` for the slowest decay rate `α` of the
/// closed loop restricted to the stable eigenvalues.
pub fn default_sim_horizon(closed_loop: &CMat) -> Result<f64> {
    let alpha = eigenvalues(closed_loop)?
        .iter()
        .filter(|z| z.re < 0.0)
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    Ok(if alpha.is_finite() {
        50.0 / alpha
    } else {
        50.0
    })
}

/// `(A, B R^{-1/2})` and the input maps between the two problems.
#[derive(Debug, Clone)]
pub struct RTransform {
    pub system: LtiSystem,
    pub r_half: CMat,
    pub r_inv_half: CMat,
}

impl RTransform {
    /// `v = R^{1/2} u`.
    pub fn u_to_v(&self, u: &CVec) -> CVec {
        &self.r_half * u
    }

    /// `u = R^{-1/2} v`.
    pub fn v_to_u(&self, v: &CVec) -> CVec {
        &self.r_inv_half * v
    }
}

/// Reduces the cost `∫ u† R u` to the unweighted problem for
/// `(A, B R^{-1/2})`.
pub fn r_transform(sys: &LtiSystem, r: &CMat) -> Result<RTransform> {
    if r.shape() != (sys.m(), sys.m()) {
        return Err(Error::Dimension(format!(
            "R must be {0}x{0}, got {1}x{2}",
            sys.m(),
            r.nrows(),
            r.ncols()
        )));
    }
    if !is_hermitian(r, 1e-12) {
        return Err(Error::Precondition("R must be Hermitian".into()));
    }
    let r_half = sqrt_hpd(r)?;
    let r_inv_half = inv_sqrt_hpd(r)?;
    let mut system = sys.clone();
    system.b = &sys.b * &r_inv_half;
    if Field::of(&system.b) == Field::Complex {
        system.field = Field::Complex;
    }
    system.validate()?;
    Ok(RTransform {
        system,
        r_half,
        r_inv_half,
    })
}

/// Outcome of the infinite-horizon problem from one `x0`.
#[derive(Debug, Clone)]
pub enum InfiniteHorizonOutcome {
    Solution(EnergySolution),
    NoSolution(NoSolution),
}

#[derive(Debug, Clone)]
pub struct EnergySolution {
    pub law: ControlLaw,
    pub trajectory: Trajectory,
    /// Simulated `∫ ||u||^2`.
    pub energy: f64,
    /// `x0† K x0`.
    pub optimal_cost: f64,
    pub admissibility: AdmissibilityReport,
    pub membership: Membership,
}

#[derive(Debug, Clone)]
pub struct NoSolution {
    /// `x0† K x0`, the infimum over admissible controls.
    pub infimum: f64,
    /// `(T, y† W_{J1,C1}(T)^{-1} y)` over increasing horizons, where
    /// `(J1, C1)` is the unstable-plus-center subsystem and `y` the
    /// matching components of `P^{-1} x0`.
    pub witness: Vec<(f64, f64)>,
    pub membership: Membership,
}

/// Default witness horizons: geometric from 1 to 1000.
pub fn default_witness_grid() -> Vec<f64> {
    (0..16).map(|k| 10f64.powf(3.0 * k as f64 / 15.0)).collect()
}

/// Solves the infinite-horizon problem from `x0`, or explains why the
/// infimum is not attained.
pub fn infinite_horizon_solve(
    sys: &LtiSystem,
    x0: &CVec,
    witness_grid: &[f64],
) -> Result<InfiniteHorizonOutcome> {
    infinite_horizon_solve_with(
        sys,
        x0,
        witness_grid,
        TAU_MEM,
        &AdmissibilityThresholds::default(),
    )
}

/// [`infinite_horizon_solve`] with explicit membership and admissibility
/// tolerances.
pub fn infinite_horizon_solve_with(
    sys: &LtiSystem,
    x0: &CVec,
    witness_grid: &[f64],
    tau_mem: f64,
    thresholds: &AdmissibilityThresholds,
) -> Result<InfiniteHorizonOutcome> {
    check_len(sys, x0, "x0")?;
    let summary = limit_k(sys)?;
    let membership = membership_v_a(&summary, x0, tau_mem)?;
    let optimal_cost = summary.cost(x0);
    if membership.member {
        let law = feedback_control(sys, &summary);
        let acl = law.closed_loop().unwrap().clone();
        let t_sim = default_sim_horizon(&acl)?;
        let steps = default_steps(&[&acl], t_sim, 10_000)?;
        let trajectory = simulate(sys, &law, x0, t_sim, steps)?;
        let admissibility = check_admissibility(&trajectory, thresholds);
        Ok(InfiniteHorizonOutcome::Solution(EnergySolution {
            energy: trajectory.energy,
            law,
            trajectory,
            optimal_cost,
            admissibility,
            membership,
        }))
    } else {
        let witness = witness_sequence(&summary, x0, witness_grid)?;
        Ok(InfiniteHorizonOutcome::NoSolution(NoSolution {
            infimum: optimal_cost,
            witness,
            membership,
        }))
    }
}

/// Costs `y† W_{J1,C1}(T)^{-1} y` of the finite-horizon problems on the
/// unstable-plus-center subsystem; they decrease to `x0† K x0`.
pub fn witness_sequence(
    summary: &LimitSummary,
    x0: &CVec,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let part = &summary.partition;
    let (nu, no) = (part.n_u, part.n_o);
    let y_full = &part.p_inv * x0;
    let y = y_full.rows(0, nu + no).into_owned();
    let n1 = nu + no;
    let sub_part = SpectralPartition {
        p: CMat::identity(n1, n1),
        p_inv: CMat::identity(n1, n1),
        j_u: part.j_u.clone(),
        j_o: part.j_o.clone(),
        j_a: CMat::zeros(0, 0),
        c_u: part.c_u.clone(),
        c_o: part.c_o.clone(),
        c_a: CMat::zeros(0, part.c_u.ncols()),
        n_u: nu,
        n_o: no,
        n_a: 0,
        tau: part.tau,
        blocks: None,
    };
    grid.iter()
        .map(|&t| {
            let inv = partitioned_gramian_inverse(&sub_part, t)?;
            Ok((t, (y.adjoint() * &inv.inverse * &y)[(0, 0)].re))
        })
        .collect()
}

/// Feedback plus a decaying perturbation `p(t) = e^{-βt} c`, simulated
/// exactly through the augmented state `(x, p)`.
pub fn simulate_perturbed_feedback(
    sys: &LtiSystem,
    summary: &LimitSummary,
    x0: &CVec,
    pert: &CVec,
    beta: f64,
    t_sim: f64,
    steps: usize,
) -> Result<Trajectory> {
    let n = sys.n();
    let m = sys.m();
    let law = feedback_control(sys, summary);
    let (gain, acl) = match &law {
        ControlLaw::Feedback { gain, closed_loop } => (gain.clone(), closed_loop.clone()),
        ControlLaw::OpenLoop { .. } => unreachable!(),
    };
    let mut gen = CMat::zeros(n + m, n + m);
    gen.view_mut((0, 0), (n, n)).copy_from(&acl);
    gen.view_mut((0, n), (n, m)).copy_from(&sys.b);
    gen.view_mut((n, n), (m, m))
        .copy_from(&(CMat::identity(m, m) * c(-beta, 0.0)));
    let h = t_sim / steps as f64;
    let step = expm(&gen, h)?;
    let mut z = CVec::zeros(n + m);
    z.rows_mut(0, n).copy_from(x0);
    z.rows_mut(n, m).copy_from(pert);
    let input = |z: &CVec| -> CVec { &gain * z.rows(0, n) + z.rows(n, m) };
    let mut b = Builder::new(x0.clone(), input(&z));
    for k in 1..=steps {
        z = &step * &z;
        b.push(k as f64 * h, z.rows(0, n).into_owned(), input(&z))?;
    }
    b.close_segment(0);
    Ok(b.finish())
}

/// Largest deviation `|x(T) - x1|` relative to `1 + |x1|` at the horizon.
pub fn endpoint_error(traj: &Trajectory, horizon: f64, x1: &CVec) -> f64 {
    let idx = traj
        .t
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - horizon).abs().total_cmp(&(b.1 - horizon).abs()))
        .map(|(i, _)| i)
        .unwrap();
    vec_norm(&(&traj.x[idx] - x1)) / (1.0 + vec_norm(x1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::{real_matrix, real_vector};

    #[test]
    fn scalar_integrator_control() {
        let sys = fixtures::scalar(0.0);
        let law =
            finite_horizon_control(&sys, &real_vector(&[1.0]), &real_vector(&[0.0]), 4.0).unwrap();
        let u = law.open_loop_input(&sys, 1.3).unwrap().unwrap();
        assert!((u[0].re + 0.25).abs() < 1e-14);
        match law {
            ControlLaw::OpenLoop { predicted_cost, .. } => {
                assert!((predicted_cost - 0.25).abs() < 1e-14)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_transfer_is_free() {
        let sys = fixtures::fig1();
        let z = CVec::zeros(3);
        let law = finite_horizon_control(&sys, &z, &z, 3.0).unwrap();
        let traj = simulate(&sys, &law, &z, 3.0, 100).unwrap();
        assert_eq!(traj.energy, 0.0);
    }

    #[test]
    fn fig1_endpoint_and_energy() {
        let sys = fixtures::fig1();
        let x0 = fixtures::fig1_x0();
        let x1 = CVec::zeros(3);
        let mut last = f64::INFINITY;
        for t in [5.0, 10.0, 20.0] {
            let law = finite_horizon_control(&sys, &x0, &x1, t).unwrap();
            let predicted = match &law {
                ControlLaw::OpenLoop { predicted_cost, .. } => *predicted_cost,
                _ => unreachable!(),
            };
            let traj = simulate(&sys, &law, &x0, t, 2000).unwrap();
            assert!(endpoint_error(&traj, t, &x1) < 1e-6, "T={t}");
            assert!(
                ((traj.energy - predicted) / predicted).abs() < 1e-6,
                "T={t}"
            );
            assert!(predicted < last);
            last = predicted;
        }
    }

    #[test]
    fn open_loop_past_horizon_coasts() {
        let sys = fixtures::scalar(-1.0);
        let x0 = real_vector(&[1.0]);
        let x1 = real_vector(&[0.5]);
        let law = finite_horizon_control(&sys, &x0, &x1, 1.0).unwrap();
        let traj = simulate(&sys, &law, &x0, 3.0, 300).unwrap();
        assert!(endpoint_error(&traj, 1.0, &x1) < 1e-10);
        let end = traj.x.last().unwrap()[0].re;
        assert!((end - 0.5 * (-2f64).exp()).abs() < 1e-10);
        assert_eq!(traj.u.last().unwrap()[0].re, 0.0);
    }

    #[test]
    fn scalar_feedback_energy() {
        let sys = fixtures::scalar(1.0);
        let summary = limit_k(&sys).unwrap();
        match feedback_control(&sys, &summary) {
            ControlLaw::Feedback { gain, closed_loop } => {
                assert!((gain[(0, 0)].re + 2.0).abs() < 1e-12);
                assert!((closed_loop[(0, 0)].re + 1.0).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
        let law = feedback_control(&sys, &summary);
        let traj = simulate(&sys, &law, &real_vector(&[1.0]), 20.0, 2000).unwrap();
        assert!((traj.energy - 2.0).abs() < 1e-4);
    }

    #[test]
    fn hurwitz_zero_control_is_admissible() {
        let sys = LtiSystem::new(
            real_matrix(2, 2, &[-1.0, 1.0, 0.0, -2.0]),
            real_matrix(2, 1, &[0.0, 1.0]),
        )
        .unwrap();
        let x0 = real_vector(&[1.0, -1.0]);
        let out = infinite_horizon_solve(&sys, &x0, &default_witness_grid()).unwrap();
        match out {
            InfiniteHorizonOutcome::Solution(s) => {
                assert_eq!(s.energy, 0.0);
                assert!(s.admissibility.admissible);
            }
            _ => panic!("expected a solution"),
        }
    }

    #[test]
    fn fig2_solution_and_witness() {
        let sys = fixtures::fig2(0.0);
        let summary = limit_k(&sys).unwrap();
        let ra = summary.r_a_basis.clone().unwrap();
        let x0 = &ra * CVec::from_element(ra.ncols(), c(1.0, 0.0));
        match infinite_horizon_solve(&sys, &x0, &default_witness_grid()).unwrap() {
            InfiniteHorizonOutcome::Solution(s) => {
                assert!(((s.energy - s.optimal_cost) / s.optimal_cost).abs() < 1e-3);
                assert!(s.admissibility.admissible, "{:?}", s.admissibility);
            }
            _ => panic!("expected a solution"),
        }

        let x0 = CVec::from_element(6, c(1.0, 0.0));
        match infinite_horizon_solve(&sys, &x0, &default_witness_grid()).unwrap() {
            InfiniteHorizonOutcome::NoSolution(ns) => {
                for w in ns.witness.windows(2) {
                    assert!(w[1].1 < w[0].1, "{:?}", ns.witness);
                }
                let last = ns.witness.last().unwrap().1;
                assert!(
                    (last - ns.infimum).abs() <= 0.05 * ns.infimum,
                    "{last} vs {}",
                    ns.infimum
                );
            }
            _ => panic!("expected no solution"),
        }

        // the feedback law does not drive a center-subspace state to zero
        let law = feedback_control(&sys, &summary);
        let traj = simulate(&sys, &law, &x0, 50.0, 5000).unwrap();
        let rep = check_admissibility(&traj, &AdmissibilityThresholds::default());
        assert!(!rep.admissible);
    }

    #[test]
    fn perturbation_gap_matches_closed_form() {
        let sys = fixtures::fig2(0.5);
        let summary = limit_k(&sys).unwrap();
        let x0 = real_vector(&[1.0, -0.5, 0.2, 0.0, 1.0, 0.3]);
        let pert = real_vector(&[0.3, -0.1]);
        let beta = 1.5;
        let t_sim = 100.0;
        let traj =
            simulate_perturbed_feedback(&sys, &summary, &x0, &pert, beta, t_sim, 10_000).unwrap();
        let gap = traj.energy - summary.cost(&x0);
        let expected = vec_norm(&pert).powi(2) / (2.0 * beta);
        assert!(
            (gap - expected).abs() < 1e-6 * (1.0 + traj.energy),
            "{gap} vs {expected}"
        );
    }

    #[test]
    fn weighted_cost_transform() {
        let sys = fixtures::scalar(1.0);
        let r = real_matrix(1, 1, &[4.0]);
        let tr = r_transform(&sys, &r).unwrap();
        assert!((tr.system.b[(0, 0)].re - 0.5).abs() < 1e-15);
        let v = real_vector(&[3.0]);
        assert!((tr.v_to_u(&v)[0].re - 1.5).abs() < 1e-15);
        assert!((tr.u_to_v(&tr.v_to_u(&v))[0].re - 3.0).abs() < 1e-15);
        assert!(r_transform(&sys, &real_matrix(1, 1, &[-1.0])).is_err());
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let h = 0.1;
        let vals: Vec<f64> = (0..=10).map(|k| (k as f64 * h).powi(3)).collect();
        assert!((simpson(&vals, h) - 0.25).abs() < 1e-15);
    }
}
