use min_energy::corpus::{
    general_system, normal_matrix, normal_vector, random_shape, MIN_HAUTUS_MARGIN,
};
use min_energy::energy::{
    default_steps, endpoint_error, finite_horizon_control, r_transform, simpson, simulate,
    ControlLaw,
};
use min_energy::error::Error;
use min_energy::fixtures;
use min_energy::gramian::{gramian_of, GramianMethod};
use min_energy::linalg::{c, real_matrix, singular_values, CMat, CVec, RANK_RTOL};
use min_energy::model::{controllability_report, is_controllable, LtiSystem};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sq(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Simpson weights on `intervals + 1` uniform points (`intervals` even).
fn simpson_weights(intervals: usize, h: f64) -> Vec<f64> {
    (0..=intervals)
        .map(|k| {
            let w = if k == 0 || k == intervals {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Perturbs the optimal open-loop input along directions that leave the
/// endpoint unchanged and checks the cost never drops. `exp_neg` is the
/// closed form of `e^{-At}`.
fn optimality_spot_check(sys: &LtiSystem, exp_neg: impl Fn(f64) -> CMat, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (sys.n(), sys.m());
    let t_end = 3.0;
    let x0 = normal_vector(&mut rng, n);
    let x1 = normal_vector(&mut rng, n);
    let law = finite_horizon_control(sys, &x0, &x1, t_end).unwrap();

    let intervals = 2000;
    let h = t_end / intervals as f64;
    let weights = simpson_weights(intervals, h);
    let times: Vec<f64> = (0..=intervals).map(|k| k as f64 * h).collect();
    let g: Vec<CMat> = times.iter().map(|&t| exp_neg(t) * &sys.b).collect();
    let u_star: Vec<CVec> = times
        .iter()
        .map(|&t| law.open_loop_input(sys, t).unwrap().unwrap())
        .collect();
    let reach = |u: &[CVec]| -> CVec {
        g.iter()
            .zip(u)
            .zip(&weights)
            .fold(CVec::zeros(n), |acc, ((gk, uk), w)| {
                acc + gk * uk * c(*w, 0.0)
            })
    };
    let cost = |u: &[CVec]| -> f64 { u.iter().zip(&weights).map(|(uk, w)| w * sq(uk)).sum() };

    // ∫ e^{-At} B u dt = e^{-AT} x1 - x0 for any input steering x0 to x1
    let target = exp_neg(t_end) * &x1 - &x0;
    let miss = (reach(&u_star) - &target).norm();
    assert!(
        miss <= 1e-8 * (1.0 + target.norm()),
        "optimal input misses by {miss}"
    );
    let base = cost(&u_star);

    let w_disc = g
        .iter()
        .zip(&weights)
        .fold(CMat::zeros(n, n), |acc, (gk, w)| {
            acc + gk * gk.adjoint() * c(*w, 0.0)
        });
    let w_inv = w_disc.try_inverse().unwrap();
    for _ in 0..50 {
        let coeffs = normal_matrix(&mut rng, 10, m);
        let raw: Vec<CVec> = times
            .iter()
            .map(|&t| {
                CVec::from_fn(m, |j, _| {
                    (0..5).fold(c(0.0, 0.0), |acc, f| {
                        let w = (f + 1) as f64 * std::f64::consts::PI * t / t_end;
                        acc + coeffs[(2 * f, j)] * w.cos() + coeffs[(2 * f + 1, j)] * w.sin()
                    })
                })
            })
            .collect();
        // remove the part of the direction that moves the endpoint
        let lam = &w_inv * reach(&raw);
        let dir: Vec<CVec> = raw
            .iter()
            .zip(&g)
            .map(|(r, gk)| r - gk.adjoint() * &lam)
            .collect();
        assert!(reach(&dir).norm() <= 1e-9 * (1.0 + lam.norm()));
        let scale = rng.random_range(-1.0..1.0) * (base / cost(&dir).max(1e-300)).sqrt();
        let perturbed: Vec<CVec> = u_star
            .iter()
            .zip(&dir)
            .map(|(u, d)| u + d * c(scale, 0.0))
            .collect();
        let pc = cost(&perturbed);
        assert!(
            pc >= base - 1e-9 * (1.0 + base),
            "perturbed {pc} < optimal {base}"
        );
    }
}

/// Open-loop endpoint contract on 1000 random controllable draws. The
/// endpoint is only as accurate as `W(T)` is invertible, so draws whose
/// Gramian condition exceeds `1e9` are counted rather than checked, and
/// refusals are confirmed against an independent SVD.
#[test]
fn open_loop_reaches_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut checked, mut ill, mut refused, mut worst) = (0, 0, 0, 0.0f64);
    for i in 0..1000 {
        let (n, m) = random_shape(&mut rng, 6);
        let t = rng.random_range(0.5..10.0);
        // nearly uncontrollable pairs make every horizon ill-conditioned
        let sys = loop {
            let sys = general_system(&mut rng, n, m, 1.0);
            let report = controllability_report(&sys).unwrap();
            if report.hautus && report.margin >= MIN_HAUTUS_MARGIN {
                break sys;
            }
        };
        let x0 = normal_vector(&mut rng, n);
        let x1 = normal_vector(&mut rng, n);
        let law = match finite_horizon_control(&sys, &x0, &x1, t) {
            Ok(law) => law,
            Err(Error::SingularGramian { .. }) => {
                let w = gramian_of(&sys.a, &sys.b, t, GramianMethod::Quadrature).unwrap();
                let sv = singular_values(&w);
                assert!(
                    sv[0] > 1e12 * sv[n - 1],
                    "draw {i}: refused a well-conditioned Gramian"
                );
                refused += 1;
                continue;
            }
            Err(e) => panic!("draw {i}: {e}"),
        };
        let ControlLaw::OpenLoop {
            gramian_condition, ..
        } = law
        else {
            unreachable!()
        };
        if gramian_condition > 1e9 {
            ill += 1;
            continue;
        }
        let steps = default_steps(&[&sys.a], t, 20_000).unwrap();
        let traj = simulate(&sys, &law, &x0, t, steps).unwrap();
        let err = endpoint_error(&traj, t, &x1);
        assert!(
            err <= 1e-6,
            "draw {i}: n {n} m {m} T {t}: endpoint error {err}"
        );
        worst = worst.max(err);
        checked += 1;
    }
    println!("checked {checked}, ill-conditioned {ill}, refused {refused}, worst {worst:.3e}");
    assert!(checked >= 900);
}

#[test]
fn scalar_open_loop_is_optimal() {
    optimality_spot_check(
        &fixtures::scalar(1.0),
        |t| real_matrix(1, 1, &[(-t).exp()]),
        5,
    );
}

#[test]
fn double_integrator_open_loop_is_optimal() {
    optimality_spot_check(
        &fixtures::double_integrator(),
        |t| real_matrix(2, 2, &[1.0, -t, 0.0, 1.0]),
        6,
    );
}

/// Same cases on every run.
fn fixed_seed(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x6d69_6e65),
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(fixed_seed(100))]

    #[test]
    fn weighted_cost_matches_transformed_cost(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=3);
        let sys = general_system(&mut rng, n, m, 1.0);
        prop_assume!(is_controllable(&sys, RANK_RTOL));
        let g = normal_matrix(&mut rng, m, m);
        let r = &g * g.adjoint() + CMat::identity(m, m);
        let rt = r_transform(&sys, &r).unwrap();
        let x0 = normal_vector(&mut rng, n);
        let law = finite_horizon_control(&rt.system, &x0, &CVec::zeros(n), 2.0).unwrap();
        let traj = simulate(&rt.system, &law, &x0, 2.0, 400).unwrap();
        let h = 2.0 / (traj.t.len() - 1) as f64;
        let inputs: Vec<CVec> = traj.u.iter().map(|v| rt.v_to_u(v)).collect();
        let weighted: Vec<f64> = inputs.iter().map(|u| (u.adjoint() * &r * u)[(0, 0)].re).collect();
        let plain: Vec<f64> = inputs.iter().map(|u| sq(&rt.u_to_v(u))).collect();
        let (cw, ci) = (simpson(&weighted, h), simpson(&plain, h));
        prop_assert!((cw - ci).abs() <= 1e-12 * cw.max(1.0), "{cw} vs {ci}");
        prop_assert!((ci - traj.energy).abs() <= 1e-12 * ci.max(1.0));
    }
}
