use min_energy::corpus::{general_system, normal_matrix, random_shape};
use min_energy::linalg::{c, frobenius, singular_values, CMat, Field, RANK_RTOL};
use min_energy::model::{
    controllability_report, is_controllable, is_stabilizable, spectral_partition, LtiSystem,
};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random `S` with `cond(S) <= 10`.
fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    loop {
        let s = normal_matrix(rng, n, n);
        let sv = singular_values(&s);
        if sv[n - 1] > 0.0 && sv[0] / sv[n - 1] <= 10.0 {
            return s;
        }
    }
}

/// `[[A1, A12], [0, h]]` with `B = [B1; 0]`: the mode `h` is unreachable,
/// so the pair is uncontrollable and stabilizable iff `h < 0`.
fn hidden_mode_system(rng: &mut ChaCha8Rng, n1: usize, m: usize, h: f64) -> LtiSystem {
    let top = general_system(rng, n1, m, 1.0);
    let n = n1 + 1;
    let mut a = CMat::zeros(n, n);
    a.view_mut((0, 0), (n1, n1)).copy_from(&top.a);
    for i in 0..n1 {
        a[(i, n1)] = c(rng.random_range(-1.0..1.0), 0.0);
    }
    a[(n1, n1)] = c(h, 0.0);
    let mut b = CMat::zeros(n, m);
    b.view_mut((0, 0), (n1, m)).copy_from(&top.b);
    LtiSystem::new(a, b).unwrap()
}

fn transformed(sys: &LtiSystem, s: &CMat) -> LtiSystem {
    let s_inv = s.clone().try_inverse().unwrap();
    LtiSystem::new(s * &sys.a * s_inv, s * &sys.b).unwrap()
}

fn block_pair(j: &CMat, cb: &CMat) -> Option<LtiSystem> {
    (j.nrows() > 0).then(|| LtiSystem::with_field(j.clone(), cb.clone(), Field::Complex).unwrap())
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
    fn partition_reconstructs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = random_shape(&mut rng, 8);
        let sys = general_system(&mut rng, n, m, 2.0);
        let part = spectral_partition(&sys).unwrap();
        prop_assert_eq!(part.n_u + part.n_o + part.n_a, n);
        let err = part.reconstruction_error(&sys.a);
        prop_assert!(err <= 1e-10 * frobenius(&sys.a).max(1.0), "error {err}");
    }

    #[test]
    fn controllable_pairs_have_controllable_blocks(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = random_shape(&mut rng, 6);
        let sys = general_system(&mut rng, n, m, 2.0);
        prop_assume!(is_controllable(&sys, RANK_RTOL));
        let part = spectral_partition(&sys).unwrap();
        for (j, cb) in [(&part.j_u, &part.c_u), (&part.j_o, &part.c_o), (&part.j_a, &part.c_a)] {
            if let Some(pair) = block_pair(j, cb) {
                prop_assert!(is_controllable(&pair, RANK_RTOL));
            }
        }
    }

    #[test]
    fn controllable_implies_stabilizable(seed in any::<u64>(), hidden in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = random_shape(&mut rng, 6);
        let sys = if hidden {
            let h = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            hidden_mode_system(&mut rng, n, m, h)
        } else {
            general_system(&mut rng, n, m, 2.0)
        };
        if is_controllable(&sys, RANK_RTOL) {
            prop_assert!(is_stabilizable(&sys).unwrap());
        }
        let report = controllability_report(&sys).unwrap();
        prop_assert_eq!(report.kalman, report.hautus);
    }
}

proptest! {
    #![proptest_config(fixed_seed(24))]

    #[test]
    fn rank_decisions_survive_similarity(seed in any::<u64>(), kind in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n1 = rng.random_range(1..=4);
        let m = rng.random_range(1..=n1.min(2));
        let (sys, expected) = match kind {
            0 => {
                let sys = general_system(&mut rng, n1 + 1, m, 1.0);
                let ctrl = is_controllable(&sys, RANK_RTOL);
                prop_assume!(ctrl);
                (sys, (true, true))
            }
            1 => {
                let h = -rng.random_range(0.5..2.0);
                (hidden_mode_system(&mut rng, n1, m, h), (false, true))
            }
            _ => {
                let h = rng.random_range(0.5..2.0);
                (hidden_mode_system(&mut rng, n1, m, h), (false, false))
            }
        };
        let verdict = |s: &LtiSystem| (is_controllable(s, RANK_RTOL), is_stabilizable(s).unwrap());
        prop_assert_eq!(verdict(&sys), expected);
        let n = sys.n();
        for _ in 0..100 {
            let s = well_conditioned(&mut rng, n);
            prop_assert_eq!(verdict(&transformed(&sys, &s)), expected);
        }
    }
}
