//! Existence of an infinite-horizon minimum-energy control.
//!
//! Classifies the six-state `A_eps` family for a few `eps` and tests
//! which initial states of `A_0` lie in the attainable subspace.
//!
//!     cargo run --example classify

use min_energy::fixtures;
use min_energy::limitk::{classify, limit_k, membership_v_a, TAU_MEM};
use min_energy::linalg::{c, real_vector};

fn main() -> min_energy::Result<()> {
    for eps in [0.5, 0.1, 0.0, -0.5] {
        let v = classify(&fixtures::fig2(eps))?;
        println!(
            "eps = {eps:>4}: solvable for every x0: {:<5} reason {:?}  (n_u, n_o, n_a) = ({}, {}, {})",
            v.global_solvable, v.reason, v.n_u, v.n_o, v.n_a
        );
    }

    let sys = fixtures::fig2(0.0);
    let summary = limit_k(&sys)?;
    println!("\nA_0 membership in V_a:");
    let r_a = summary.r_a_basis.as_ref().expect("real system");
    let in_v_a = r_a.column(0) + r_a.column(1) * c(2.0, 0.0);
    for (label, x0) in [
        (
            "stable mode only",
            real_vector(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        ),
        ("from the R_a basis", in_v_a),
        (
            "unstable state",
            real_vector(&[1.0, -2.0, 0.0, 0.0, 0.0, 1.0]),
        ),
        (
            "center component",
            real_vector(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
        ),
    ] {
        let m = membership_v_a(&summary, &x0, TAU_MEM)?;
        println!(
            "  {label:<18} member {:<5} residual {:.2e}  x0'Kx0 = {:.6}",
            m.member,
            m.residual,
            summary.cost(&x0)
        );
    }
    Ok(())
}
