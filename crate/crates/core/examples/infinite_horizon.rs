//! Infinite-horizon minimum energy: the optimal feedback when it exists,
//! and a witness sequence of finite-horizon costs when it does not.
//!
//!     cargo run --release --example infinite_horizon

use min_energy::energy::{default_witness_grid, infinite_horizon_solve, InfiniteHorizonOutcome};
use min_energy::fixtures;
use min_energy::limitk::limit_k;
use min_energy::linalg::{real_vector, CVec};
use min_energy::model::LtiSystem;

fn report(name: &str, sys: &LtiSystem, x0: CVec) -> min_energy::Result<()> {
    match infinite_horizon_solve(sys, &x0, &default_witness_grid())? {
        InfiniteHorizonOutcome::Solution(s) => println!(
            "{name}: optimal feedback, simulated energy {:.8} vs x0'Kx0 {:.8}, admissible {}",
            s.energy, s.optimal_cost, s.admissibility.admissible
        ),
        InfiniteHorizonOutcome::NoSolution(ns) => {
            println!(
                "{name}: infimum {:.6} is not attained; finite-horizon costs:",
                ns.infimum
            );
            for (t, v) in ns.witness.iter().step_by(3) {
                println!("    T = {t:>8.2}  cost {v:.6}");
            }
        }
    }
    Ok(())
}

fn main() -> min_energy::Result<()> {
    // x' = x + u from x0 = 1 costs 2a = 2.
    report("scalar a=1", &fixtures::scalar(1.0), real_vector(&[1.0]))?;
    let sys = fixtures::fig2(0.0);
    let summary = limit_k(&sys)?;
    let r_a = summary.r_a_basis.as_ref().expect("real system");
    report("A_0, x0 in V_a", &sys, r_a.column(0) + r_a.column(1))?;
    report(
        "A_0, x0 with center part",
        &sys,
        real_vector(&[1.0, 1.0, 0.0, 0.0, 1.0, 0.0]),
    )?;
    Ok(())
}
