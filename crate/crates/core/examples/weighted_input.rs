//! Weighted input cost `∫ u' R u` by reduction to the unweighted problem.
//!
//!     cargo run --release --example weighted_input

use min_energy::energy::{infinite_horizon_solve, r_transform, InfiniteHorizonOutcome};
use min_energy::linalg::{real_matrix, real_vector};
use min_energy::model::LtiSystem;

fn main() -> min_energy::Result<()> {
    let sys = LtiSystem::new(
        real_matrix(2, 2, &[0.5, 1.0, 0.0, -1.0]),
        real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]),
    )?;
    let x0 = real_vector(&[1.0, 1.0]);
    for w in [0.25, 1.0, 4.0] {
        let r = real_matrix(2, 2, &[w, 0.0, 0.0, 1.0]);
        let t = r_transform(&sys, &r)?;
        if let InfiniteHorizonOutcome::Solution(s) = infinite_horizon_solve(&t.system, &x0, &[])? {
            let u0 = t.v_to_u(&s.trajectory.u[0]);
            println!(
                "R = diag({w}, 1): weighted energy {:.6} (x0'Kx0 {:.6}), u(0) = [{:.4}, {:.4}]",
                s.energy, s.optimal_cost, u0[0].re, u0[1].re
            );
        }
    }
    Ok(())
}
