//! Minimum-energy steering of a nilpotent chain to the origin.
//!
//! For the 3x3 nilpotent Jordan block driven through its last state,
//! prints `|u_T(t)|` at a few horizons and the cost `x0' W(T)^{-1} x0`,
//! which decays like `1/T` because the limit `K` is zero.
//!
//!     cargo run --release --example finite_horizon

use min_energy::energy::{
    default_steps, endpoint_error, finite_horizon_control, simulate, ControlLaw,
};
use min_energy::fixtures;
use min_energy::linalg::{vec_norm, CVec};

fn main() -> min_energy::Result<()> {
    let sys = fixtures::fig1();
    let x0 = fixtures::fig1_x0();
    let x1 = CVec::zeros(3);

    for t in [5.0, 10.0, 20.0, 40.0] {
        let law = finite_horizon_control(&sys, &x0, &x1, t)?;
        let steps = default_steps(&[&sys.a], t, 20_000)?;
        let traj = simulate(&sys, &law, &x0, t, steps)?;
        let samples: Vec<String> = (0..=4)
            .map(|k| {
                let i = k * (traj.t.len() - 1) / 4;
                format!("{:.3}", vec_norm(&traj.u[i]))
            })
            .collect();
        println!(
            "T = {t:>4}: |u(t)| at t = 0, T/4, T/2, 3T/4, T: [{}]  energy {:.6}  |x(T)| {:.1e}",
            samples.join(", "),
            traj.energy,
            endpoint_error(&traj, t, &x1)
        );
    }

    println!("\n{:>4} {:>12} {:>10}", "T", "cost", "T * cost");
    for t in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
        if let ControlLaw::OpenLoop { predicted_cost, .. } =
            finite_horizon_control(&sys, &x0, &x1, t)?
        {
            println!("{t:>4} {predicted_cost:>12.6} {:>10.4}", t * predicted_cost);
        }
    }
    Ok(())
}
