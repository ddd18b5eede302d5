//! Convergence of `W(T)^{-1}` to the limit `K` for the `A_eps` family.
//!
//! The curves decay exponentially while `eps > 0` and like `1/T` once the
//! Jordan block sits on the imaginary axis. For `eps > 0` the closed loop
//! has a defective triple eigenvalue at `-eps`, so its computed spectrum
//! is only accurate to about the cube root of machine precision.
//!
//!     cargo run --release --example gramian_limit

use min_energy::asymptotics::loglog_slope;
use min_energy::fixtures;
use min_energy::gramian::{gramian_cross_validated, GramianMethod};
use min_energy::limitk::{gramian_limit_table, limit_k, verify_theta};

fn main() -> min_energy::Result<()> {
    let grid: Vec<f64> = (0..=20)
        .map(|k| 10f64.powf(k as f64 / 10.0 + 0.3))
        .collect();
    let eps_values = [0.5, 0.25, 0.1, 0.0];
    let mut curves = Vec::new();
    for eps in eps_values {
        let sys = fixtures::fig2(eps);
        let summary = limit_k(&sys)?;
        let theta = verify_theta(&sys, &summary)?;
        println!(
            "eps = {eps:<4}  ||K|| = {:.4}  Riccati residual {:.1e}  closed-loop vs reflected spectrum {:.1e}",
            summary.k.norm(),
            summary.riccati_residual,
            theta.mismatch
        );
        curves.push(gramian_limit_table(&summary, &grid)?);
    }

    println!(
        "\n{:>8} {}",
        "T",
        eps_values
            .map(|e| format!("{:>12}", format!("eps={e}")))
            .join("")
    );
    for (k, &t) in grid.iter().enumerate() {
        let row: String = curves
            .iter()
            .map(|c| format!("{:>12.3e}", c[k].1))
            .collect();
        println!("{t:>8.1} {row}");
    }
    let tail: Vec<(f64, f64)> = curves[3].iter().copied().filter(|p| p.0 >= 50.0).collect();
    println!(
        "\neps = 0 log-log tail slope: {:.3}",
        loglog_slope(&tail).unwrap_or(f64::NAN)
    );

    let sample =
        gramian_cross_validated(&fixtures::fig2(0.25), 20.0, GramianMethod::AugmentedExpm)?;
    println!(
        "W(20) by augmented exponential, ODE and quadrature agree to {:.1e}",
        sample.est_error.unwrap_or(0.0)
    );
    Ok(())
}
