//! Polynomial growth of the Gramian for purely imaginary spectra.
//!
//! `(1/T) D(T)^{-1} W(T) D(T)^{-1}` tends to an exactly computable `S`;
//! prints the rational constants and the convergence table.
//!
//!     cargo run --release --example scaled_gramian

use min_energy::asymptotics::{
    build_scaling, dyadic_grid, phi_exact_oracle, verify_scaled_limit, JordanImaginarySystem,
};
use min_energy::fixtures;

fn main() -> min_energy::Result<()> {
    let d2 = JordanImaginarySystem::from_system(&fixtures::jordan_nilpotent(2))?;
    let scaling = build_scaling(&d2)?;
    let exact = scaling.exact.as_ref().expect("rational input");
    print!("double integrator, S =\n{}", exact.s);

    for name in fixtures::IMAGINARY_FIXTURES {
        let sys = JordanImaginarySystem::from_system(&fixtures::fixture(name)?)?;
        let oracle = phi_exact_oracle(&sys)?;
        let table = verify_scaled_limit(&sys, &dyadic_grid(10))?;
        let last = table.rows.last().unwrap();
        println!(
            "{name:<14} blocks {:?}  Phi exact, groups positive definite {:?}  error at T={} {:.2e}  slope {}",
            sys.blocks.iter().map(|b| b.size).collect::<Vec<_>>(),
            oracle.group_positive_definite,
            last.0,
            last.1,
            table.slope.map_or("-".into(), |s| format!("{s:.3}"))
        );
    }
    Ok(())
}
