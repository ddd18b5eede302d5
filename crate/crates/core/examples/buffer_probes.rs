//! Bounded evaluations of products whose raw factors diverge.
//!
//! On `diag(1, 0, -1)` with one input, each block of `W(T)^{-1}` is
//! evaluated from exponentially rescaled factors and tracked to `T = 4096`.
//!
//!     cargo run --release --example buffer_probes

use min_energy::asymptotics::{buffer_probe_stable_schur, buffer_probe_vanishing, dyadic_grid};
use min_energy::fixtures;
use min_energy::model::spectral_partition;

fn main() -> min_energy::Result<()> {
    let part = spectral_partition(&fixtures::buffer3())?;
    let grid = dyadic_grid(12);
    let mut tables = vec![buffer_probe_stable_schur(&part, &grid)?];
    tables.extend(buffer_probe_vanishing(&part, &grid)?);
    for t in &tables {
        let Some(rows) = &t.rows else {
            println!("{:<20} not applicable", t.name);
            continue;
        };
        let at = |target: f64| {
            rows.iter()
                .find(|r| r.0 == target)
                .map_or(f64::NAN, |r| r.1)
        };
        println!(
            "{:<20} T=8 {:>10.3e}   T=64 {:>10.3e}   T=4096 {:>10.3e}   {}",
            t.name,
            at(8.0),
            at(64.0),
            at(4096.0),
            t.quantity
        );
    }
    Ok(())
}
