//! Variational capacity on the killed interval: linear-solve route vs the
//! projected-gradient oracle, monotonicity, and the capacitary Sobolev
//! bound.
//!
//! ```bash
//! cargo run --release --example capacity
//! ```

use subheat::analysis::{capacity, capacity_pgd_oracle, capacity_sobolev_check, CapacityKind};
use subheat::family::canonical_family;
use subheat::runner::dyadic_interior_sets;
use subheat::space::{build_interval, BoundaryMode};
use subheat::spectral::SpectralDecomposition;

fn main() -> subheat::Result<()> {
    let n = 128;
    let delta = 0.25;
    let g = build_interval(n, BoundaryMode::Absorbing)?;
    let spec = SpectralDecomposition::eigendecompose(&g)?;

    println!("dyadic subinterval capacities (delta = {delta}):");
    for k_set in dyadic_interior_sets(&g) {
        let mass: f64 = k_set.iter().map(|&i| g.measure[i]).sum();
        let cap = capacity(&g, &spec, delta, &k_set, CapacityKind::Cap0)?;
        let oracle = capacity_pgd_oracle(&g, &spec, delta, &k_set, CapacityKind::Cap0, 200_000)?;
        let cap1 = capacity(&g, &spec, delta, &k_set, CapacityKind::Cap1)?;
        println!(
            "  |K|={:>3} mass={:.4}: Cap0={:.6} (oracle {:.6}, rel dev {:.2e})  Cap1={:.6}",
            k_set.len(),
            mass,
            cap.value,
            oracle,
            (cap.value - oracle).abs() / cap.value,
            cap1.value
        );
    }

    let family = canonical_family(&g, &spec, 42)?;
    let rep = capacity_sobolev_check(&g, &spec, delta, 1.0, &dyadic_interior_sets(&g), &family)?;
    println!(
        "\ncapacitary Sobolev: Theta = {:.4}, C = {:.4}, status = {}",
        rep.values["theta"],
        rep.constant,
        if rep.passed() { "pass" } else { "FAIL" }
    );
    Ok(())
}
