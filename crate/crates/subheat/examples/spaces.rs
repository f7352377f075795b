//! Build the four spaces and check their Ahlfors regularity.
//!
//! ```bash
//! cargo run --release --example spaces
//! ```

use subheat::space::{
    ahlfors_fit, build_circle, build_gasket, build_interval, build_vicsek, default_r_grid,
    BoundaryMode,
};

fn main() -> subheat::Result<()> {
    let spaces = vec![
        build_circle(256)?,
        build_interval(128, BoundaryMode::Absorbing)?,
        build_gasket(5)?,
        build_vicsek(4)?,
    ];
    println!(
        "{:<24} {:>6} {:>8} {:>8} {:>8} {:>8}",
        "space", "nodes", "mass", "d_H", "d_H_hat", "c2/c1"
    );
    for g in &spaces {
        let fit = ahlfors_fit(g, &default_r_grid(g))?;
        println!(
            "{:<24} {:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.2}",
            g.kind.label(),
            g.node_count(),
            g.total_mass(),
            g.geometry.d_h,
            fit.d_h_hat,
            fit.c2 / fit.c1
        );
    }
    println!("\ndescriptor of the gasket:");
    println!(
        "{}",
        serde_json::to_string_pretty(&spaces[2].descriptor()).unwrap()
    );
    Ok(())
}
