//! Base and subordinated heat kernels: spectral route, subordination
//! quadrature route, and the closed-form Poisson check on the circle.
//!
//! ```bash
//! cargo run --release --example kernels
//! ```

use std::f64::consts::PI;

use subheat::space::build_circle;
use subheat::spectral::{
    heat_kernel, subordinated_kernel, subordinated_kernel_by_integral, SpectralDecomposition,
};

fn main() -> subheat::Result<()> {
    let g = build_circle(64)?;
    let spec = SpectralDecomposition::eigendecompose(&g)?;

    let k = heat_kernel(&spec, 0.01)?;
    let rows = k.row_integrals(&spec.mass);
    println!(
        "base kernel at t=0.01: row integrals in [{:.12}, {:.12}]",
        rows.iter().cloned().fold(f64::INFINITY, f64::min),
        rows.iter().cloned().fold(0.0f64, f64::max)
    );

    for (delta, t) in [(0.5, 0.1), (0.3, 1.0)] {
        let a = subordinated_kernel(&spec, delta, t)?;
        let b = subordinated_kernel_by_integral(&spec, delta, t, 1e-7)?;
        let scale = a.entries.iter().fold(0.0f64, |x, &v| x.max(v.abs()));
        println!(
            "delta={delta} t={t}: spectral vs subordination-integral sup error = {:.3e}",
            a.sup_distance(&b) / scale
        );
    }

    // Poisson closed form on a finer circle
    let g = build_circle(256)?;
    let spec = SpectralDecomposition::eigendecompose(&g)?;
    let t = 0.05;
    let k = subordinated_kernel(&spec, 0.5, t)?;
    let r = (-2.0 * PI * t).exp();
    let mut worst = 0.0f64;
    for j in 0..256 {
        let d = j.min(256 - j) as f64 / 256.0;
        let exact = (1.0 - r * r) / (1.0 - 2.0 * r * (2.0 * PI * d).cos() + r * r);
        worst = worst.max((k.entries[(0, j)] - exact).abs() / exact);
    }
    println!("delta=1/2 t=0.05 vs periodized Poisson kernel: sup relative error = {worst:.3e}");
    Ok(())
}
