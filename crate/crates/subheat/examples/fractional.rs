//! The fractional Laplacian two ways: spectral power vs the singular time
//! integral, plus the two-sided energy comparison.
//!
//! ```bash
//! cargo run --release --example fractional
//! ```

use subheat::space::build_circle;
use subheat::spectral::{
    fractional_energy, fractional_laplacian, fractional_laplacian_bochner, SpectralDecomposition,
};

fn main() -> subheat::Result<()> {
    let g = build_circle(64)?;
    let spec = SpectralDecomposition::eigendecompose(&g)?;
    for delta in [0.3, 0.5, 0.7] {
        let a = fractional_laplacian(&spec, delta)?;
        let b = fractional_laplacian_bochner(&spec, delta, 1e-7)?;
        let scale = a.iter().fold(0.0f64, |x, &v| x.max(v.abs()));
        let err = (&a - &b).iter().fold(0.0f64, |x, &v| x.max(v.abs()));
        println!(
            "delta={delta}: spectral vs time-integral sup error = {:.3e}",
            err / scale
        );
    }

    // energy comparison on a smoothed indicator
    let raw: Vec<f64> = (0..64).map(|i| if i < 32 { 1.0 } else { 0.0 }).collect();
    let smooth = spec.semigroup_apply(1.0, 0.01, &spec.restrict(&raw));
    let f: Vec<f64> = smooth.iter().cloned().collect();
    for delta in [0.3, 0.5, 0.7] {
        let e = fractional_energy(&spec, &g, delta, &f)?;
        println!(
            "delta={delta}: spectral energy {:.4e}, metric double sum {:.4e}, ratio {:.3}",
            e.spectral, e.metric_double_sum, e.ratio
        );
    }
    Ok(())
}
