//! The inequality suite on the circle: co-area, pseudo-Poincaré, Sobolev,
//! isoperimetric, oscillation embedding and L^p smoothing.
//!
//! ```bash
//! cargo run --release --example inequalities
//! ```

use subheat::analysis::{
    bv_characterization_check, coarea_check, isoperimetric_check, linfty_check, lp_smoothing_check,
    pseudo_poincare_check, sobolev_check,
};
use subheat::family::{canonical_family, TestFamily};
use subheat::runner::canonical_set_family;
use subheat::space::build_circle;
use subheat::spectral::SpectralDecomposition;

fn main() -> subheat::Result<()> {
    let g = build_circle(256)?;
    let spec = SpectralDecomposition::eigendecompose(&g)?;
    let family = canonical_family(&g, &spec, 42)?;
    let kappa = 1.0;

    let mut reports = Vec::new();
    reports.push(coarea_check(
        &g,
        &spec,
        0.3,
        family.get("tent").unwrap(),
        kappa,
    )?);
    reports.push(pseudo_poincare_check(
        &g,
        &spec,
        0.8,
        family.get("sharp_indicator").unwrap(),
        kappa,
    )?);
    reports.push(pseudo_poincare_check(
        &g,
        &spec,
        0.3,
        family.get("low_mode").unwrap(),
        kappa,
    )?);
    reports.push(sobolev_check(&g, &spec, 0.25, 1.0, &family)?);
    reports.push(isoperimetric_check(&g, 0.25, &canonical_set_family(&g))?);
    let smooth = TestFamily {
        members: family
            .members
            .iter()
            .filter(|(id, _)| id == "smoothed_indicator" || id == "low_mode")
            .cloned()
            .collect(),
    };
    reports.push(linfty_check(&g, 0.5, &smooth)?);
    reports.push(lp_smoothing_check(
        &g,
        &spec,
        0.5,
        2.0,
        family.get("sharp_indicator").unwrap(),
    )?);
    reports.push(bv_characterization_check(&g, &spec, 0.8, &family, kappa)?);

    println!(
        "{:<22} {:>8} {:>12} {:>12} {:>10} {:>8}",
        "suite", "delta", "lhs", "rhs", "constant", "status"
    );
    for r in &reports {
        println!(
            "{:<22} {:>8} {:>12.4e} {:>12.4e} {:>10.3} {:>8}",
            r.suite,
            r.params.get("delta").unwrap(),
            r.values.get("lhs").unwrap(),
            r.values.get("rhs").unwrap(),
            r.constant,
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
