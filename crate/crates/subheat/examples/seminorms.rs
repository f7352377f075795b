//! The seminorm zoo on one space: Besov energies with their sup norms,
//! Korevaar-Schoen functionals, the fractional Sobolev norm and the
//! ball-restricted norms, for the whole canonical family.
//!
//! ```bash
//! cargo run --release --example seminorms
//! ```

use subheat::family::canonical_family;
use subheat::seminorms::{
    besov_norm, energy_curves, grigoryan_norm, ks_norm, w_norm, GrigoryanQ, KsMode,
};
use subheat::space::build_circle;
use subheat::spectral::SpectralDecomposition;
use subheat::window::{default_r_grid, resolved_t_window};

fn main() -> subheat::Result<()> {
    let (delta, p, alpha) = (0.5, 1.0, 0.3);
    let g = build_circle(256)?;
    let spec = SpectralDecomposition::eigendecompose(&g)?;
    let family = canonical_family(&g, &spec, 42)?;
    let window = resolved_t_window(&g, spec.gap(), delta);
    let curves = energy_curves(&spec, delta, &window.grid(24), &family.members, p)?;
    let r_grid = default_r_grid(&g, 12);
    let lambda = alpha * delta * g.geometry.d_w;

    println!(
        "{:<20} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "function", "besov", "ks_limsup", "ks_sup", "w_norm", "N_p_inf", "N_p_p"
    );
    for ((id, f), curve) in family.members.iter().zip(&curves) {
        let besov = besov_norm(curve, alpha)?;
        let ks_l = ks_norm(&g, f, lambda, p, &r_grid, KsMode::LimsupSmallest)?;
        let ks_s = ks_norm(&g, f, lambda, p, &r_grid, KsMode::Sup)?;
        let w = w_norm(&g, f, delta * g.geometry.d_w / p, p)?;
        let ni = grigoryan_norm(&g, f, lambda, p, GrigoryanQ::Infinity, &r_grid)?;
        let np = grigoryan_norm(&g, f, delta * g.geometry.d_w / p, p, GrigoryanQ::P, &r_grid)?;
        println!(
            "{id:<20} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            besov.value, ks_l, ks_s, w, ni, np
        );
    }
    Ok(())
}
