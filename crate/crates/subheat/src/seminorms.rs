//! Seminorm families: heat-semigroup Besov energies, Korevaar-Schoen
//! r-functionals, Gagliardo-type fractional Sobolev norms, ball-restricted
//! (Grigor'yan-type) norms, and the variation functional.
//!
//! Everything here is a pure function of immutable inputs; double sums run
//! in a fixed row-major order so repeated runs agree bitwise.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::MetricMeasureGraph;
use crate::spectral::{subordinated_kernel, KernelMatrix, SpectralDecomposition};

/// The Besov energy `E_p(t, f)` on a log grid of times.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyCurve {
    pub p: f64,
    pub delta: f64,
    pub grid: Vec<f64>,
    pub energies: Vec<f64>,
    pub function_id: String,
}

impl EnergyCurve {
    pub fn validate(&self) -> Result<()> {
        if self.grid.len() != self.energies.len() {
            return Err(Error::InvalidGrid("grid/energy length mismatch".into()));
        }
        for &e in &self.energies {
            if !(e >= 0.0) || !e.is_finite() {
                return Err(Error::Invariant(format!("energy curve value {e}")));
            }
        }
        Ok(())
    }
}

/// `E_p(t, f) = sum_{i,j} |f_i - f_j|^p p_t(i,j) mu_i mu_j` for one kernel.
///
/// `f` lives on the kernel's reduced node set.
pub fn besov_energy(kernel: &KernelMatrix, mass: &DVector<f64>, f: &DVector<f64>, p: f64) -> f64 {
    let n = kernel.dim();
    let mut acc = 0.0;
    for i in 0..n {
        let fi = f[i];
        let mi = mass[i];
        for j in (i + 1)..n {
            let df = (fi - f[j]).abs();
            if df > 0.0 {
                acc += 2.0 * df.powf(p) * kernel.entries[(i, j)] * mi * mass[j];
            }
        }
    }
    acc
}

/// Energy curves for a family of functions, sharing one kernel per time.
///
/// Functions are given on all graph nodes and restricted internally.
pub fn energy_curves(
    spec: &SpectralDecomposition,
    delta: f64,
    t_grid: &[f64],
    family: &[(String, Vec<f64>)],
    p: f64,
) -> Result<Vec<EnergyCurve>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must be >= 1, got {p}")));
    }
    let reduced: Vec<DVector<f64>> = family.iter().map(|(_, f)| spec.restrict(f)).collect();
    let mut curves: Vec<EnergyCurve> = family
        .iter()
        .map(|(id, _)| EnergyCurve {
            p,
            delta,
            grid: t_grid.to_vec(),
            energies: Vec::with_capacity(t_grid.len()),
            function_id: id.clone(),
        })
        .collect();
    for &t in t_grid {
        let kernel = subordinated_kernel(spec, delta, t)?;
        for (curve, f) in curves.iter_mut().zip(&reduced) {
            curve.energies.push(besov_energy(&kernel, &spec.mass, f, p));
        }
    }
    for c in &curves {
        c.validate()?;
    }
    Ok(curves)
}

/// A windowed Besov seminorm value with its maximizer location.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BesovNorm {
    pub value: f64,
    pub argmax_t: f64,
    /// True when the maximizer sits on the window's left edge, the
    /// signature of a sup that keeps growing as the window extends left.
    pub edge_pinned: bool,
}

/// `sup_t t^{-alpha} E_p(t)^{1/p}` over the curve's grid.
pub fn besov_norm(curve: &EnergyCurve, alpha: f64) -> Result<BesovNorm> {
    if curve.grid.is_empty() {
        return Err(Error::InvalidGrid("empty window".into()));
    }
    if !(alpha >= 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0usize;
    for (k, (&t, &e)) in curve.grid.iter().zip(&curve.energies).enumerate() {
        let v = t.powf(-alpha) * e.powf(1.0 / curve.p);
        if v > best {
            best = v;
            arg = k;
        }
    }
    Ok(BesovNorm {
        value: best.max(0.0),
        argmax_t: curve.grid[arg],
        edge_pinned: arg == 0,
    })
}

/// Korevaar-Schoen r-functional
/// `int int_{B(x,r)} |f(x)-f(y)|^p / (r^{lambda p} mu(B(x,r))) dmu dmu`.
pub fn ks_functional(graph: &MetricMeasureGraph, f: &[f64], lambda: f64, p: f64, r: f64) -> f64 {
    let n = graph.node_count();
    let mut acc = 0.0;
    for x in 0..n {
        let mut ball_mass = 0.0;
        let mut osc = 0.0;
        for y in 0..n {
            if graph.dist(x, y) < r {
                ball_mass += graph.measure[y];
                let df = (f[x] - f[y]).abs();
                if df > 0.0 {
                    osc += df.powf(p) * graph.measure[y];
                }
            }
        }
        if ball_mass > 0.0 {
            acc += graph.measure[x] * osc / ball_mass;
        }
    }
    acc / r.powf(lambda * p)
}

/// Scale-selection mode for Korevaar-Schoen norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KsMode {
    /// Discrete surrogate of `limsup_{r -> 0}`: max over the 3 smallest
    /// resolved radii.
    LimsupSmallest,
    /// Sup over the whole radius grid.
    Sup,
}

/// Korevaar-Schoen seminorm (to the p-th power) over a radius grid.
pub fn ks_norm(
    graph: &MetricMeasureGraph,
    f: &[f64],
    lambda: f64,
    p: f64,
    r_grid: &[f64],
    mode: KsMode,
) -> Result<f64> {
    if r_grid.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 radii".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let mut radii = r_grid.to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let chosen: &[f64] = match mode {
        KsMode::LimsupSmallest => &radii[..3],
        KsMode::Sup => &radii,
    };
    Ok(chosen
        .iter()
        .map(|&r| ks_functional(graph, f, lambda, p, r))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Gagliardo-type fractional Sobolev seminorm
/// `( sum_{i != j} |f_i - f_j|^p d(i,j)^{-d_H - lambda p} mu_i mu_j )^{1/p}`.
pub fn w_norm(graph: &MetricMeasureGraph, f: &[f64], lambda: f64, p: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(p >= 1.0) {
        return Err(Error::Domain(format!(
            "w_norm needs lambda > 0 and p >= 1, got lambda={lambda}, p={p}"
        )));
    }
    let expo = -(graph.geometry.d_h + lambda * p);
    let n = graph.node_count();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let df = (f[i] - f[j]).abs();
            if df > 0.0 {
                acc += 2.0
                    * df.powf(p)
                    * graph.dist(i, j).powf(expo)
                    * graph.measure[i]
                    * graph.measure[j];
            }
        }
    }
    Ok(acc.powf(1.0 / p))
}

/// Ball-restricted seminorm at one radius:
/// `N_p^alpha(f, r) = r^{-alpha - d_H/p} ( iint_{d < r} |f-f|^p dmu dmu )^{1/p}`.
pub fn grigoryan_seminorm(
    graph: &MetricMeasureGraph,
    f: &[f64],
    alpha: f64,
    p: f64,
    r: f64,
) -> f64 {
    let n = graph.node_count();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if graph.dist(i, j) < r {
                let df = (f[i] - f[j]).abs();
                if df > 0.0 {
                    acc += 2.0 * df.powf(p) * graph.measure[i] * graph.measure[j];
                }
            }
        }
    }
    acc.powf(1.0 / p) / r.powf(alpha + graph.geometry.d_h / p)
}

/// Integrability index for [`grigoryan_norm`]; only `q = p` and `q = inf`
/// are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrigoryanQ {
    P,
    Infinity,
}

/// `N^alpha_{p,q}(f)` over a radius grid: the sup over radii for `q = inf`,
/// the log-trapezoid integral `( int (N_p^alpha)^p dr/r )^{1/p}` for `q = p`.
pub fn grigoryan_norm(
    graph: &MetricMeasureGraph,
    f: &[f64],
    alpha: f64,
    p: f64,
    q: GrigoryanQ,
    r_grid: &[f64],
) -> Result<f64> {
    if r_grid.len() < 2 {
        return Err(Error::InvalidGrid("need at least 2 radii".into()));
    }
    let mut radii = r_grid.to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let vals: Vec<f64> = radii
        .iter()
        .map(|&r| grigoryan_seminorm(graph, f, alpha, p, r))
        .collect();
    match q {
        GrigoryanQ::Infinity => Ok(vals.iter().cloned().fold(0.0, f64::max)),
        GrigoryanQ::P => {
            let mut acc = 0.0;
            for k in 0..radii.len() - 1 {
                let du = (radii[k + 1] / radii[k]).ln();
                acc += 0.5 * (vals[k].powf(p) + vals[k + 1].powf(p)) * du;
            }
            Ok(acc.powf(1.0 / p))
        }
    }
}

/// Variation functional: min over the 3 smallest resolved radii of the
/// Korevaar-Schoen functional at `lambda = d_W - kappa`, `p = 1` (discrete
/// surrogate of the liminf).
pub fn variation(
    graph: &MetricMeasureGraph,
    f: &[f64],
    d_w: f64,
    kappa: Option<f64>,
    r_grid: &[f64],
) -> Result<f64> {
    let kappa = kappa.or(graph.geometry.kappa).ok_or_else(|| {
        Error::Config("variation needs kappa: none set in geometry, none supplied".into())
    })?;
    let lambda = d_w - kappa;
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "d_W - kappa must be positive, got {lambda}"
        )));
    }
    if r_grid.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 radii".into()));
    }
    let mut radii = r_grid.to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(radii[..3]
        .iter()
        .map(|&r| ks_functional(graph, f, lambda, 1.0, r))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_circle;
    use crate::spectral::{heat_kernel, SpectralDecomposition};
    use crate::window::{default_r_grid, resolved_t_window};
    use std::f64::consts::PI;

    fn circle(n: usize) -> (MetricMeasureGraph, SpectralDecomposition) {
        let g = build_circle(n).unwrap();
        let s = SpectralDecomposition::eigendecompose(&g).unwrap();
        (g, s)
    }

    #[test]
    fn constant_function_has_zero_energy_and_norms() {
        let (g, spec) = circle(32);
        let f = vec![4.2; 32];
        let k = heat_kernel(&spec, 0.05).unwrap();
        assert_eq!(besov_energy(&k, &spec.mass, &spec.restrict(&f), 1.0), 0.0);
        let grid = default_r_grid(&g, 8);
        assert_eq!(ks_norm(&g, &f, 1.0, 1.0, &grid, KsMode::Sup).unwrap(), 0.0);
        assert_eq!(w_norm(&g, &f, 0.5, 1.0).unwrap(), 0.0);
        assert_eq!(
            grigoryan_norm(&g, &f, 0.5, 1.0, GrigoryanQ::Infinity, &grid).unwrap(),
            0.0
        );
        assert_eq!(variation(&g, &f, 2.0, Some(1.0), &grid).unwrap(), 0.0);
    }

    #[test]
    fn indicator_energy_matches_block_sum_oracle() {
        let (g, spec) = circle(64);
        let f: Vec<f64> = (0..64).map(|i| if i < 20 { 1.0 } else { 0.0 }).collect();
        let k = subordinated_kernel(&spec, 0.5, 0.03).unwrap();
        let e = besov_energy(&k, &spec.mass, &spec.restrict(&f), 1.0);
        // oracle: 2 sum_{i in A} sum_{j notin A} p(i,j) mu_i mu_j
        let mut oracle = 0.0;
        for i in 0..20 {
            for j in 20..64 {
                oracle += 2.0 * k.entries[(i, j)] * g.measure[i] * g.measure[j];
            }
        }
        assert!((e - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn energy_monotone_in_p_for_bounded_functions() {
        let (_, spec) = circle(48);
        let f: Vec<f64> = (0..48)
            .map(|i| (2.0 * PI * i as f64 / 48.0).sin())
            .collect();
        let k = heat_kernel(&spec, 0.02).unwrap();
        let fr = spec.restrict(&f);
        let e1 = besov_energy(&k, &spec.mass, &fr, 1.0);
        let e2 = besov_energy(&k, &spec.mass, &fr, 2.0);
        assert!(e2 <= e1, "e2={e2} e1={e1}");
    }

    #[test]
    fn besov_norm_alpha_zero_is_max_energy_root() {
        let (_, spec) = circle(128);
        let window = resolved_t_window(&build_circle(128).unwrap(), spec.gap(), 0.5);
        let f: Vec<f64> = (0..128).map(|i| if i < 64 { 1.0 } else { 0.0 }).collect();
        let curves =
            energy_curves(&spec, 0.5, &window.grid(12), &[("ind".into(), f)], 1.0).unwrap();
        let bn = besov_norm(&curves[0], 0.0).unwrap();
        let direct = curves[0].energies.iter().cloned().fold(0.0f64, f64::max);
        assert!((bn.value - direct).abs() < 1e-14);
    }

    #[test]
    fn supercritical_alpha_pins_argmax_to_left_edge() {
        let (_, spec) = circle(128);
        let g = build_circle(128).unwrap();
        let window = resolved_t_window(&g, spec.gap(), 0.5);
        let f: Vec<f64> = (0..128).map(|i| if i < 64 { 1.0 } else { 0.0 }).collect();
        let curves =
            energy_curves(&spec, 0.5, &window.grid(16), &[("ind".into(), f)], 1.0).unwrap();
        let bn = besov_norm(&curves[0], 1.2).unwrap();
        assert!(bn.edge_pinned, "argmax at t={}", bn.argmax_t);
    }

    #[test]
    fn ks_limsup_bounded_by_sup() {
        let (g, _) = circle(64);
        let f: Vec<f64> = (0..64)
            .map(|i| if i % 7 == 0 { 1.0 } else { 0.0 })
            .collect();
        let grid = default_r_grid(&g, 10);
        let a = ks_norm(&g, &f, 0.7, 1.0, &grid, KsMode::LimsupSmallest).unwrap();
        let b = ks_norm(&g, &f, 0.7, 1.0, &grid, KsMode::Sup).unwrap();
        assert!(a <= b);
    }

    #[test]
    fn ks_functional_nearly_r_independent_for_lipschitz() {
        let n = 512;
        let (g, _) = circle(n);
        let f: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * i as f64 / n as f64).sin())
            .collect();
        let grid = default_r_grid(&g, 10);
        let vals: Vec<f64> = grid
            .iter()
            .map(|&r| ks_functional(&g, &f, 1.0, 1.0, r))
            .collect();
        let (lo, hi) = (
            vals.iter().cloned().fold(f64::INFINITY, f64::min),
            vals.iter().cloned().fold(0.0f64, f64::max),
        );
        assert!(hi / lo <= 1.5, "ratio {}", hi / lo);
    }

    #[test]
    fn w_norm_grows_logarithmically_in_brezis_case() {
        // delta = 1/2, p = 1, lambda p = 1: kernel d^{-2} on the circle
        let f_of = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|i| (2.0 * PI * 8.0 * i as f64 / n as f64).sin())
                .collect()
        };
        let w128 = w_norm(&build_circle(128).unwrap(), &f_of(128), 1.0, 1.0).unwrap();
        let w256 = w_norm(&build_circle(256).unwrap(), &f_of(256), 1.0, 1.0).unwrap();
        assert!(w256 >= 1.15 * w128, "w128={w128} w256={w256}");
    }

    #[test]
    fn w_norm_stable_in_integrable_case() {
        // delta = 0.25, p = 1: kernel d^{-1.5}, summable across refinements
        let mut vals = Vec::new();
        for n in [256usize, 512, 1024] {
            let g = build_circle(n).unwrap();
            let f: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { 0.0 }).collect();
            vals.push(w_norm(&g, &f, 0.5, 1.0).unwrap());
        }
        for k in 0..2 {
            let rel = (vals[k + 1] - vals[k]).abs() / vals[k];
            assert!(rel < 0.05, "rel change {rel}");
        }
    }

    #[test]
    fn variation_of_arc_indicator_is_stable() {
        let mut vals = Vec::new();
        for n in [256usize, 512, 1024] {
            let g = build_circle(n).unwrap();
            let f: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { 0.0 }).collect();
            let grid = default_r_grid(&g, 12);
            vals.push(variation(&g, &f, 2.0, Some(1.0), &grid).unwrap());
        }
        for k in 0..2 {
            let rel = (vals[k + 1] - vals[k]).abs() / vals[k];
            assert!(rel < 0.10, "vals {vals:?}");
        }
    }

    #[test]
    fn variation_bounded_by_ks_sup() {
        let (g, _) = circle(128);
        let f: Vec<f64> = (0..128).map(|i| if i < 64 { 1.0 } else { 0.0 }).collect();
        let grid = default_r_grid(&g, 12);
        let var = variation(&g, &f, 2.0, Some(1.0), &grid).unwrap();
        let sup = ks_norm(&g, &f, 1.0, 1.0, &grid, KsMode::Sup).unwrap();
        assert!(var <= sup + 1e-14);
    }

    #[test]
    fn variation_without_kappa_is_a_configuration_error() {
        let g = crate::space::build_gasket(2).unwrap(); // kappa unset
        let f: Vec<f64> = (0..g.node_count()).map(|i| i as f64).collect();
        let grid = default_r_grid(&g, 8);
        let r = variation(&g, &f, g.geometry.d_w, None, &grid);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn homogeneity_of_energies_and_seminorms() {
        let (g, spec) = circle(48);
        let f: Vec<f64> = (0..48)
            .map(|i| (2.0 * PI * i as f64 / 48.0).sin())
            .collect();
        let cf: Vec<f64> = f.iter().map(|v| -2.5 * v).collect();
        let k = subordinated_kernel(&spec, 0.5, 0.02).unwrap();
        let (fr, cfr) = (spec.restrict(&f), spec.restrict(&cf));
        for p in [1.0, 2.0] {
            let a = besov_energy(&k, &spec.mass, &fr, p);
            let b = besov_energy(&k, &spec.mass, &cfr, p);
            assert!((b - 2.5f64.powf(p) * a).abs() < 1e-12 * b.abs().max(1e-300));
        }
        let grid = default_r_grid(&g, 8);
        let _ = &grid;
        let w1 = w_norm(&g, &f, 0.5, 2.0).unwrap();
        let w2 = w_norm(&g, &cf, 0.5, 2.0).unwrap();
        assert!((w2 - 2.5 * w1).abs() < 1e-12 * w2);
        let k1 = ks_norm(&g, &f, 0.7, 1.0, &grid, KsMode::Sup).unwrap();
        let k2 = ks_norm(&g, &cf, 0.7, 1.0, &grid, KsMode::Sup).unwrap();
        assert!((k2 - 2.5 * k1).abs() < 1e-12 * k2);
    }

    #[test]
    fn rotation_invariance_on_circle() {
        let n = 64;
        let (g, spec) = circle(n);
        let f: Vec<f64> = (0..n).map(|i| if i % 9 < 4 { 1.0 } else { -0.5 }).collect();
        let rot: Vec<f64> = (0..n).map(|i| f[(i + 17) % n]).collect();
        let window = resolved_t_window(&g, spec.gap(), 0.5);
        let curves = energy_curves(
            &spec,
            0.5,
            &window.grid(8),
            &[("f".into(), f.clone()), ("rot".into(), rot.clone())],
            1.0,
        )
        .unwrap();
        for (a, b) in curves[0].energies.iter().zip(&curves[1].energies) {
            assert!((a - b).abs() < 1e-10 * a.abs().max(1e-300));
        }
        let grid = default_r_grid(&g, 8);
        let w1 = w_norm(&g, &f, 0.5, 1.0).unwrap();
        let w2 = w_norm(&g, &rot, 0.5, 1.0).unwrap();
        assert!((w1 - w2).abs() < 1e-10 * w1);
        let k1 = ks_norm(&g, &f, 0.7, 1.0, &grid, KsMode::Sup).unwrap();
        let k2 = ks_norm(&g, &rot, 0.7, 1.0, &grid, KsMode::Sup).unwrap();
        assert!((k1 - k2).abs() < 1e-10 * k1);
        let g1 = grigoryan_seminorm(&g, &f, 0.5, 1.0, 0.1);
        let g2 = grigoryan_seminorm(&g, &rot, 0.5, 1.0, 0.1);
        assert!((g1 - g2).abs() < 1e-10 * g1);
    }

    #[test]
    fn seminorms_are_subadditive_on_sampled_pairs() {
        let (g, _) = circle(96);
        let f: Vec<f64> = (0..96)
            .map(|i| (2.0 * PI * i as f64 / 96.0).sin())
            .collect();
        let h: Vec<f64> = (0..96).map(|i| if i < 30 { 1.0 } else { 0.0 }).collect();
        let sum: Vec<f64> = f.iter().zip(&h).map(|(a, b)| a + b).collect();
        for p in [1.0, 2.0] {
            let wf = w_norm(&g, &f, 0.4, p).unwrap();
            let wh = w_norm(&g, &h, 0.4, p).unwrap();
            let ws = w_norm(&g, &sum, 0.4, p).unwrap();
            assert!(ws <= wf + wh + 1e-10);
        }
        let grid = default_r_grid(&g, 8);
        let nf = grigoryan_norm(&g, &f, 0.5, 2.0, GrigoryanQ::P, &grid).unwrap();
        let nh = grigoryan_norm(&g, &h, 0.5, 2.0, GrigoryanQ::P, &grid).unwrap();
        let ns = grigoryan_norm(&g, &sum, 0.5, 2.0, GrigoryanQ::P, &grid).unwrap();
        assert!(ns <= nf + nh + 1e-10);
    }
}
