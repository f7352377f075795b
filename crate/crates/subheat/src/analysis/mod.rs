//! Exponent estimation and regularity fits.
//!
//! Critical exponents are estimated as the best (largest) log-log slope of
//! Besov energy curves over a test family; the Hölder exponent `kappa` comes
//! either from analytic geometry or from the scaling of the Korevaar-Schoen
//! functional; the weak Bakry-Émery fit reads the regularization rate off
//! Hölder quotients of the smoothed family.

mod capacity;
mod checks;

pub use capacity::{capacity, capacity_pgd_oracle, capacity_sobolev_check, Capacity, CapacityKind};
pub use checks::{
    bv_characterization_check, coarea_check, isoperimetric_check, linfty_check, lp_smoothing_check,
    pseudo_poincare_check, sobolev_check,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::TestFamily;
use crate::fit::{fit_slope, SlopeFit};
use crate::report::{CriticalExponentReport, Prediction};
use crate::seminorms::{energy_curves, ks_functional};
use crate::space::MetricMeasureGraph;
use crate::spectral::SpectralDecomposition;
use crate::window::{default_r_grid, energy_fit_window};

/// R^2 gate below which slope-based estimates are inconclusive.
pub const R2_GATE: f64 = 0.9;

/// Theoretical critical exponent `alpha_1^# = min{1, (1 - kappa/d_W)/delta}`.
pub fn alpha1_prediction(delta: f64, kappa: f64, d_w: f64) -> f64 {
    (1.0f64).min((1.0 - kappa / d_w) / delta)
}

/// `beta_p = (1 - 2/p) kappa/d_W + 1/p`, the interpolation parameter in the
/// `1 <= p < 2` bracket.
pub fn beta_p(p: f64, kappa: f64, d_w: f64) -> f64 {
    (1.0 - 2.0 / p) * kappa / d_w + 1.0 / p
}

/// Resolve the Hölder exponent for a space: the analytic value when the
/// builder provides one, otherwise the Korevaar-Schoen scaling estimate.
pub fn resolve_kappa(graph: &MetricMeasureGraph, family: &TestFamily) -> Result<(f64, bool)> {
    if let Some(k) = graph.geometry.kappa {
        return Ok((k, true));
    }
    let est = estimate_kappa(graph, family, &default_r_grid(graph, 10))?;
    Ok((est.kappa_hat, false))
}

/// Korevaar-Schoen scaling estimate of `kappa`.
#[derive(Debug, Clone, Serialize)]
pub struct KappaEstimate {
    pub kappa_hat: f64,
    /// Critical KS index `lambda_star = d_W - kappa_hat`.
    pub lambda_star: f64,
    /// `(function id, fitted slope, r_squared)`.
    pub per_function: Vec<(String, f64, f64)>,
}

/// Estimate `kappa` from `d_W - kappa = sup{lambda : KS^{lambda,1} has
/// non-constant members}`: the best member's KS functional scales like
/// `r^{d_W - kappa}`, so `kappa_hat = d_W - max slope`.
pub fn estimate_kappa(
    graph: &MetricMeasureGraph,
    family: &TestFamily,
    r_grid: &[f64],
) -> Result<KappaEstimate> {
    if r_grid.len() < 5 {
        return Err(Error::InvalidGrid(
            "kappa estimate needs at least 5 radii".into(),
        ));
    }
    let d_w = graph.geometry.d_w;
    let mut per_function = Vec::new();
    let mut lambda_star: f64 = f64::NEG_INFINITY;
    for (id, f) in &family.members {
        // raw functional (lambda = 0 scaling removed)
        let vals: Vec<f64> = r_grid
            .iter()
            .map(|&r| ks_functional(graph, f, 1.0, 1.0, r) * r)
            .collect();
        if vals.iter().any(|&v| v <= 0.0) {
            continue;
        }
        let fit = fit_slope(r_grid, &vals)?;
        per_function.push((id.clone(), fit.slope, fit.r_squared));
        if fit.r_squared >= R2_GATE {
            lambda_star = lambda_star.max(fit.slope);
        }
    }
    if !lambda_star.is_finite() {
        return Err(Error::InvalidGrid(
            "no family member produced a conclusive KS scaling fit".into(),
        ));
    }
    let lambda_star = lambda_star.clamp(1e-3, d_w - 1e-3);
    Ok(KappaEstimate {
        kappa_hat: d_w - lambda_star,
        lambda_star,
        per_function,
    })
}

/// Estimate the critical exponent `alpha_p^#` for one `(delta, p)` cell.
///
/// Each family member's `log E_p(t)^{1/p}` is fitted over the energy window
/// and the estimate is the best conclusive slope; the prediction is the
/// point value for `p = 1` (via `kappa`) and `p >= 2` (`1/p`), the
/// theoretical bracket for `1 < p < 2`.
pub fn critical_exponent(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    delta: f64,
    p: f64,
    family: &TestFamily,
) -> Result<CriticalExponentReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    if family.members.is_empty() {
        return Err(Error::Domain("family must be nonempty".into()));
    }
    let d_w = graph.geometry.d_w;
    let (kappa, _analytic) = resolve_kappa(graph, family)?;
    let window = energy_fit_window(graph, spec.gap(), delta, p, kappa);
    if window.is_empty() {
        return Err(Error::InvalidGrid(format!(
            "empty energy window [{:.3e}, {:.3e}]",
            window.t_min, window.t_max
        )));
    }
    let grid = window.grid(24);
    let curves = energy_curves(spec, delta, &grid, &family.members, p)?;

    let mut per_function = Vec::new();
    let mut alpha_hat = f64::NEG_INFINITY;
    let mut conclusive = false;
    for curve in &curves {
        if curve.energies.iter().any(|&e| e <= 0.0) {
            continue; // constant-like member
        }
        let fit = fit_slope(&grid, &curve.energies)?;
        let slope = fit.slope / p; // slope of E^{1/p}
        per_function.push((curve.function_id.clone(), slope, fit.r_squared));
        if fit.r_squared >= R2_GATE {
            conclusive = true;
            alpha_hat = alpha_hat.max(slope);
        }
    }
    let prediction = if p < 2.0 && (p - 1.0).abs() < 1e-12 {
        Prediction::Point {
            value: alpha1_prediction(delta, kappa, d_w),
        }
    } else if p >= 2.0 {
        Prediction::Point { value: 1.0 / p }
    } else {
        let b = beta_p(p, kappa, d_w);
        Prediction::Bracket {
            lo: 1.0 / (2.0 * delta),
            hi: (b / delta).min(1.0 / p),
        }
    };
    Ok(CriticalExponentReport {
        space: graph.kind.label(),
        p,
        delta,
        alpha_hat: if conclusive { alpha_hat } else { f64::NAN },
        per_function,
        prediction,
        kappa_used: Some(kappa),
        window: (grid[0], grid[grid.len() - 1]),
        conclusive,
    })
}

/// Weak Bakry-Émery regularization fit.
#[derive(Debug, Clone, Serialize)]
pub struct WeakBakryEmeryReport {
    pub space: String,
    pub delta: f64,
    /// Exponent used inside the Hölder quotient.
    pub kappa_used: f64,
    /// `-slope * delta * d_W`, the rate-implied Hölder exponent.
    pub kappa_hat: f64,
    /// `max_t H(t) t^{kappa/(delta d_W)}`, the fitted constant.
    pub constant: f64,
    pub fit: SlopeFit,
    /// True when the maximizing pair at the smallest time is a
    /// nearest-neighbor pair (lattice-scale artifact warning).
    pub lattice_argmax: bool,
    pub conclusive: bool,
}

/// Fit the Hölder-quotient decay
/// `H(t) = max_{x != y} |P_t g(x) - P_t g(y)| / d(x,y)^kappa` over the
/// family; the rate should be `t^{-kappa/(delta d_W)}`.
pub fn weak_be_fit(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    delta: f64,
    family: &TestFamily,
    t_grid: &[f64],
    kappa: Option<f64>,
) -> Result<WeakBakryEmeryReport> {
    let d_w = graph.geometry.d_w;
    let kappa_used = match kappa {
        Some(k) => k,
        None => resolve_kappa(graph, family)?.0,
    };
    let ts: Vec<f64> = if t_grid.is_empty() {
        let w = crate::window::bound_fit_window(graph, spec.gap(), delta);
        if w.is_empty() {
            return Err(Error::InvalidGrid("empty weak Bakry-Émery window".into()));
        }
        w.grid(14)
    } else {
        t_grid.to_vec()
    };

    let n = spec.dim();
    let pairs: Vec<(usize, usize)> = if n <= 2000 {
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0xbe_c0de);
        (0..100_000)
            .map(|_| {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n);
                while j == i {
                    j = rng.random_range(0..n);
                }
                (i.min(j), i.max(j))
            })
            .collect()
    };
    let dists: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| graph.dist(spec.nodes[i], spec.nodes[j]).powf(kappa_used))
        .collect();

    let reduced: Vec<_> = family
        .members
        .iter()
        .map(|(_, f)| spec.restrict(f))
        .collect();
    let mut h_vals = Vec::with_capacity(ts.len());
    let mut smallest_t_argmax_dist = f64::INFINITY;
    for (ti, &t) in ts.iter().enumerate() {
        let mut h: f64 = 0.0;
        let mut arg_d = f64::INFINITY;
        for g in &reduced {
            let pg = spec.semigroup_apply(delta, t, g);
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let q = (pg[i] - pg[j]).abs() / dists[k];
                if q > h {
                    h = q;
                    arg_d = graph.dist(spec.nodes[i], spec.nodes[j]);
                }
            }
        }
        if ti == 0 {
            smallest_t_argmax_dist = arg_d;
        }
        h_vals.push(h);
    }
    let fit = fit_slope(&ts, &h_vals)?;
    let kappa_hat = -fit.slope * delta * d_w;
    let rate = kappa_used / (delta * d_w);
    let constant = ts
        .iter()
        .zip(&h_vals)
        .map(|(&t, &h)| h * t.powf(rate))
        .fold(0.0f64, f64::max);
    Ok(WeakBakryEmeryReport {
        space: graph.kind.label(),
        delta,
        kappa_used,
        kappa_hat,
        constant,
        lattice_argmax: smallest_t_argmax_dist <= graph.min_spacing * 1.5,
        fit,
        conclusive: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::canonical_family;
    use crate::space::{build_circle, build_gasket};

    fn setup(n: usize) -> (MetricMeasureGraph, SpectralDecomposition, TestFamily) {
        let g = build_circle(n).unwrap();
        let spec = SpectralDecomposition::eigendecompose(&g).unwrap();
        let fam = canonical_family(&g, &spec, 42).unwrap();
        (g, spec, fam)
    }

    #[test]
    fn circle_alpha1_matches_low_delta_branch() {
        let (g, spec, fam) = setup(1024);
        let rep = critical_exponent(&g, &spec, 0.3, 1.0, &fam).unwrap();
        assert!(rep.conclusive);
        assert!(
            (rep.alpha_hat - 1.0).abs() < 0.05,
            "alpha_hat = {} (target 1.0)",
            rep.alpha_hat
        );
        match rep.prediction {
            Prediction::Point { value } => assert_eq!(value, 1.0),
            _ => panic!("expected point prediction"),
        }
    }

    #[test]
    fn circle_alpha1_matches_high_delta_branch() {
        let (g, spec, fam) = setup(1024);
        let rep = critical_exponent(&g, &spec, 0.8, 1.0, &fam).unwrap();
        assert!(rep.conclusive);
        assert!(
            (rep.alpha_hat - 0.625).abs() < 0.05,
            "alpha_hat = {} (target 0.625)",
            rep.alpha_hat
        );
    }

    #[test]
    fn p_two_exponent_is_half() {
        let (g, spec, fam) = setup(512);
        let rep = critical_exponent(&g, &spec, 0.5, 2.0, &fam).unwrap();
        assert!(rep.conclusive);
        assert!(
            (rep.alpha_hat - 0.5).abs() < 0.05,
            "alpha_hat = {} (target 0.5)",
            rep.alpha_hat
        );
    }

    #[test]
    fn estimate_never_exceeds_triviality_ceiling() {
        let (g, spec, fam) = setup(512);
        for &(delta, p) in &[(0.3, 1.0), (0.8, 1.0), (0.5, 2.0), (0.5, 3.0)] {
            let rep = critical_exponent(&g, &spec, delta, p, &fam).unwrap();
            if rep.conclusive {
                assert!(
                    rep.alpha_hat <= 1.0 / p + 0.05,
                    "alpha_hat {} above ceiling at delta={delta}, p={p}",
                    rep.alpha_hat
                );
            }
        }
    }

    #[test]
    fn mid_p_reports_bracket_only() {
        let (g, spec, fam) = setup(256);
        let rep = critical_exponent(&g, &spec, 0.5, 1.5, &fam).unwrap();
        match rep.prediction {
            Prediction::Bracket { lo, hi } => {
                assert!((lo - 1.0).abs() < 1e-12); // 1/(2 delta) = 1
                assert!(hi <= 1.0 / 1.5 + 1e-12);
            }
            _ => panic!("expected bracket"),
        }
    }

    #[test]
    fn scaling_input_does_not_change_estimates() {
        let (g, spec, _) = setup(256);
        let f: Vec<f64> = (0..256).map(|i| if i < 128 { 1.0 } else { 0.0 }).collect();
        let f3: Vec<f64> = f.iter().map(|v| 3.0 * v).collect();
        let fam1 = TestFamily {
            members: vec![("a".into(), f)],
        };
        let fam3 = TestFamily {
            members: vec![("a".into(), f3)],
        };
        let r1 = critical_exponent(&g, &spec, 0.8, 1.0, &fam1).unwrap();
        let r3 = critical_exponent(&g, &spec, 0.8, 1.0, &fam3).unwrap();
        assert!((r1.alpha_hat - r3.alpha_hat).abs() < 1e-12);
    }

    #[test]
    fn kappa_estimate_on_circle_is_one() {
        let (g, _, fam) = setup(512);
        let est = estimate_kappa(&g, &fam, &default_r_grid(&g, 10)).unwrap();
        assert!(
            (est.kappa_hat - 1.0).abs() < 0.1,
            "kappa_hat = {}",
            est.kappa_hat
        );
    }

    #[test]
    fn kappa_estimate_on_gasket_matches_dimension_gap() {
        // indicators of cells have point boundaries, so the KS critical
        // index is d_H and kappa = d_W - d_H
        let g = build_gasket(5).unwrap();
        let spec = SpectralDecomposition::eigendecompose(&g).unwrap();
        let fam = canonical_family(&g, &spec, 3).unwrap();
        let est = estimate_kappa(&g, &fam, &default_r_grid(&g, 10)).unwrap();
        let target = g.geometry.d_w - g.geometry.d_h; // ~0.737
        assert!(
            (est.kappa_hat - target).abs() < 0.15,
            "kappa_hat = {} target {target}",
            est.kappa_hat
        );
    }

    #[test]
    fn weak_be_rate_on_circle() {
        let (g, spec, fam) = setup(512);
        for &(delta, tol) in &[(0.5, 0.1), (0.8, 0.1)] {
            let rep = weak_be_fit(&g, &spec, delta, &fam, &[], Some(1.0)).unwrap();
            let target = -1.0 / (delta * 2.0);
            assert!(
                (rep.fit.slope - target).abs() < tol,
                "delta={delta}: slope {} vs {target}",
                rep.fit.slope
            );
            assert!((rep.kappa_hat - 1.0).abs() < 0.2);
            assert!(rep.constant.is_finite() && rep.constant > 0.0);
        }
    }

    #[test]
    fn weak_be_constant_function_contributes_nothing() {
        let (g, spec, _) = setup(512);
        // a constant member cannot dominate the Hölder quotient
        let c = vec![0.7; 512];
        let f: Vec<f64> = (0..512).map(|i| if i < 256 { 1.0 } else { 0.0 }).collect();
        let fam = TestFamily {
            members: vec![("c".into(), c), ("f".into(), f)],
        };
        let rep = weak_be_fit(&g, &spec, 0.5, &fam, &[], Some(1.0)).unwrap();
        assert!(rep.fit.slope < -0.5, "slope {}", rep.fit.slope);
    }
}
