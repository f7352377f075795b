//! Resolved windows.
//!
//! A discrete graph represents its continuum limit only between the lattice
//! scale and the mixing scale. In time: the kernel at subordinated time `t`
//! has spatial extent `t^{1/(delta d_W)}`, so shape-faithful scaling needs
//! `t >= (c h)^{delta d_W}`; above `1/lambda_gap^delta` the spectral gap
//! saturates everything. In space: radii are trusted between a few lattice
//! spacings and a fraction of the diameter. All scaling fits in this crate
//! restrict to such windows.

use serde::Serialize;

use crate::space::MetricMeasureGraph;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeWindow {
    pub t_min: f64,
    pub t_max: f64,
}

impl TimeWindow {
    pub fn grid(&self, count: usize) -> Vec<f64> {
        crate::space::log_spaced(self.t_min, self.t_max, count)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }

    pub fn is_empty(&self) -> bool {
        self.t_max <= self.t_min
    }
}

/// Canonical resolved window `[(8h)^{delta d_W}, gap^{-delta}]` where the
/// sup over t in Besov norms and default energy curves is taken.
pub fn resolved_t_window(graph: &MetricMeasureGraph, gap: f64, delta: f64) -> TimeWindow {
    let d_w = graph.geometry.d_w;
    TimeWindow {
        t_min: (8.0 * graph.min_spacing).powf(delta * d_w),
        t_max: gap.powf(-delta),
    }
}

/// Window for on-diagonal and profile fits of kernel bounds. The floor
/// prefactor is the builder's calibration (`window_factor`); the ceiling
/// stays a factor 3 below the gap to dodge saturation curvature.
pub fn bound_fit_window(graph: &MetricMeasureGraph, gap: f64, delta: f64) -> TimeWindow {
    let d_w = graph.geometry.d_w;
    TimeWindow {
        t_min: (graph.window_factor * graph.min_spacing).powf(delta * d_w),
        t_max: gap.powf(-delta) / 3.0,
    }
}

/// Window for energy-curve slope fits (critical exponents, pseudo-Poincaré).
///
/// In the Korevaar-Schoen regime (`p < 2` and `delta > 1 - kappa/d_W`) the
/// scaling exponent only shows where the kernel shape is resolved, so the
/// floor is `(2h)^{delta d_W}`. Otherwise the limit constant is a convergent
/// nonlocal sum and the clean linear regime extends down to the base lattice
/// time `(2h)^{d_W}`. The ceiling stays a factor 8 below the gap because
/// energy curves bend early into saturation.
pub fn energy_fit_window(
    graph: &MetricMeasureGraph,
    gap: f64,
    delta: f64,
    p: f64,
    kappa: f64,
) -> TimeWindow {
    let d_w = graph.geometry.d_w;
    let ks_regime = p < 2.0 && delta > 1.0 - kappa / d_w;
    let floor_exp = if ks_regime { delta * d_w } else { d_w };
    TimeWindow {
        t_min: (2.0 * graph.min_spacing).powf(floor_exp),
        t_max: gap.powf(-delta) / 8.0,
    }
}

/// Resolved radius window `[4h, diameter/4]` for ball-based seminorms.
pub fn resolved_r_window(graph: &MetricMeasureGraph) -> (f64, f64) {
    (4.0 * graph.min_spacing, graph.diameter / 4.0)
}

/// Default log-spaced radius grid inside the resolved radius window.
pub fn default_r_grid(graph: &MetricMeasureGraph, count: usize) -> Vec<f64> {
    let (lo, hi) = resolved_r_window(graph);
    if hi <= lo {
        // degenerate at very coarse levels; widen to the raw limits
        return crate::space::log_spaced(graph.min_spacing * 1.01, graph.diameter / 2.0, count);
    }
    crate::space::log_spaced(lo, hi, count)
}
