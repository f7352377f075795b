//! The functional-inequality checks.
//!
//! Each check computes both sides of one inequality, fits its constant and
//! reports pass/fail against the declared cap; cross-level stability of the
//! constants is asserted by the acceptance suite, which runs every check at
//! two refinement levels.

use std::collections::BTreeMap;

use super::{alpha1_prediction, R2_GATE};
use crate::error::{Error, Result};
use crate::family::TestFamily;
use crate::fit::fit_slope;
use crate::report::{CheckStatus, InequalityReport};
use crate::seminorms::{besov_norm, energy_curves, variation, w_norm, BesovNorm};
use crate::space::MetricMeasureGraph;
use crate::spectral::SpectralDecomposition;
use crate::window::{default_r_grid, energy_fit_window, resolved_t_window};

fn param_map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn graph_lp(graph: &MetricMeasureGraph, f: &[f64], p: f64) -> f64 {
    f.iter()
        .zip(&graph.measure)
        .map(|(&v, &m)| v.abs().powf(p) * m)
        .sum::<f64>()
        .powf(1.0 / p)
}

fn mu_mean(graph: &MetricMeasureGraph, f: &[f64]) -> f64 {
    let total = graph.total_mass();
    f.iter()
        .zip(&graph.measure)
        .map(|(&v, &m)| v * m)
        .sum::<f64>()
        / total
}

/// Windowed Besov seminorm of one function over the canonical resolved
/// window.
pub fn windowed_besov_norm(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    delta: f64,
    f: &[f64],
    p: f64,
    alpha: f64,
    grid_points: usize,
) -> Result<BesovNorm> {
    let window = resolved_t_window(graph, spec.gap(), delta);
    if window.is_empty() {
        return Err(Error::InvalidGrid("empty resolved window".into()));
    }
    let curves = energy_curves(
        spec,
        delta,
        &window.grid(grid_points),
        &[("f".to_string(), f.to_vec())],
        p,
    )?;
    besov_norm(&curves[0], alpha)
}

/// Co-area comparison at the critical exponent: `||f||_{1,alpha_1}` against
/// the level-set integral `int ||1_{E_t(f)}||_{1,alpha_1} dt`, sliced on the
/// quantile grid of f's distinct values (step-exact in t).
pub fn coarea_check(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    delta: f64,
    f: &[f64],
    kappa: f64,
) -> Result<InequalityReport> {
    if f.iter().any(|&v| v < 0.0) {
        return Err(Error::Domain(
            "co-area check needs a nonnegative function".into(),
        ));
    }
    let alpha1 = alpha1_prediction(delta, kappa, graph.geometry.d_w);
    let mut distinct: Vec<f64> = f.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();

    let space = graph.kind.label();
    let params = param_map(&[("delta", delta), ("p", 1.0), ("alpha", alpha1)]);

    if distinct.len() < 2 {
        // constant input: both sides vanish, trivially passing
        let mut values = BTreeMap::new();
        values.insert("lhs".into(), 0.0);
        values.insert("rhs".into(), 0.0);
        values.insert("layer_cake_error".into(), 0.0);
        return Ok(InequalityReport {
            suite: "coarea".into(),
            space,
            params,
            values,
            constant: 1.0,
            status: CheckStatus::Pass,
            window: None,
            tolerance: 5.0,
        });
    }

    // layer-cake sanity on all distinct values: int mu(f > t) dt = ||f||_1
    let mut cuts = distinct.clone();
    if cuts[0] > 0.0 {
        cuts.insert(0, 0.0);
    }
    let mut layer_cake = 0.0;
    for w in cuts.windows(2) {
        let mass: f64 = f
            .iter()
            .zip(&graph.measure)
            .filter(|&(&v, _)| v > w[0])
            .map(|(_, &m)| m)
            .sum();
        layer_cake += (w[1] - w[0]) * mass;
    }
    let l1 = graph_lp(graph, f, 1.0);
    let layer_cake_error = (layer_cake - l1).abs();

    // at most 64 slice thresholds, step-exact between retained cuts
    let thresholds: Vec<f64> = if cuts.len() <= 65 {
        cuts[..cuts.len() - 1].to_vec()
    } else {
        let keep = 64usize;
        let last = cuts.len() - 1; // exclude the max (empty super-level set)
        (0..keep)
            .map(|k| cuts[(k as f64 / (keep - 1) as f64 * (last - 1) as f64).round() as usize])
            .collect()
    };
    let slices: Vec<(String, Vec<f64>)> = thresholds
        .iter()
        .enumerate()
        .map(|(k, &th)| {
            let ind: Vec<f64> = f.iter().map(|&v| if v > th { 1.0 } else { 0.0 }).collect();
            (format!("slice{k}"), ind)
        })
        .collect();

    let window = resolved_t_window(graph, spec.gap(), delta);
    if window.is_empty() {
        return Err(Error::InvalidGrid("empty resolved window".into()));
    }
    let grid = window.grid(16);
    let slice_curves = energy_curves(spec, delta, &grid, &slices, 1.0)?;
    let f_curve = energy_curves(spec, delta, &grid, &[("f".into(), f.to_vec())], 1.0)?;

    let mut integral = 0.0;
    for (k, curve) in slice_curves.iter().enumerate() {
        let width = if k + 1 < thresholds.len() {
            thresholds[k + 1] - thresholds[k]
        } else {
            distinct[distinct.len() - 1] - thresholds[k]
        };
        integral += width * besov_norm(curve, alpha1)?.value;
    }
    let lhs = besov_norm(&f_curve[0], alpha1)?.value;
    let constant = lhs / integral;
    let pass = (0.2..=5.0).contains(&constant) && layer_cake_error <= 1e-6 * l1.max(1.0);

    let mut values = BTreeMap::new();
    values.insert("lhs".into(), lhs);
    values.insert("rhs".into(), integral);
    values.insert("layer_cake_error".into(), layer_cake_error);
    values.insert("slices".into(), thresholds.len() as f64);
    Ok(InequalityReport {
        suite: "coarea".into(),
        space,
        params,
        values,
        constant,
        status: if pass {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        window: Some((grid[0], grid[grid.len() - 1])),
        tolerance: 5.0,
    })
}

/// L^1 pseudo-Poincaré: `||P_t f - f||_1 <= C t^{alpha_1} Var(f)` (or the
/// W-seminorm when `alpha_1 = 1`), checked as a rate fit plus a bounded
/// constant.
pub fn pseudo_poincare_check(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    delta: f64,
    f: &[f64],
    kappa: f64,
) -> Result<InequalityReport> {
    let d_w = graph.geometry.d_w;
    let alpha1 = alpha1_prediction(delta, kappa, d_w);
    let window = energy_fit_window(graph, spec.gap(), delta, 1.0, kappa);
    if window.is_empty() {
        return Err(Error::InvalidGrid("empty energy window".into()));
    }
    let grid = window.grid(20);
    let fr = spec.restrict(f);
    let lhs_curve: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let pf = spec.semigroup_apply(delta, t, &fr);
            spec.lp_norm(&(pf - &fr), 1.0)
        })
        .collect();
    let fit = fit_slope(&grid, &lhs_curve)?;

    let rhs = if alpha1 < 1.0 {
        variation(graph, f, d_w, Some(kappa), &default_r_grid(graph, 12))?
    } else {
        w_norm(graph, f, delta * d_w, 1.0)?
    };
    let constant = grid
        .iter()
        .zip(&lhs_curve)
        .map(|(&t, &l)| l / (t.powf(alpha1) * rhs))
        .fold(0.0f64, f64::max);

    let slope_ok = fit.slope >= alpha1 - 0.05;
    let status = if fit.r_squared < R2_GATE {
        CheckStatus::Inconclusive
    } else if slope_ok && constant.is_finite() {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    let mut values = BTreeMap::new();
    values.insert("lhs".into(), lhs_curve[lhs_curve.len() - 1]);
    values.insert("rhs".into(), rhs);
    values.insert("slope".into(), fit.slope);
    values.insert("slope_target".into(), alpha1);
    values.insert("r_squared".into(), fit.r_squared);
    values.insert("smallest_t_deviation".into(), lhs_curve[0]);
    Ok(InequalityReport {
        suite: "pseudo_poincare".into(),
        space: graph.kind.label(),
        params: param_map(&[("delta", delta), ("p", 1.0), ("alpha", alpha1)]),
        values,
        constant,
        status,
        window: Some((grid[0], grid[grid.len() - 1])),
        tolerance: 0.05,
    })
}

/// Sobolev embedding `||f||_q <= C W_{delta d_W/p, p}(f)` with
/// `q = p d_H/(d_H - delta d_W)`, on mean-centered family members.
pub fn sobolev_check(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    delta: f64,
    p: f64,
    family: &TestFamily,
) -> Result<InequalityReport> {
    let (d_h, d_w) = (graph.geometry.d_h, graph.geometry.d_w);
    if d_h <= delta * d_w {
        return Err(Error::WrongRegime(format!(
            "sobolev_check needs d_H > delta d_W (got {d_h} <= {}); \
             use linfty_check at the boundary case",
            delta * d_w
        )));
    }
    let _ = spec;
    let q = p * d_h / (d_h - delta * d_w);
    let lambda = delta * d_w / p;
    let mut c_hat: f64 = 0.0;
    let mut worst = (0.0, 0.0);
    for (_, f) in &family.members {
        let mean = mu_mean(graph, f);
        let centered: Vec<f64> = f.iter().map(|v| v - mean).collect();
        let rhs = w_norm(graph, &centered, lambda, p)?;
        if rhs < 1e-12 {
            continue; // constant member: both sides vanish
        }
        let lhs = graph_lp(graph, &centered, q);
        let ratio = lhs / rhs;
        if ratio > c_hat {
            c_hat = ratio;
            worst = (lhs, rhs);
        }
    }
    let pass = c_hat.is_finite() && c_hat > 0.0;
    let mut values = BTreeMap::new();
    values.insert("lhs".into(), worst.0);
    values.insert("rhs".into(), worst.1);
    values.insert("q".into(), q);
    Ok(InequalityReport {
        suite: "sobolev".into(),
        space: graph.kind.label(),
        params: param_map(&[("delta", delta), ("p", p)]),
        values,
        constant: c_hat,
        status: if pass {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        window: None,
        tolerance: 0.25,
    })
}

/// Fractional isoperimetric inequality:
/// `mu(E)^{(d_H - delta d_W)/d_H} <= Theta iint_{E x E^c} d^{-d_H-delta d_W}`.
pub fn isoperimetric_check(
    graph: &MetricMeasureGraph,
    delta: f64,
    sets: &[Vec<usize>],
) -> Result<InequalityReport> {
    let (d_h, d_w) = (graph.geometry.d_h, graph.geometry.d_w);
    if d_h <= delta * d_w {
        return Err(Error::WrongRegime(format!(
            "isoperimetric_check needs d_H > delta d_W, got d_H={d_h}, delta d_W={}",
            delta * d_w
        )));
    }
    let n = graph.node_count();
    let total = graph.total_mass();
    let expo = -(d_h + delta * d_w);
    let mut theta: f64 = 0.0;
    let mut ratios = Vec::new();
    let mut worst = (0.0, 0.0);
    for set in sets {
        let mut member = vec![false; n];
        for &i in set {
            member[i] = true;
        }
        let mass: f64 = set.iter().map(|&i| graph.measure[i]).sum();
        if set.is_empty() || mass >= total - 1e-12 {
            continue; // degenerate: empty set or full space
        }
        let mut perimeter = 0.0;
        for i in 0..n {
            if member[i] {
                for j in 0..n {
                    if !member[j] {
                        perimeter +=
                            graph.dist(i, j).powf(expo) * graph.measure[i] * graph.measure[j];
                    }
                }
            }
        }
        let lhs = mass.powf((d_h - delta * d_w) / d_h);
        let ratio = lhs / perimeter;
        ratios.push((mass, ratio));
        if ratio > theta {
            theta = ratio;
            worst = (lhs, perimeter);
        }
    }
    if ratios.is_empty() {
        return Err(Error::Domain("all supplied sets were degenerate".into()));
    }
    let mut values = BTreeMap::new();
    values.insert("lhs".into(), worst.0);
    values.insert("rhs".into(), worst.1);
    values.insert("sets".into(), ratios.len() as f64);
    let pass = theta.is_finite() && theta > 0.0;
    Ok(InequalityReport {
        suite: "isoperimetric".into(),
        space: graph.kind.label(),
        params: param_map(&[("delta", delta), ("p", 1.0)]),
        values,
        constant: theta,
        status: if pass {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        window: None,
        tolerance: 0.25,
    })
}

/// Essential-oscillation embedding at the boundary case `d_H = delta d_W`:
/// `max f - min f <= C W_{delta d_W, 1}(f)`.
pub fn linfty_check(
    graph: &MetricMeasureGraph,
    delta: f64,
    family: &TestFamily,
) -> Result<InequalityReport> {
    let (d_h, d_w) = (graph.geometry.d_h, graph.geometry.d_w);
    if (d_h - delta * d_w).abs() > 1e-9 {
        return Err(Error::WrongRegime(format!(
            "linfty_check needs d_H = delta d_W exactly, got d_H={d_h}, delta d_W={}",
            delta * d_w
        )));
    }
    let mut c_hat: f64 = 0.0;
    let mut worst = (0.0, 0.0);
    for (_, f) in &family.members {
        let (lo, hi) = f
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                (l.min(v), h.max(v))
            });
        let osc = hi - lo;
        let w = w_norm(graph, f, delta * d_w, 1.0)?;
        if w < 1e-12 {
            continue;
        }
        let ratio = osc / w;
        if ratio > c_hat {
            c_hat = ratio;
            worst = (osc, w);
        }
    }
    let mut values = BTreeMap::new();
    values.insert("lhs".into(), worst.0);
    values.insert("rhs".into(), worst.1);
    Ok(InequalityReport {
        suite: "linfty".into(),
        space: graph.kind.label(),
        params: param_map(&[("delta", delta), ("p", 1.0)]),
        values,
        constant: c_hat,
        status: if c_hat.is_finite() && c_hat > 0.0 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        window: None,
        tolerance: 0.25,
    })
}

/// L^p smoothing into the critical Besov class:
/// `||P_t f||_{p,1/p} <= C t^{-1/p} ||f||_p` for `p >= 2`, checked as a
/// one-sided slope bound plus strong continuity along the grid.
pub fn lp_smoothing_check(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    delta: f64,
    p: f64,
    f: &[f64],
) -> Result<InequalityReport> {
    if p < 2.0 {
        return Err(Error::Domain(format!(
            "lp_smoothing_check needs p >= 2, got {p}"
        )));
    }
    let window = resolved_t_window(graph, spec.gap(), delta);
    if window.is_empty() {
        return Err(Error::InvalidGrid("empty resolved window".into()));
    }
    let t_grid = window.grid(10);
    let s_grid = window.grid(12);
    let fr = spec.restrict(f);
    let fp = spec.lp_norm(&fr, p);

    // smoothed copies as one shared-kernel family over the s-grid
    let smoothed: Vec<(String, Vec<f64>)> = t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let pf = spec.semigroup_apply(delta, t, &fr);
            let mut full = vec![0.0; graph.node_count()];
            for (ri, &g) in spec.nodes.iter().enumerate() {
                full[g] = pf[ri];
            }
            (format!("t{k}"), full)
        })
        .collect();
    let curves = energy_curves(spec, delta, &s_grid, &smoothed, p)?;
    let norms: Vec<f64> = curves
        .iter()
        .map(|c| besov_norm(c, 1.0 / p).map(|b| b.value))
        .collect::<Result<_>>()?;
    let fit = fit_slope(&t_grid, &norms)?;
    let slope_ok = fit.slope >= -1.0 / p - 0.05;

    let continuity: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            let pf = spec.semigroup_apply(delta, t, &fr);
            spec.lp_norm(&(pf - &fr), p)
        })
        .collect();
    let continuity_ok =
        continuity[0] < continuity[continuity.len() - 1] && continuity[0] <= 0.5 * fp.max(1e-300);

    let constant = t_grid
        .iter()
        .zip(&norms)
        .map(|(&t, &v)| v * t.powf(1.0 / p) / fp)
        .fold(0.0f64, f64::max);
    let status = if fit.r_squared < R2_GATE && !slope_ok {
        CheckStatus::Inconclusive
    } else if slope_ok && continuity_ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    let mut values = BTreeMap::new();
    values.insert("lhs".into(), norms[0]);
    values.insert("rhs".into(), fp * t_grid[0].powf(-1.0 / p));
    values.insert("slope".into(), fit.slope);
    values.insert("slope_floor".into(), -1.0 / p - 0.05);
    values.insert("continuity_smallest_t".into(), continuity[0]);
    Ok(InequalityReport {
        suite: "lp_smoothing".into(),
        space: graph.kind.label(),
        params: param_map(&[("delta", delta), ("p", p)]),
        values,
        constant,
        status,
        window: Some((t_grid[0], t_grid[t_grid.len() - 1])),
        tolerance: 0.05,
    })
}

/// BV characterization: for `alpha_1 < 1`, the windowed Besov norm at the
/// critical exponent brackets the variation functional uniformly over the
/// family.
pub fn bv_characterization_check(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    delta: f64,
    family: &TestFamily,
    kappa: f64,
) -> Result<InequalityReport> {
    let d_w = graph.geometry.d_w;
    if delta <= 1.0 - kappa / d_w {
        return Err(Error::WrongRegime(format!(
            "bv_characterization_check needs delta > 1 - kappa/d_W = {}; in that regime \
             the critical space is the fractional Sobolev class (see w_norm)",
            1.0 - kappa / d_w
        )));
    }
    let alpha1 = (1.0 - kappa / d_w) / delta;
    debug_assert!(alpha1 < 1.0);
    let r_grid = default_r_grid(graph, 12);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut worst = (0.0, 0.0);
    for (_, f) in &family.members {
        let var = variation(graph, f, d_w, Some(kappa), &r_grid)?;
        if var < 1e-12 {
            continue; // constant member: both sides vanish, excluded
        }
        let besov = windowed_besov_norm(graph, spec, delta, f, 1.0, alpha1, 16)?.value;
        let ratio = besov / var;
        if ratio > hi {
            hi = ratio;
            worst = (besov, var);
        }
        lo = lo.min(ratio);
    }
    let pass = lo > 0.0 && hi.is_finite() && hi > 0.0;
    let mut values = BTreeMap::new();
    values.insert("lhs".into(), worst.0);
    values.insert("rhs".into(), worst.1);
    values.insert("bracket_lo".into(), lo);
    values.insert("bracket_hi".into(), hi);
    Ok(InequalityReport {
        suite: "bv_characterization".into(),
        space: graph.kind.label(),
        params: param_map(&[("delta", delta), ("p", 1.0), ("alpha", alpha1)]),
        values,
        constant: hi,
        status: if pass {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        window: None,
        tolerance: 0.25,
    })
}
