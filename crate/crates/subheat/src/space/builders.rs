//! The four space builders.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GeometryParams, MetricKind, MetricMeasureGraph, Provenance, SpaceKind};
use crate::error::{Error, Result};

const SQRT3_HALF: f64 = 0.866_025_403_784_438_6;

/// Endpoint handling for the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Both endpoints absorb (killed form, sub-stochastic kernel).
    Absorbing,
    /// Neumann endpoints, conservative kernel.
    Reflecting,
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryMode::Absorbing => write!(f, "absorbing"),
            BoundaryMode::Reflecting => write!(f, "reflecting"),
        }
    }
}

fn check_resolution(got: usize, min: usize, max: usize) -> Result<()> {
    if got < min || got > max {
        return Err(Error::InvalidResolution { got, min, max });
    }
    Ok(())
}

/// Cycle graph on the unit-circumference circle.
///
/// Spacing `1/n`, masses `1/n`, neighbor conductances `n`, so the form
/// approximates `int |f'|^2`. Geometry: `d_H = 1`, `d_W = 2`, `kappa = 1`.
pub fn build_circle(n: usize) -> Result<MetricMeasureGraph> {
    check_resolution(n, 8, 1 << 20)?;
    let r = 1.0 / (2.0 * PI);
    let positions = (0..n)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / n as f64;
            [r * th.cos(), r * th.sin()]
        })
        .collect();
    let measure = vec![1.0 / n as f64; n];
    let edges = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            (i.min(j) as u32, i.max(j) as u32, n as f64)
        })
        .collect();
    let g = MetricMeasureGraph {
        kind: SpaceKind::Circle { n },
        positions,
        measure,
        edges,
        boundary: Vec::new(),
        geometry: GeometryParams {
            d_h: 1.0,
            d_h_provenance: Provenance::Analytic,
            d_w: 2.0,
            d_w_provenance: Provenance::Analytic,
            kappa: Some(1.0),
            kappa_provenance: Provenance::Analytic,
        },
        metric: MetricKind::CircleArc { n },
        min_spacing: 1.0 / n as f64,
        diameter: (n / 2) as f64 / n as f64,
        window_factor: 8.0,
    };
    g.validate()?;
    Ok(g)
}

/// Path graph on `[0, 1]` with `n` subintervals (`n + 1` nodes at `i/n`).
///
/// Trapezoid masses (`1/(2n)` at the ends) keep the total mass 1; neighbor
/// conductances are `n`. Absorbing mode marks both endpoints, and the killed
/// Dirichlet eigenvalues are exactly `4 n^2 sin^2(k pi / (2n))`.
pub fn build_interval(n: usize, boundary_mode: BoundaryMode) -> Result<MetricMeasureGraph> {
    check_resolution(n, 8, 1 << 20)?;
    let count = n + 1;
    let positions = (0..count).map(|i| [i as f64 / n as f64, 0.0]).collect();
    let mut measure = vec![1.0 / n as f64; count];
    measure[0] = 0.5 / n as f64;
    measure[n] = 0.5 / n as f64;
    let edges = (0..n)
        .map(|i| (i as u32, (i + 1) as u32, n as f64))
        .collect();
    let boundary = match boundary_mode {
        BoundaryMode::Absorbing => vec![0, n],
        BoundaryMode::Reflecting => Vec::new(),
    };
    let g = MetricMeasureGraph {
        kind: SpaceKind::Interval { n, boundary_mode },
        positions,
        measure,
        edges,
        boundary,
        geometry: GeometryParams {
            d_h: 1.0,
            d_h_provenance: Provenance::Analytic,
            d_w: 2.0,
            d_w_provenance: Provenance::Analytic,
            kappa: Some(1.0),
            kappa_provenance: Provenance::Analytic,
        },
        metric: MetricKind::Line { n },
        min_spacing: 1.0 / n as f64,
        diameter: 1.0,
        window_factor: 8.0,
    };
    g.validate()?;
    Ok(g)
}

/// Level-`m` Sierpinski gasket graph `V_m`.
///
/// Conductances `(5/3)^m` on the `3^m` cell edges; each cell's mass `3^{-m}`
/// splits equally among its three corners; metric is the Euclidean embedding
/// distance. Geometry: `d_H = log3/log2`, `d_W = log5/log2`, `kappa` left for
/// downstream estimation.
pub fn build_gasket(level: usize) -> Result<MetricMeasureGraph> {
    check_resolution(level, 1, 8)?;
    let m = level as u32;
    let side = 1i64 << m;
    // lattice coords (a, b): point = (a + b/2, b sqrt3/2) / 2^m
    let mut cells = vec![[(0i64, 0i64), (side, 0), (0, side)]];
    for _ in 0..m {
        let mut next = Vec::with_capacity(cells.len() * 3);
        for [p, q, r] in cells {
            let mpq = ((p.0 + q.0) / 2, (p.1 + q.1) / 2);
            let mqr = ((q.0 + r.0) / 2, (q.1 + r.1) / 2);
            let mrp = ((r.0 + p.0) / 2, (r.1 + p.1) / 2);
            next.push([p, mpq, mrp]);
            next.push([mpq, q, mqr]);
            next.push([mrp, mqr, r]);
        }
        cells = next;
    }
    let mut index: BTreeMap<(i64, i64), u32> = BTreeMap::new();
    for cell in &cells {
        for &v in cell {
            let next_id = index.len() as u32;
            index.entry(v).or_insert(next_id);
        }
    }
    let n = index.len();
    let mut coords = vec![(0i64, 0i64); n];
    for (&c, &i) in &index {
        coords[i as usize] = c;
    }
    let scale = 0.5f64.powi(m as i32);
    let positions = coords
        .iter()
        .map(|&(a, b)| {
            [
                (a as f64 + b as f64 / 2.0) * scale,
                b as f64 * SQRT3_HALF * scale,
            ]
        })
        .collect();

    let cond = (5.0f64 / 3.0).powi(m as i32);
    let cell_mass = 3.0f64.powi(-(m as i32)) / 3.0;
    let mut measure = vec![0.0; n];
    let mut edges = Vec::with_capacity(cells.len() * 3);
    for cell in &cells {
        let ids: Vec<u32> = cell.iter().map(|v| index[v]).collect();
        for &i in &ids {
            measure[i as usize] += cell_mass;
        }
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let (i, j) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
            edges.push((i, j, cond));
        }
    }

    let g = MetricMeasureGraph {
        kind: SpaceKind::Gasket { level },
        positions,
        measure,
        edges,
        boundary: Vec::new(),
        geometry: GeometryParams {
            d_h: 3.0f64.ln() / 2.0f64.ln(),
            d_h_provenance: Provenance::Analytic,
            d_w: 5.0f64.ln() / 2.0f64.ln(),
            d_w_provenance: Provenance::Analytic,
            kappa: None,
            kappa_provenance: Provenance::Unset,
        },
        metric: MetricKind::TriLattice { coords, scale },
        min_spacing: scale,
        diameter: 1.0,
        window_factor: 2.0,
    };
    g.validate()?;
    Ok(g)
}

/// Level-`m` Vicsek tree.
///
/// Each of the `5^m` kept cells contributes a five-point star (center joined
/// to its four corners) with conductance `3^m` per edge; cell mass `5^{-m}`
/// splits equally among the star's five vertices. The vertex set enumerates
/// to `4*5^m + 1` nodes. Geometry: `d_H = log5/log3`, `d_W = log15/log3`.
pub fn build_vicsek(level: usize) -> Result<MetricMeasureGraph> {
    check_resolution(level, 1, 6)?;
    let m = level as u32;
    // integer unit = 1 / (2 * 3^m); cells are squares of side 2*3^{m-k}
    let full = 2 * 3i64.pow(m);
    let mut cells = vec![(0i64, 0i64)]; // lower-left corners, side = full
    let mut side = full;
    for _ in 0..m {
        let third = side / 3;
        let mut next = Vec::with_capacity(cells.len() * 5);
        for (u, v) in cells {
            next.push((u, v));
            next.push((u + 2 * third, v));
            next.push((u, v + 2 * third));
            next.push((u + 2 * third, v + 2 * third));
            next.push((u + third, v + third));
        }
        cells = next;
        side = third;
    }
    debug_assert_eq!(side, 2);

    let mut index: BTreeMap<(i64, i64), u32> = BTreeMap::new();
    let mut star = |u: i64, v: i64| -> [u32; 5] {
        let pts = [
            (u, v),
            (u + 2, v),
            (u, v + 2),
            (u + 2, v + 2),
            (u + 1, v + 1),
        ];
        pts.map(|p| {
            let next_id = index.len() as u32;
            *index.entry(p).or_insert(next_id)
        })
    };
    let cond = 3.0f64.powi(m as i32);
    let node_mass = 5.0f64.powi(-(m as i32)) / 5.0;
    let mut edges = Vec::with_capacity(cells.len() * 4);
    let mut stars = Vec::with_capacity(cells.len());
    for &(u, v) in &cells {
        stars.push(star(u, v));
    }
    let n = index.len();
    let mut measure = vec![0.0; n];
    for ids in &stars {
        let center = ids[4];
        for &corner in &ids[..4] {
            let (i, j) = (corner.min(center), corner.max(center));
            edges.push((i, j, cond));
        }
        for &i in ids {
            measure[i as usize] += node_mass;
        }
    }
    let mut coords = vec![(0i64, 0i64); n];
    for (&c, &i) in &index {
        coords[i as usize] = c;
    }
    let scale = 1.0 / full as f64;
    let positions = coords
        .iter()
        .map(|&(u, v)| [u as f64 * scale, v as f64 * scale])
        .collect();

    let g = MetricMeasureGraph {
        kind: SpaceKind::Vicsek { level },
        positions,
        measure,
        edges,
        boundary: Vec::new(),
        geometry: GeometryParams {
            d_h: 5.0f64.ln() / 3.0f64.ln(),
            d_h_provenance: Provenance::Analytic,
            d_w: 15.0f64.ln() / 3.0f64.ln(),
            d_w_provenance: Provenance::Analytic,
            kappa: None,
            kappa_provenance: Provenance::Unset,
        },
        metric: MetricKind::SquareLattice { coords, scale },
        min_spacing: std::f64::consts::SQRT_2 * scale,
        diameter: std::f64::consts::SQRT_2,
        window_factor: 2.0,
    };
    g.validate()?;
    Ok(g)
}
