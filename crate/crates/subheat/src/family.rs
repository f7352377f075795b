//! The canonical test family: six functions per space spanning smooth,
//! bounded-variation and critical-regularity behavior, all normalized to
//! sup-norm one.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::{MetricMeasureGraph, SpaceKind};
use crate::spectral::SpectralDecomposition;

/// Named test functions on all graph nodes.
#[derive(Debug, Clone)]
pub struct TestFamily {
    pub members: Vec<(String, Vec<f64>)>,
}

impl TestFamily {
    pub fn ids(&self) -> Vec<&str> {
        self.members.iter().map(|(id, _)| id.as_str()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&Vec<f64>> {
        self.members.iter().find(|(i, _)| i == id).map(|(_, f)| f)
    }
}

fn sup_normalize(f: &mut [f64]) {
    let m = f.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if m > 0.0 {
        for v in f.iter_mut() {
            *v /= m;
        }
    }
}

/// Indicator of a canonical "half" of the space with clean cuts: half
/// circle, half interval, the left level-1 gasket cell, the lower-left
/// Vicsek cell.
pub fn canonical_set(graph: &MetricMeasureGraph) -> Vec<f64> {
    let n = graph.node_count();
    match graph.kind {
        SpaceKind::Circle { n: cn } => (0..n).map(|i| if i < cn / 2 { 1.0 } else { 0.0 }).collect(),
        SpaceKind::Interval { .. } => (0..n)
            .map(|i| {
                if graph.positions[i][0] < 0.5 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        SpaceKind::Gasket { .. } => {
            // left level-1 cell: x + y/sqrt(3) <= 1/2 picks the subtriangle
            // rooted at the origin corner
            (0..n)
                .map(|i| {
                    let [x, y] = graph.positions[i];
                    if x + y / 3.0f64.sqrt() <= 0.5 + 1e-12 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        SpaceKind::Vicsek { .. } => (0..n)
            .map(|i| {
                let [x, y] = graph.positions[i];
                if x <= 1.0 / 3.0 + 1e-12 && y <= 1.0 / 3.0 + 1e-12 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
    }
}

fn low_mode(graph: &MetricMeasureGraph, spec: &SpectralDecomposition) -> Vec<f64> {
    let n = graph.node_count();
    match graph.kind {
        SpaceKind::Circle { n: cn } => (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / cn as f64).sin())
            .collect(),
        SpaceKind::Interval { .. } => (0..n)
            .map(|i| (std::f64::consts::PI * graph.positions[i][0]).sin())
            .collect(),
        _ => harmonic_extension(graph, spec),
    }
}

/// Harmonic extension of boundary data pinned at the extreme corners
/// (1 at the first corner, 0 elsewhere), solved through the conductance
/// Laplacian.
fn harmonic_extension(graph: &MetricMeasureGraph, _spec: &SpectralDecomposition) -> Vec<f64> {
    let n = graph.node_count();
    // extreme corners: nodes of minimal / maximal position coordinates
    let mut pinned: Vec<(usize, f64)> = Vec::new();
    let mut corner_ids: Vec<usize> = Vec::new();
    match graph.kind {
        SpaceKind::Gasket { .. } => {
            for target in [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]] {
                corner_ids.push(nearest_node(graph, target));
            }
        }
        SpaceKind::Vicsek { .. } => {
            for target in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
                corner_ids.push(nearest_node(graph, target));
            }
        }
        _ => unreachable!("harmonic extension is only used on fractal builders"),
    }
    for (k, &id) in corner_ids.iter().enumerate() {
        pinned.push((id, if k == 0 { 1.0 } else { 0.0 }));
    }
    let pinned_idx: Vec<usize> = pinned.iter().map(|&(i, _)| i).collect();
    let free: Vec<usize> = (0..n).filter(|i| !pinned_idx.contains(i)).collect();
    let pos_of: std::collections::HashMap<usize, usize> =
        free.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let m = free.len();
    let mut k_ff = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for &(a, b, c) in &graph.edges {
        let (a, b) = (a as usize, b as usize);
        for (x, y) in [(a, b), (b, a)] {
            if let Some(&rx) = pos_of.get(&x) {
                k_ff[(rx, rx)] += c;
                if let Some(&ry) = pos_of.get(&y) {
                    if x < y {
                        k_ff[(rx, ry)] -= c;
                        k_ff[(ry, rx)] -= c;
                    }
                } else {
                    let bv = pinned.iter().find(|&&(i, _)| i == y).unwrap().1;
                    rhs[rx] += c * bv;
                }
            }
        }
    }
    let sol = k_ff
        .lu()
        .solve(&rhs)
        .expect("harmonic extension system is nonsingular on a connected graph");
    let mut f = vec![0.0; n];
    for &(i, v) in &pinned {
        f[i] = v;
    }
    for (k, &i) in free.iter().enumerate() {
        f[i] = sol[k];
    }
    f
}

fn nearest_node(graph: &MetricMeasureGraph, target: [f64; 2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in graph.positions.iter().enumerate() {
        let d = (p[0] - target[0]).powi(2) + (p[1] - target[1]).powi(2);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Hölder-rough synthetic matched to the exponent `kappa`.
///
/// On the circle and interval this is the classical random midpoint
/// displacement on index ranges; on the fractal builders the displacement
/// hierarchy is awkward to track through the vertex identifications, so an
/// equivalent spectral synthesis `sum_k xi_k (1+lambda_k)^{-beta} phi_k`
/// with `beta = (kappa + d_H/2)/d_W` is used instead.
fn rough(graph: &MetricMeasureGraph, spec: &SpectralDecomposition, seed: u64) -> Vec<f64> {
    let kappa = graph
        .geometry
        .kappa
        .unwrap_or(graph.geometry.d_w - graph.geometry.d_h)
        .clamp(0.05, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.node_count();
    match graph.kind {
        SpaceKind::Circle { .. } | SpaceKind::Interval { .. } => {
            let mut f = vec![0.0; n];
            // seed the coarse values, then displace midpoints recursively
            let mut stack = vec![(0usize, n - 1, 1.0f64)];
            if matches!(graph.kind, SpaceKind::Circle { .. }) {
                f[0] = 0.0;
            } else {
                f[n - 1] = rng.random_range(-1.0..1.0);
            }
            while let Some((lo, hi, scale)) = stack.pop() {
                if hi - lo < 2 {
                    continue;
                }
                let mid = (lo + hi) / 2;
                let noise: f64 = rng.random_range(-1.0..1.0);
                f[mid] = 0.5 * (f[lo] + f[hi]) + noise * scale.powf(kappa);
                stack.push((lo, mid, scale * 0.5));
                stack.push((mid, hi, scale * 0.5));
            }
            sup_normalize(&mut f);
            f
        }
        _ => {
            let beta = (kappa + graph.geometry.d_h / 2.0) / graph.geometry.d_w;
            let dim = spec.dim();
            let mut coef = DVector::<f64>::zeros(dim);
            for k in 1..dim {
                let xi: f64 = rng.random_range(-1.0..1.0);
                coef[k] = xi * (1.0 + spec.eigenvalues[k]).powf(-beta);
            }
            let reduced = &spec.basis * coef;
            let mut f = vec![0.0; n];
            for (ri, &g) in spec.nodes.iter().enumerate() {
                f[g] = reduced[ri];
            }
            sup_normalize(&mut f);
            f
        }
    }
}

/// Metric tent around node 0 with width a quarter of the diameter.
fn tent(graph: &MetricMeasureGraph) -> Vec<f64> {
    let w = graph.diameter / 4.0;
    (0..graph.node_count())
        .map(|i| (1.0 - graph.dist(0, i) / w).max(0.0))
        .collect()
}

/// The canonical six-member family: smoothed indicator, sharp indicator,
/// low Fourier/harmonic mode, Hölder-rough synthetic, tent, first
/// eigenvector.
pub fn canonical_family(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    seed: u64,
) -> Result<TestFamily> {
    if spec.dim() < 2 {
        return Err(Error::Invariant(
            "family needs at least two eigenmodes".into(),
        ));
    }
    let n = graph.node_count();
    let sharp = canonical_set(graph);

    // lattice-scale smoothing of the sharp indicator
    let t_smooth = (4.0 * graph.min_spacing).powf(graph.geometry.d_w);
    let smooth_reduced = spec.semigroup_apply(1.0, t_smooth, &spec.restrict(&sharp));
    let mut smoothed = vec![0.0; n];
    for (ri, &g) in spec.nodes.iter().enumerate() {
        smoothed[g] = smooth_reduced[ri];
    }
    sup_normalize(&mut smoothed);

    let mut mode = low_mode(graph, spec);
    sup_normalize(&mut mode);

    let rough_f = rough(graph, spec, seed);
    let tent_f = tent(graph);

    let mut eigen = vec![0.0; n];
    let k1 = if spec.killed { 0 } else { 1 };
    for (ri, &g) in spec.nodes.iter().enumerate() {
        eigen[g] = spec.basis[(ri, k1)];
    }
    sup_normalize(&mut eigen);

    Ok(TestFamily {
        members: vec![
            ("smoothed_indicator".into(), smoothed),
            ("sharp_indicator".into(), sharp),
            ("low_mode".into(), mode),
            ("rough".into(), rough_f),
            ("tent".into(), tent_f),
            ("eigenmode".into(), eigen),
        ],
    })
}
