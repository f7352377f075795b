//! Heat kernels by spectral calculus and by subordination quadrature.

use nalgebra::{DMatrix, DVector};

use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::subordinator::StableDensityEvaluator;

/// A dense symmetric kernel `p_t^{(delta)}(x, y)` over the reduced node set.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub t: f64,
    /// Order of the semigroup; `1.0` is the base heat semigroup.
    pub delta: f64,
    pub entries: DMatrix<f64>,
    /// True iff row integrals equal one (conservative form).
    pub stochastic: bool,
    /// Reduced index -> graph node index.
    pub nodes: Vec<usize>,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// `sum_j p(i, j) mu_j` for every row.
    pub fn row_integrals(&self, mass: &DVector<f64>) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[(i, j)] * mass[j]).sum())
            .collect()
    }

    /// mu-weighted composition `(p * q)(i,j) = sum_k p(i,k) q(k,j) mu_k`.
    pub fn compose(&self, other: &KernelMatrix, mass: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut weighted = other.entries.clone();
        for i in 0..n {
            for j in 0..n {
                weighted[(i, j)] *= mass[i];
            }
        }
        &self.entries * weighted
    }

    /// Largest absolute entry difference against another kernel.
    pub fn sup_distance(&self, other: &KernelMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// CSV export with columns `row,col,value` (17 significant digits).
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::with_capacity(n * n * 28);
        out.push_str("row,col,value\n");
        for i in 0..n {
            for j in 0..n {
                out.push_str(&format!("{i},{j},{:.16e}\n", self.entries[(i, j)]));
            }
        }
        out
    }

    /// Binary column-major dump with three 8-byte little-endian header
    /// fields `{node_count: u64, t: f64, delta: f64}` followed by the
    /// entries as `f64`.
    pub fn to_binary(&self) -> Vec<u8> {
        let n = self.dim();
        let mut out = Vec::with_capacity(24 + 8 * n * n);
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&self.delta.to_le_bytes());
        for j in 0..n {
            for i in 0..n {
                out.extend_from_slice(&self.entries[(i, j)].to_le_bytes());
            }
        }
        out
    }
}

/// Build a kernel from a spectral multiplier `m(lambda) in (0, 1]`.
///
/// Modes whose multiplier is below `1e-18` of the largest are truncated;
/// the result is symmetrized exactly and tiny negative entries from the
/// truncation are clipped at `-1e-10`.
fn kernel_from_multiplier(
    spec: &SpectralDecomposition,
    t: f64,
    delta: f64,
    m: impl Fn(f64) -> f64,
) -> Result<KernelMatrix> {
    let n = spec.dim();
    let mults: Vec<f64> = spec.eigenvalues.iter().map(|&l| m(l)).collect();
    let m_max = mults.iter().cloned().fold(0.0f64, f64::max);
    let kept: Vec<usize> = (0..n)
        .filter(|&k| mults[k] >= 1e-18 * m_max && mults[k] > 0.0)
        .collect();
    let mut scaled = DMatrix::<f64>::zeros(n, kept.len());
    for (c, &k) in kept.iter().enumerate() {
        let w = mults[k].sqrt();
        for i in 0..n {
            scaled[(i, c)] = spec.basis[(i, k)] * w;
        }
    }
    let mut entries = &scaled * scaled.transpose();
    let scale = entries.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (entries[(i, j)] + entries[(j, i)]);
            entries[(i, j)] = avg;
            entries[(j, i)] = avg;
        }
    }
    let clip_floor = -1e-10 * scale.max(1.0);
    for v in entries.iter_mut() {
        if *v < 0.0 {
            if *v < clip_floor {
                return Err(Error::Invariant(format!(
                    "kernel entry {v} below the truncation clip {clip_floor}"
                )));
            }
            *v = 0.0;
        }
    }
    Ok(KernelMatrix {
        t,
        delta,
        entries,
        stochastic: !spec.killed,
        nodes: spec.nodes.clone(),
    })
}

/// Base heat kernel `p_t(x,y) = sum_k e^{-lambda_k t} phi_k(x) phi_k(y)`.
pub fn heat_kernel(spec: &SpectralDecomposition, t: f64) -> Result<KernelMatrix> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "kernel time must be positive, got {t}"
        )));
    }
    kernel_from_multiplier(spec, t, 1.0, |lam| (-lam * t).exp())
}

/// Subordinated kernel via the spectral multiplier `e^{-t lambda^delta}`.
pub fn subordinated_kernel(
    spec: &SpectralDecomposition,
    delta: f64,
    t: f64,
) -> Result<KernelMatrix> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "kernel time must be positive, got {t}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    kernel_from_multiplier(spec, t, delta, |lam| (-t * lam.powf(delta)).exp())
}

/// Subordinated kernel via the time integral
/// `int eta_t(s) p_s ds`, the independent route cross-validating the
/// spectral multiplier.
///
/// The stationary part is added exactly (`int eta_t = 1`); the transient
/// remainder `p_s - Pi` decays like `e^{-gap s}` and is integrated on the
/// log axis with doubling Simpson panels until the sup-norm change is below
/// `tol` relative to the kernel scale.
pub fn subordinated_kernel_by_integral(
    spec: &SpectralDecomposition,
    delta: f64,
    t: f64,
    tol: f64,
) -> Result<KernelMatrix> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "kernel time must be positive, got {t}"
        )));
    }
    let n = spec.dim();
    let eta = StableDensityEvaluator::new(delta)?;
    let gap = spec.gap();
    let zero_tol = 1e-12 * spec.eigenvalues[n - 1].max(1.0);

    // transient kernel p_s - Pi as a function of s
    let transient = |s: f64| -> DMatrix<f64> {
        let mults: Vec<f64> = spec
            .eigenvalues
            .iter()
            .map(|&l| if l <= zero_tol { 0.0 } else { (-l * s).exp() })
            .collect();
        let kept: Vec<usize> = (0..n).filter(|&k| mults[k] > 1e-300).collect();
        let mut scaled = DMatrix::<f64>::zeros(n, kept.len());
        for (c, &k) in kept.iter().enumerate() {
            let w = mults[k].sqrt();
            for i in 0..n {
                scaled[(i, c)] = spec.basis[(i, k)] * w;
            }
        }
        &scaled * scaled.transpose()
    };

    // integrand on the log axis: u -> eta_t(e^u) transient(e^u) e^u
    let weight = |u: f64| -> f64 {
        let s = u.exp();
        eta.density(t, s).unwrap_or(0.0) * s
    };
    // support bracket: eta peaks near s = t^{1/delta}; the transient dies at
    // s ~ 700/gap
    let u_peak = t.ln() / delta;
    let mut u_lo = u_peak;
    while weight(u_lo) > 1e-20 && u_lo > u_peak - 80.0 {
        u_lo -= 0.5;
    }
    let u_hi_transient = (700.0 / gap).ln();
    let mut u_hi = u_peak.min(u_hi_transient);
    while weight(u_hi) * (-gap * u_hi.exp()).exp() > 1e-22 && u_hi < u_hi_transient {
        u_hi += 0.5;
    }
    if u_hi <= u_lo {
        u_hi = u_lo + 1.0;
    }

    let simpson = |panels: usize| -> DMatrix<f64> {
        let h = (u_hi - u_lo) / panels as f64;
        let mut acc = DMatrix::<f64>::zeros(n, n);
        for k in 0..=panels {
            let u = u_lo + h * k as f64;
            let w = weight(u)
                * if k == 0 || k == panels {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
            if w != 0.0 {
                acc += transient(u.exp()) * w;
            }
        }
        acc * (h / 3.0)
    };

    let mut panels = 64usize;
    let mut prev = simpson(panels);
    let mut achieved = f64::INFINITY;
    for _ in 0..6 {
        panels *= 2;
        let cur = simpson(panels);
        let scale = cur.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
        achieved = (&cur - &prev).iter().fold(0.0f64, |a, &v| a.max(v.abs())) / scale;
        prev = cur;
        if achieved <= tol {
            break;
        }
    }
    if achieved > tol {
        return Err(Error::Accuracy {
            achieved,
            requested: tol,
        });
    }

    // add the stationary part exactly: int eta = 1
    let mut entries = prev;
    if !spec.killed {
        let zero_modes: Vec<usize> = (0..n)
            .filter(|&k| spec.eigenvalues[k] <= zero_tol)
            .collect();
        for &k in &zero_modes {
            for i in 0..n {
                for j in 0..n {
                    entries[(i, j)] += spec.basis[(i, k)] * spec.basis[(j, k)];
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (entries[(i, j)] + entries[(j, i)]);
            entries[(i, j)] = avg;
            entries[(j, i)] = avg;
        }
    }
    Ok(KernelMatrix {
        t,
        delta,
        entries,
        stochastic: !spec.killed,
        nodes: spec.nodes.clone(),
    })
}

/// Operator norm proxy for `P_t^{(delta)}: L^p -> L^inf`:
/// `max_x ( sum_y p_t(x,y)^{p'} mu_y )^{1/p'}` with `1/p + 1/p' = 1`.
pub fn lp_to_linf_norm(kernel: &KernelMatrix, mass: &DVector<f64>, p: f64) -> f64 {
    let n = kernel.dim();
    if (p - 1.0).abs() < 1e-12 {
        return kernel.entries.iter().fold(0.0f64, |a, &v| a.max(v));
    }
    let q = p / (p - 1.0);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| kernel.entries[(i, j)].powf(q) * mass[j])
                .sum::<f64>()
                .powf(1.0 / q)
        })
        .fold(0.0f64, f64::max)
}
