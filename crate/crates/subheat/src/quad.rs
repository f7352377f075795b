//! Adaptive quadrature on `(0, infinity)` through the log substitution.
//!
//! Integrands with power-law tails become well-behaved after `s = e^u`, so
//! all improper integrals here run Simpson panels on the `u`-line, doubling
//! the panel count until two successive estimates agree.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the 32-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Generated once by Newton iteration on the Legendre recurrence; the
/// computation is deterministic, so every call sees identical constants.
pub fn gauss_legendre_32() -> &'static ([f64; 32], [f64; 32]) {
    static RULE: OnceLock<([f64; 32], [f64; 32])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 32usize;
        let mut nodes = [0.0; 32];
        let mut weights = [0.0; 32];
        for k in 0..n {
            // Chebyshev initial guess, refined by Newton on P_n.
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_and_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(n, x);
            nodes[n - 1 - k] = x;
            weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Fixed 32-point Gauss-Legendre quadrature on `[a, b]`.
pub fn gauss_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_32();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite Gauss-Legendre with geometrically graded panels: boundaries at
/// `{0, w, 3w, 9w, ...}` (relative to `a`) up to `b`, resolving an integrand
/// whose variation is concentrated at scale `w` near the left endpoint.
pub fn gauss_graded_left(f: &dyn Fn(f64) -> f64, a: f64, b: f64, w: f64) -> f64 {
    debug_assert!(b > a && w > 0.0);
    let mut cuts = vec![a];
    let mut step = w.min(b - a);
    loop {
        let next = cuts.last().unwrap() + step;
        if next >= b - 1e-15 * (b - a) {
            break;
        }
        cuts.push(next);
        step *= 2.0;
    }
    cuts.push(b);
    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        acc += gauss_panel(f, pair[0], pair[1]);
    }
    acc
}

/// Simpson's rule with `2^k` doubling panels on `[a, b]` until successive
/// estimates differ by less than `tol_abs + tol_rel * |I|`.
pub fn simpson_adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol_abs: f64,
    tol_rel: f64,
) -> Result<f64> {
    assert!(b > a);
    let mut n = 16usize;
    let mut prev = simpson_fixed(f, a, b, n);
    for _ in 0..18 {
        n *= 2;
        let cur = simpson_fixed(f, a, b, n);
        let err = (cur - prev).abs();
        if err <= tol_abs + tol_rel * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Accuracy {
        achieved: (prev).abs(),
        requested: tol_abs,
    })
}

fn simpson_fixed(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * k as f64);
    }
    acc * h / 3.0
}

/// Integrate `g(s)` over `(0, infinity)` by the log substitution,
/// automatically bracketing the region where the transformed integrand
/// `g(e^u) e^u` is non-negligible.
///
/// `u_scan` bounds the search for the support; the integrand must decay on
/// both sides of its peak inside that range.
pub fn integrate_log_axis(
    g: &dyn Fn(f64) -> f64,
    u_scan: (f64, f64),
    tol_abs: f64,
    tol_rel: f64,
) -> Result<f64> {
    let h = |u: f64| {
        let s = u.exp();
        let v = g(s) * s;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // coarse scan for the peak and the effective support
    let scan_n = 512;
    let (lo, hi) = u_scan;
    let step = (hi - lo) / scan_n as f64;
    let mut peak = 0.0f64;
    let mut peak_u = lo;
    for k in 0..=scan_n {
        let u = lo + step * k as f64;
        let v = h(u).abs();
        if v > peak {
            peak = v;
            peak_u = u;
        }
    }
    if peak == 0.0 {
        return Ok(0.0);
    }
    let floor = peak * 1e-18 + tol_abs * 1e-2;
    let mut a = peak_u;
    while a > lo && h(a).abs() > floor {
        a -= step.max(0.25);
    }
    let mut b = peak_u;
    while b < hi && h(b).abs() > floor {
        b += step.max(0.25);
    }
    simpson_adaptive(&h, a - step, b + step, tol_abs, tol_rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral_on_log_axis() {
        // int_0^inf e^{-s^2} ds = sqrt(pi)/2
        let v = integrate_log_axis(&|s: f64| (-s * s).exp(), (-40.0, 10.0), 1e-12, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn power_law_tail_integral() {
        // int_0^inf s^2 e^{-s} ds = 2
        let v =
            integrate_log_axis(&|s: f64| s * s * (-s).exp(), (-40.0, 12.0), 1e-12, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn simpson_converges_on_smooth_integrand() {
        let v = simpson_adaptive(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }
}
