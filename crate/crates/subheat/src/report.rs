//! Machine-readable report records and writers.
//!
//! Every check emits an [`InequalityReport`] or [`CriticalExponentReport`];
//! the runner collects them into `report.json` plus a CSV summary. Float
//! formatting uses 17 significant digits so values round-trip exactly.

use std::collections::BTreeMap;

use serde::Serialize;

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Fit quality below the gate; no pass/fail judgement.
    Inconclusive,
}

/// One named inequality with its fitted constant.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub suite: String,
    pub space: String,
    /// Scalar parameters of the run (delta, p, level, ...).
    pub params: BTreeMap<String, f64>,
    /// Named numeric outcomes; always contains `lhs` and `rhs` when the
    /// check is a two-sided comparison.
    pub values: BTreeMap<String, f64>,
    /// The fitted constant the pass judgement is about.
    pub constant: f64,
    pub status: CheckStatus,
    /// Resolved window the check ran on, when one applies.
    pub window: Option<(f64, f64)>,
    pub tolerance: f64,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Predicted critical exponent: a point value where the theory pins one
/// down, a bracket where it only bounds it.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prediction {
    Point { value: f64 },
    Bracket { lo: f64, hi: f64 },
}

/// Estimated critical exponent with its per-function fits.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalExponentReport {
    pub space: String,
    pub p: f64,
    pub delta: f64,
    /// Max over the family of fitted slopes of `log E_p(t)^{1/p}`.
    pub alpha_hat: f64,
    /// `(function id, fitted slope, r_squared)` per family member.
    pub per_function: Vec<(String, f64, f64)>,
    pub prediction: Prediction,
    /// Hölder exponent used in the prediction, when one was needed.
    pub kappa_used: Option<f64>,
    pub window: (f64, f64),
    /// False when every fit fell below the R^2 gate.
    pub conclusive: bool,
}

/// 17-significant-digit float for exact CSV round-trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV summary row schema: `suite,space,delta,p,lhs,rhs,constant,pass`.
pub fn summary_csv(reports: &[InequalityReport]) -> String {
    let mut out = String::from("suite,space,delta,p,lhs,rhs,constant,pass\n");
    for r in reports {
        let delta = r.params.get("delta").copied().unwrap_or(f64::NAN);
        let p = r.params.get("p").copied().unwrap_or(f64::NAN);
        let lhs = r.values.get("lhs").copied().unwrap_or(f64::NAN);
        let rhs = r.values.get("rhs").copied().unwrap_or(f64::NAN);
        let status = match r.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Inconclusive => "inconclusive",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.suite,
            r.space,
            fmt_f64(delta),
            fmt_f64(p),
            fmt_f64(lhs),
            fmt_f64(rhs),
            fmt_f64(r.constant),
            status
        ));
    }
    out
}

/// CSV for an energy curve: `t,energy,t^-alpha energy^(1/p)`.
pub fn energy_curve_csv(curve: &crate::seminorms::EnergyCurve, alpha: f64) -> String {
    let mut out = String::from("t,energy,scaled\n");
    for (&t, &e) in curve.grid.iter().zip(&curve.energies) {
        let scaled = t.powf(-alpha) * e.powf(1.0 / curve.p);
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(t),
            fmt_f64(e),
            fmt_f64(scaled)
        ));
    }
    out
}

/// Relative change between two fitted constants, the cross-level stability
/// measure used throughout the acceptance gates.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}
