//! Declarative scenario configuration: one config document describes one
//! reproducible experiment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::SpaceKind;

/// Which verification suites a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    CriticalExponent,
    WeakBakryEmery,
    KernelBounds,
    Coarea,
    PseudoPoincare,
    Sobolev,
    Isoperimetric,
    Linfty,
    LpSmoothing,
    CapacitySobolev,
    BvCharacterization,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::CriticalExponent => "critical_exponent",
            Suite::WeakBakryEmery => "weak_bakry_emery",
            Suite::KernelBounds => "kernel_bounds",
            Suite::Coarea => "coarea",
            Suite::PseudoPoincare => "pseudo_poincare",
            Suite::Sobolev => "sobolev",
            Suite::Isoperimetric => "isoperimetric",
            Suite::Linfty => "linfty",
            Suite::LpSmoothing => "lp_smoothing",
            Suite::CapacitySobolev => "capacity_sobolev",
            Suite::BvCharacterization => "bv_characterization",
        }
    }
}

/// Log-spaced time grid relative to the resolved window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TGridSpec {
    /// Multiplier on the resolved window's left edge.
    pub t_min_mult: f64,
    /// Multiplier on the resolved window's right edge.
    pub t_max_mult: f64,
    pub count: usize,
}

impl Default for TGridSpec {
    fn default() -> Self {
        TGridSpec {
            t_min_mult: 1.0,
            t_max_mult: 1.0,
            count: 24,
        }
    }
}

/// Test function selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    /// The six-member canonical family.
    Canonical,
    /// Explicit shapes by name.
    Explicit(Vec<FunctionSpec>),
}

/// A named test-function shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FunctionSpec {
    SharpIndicator,
    SmoothedIndicator,
    LowMode,
    Rough,
    Tent,
    Eigenmode,
    /// Fourier mode `sin(2 pi k x)` of the first embedding coordinate.
    Fourier {
        k: usize,
    },
}

/// One reproducible experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub space: SpaceKind,
    pub deltas: Vec<f64>,
    pub ps: Vec<f64>,
    #[serde(default)]
    pub t_grid: TGridSpec,
    pub family: FamilySpec,
    pub suites: Vec<Suite>,
    pub out_dir: String,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(Error::Config("deltas: empty".into()));
        }
        if self.ps.is_empty() {
            return Err(Error::Config("ps: empty".into()));
        }
        if self.suites.is_empty() {
            return Err(Error::Config("suites: empty".into()));
        }
        for &d in &self.deltas {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::Config(format!("deltas: {d} outside (0,1)")));
            }
        }
        for &p in &self.ps {
            if !(p >= 1.0) {
                return Err(Error::Config(format!("ps: {p} below 1")));
            }
        }
        if self.t_grid.count < 8 {
            return Err(Error::Config(format!(
                "t_grid.count: {} below the minimum of 8",
                self.t_grid.count
            )));
        }
        if !(self.t_grid.t_min_mult > 0.0 && self.t_grid.t_max_mult > 0.0) {
            return Err(Error::Config("t_grid: multipliers must be positive".into()));
        }
        if let FamilySpec::Explicit(fns) = &self.family {
            if fns.is_empty() {
                return Err(Error::Config("family: empty explicit list".into()));
            }
        }
        if self.out_dir.is_empty() {
            return Err(Error::Config("out_dir: empty".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
