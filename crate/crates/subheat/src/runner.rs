//! Scenario runner: builds the space once, executes the requested suites
//! over every `(delta, p)` cell, and writes machine-readable reports.
//!
//! Independent cells may run on a rayon pool capped by `SUBHEAT_THREADS`
//! (0 or unset = automatic); results are collected in deterministic cell
//! order, so reports are byte-identical across runs and thread counts.
//! Timestamps live only in `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{
    bv_characterization_check, capacity_sobolev_check, coarea_check, critical_exponent,
    isoperimetric_check, linfty_check, lp_smoothing_check, pseudo_poincare_check, resolve_kappa,
    sobolev_check, weak_be_fit,
};
use crate::config::{FamilySpec, FunctionSpec, ScenarioConfig, Suite};
use crate::error::{Error, Result};
use crate::family::{canonical_family, canonical_set, TestFamily};
use crate::report::{
    energy_curve_csv, summary_csv, CheckStatus, CriticalExponentReport, InequalityReport,
};
use crate::seminorms::energy_curves;
use crate::space::MetricMeasureGraph;
use crate::spectral::{kernel_bound_fit, SpectralDecomposition};
use crate::window::energy_fit_window;

/// One record in `report.json`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportRecord {
    Inequality(InequalityReport),
    CriticalExponent(CriticalExponentReport),
    WeakBakryEmery(crate::analysis::WeakBakryEmeryReport),
    KernelBounds(crate::spectral::BoundFitReport),
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<ReportRecord>,
    /// Serialized `report.json` bytes (deterministic).
    pub report_json: String,
    pub summary_csv: String,
    pub exit_code: i32,
}

/// Execute a validated config and write `report.json`, `summary.csv`,
/// per-curve CSVs and `manifest.json` under `out_dir`.
pub fn run(config: &ScenarioConfig) -> Result<RunOutcome> {
    config.validate()?;
    let outcome = execute(config)?;
    let out_dir = PathBuf::from(&config.out_dir);
    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("report.json"), &outcome.report_json)?;
    fs::write(out_dir.join("summary.csv"), &outcome.summary_csv)?;
    write_curves(config, &out_dir)?;
    fs::write(out_dir.join("manifest.json"), manifest_json(config))?;
    Ok(outcome)
}

/// Execute a validated config without touching the filesystem.
pub fn execute(config: &ScenarioConfig) -> Result<RunOutcome> {
    config.validate()?;
    let graph = config.space.into_descriptor_graph()?;
    let spec = SpectralDecomposition::eigendecompose(&graph)?;
    let family = build_family(&graph, &spec, config)?;

    // deterministic cell order: suite, then delta, then p
    let mut cells: Vec<(Suite, f64, f64)> = Vec::new();
    let mut suites = config.suites.clone();
    suites.sort();
    suites.dedup();
    for &suite in &suites {
        for &delta in &config.deltas {
            match suite {
                Suite::CriticalExponent | Suite::Sobolev | Suite::LpSmoothing => {
                    for &p in &config.ps {
                        cells.push((suite, delta, p));
                    }
                }
                _ => cells.push((suite, delta, 1.0)),
            }
        }
    }

    let pool = thread_pool()?;
    let results: Vec<Result<Vec<ReportRecord>>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(suite, delta, p)| run_cell(&graph, &spec, &family, config, suite, delta, p))
            .collect()
    });
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }

    let report_json = serde_json::to_string_pretty(&records)?;
    let inequalities: Vec<InequalityReport> = records
        .iter()
        .filter_map(|r| match r {
            ReportRecord::Inequality(i) => Some(i.clone()),
            _ => None,
        })
        .collect();
    let csv = summary_csv(&inequalities);

    let exit_code = exit_code_from(&records);
    Ok(RunOutcome {
        records,
        report_json,
        summary_csv: csv,
        exit_code,
    })
}

impl crate::space::SpaceKind {
    fn into_descriptor_graph(self) -> Result<MetricMeasureGraph> {
        use crate::space::*;
        match self {
            SpaceKind::Circle { n } => build_circle(n),
            SpaceKind::Interval { n, boundary_mode } => build_interval(n, boundary_mode),
            SpaceKind::Gasket { level } => build_gasket(level),
            SpaceKind::Vicsek { level } => build_vicsek(level),
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let requested = std::env::var("SUBHEAT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(requested)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn build_family(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    config: &ScenarioConfig,
) -> Result<TestFamily> {
    match &config.family {
        FamilySpec::Canonical => canonical_family(graph, spec, config.seed),
        FamilySpec::Explicit(shapes) => {
            let canonical = canonical_family(graph, spec, config.seed)?;
            let mut members = Vec::new();
            for shape in shapes {
                let (id, f): (String, Vec<f64>) = match shape {
                    FunctionSpec::SharpIndicator => {
                        ("sharp_indicator".into(), canonical_set(graph))
                    }
                    FunctionSpec::SmoothedIndicator => (
                        "smoothed_indicator".into(),
                        canonical.get("smoothed_indicator").unwrap().clone(),
                    ),
                    FunctionSpec::LowMode => (
                        "low_mode".into(),
                        canonical.get("low_mode").unwrap().clone(),
                    ),
                    FunctionSpec::Rough => {
                        ("rough".into(), canonical.get("rough").unwrap().clone())
                    }
                    FunctionSpec::Tent => ("tent".into(), canonical.get("tent").unwrap().clone()),
                    FunctionSpec::Eigenmode => (
                        "eigenmode".into(),
                        canonical.get("eigenmode").unwrap().clone(),
                    ),
                    FunctionSpec::Fourier { k } => {
                        let f = (0..graph.node_count())
                            .map(|i| {
                                (2.0 * std::f64::consts::PI * *k as f64 * graph.positions[i][0])
                                    .sin()
                            })
                            .collect();
                        (format!("fourier{k}"), f)
                    }
                };
                members.push((id, f));
            }
            Ok(TestFamily { members })
        }
    }
}

fn run_cell(
    graph: &MetricMeasureGraph,
    spec: &SpectralDecomposition,
    family: &TestFamily,
    config: &ScenarioConfig,
    suite: Suite,
    delta: f64,
    p: f64,
) -> Result<Vec<ReportRecord>> {
    let diag = |e: Error| -> Error {
        Error::Config(format!(
            "suite {} at delta={delta}, p={p}: {e}",
            suite.name()
        ))
    };
    let (kappa, _) = resolve_kappa(graph, family).map_err(diag)?;
    let mut out = Vec::new();
    match suite {
        Suite::CriticalExponent => {
            let rep = critical_exponent(graph, spec, delta, p, family).map_err(diag)?;
            out.push(ReportRecord::CriticalExponent(rep));
        }
        Suite::WeakBakryEmery => {
            let rep = weak_be_fit(graph, spec, delta, family, &[], None).map_err(diag)?;
            out.push(ReportRecord::WeakBakryEmery(rep));
        }
        Suite::KernelBounds => {
            let rep = kernel_bound_fit(spec, graph, delta, &[]).map_err(diag)?;
            out.push(ReportRecord::KernelBounds(rep));
        }
        Suite::Coarea => {
            // nonnegative member: the tent
            let tent = family
                .get("tent")
                .cloned()
                .unwrap_or_else(|| canonical_set(graph));
            let rep = coarea_check(graph, spec, delta, &tent, kappa).map_err(diag)?;
            out.push(ReportRecord::Inequality(rep));
        }
        Suite::PseudoPoincare => {
            for (id, f) in &family.members {
                if id == "sharp_indicator" || id == "low_mode" {
                    let rep = pseudo_poincare_check(graph, spec, delta, f, kappa).map_err(diag)?;
                    out.push(ReportRecord::Inequality(rep));
                }
            }
        }
        Suite::Sobolev => {
            let rep = sobolev_check(graph, spec, delta, p, family).map_err(diag)?;
            out.push(ReportRecord::Inequality(rep));
        }
        Suite::Isoperimetric => {
            let sets = canonical_set_family(graph);
            let rep = isoperimetric_check(graph, delta, &sets).map_err(diag)?;
            out.push(ReportRecord::Inequality(rep));
        }
        Suite::Linfty => {
            let smooth = TestFamily {
                members: family
                    .members
                    .iter()
                    .filter(|(id, _)| id == "smoothed_indicator" || id == "low_mode")
                    .cloned()
                    .collect(),
            };
            let rep = linfty_check(graph, delta, &smooth).map_err(diag)?;
            out.push(ReportRecord::Inequality(rep));
        }
        Suite::LpSmoothing => {
            let f = family
                .get("sharp_indicator")
                .cloned()
                .unwrap_or_else(|| canonical_set(graph));
            let rep = lp_smoothing_check(graph, spec, delta, p.max(2.0), &f).map_err(diag)?;
            out.push(ReportRecord::Inequality(rep));
        }
        Suite::CapacitySobolev => {
            let sets = dyadic_interior_sets(graph);
            let rep =
                capacity_sobolev_check(graph, spec, delta, 1.0, &sets, family).map_err(diag)?;
            out.push(ReportRecord::Inequality(rep));
        }
        Suite::BvCharacterization => {
            let rep = bv_characterization_check(graph, spec, delta, family, kappa).map_err(diag)?;
            out.push(ReportRecord::Inequality(rep));
        }
    }
    let _ = config;
    Ok(out)
}

/// Exit-code contract: 0 when every non-inconclusive check passes, 2 when
/// any check failed (failures dominate), 3 when any check is inconclusive.
pub fn exit_code_from(records: &[ReportRecord]) -> i32 {
    let mut any_fail = false;
    let mut any_inconclusive = false;
    for rec in records {
        match rec {
            ReportRecord::Inequality(i) => match i.status {
                CheckStatus::Fail => any_fail = true,
                CheckStatus::Inconclusive => any_inconclusive = true,
                CheckStatus::Pass => {}
            },
            ReportRecord::CriticalExponent(c) => {
                if !c.conclusive {
                    any_inconclusive = true;
                }
            }
            _ => {}
        }
    }
    if any_fail {
        2
    } else if any_inconclusive {
        3
    } else {
        0
    }
}

/// Arcs (or metric balls) of measure roughly 1/8, 1/4 and 1/2.
pub fn canonical_set_family(graph: &MetricMeasureGraph) -> Vec<Vec<usize>> {
    let total = graph.total_mass();
    [0.125, 0.25, 0.5]
        .iter()
        .map(|&frac| {
            let mut nodes: Vec<usize> = (0..graph.node_count()).collect();
            nodes.sort_by(|&a, &b| graph.dist(0, a).partial_cmp(&graph.dist(0, b)).unwrap());
            let mut acc = 0.0;
            let mut out = Vec::new();
            for i in nodes {
                if acc >= frac * total {
                    break;
                }
                acc += graph.measure[i];
                out.push(i);
            }
            out.sort_unstable();
            out
        })
        .collect()
}

/// Nested dyadic interior node sets around the space's center (for capacity
/// families on killed graphs).
pub fn dyadic_interior_sets(graph: &MetricMeasureGraph) -> Vec<Vec<usize>> {
    let interior = graph.interior_nodes();
    let n = interior.len();
    (1..=5)
        .map(|k| {
            let len = (n >> k).max(1);
            let lo = n / 2 - len / 2;
            interior[lo..(lo + len).min(n)].to_vec()
        })
        .collect()
}

fn write_curves(config: &ScenarioConfig, out_dir: &Path) -> Result<()> {
    // energy curves for every (delta, p) cell of the family, one CSV each
    let graph = config.space.into_descriptor_graph()?;
    let spec = SpectralDecomposition::eigendecompose(&graph)?;
    let family = build_family(&graph, &spec, config)?;
    let (kappa, _) = resolve_kappa(&graph, &family)?;
    for &delta in &config.deltas {
        for &p in &config.ps {
            let mut window = energy_fit_window(&graph, spec.gap(), delta, p, kappa);
            window.t_min *= config.t_grid.t_min_mult;
            window.t_max *= config.t_grid.t_max_mult;
            if window.is_empty() {
                continue;
            }
            let grid = window.grid(config.t_grid.count);
            let curves = energy_curves(&spec, delta, &grid, &family.members, p)?;
            for curve in &curves {
                let name = format!("curve_delta{delta:.3}_p{p:.1}_{}.csv", curve.function_id);
                fs::write(out_dir.join(name), energy_curve_csv(curve, 1.0 / p))?;
            }
        }
    }
    Ok(())
}

/// Manifest with the config hash and versions; the only place timestamps
/// appear.
pub fn manifest_json(config: &ScenarioConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let hash = hasher.finalize();
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "{{\n  \"config_sha256\": \"{hex}\",\n  \"crate_version\": \"{}\",\n  \"unix_timestamp\": {timestamp}\n}}\n",
        env!("CARGO_PKG_VERSION")
    )
}
