//! Thin command-line front end over the library: build spaces, dump
//! kernels, evaluate subordinator densities and seminorms, estimate
//! exponents, and drive config-based suite runs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subheat::analysis::critical_exponent;
use subheat::config::ScenarioConfig;
use subheat::error::Error;
use subheat::family::canonical_family;
use subheat::report::{energy_curve_csv, fmt_f64};
use subheat::seminorms::{
    besov_norm, energy_curves, grigoryan_norm, ks_norm, w_norm, GrigoryanQ, KsMode,
};
use subheat::space::{
    ahlfors_fit, build_circle, build_gasket, build_interval, build_vicsek, default_r_grid,
    BoundaryMode, MetricMeasureGraph,
};
use subheat::spectral::{heat_kernel, subordinated_kernel, SpectralDecomposition};
use subheat::subordinator::{Moment, StableDensityEvaluator};
use subheat::window::resolved_t_window;

#[derive(Parser)]
#[command(
    name = "subheat",
    version,
    about = "Subordinated heat semigroup diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Circle,
    Interval,
    Gasket,
    Vicsek,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Absorbing,
    Reflecting,
}

#[derive(Args)]
struct SpaceSelect {
    /// Which builder to use.
    #[arg(long, value_enum)]
    space: SpaceArg,
    /// Resolution for circle/interval (number of subintervals).
    #[arg(long)]
    n: Option<usize>,
    /// Refinement level for gasket/vicsek.
    #[arg(long)]
    level: Option<usize>,
    /// Endpoint handling for the interval.
    #[arg(long, value_enum, default_value = "reflecting")]
    boundary: BoundaryArg,
}

impl SpaceSelect {
    fn build(&self) -> Result<MetricMeasureGraph, Error> {
        match self.space {
            SpaceArg::Circle => build_circle(self.n.ok_or_else(|| miss("--n"))?),
            SpaceArg::Interval => {
                let mode = match self.boundary {
                    BoundaryArg::Absorbing => BoundaryMode::Absorbing,
                    BoundaryArg::Reflecting => BoundaryMode::Reflecting,
                };
                build_interval(self.n.ok_or_else(|| miss("--n"))?, mode)
            }
            SpaceArg::Gasket => build_gasket(self.level.ok_or_else(|| miss("--level"))?),
            SpaceArg::Vicsek => build_vicsek(self.level.ok_or_else(|| miss("--level"))?),
        }
    }
}

fn miss(flag: &str) -> Error {
    Error::Config(format!("missing required flag {flag}"))
}

#[derive(Subcommand)]
enum Command {
    /// Build a space and print its JSON descriptor with an Ahlfors fit.
    Space {
        #[command(flatten)]
        select: SpaceSelect,
        /// Write the descriptor JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump a heat kernel as CSV (row, col, value, row_integral).
    Kernel {
        #[command(flatten)]
        select: SpaceSelect,
        /// Semigroup order; 1 = base heat semigroup.
        #[arg(long)]
        delta: f64,
        /// Kernel time.
        #[arg(long)]
        t: f64,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the binary column-major dump next to the CSV.
        #[arg(long)]
        binary: Option<PathBuf>,
    },
    /// Evaluate the one-sided stable subordinator density.
    Subordinator {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        t: f64,
        /// Single abscissa: print the density value.
        #[arg(long)]
        s: Option<f64>,
        /// Log grid `lo:hi:count`: emit CSV (delta,t,s,density).
        #[arg(long)]
        s_grid: Option<String>,
        /// Emit a moments report for this list of orders.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        moments: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute seminorms of a named test function and write its energy curve.
    Seminorm {
        #[command(flatten)]
        select: SpaceSelect,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: f64,
        /// Family member: smoothed_indicator | sharp_indicator | low_mode |
        /// rough | tent | eigenmode.
        #[arg(long)]
        f: String,
        /// Directory for the CSV outputs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate a critical exponent for one (delta, p) cell.
    Exponent {
        #[command(flatten)]
        select: SpaceSelect,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the suites described by a JSON config.
    Suite {
        /// Path to the scenario config.
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Space { select, out } => {
            let graph = select.build()?;
            let fit = ahlfors_fit(&graph, &default_r_grid(&graph))?;
            let mut doc = serde_json::to_value(graph.descriptor())?;
            doc["ahlfors_fit"] = serde_json::json!({
                "d_h_hat": fit.d_h_hat,
                "c1": fit.c1,
                "c2": fit.c2,
                "r_squared": fit.r_squared,
            });
            emit(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            Ok(0)
        }
        Command::Kernel {
            select,
            delta,
            t,
            out,
            binary,
        } => {
            let graph = select.build()?;
            let spec = SpectralDecomposition::eigendecompose(&graph)?;
            let kernel = if (delta - 1.0).abs() < 1e-12 {
                heat_kernel(&spec, t)?
            } else {
                subordinated_kernel(&spec, delta, t)?
            };
            let integrals = kernel.row_integrals(&spec.mass);
            let n = kernel.dim();
            let mut csv = String::from("row,col,value,row_integral\n");
            for i in 0..n {
                for j in 0..n {
                    csv.push_str(&format!(
                        "{i},{j},{},{}\n",
                        fmt_f64(kernel.entries[(i, j)]),
                        fmt_f64(integrals[i])
                    ));
                }
            }
            emit(&out, &csv)?;
            if let Some(path) = binary {
                fs::write(path, kernel.to_binary())?;
            }
            Ok(0)
        }
        Command::Subordinator {
            delta,
            t,
            s,
            s_grid,
            moments,
            out,
        } => {
            let ev = StableDensityEvaluator::new(delta)?;
            let mut text = String::new();
            if let Some(s) = s {
                text.push_str(&format!("{:.10}\n", ev.density(t, s)?));
            }
            if let Some(spec) = s_grid {
                let parts: Vec<&str> = spec.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::Config("--s-grid expects lo:hi:count".into()));
                }
                let lo: f64 = parts[0]
                    .parse()
                    .map_err(|_| Error::Config("bad lo".into()))?;
                let hi: f64 = parts[1]
                    .parse()
                    .map_err(|_| Error::Config("bad hi".into()))?;
                let count: usize = parts[2]
                    .parse()
                    .map_err(|_| Error::Config("bad count".into()))?;
                text.push_str("delta,t,s,density\n");
                for sv in subheat::space::log_spaced(lo, hi, count) {
                    text.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt_f64(delta),
                        fmt_f64(t),
                        fmt_f64(sv),
                        fmt_f64(ev.density(t, sv)?)
                    ));
                }
            }
            if let Some(alphas) = moments {
                text.push_str("alpha,quadrature,reference,status\n");
                for a in alphas {
                    match ev.moment(t, a)? {
                        Moment::Finite {
                            quadrature,
                            reference,
                        } => text.push_str(&format!(
                            "{},{},{},finite\n",
                            fmt_f64(a),
                            fmt_f64(quadrature),
                            fmt_f64(reference)
                        )),
                        Moment::Divergent => {
                            text.push_str(&format!("{},,,divergent\n", fmt_f64(a)))
                        }
                    }
                }
            }
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Seminorm {
            select,
            delta,
            p,
            alpha,
            f,
            out,
        } => {
            let graph = select.build()?;
            let spec = SpectralDecomposition::eigendecompose(&graph)?;
            let family = canonical_family(&graph, &spec, 42)?;
            let func = family
                .get(&f)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "unknown function {f}; choose one of {:?}",
                        family.ids()
                    ))
                })?
                .clone();
            let window = resolved_t_window(&graph, spec.gap(), delta);
            let curves = energy_curves(
                &spec,
                delta,
                &window.grid(24),
                &[(f.clone(), func.clone())],
                p,
            )?;
            let besov = besov_norm(&curves[0], alpha)?;
            let r_grid = subheat::window::default_r_grid(&graph, 12);
            let lambda = alpha * delta * graph.geometry.d_w;
            let lam_w = delta * graph.geometry.d_w / p;
            let ks_lim = ks_norm(
                &graph,
                &func,
                lambda.max(1e-6),
                p,
                &r_grid,
                KsMode::LimsupSmallest,
            )?;
            let ks_sup = ks_norm(&graph, &func, lambda.max(1e-6), p, &r_grid, KsMode::Sup)?;
            let w = w_norm(&graph, &func, lam_w, p)?;
            let n_inf = grigoryan_norm(&graph, &func, lambda, p, GrigoryanQ::Infinity, &r_grid)?;
            let n_p = grigoryan_norm(&graph, &func, lam_w, p, GrigoryanQ::P, &r_grid)?;
            let mut text =
                String::from("function_id,besov,ks_limsup,ks_sup,w_norm,N_p_inf,N_p_p\n");
            text.push_str(&format!(
                "{f},{},{},{},{},{},{}\n",
                fmt_f64(besov.value),
                fmt_f64(ks_lim),
                fmt_f64(ks_sup),
                fmt_f64(w),
                fmt_f64(n_inf),
                fmt_f64(n_p)
            ));
            match &out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("seminorms.csv"), &text)?;
                    fs::write(dir.join("curve.csv"), energy_curve_csv(&curves[0], alpha))?;
                }
                None => {
                    print!("{text}");
                    print!("{}", energy_curve_csv(&curves[0], alpha));
                }
            }
            Ok(0)
        }
        Command::Exponent {
            select,
            delta,
            p,
            out,
        } => {
            let graph = select.build()?;
            let spec = SpectralDecomposition::eigendecompose(&graph)?;
            let family = canonical_family(&graph, &spec, 42)?;
            let rep = critical_exponent(&graph, &spec, delta, p, &family)?;
            emit(&out, &format!("{}\n", serde_json::to_string_pretty(&rep)?))?;
            Ok(0)
        }
        Command::Suite { config } => {
            let text = fs::read_to_string(&config)?;
            let cfg = ScenarioConfig::from_json(&text)?;
            let outcome = subheat::runner::run(&cfg)?;
            println!(
                "suite finished: {} records, exit {}",
                outcome.records.len(),
                outcome.exit_code
            );
            Ok(outcome.exit_code as u8)
        }
    }
}
