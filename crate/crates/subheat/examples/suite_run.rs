//! Drive a full config-based suite run and print the report summary.
//!
//! ```bash
//! cargo run --release --example suite_run
//! ```

use subheat::config::{FamilySpec, ScenarioConfig, Suite, TGridSpec};
use subheat::runner::execute;
use subheat::space::SpaceKind;

fn main() -> subheat::Result<()> {
    let config = ScenarioConfig {
        space: SpaceKind::Circle { n: 256 },
        deltas: vec![0.25],
        ps: vec![1.0],
        t_grid: TGridSpec::default(),
        family: FamilySpec::Canonical,
        suites: vec![
            Suite::CriticalExponent,
            Suite::KernelBounds,
            Suite::Coarea,
            Suite::PseudoPoincare,
            Suite::Sobolev,
            Suite::Isoperimetric,
        ],
        out_dir: "target/suite_example".into(),
        seed: 42,
    };
    println!("config:\n{}\n", config.to_json());
    let outcome = execute(&config)?;
    println!("{}", outcome.summary_csv);
    println!("exit code: {}", outcome.exit_code);
    Ok(())
}
