//! Evaluate the one-sided stable subordinator density and verify its
//! Laplace transform and moment identities.
//!
//! ```bash
//! cargo run --release --example subordinator
//! ```

use subheat::subordinator::{half_stable_density, Moment, StableDensityEvaluator};

fn main() -> subheat::Result<()> {
    let ev = StableDensityEvaluator::new(0.5)?;
    println!("closed-form cross-check at delta = 1/2:");
    for s in [0.1, 0.5, 1.0, 5.0] {
        let v = ev.density(1.0, s)?;
        let e = half_stable_density(1.0, s);
        println!("  s={s:>4}: density={v:.10e}  closed form={e:.10e}");
    }

    println!("\nLaplace identity (quadrature vs e^(-t lambda^delta)):");
    for delta in [0.3, 0.5, 0.7] {
        let ev = StableDensityEvaluator::new(delta)?;
        for lambda in [0.0, 1.0, 4.0] {
            let c = ev.laplace_check(1.0, lambda)?;
            println!(
                "  delta={delta} lambda={lambda}: quad={:.8} ref={:.8} |err|={:.2e}",
                c.quadrature, c.reference, c.abs_error
            );
        }
    }

    println!("\nfractional moments at t = 2:");
    let ev = StableDensityEvaluator::new(0.5)?;
    for alpha in [-1.0, -0.5, 0.0, 0.25, 0.5, 0.8] {
        match ev.moment(2.0, alpha)? {
            Moment::Finite {
                quadrature,
                reference,
            } => {
                println!("  alpha={alpha:>5}: {quadrature:.8} (reference {reference:.8})")
            }
            Moment::Divergent => println!("  alpha={alpha:>5}: divergent"),
        }
    }
    Ok(())
}
