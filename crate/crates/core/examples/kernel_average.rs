//! Averages the dyadic and classical shift kernels over random grids.
//!
//! `cargo run --release --example kernel_average -- [alpha_density] [r_samples]`

use haarflow::experiments::{kernel_average_experiment, KernelOptions};

fn main() -> haarflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut options = KernelOptions::default();
    if let Some(d) = args.next() {
        options.alpha_density = d.parse().expect("alpha density");
    }
    if let Some(r) = args.next() {
        options.r_samples = r.parse().expect("r samples");
    }
    let report = kernel_average_experiment(&options)?;
    for row in &report.table {
        println!(
            "R = {:>5}  dyadic {:+.3e} (se {:.1e})  classical {:+.4} (se {:.1e})",
            row["R"],
            row["dyadic"].as_f64().unwrap_or(f64::NAN),
            row["dyadic_se"].as_f64().unwrap_or(f64::NAN),
            row["classical"].as_f64().unwrap_or(f64::NAN),
            row["classical_se"].as_f64().unwrap_or(f64::NAN),
        );
    }
    for line in report.verdict_lines() {
        println!("{line}");
    }
    Ok(())
}
