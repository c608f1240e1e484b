//! ||M^f_T||_p and ||M^g_T||_p against the boundary norms of f and g.
//!
//! `cargo run --release --example lp_convergence -- [paths]`

use haarflow::experiments::{lp_convergence_experiment, LpOptions};
use haarflow::presets::preset;

fn main() -> haarflow::Result<()> {
    let paths = std::env::args()
        .nth(1)
        .map_or(20_000, |s| s.parse().expect("paths"));
    let mut options = LpOptions::single(2.0, 8, 4.0, paths, 7);
    options.ps.push(4.0);
    options.seeds.push(8);
    let report = lp_convergence_experiment(&preset("cos")?, &options)?;
    for e in &report.estimates {
        println!("{:<28} {:.5} (se {:.1e})", e.name, e.value, e.se());
    }
    for t in &report.targets {
        println!("target {:<21} {:.5}", t.name, t.value);
    }
    for line in report.verdict_lines() {
        println!("{line}");
    }
    Ok(())
}
