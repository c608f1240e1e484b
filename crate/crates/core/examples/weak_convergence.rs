//! E psi(X_T) against psi(0) for psi = Re z^2, with an N sweep and the
//! survival probability of the walk.

use haarflow::experiments::{weak_convergence_experiment, Sweep, WeakOptions};
use haarflow::presets::preset;
use haarflow::walk::WalkConfig;

fn main() -> haarflow::Result<()> {
    let cfg = WalkConfig::new(8, 4.0)?;
    let options = WeakOptions {
        sweep: Some(Sweep {
            n_values: vec![4, 8],
            horizon: 2.0,
            paths: 5_000,
        }),
        survival_horizons: vec![1.0, 2.0, 4.0],
        survival_n: 8,
        survival_paths: 2_000,
    };
    let report = weak_convergence_experiment(&preset("re_z2")?, &cfg, 20_000, 11, &options)?;
    for e in &report.estimates {
        println!("{:<40} {:+.5} (se {:.1e})", e.name, e.value, e.se());
    }
    for line in report.verdict_lines() {
        println!("{line}");
    }
    Ok(())
}
