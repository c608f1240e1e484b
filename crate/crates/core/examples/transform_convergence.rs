//! The remainder ||f(X_T) - M^f_T||_2 for a quadratic and a linear f.

use haarflow::circle::NormSpec;
use haarflow::experiments::{transform_convergence_experiment, Sweep, TransformOptions};
use haarflow::presets::preset;
use haarflow::walk::WalkConfig;

fn main() -> haarflow::Result<()> {
    let ns = NormSpec::with_p(2.0)?;
    let cfg = WalkConfig::new(8, 4.0)?;
    let options = TransformOptions {
        sweep: Some(Sweep {
            n_values: vec![4, 8],
            horizon: 2.0,
            paths: 2_000,
        }),
    };
    for name in ["re_z2", "cos"] {
        let report =
            transform_convergence_experiment(&preset(name)?, &cfg, &ns, 2_000, 5, &options)?;
        println!("{name}:");
        for e in &report.estimates {
            println!("  {:<36} {:.6} (exact: {})", e.name, e.value, e.exact);
        }
        for line in report.verdict_lines() {
            println!("  {line}");
        }
    }
    Ok(())
}
