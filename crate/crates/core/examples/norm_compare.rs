//! Lower bound on the L^p norm of the dyadic shift next to the conjugate
//! function ratio over random trigonometric polynomials.

use haarflow::circle::NormSpec;
use haarflow::experiments::{
    norm_comparison_experiment, random_fourier, shift_norm_lower_bound, NormComparisonOptions,
};
use haarflow::rng::{stream, Purpose};

fn main() -> haarflow::Result<()> {
    for p in [1.5, 2.0, 3.0, 4.0] {
        let b = shift_norm_lower_bound(p, 2.0, 8, 4, 200, 1)?;
        println!(
            "p = {p}: ||S||_p >= {:.4} (restarts {:.3?})",
            b.value, b.per_restart
        );
    }
    let mut rng = stream(1, Purpose::TestSet, 0);
    let set: Vec<_> = (0..12)
        .map(|i| random_fourier(&mut rng, 1 + i % 6, 1))
        .collect();
    let report = norm_comparison_experiment(
        &set,
        &NormSpec::with_p(4.0)?,
        &NormComparisonOptions::default(),
        1,
    )?;
    for line in report.verdict_lines() {
        println!("{line}");
    }
    Ok(())
}
