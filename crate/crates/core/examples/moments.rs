//! Exact conditional moments of one coarse increment, by enumeration.

use haarflow::experiments::moments_table;
use haarflow::walk::{conditional_moments_exact, MomentReport, Sign};

fn main() -> haarflow::Result<()> {
    let delta = 1.0;
    for n in [2, 4, 8, 12] {
        for sign in [Sign::Minus, Sign::Plus] {
            let r = conditional_moments_exact(n, delta, sign)?;
            let want = MomentReport::predicted_second(n, delta, sign);
            println!(
                "N = {n:>2}, prev {sign:?}: E dX = {:?}, E dX dX^T = {:?} (closed form {:?})",
                r.mean, r.second, want
            );
        }
    }
    let report = moments_table(8, 1e-3)?;
    for line in report.verdict_lines() {
        println!("{line}");
    }
    Ok(())
}
