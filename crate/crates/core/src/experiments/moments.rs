//! Exact discrete conditional moments and their Brownian counterparts.

use serde_json::json;

use super::{par_map, Estimate, ExperimentReport, Provenance};
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::martingale::simulate_stopped_bm;
use crate::rng::{stream, Purpose};
use crate::stats::MeanEstimate;
use crate::walk::{conditional_moments_exact, MomentReport, Sign, WalkConfig};

fn sign_label(s: Sign) -> &'static str {
    match s {
        Sign::Minus => "-",
        Sign::Plus => "+",
    }
}

/// Enumerated moments of `dX_{n+1}` for both values of `eps_{nN}`, checked
/// against the closed forms.
pub fn moments_table(n: u32, delta: f64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("moments", json!({ "N": n, "delta": delta }));
    let tol = TOLERANCES.moment_exact;
    for sign in [Sign::Minus, Sign::Plus] {
        let r = conditional_moments_exact(n, delta, sign)?;
        let predicted = MomentReport::predicted_second(n, delta, sign);
        let s = sign_label(sign);
        let names = [
            ("E dX1", r.mean[0], 0.0),
            ("E dX2", r.mean[1], 0.0),
            ("E dX1^2", r.second[0][0], predicted[0][0]),
            ("E dX2^2", r.second[1][1], predicted[1][1]),
            ("E dX1 dX2", r.second[0][1], 0.0),
        ];
        let mut worst = 0.0f64;
        for (name, value, target) in names {
            report.estimate(Estimate::exact(format!("{name} | eps={s}"), value));
            report.target(format!("{name} | eps={s}"), target, Provenance::Paper);
            worst = worst.max((value - target).abs() / delta);
        }
        for h in &r.higher {
            for i in 0..2 {
                report.estimate(Estimate::exact(
                    format!(
                        "E|dX{}|^{} / theta^{} | eps={s}",
                        i + 1,
                        h.p,
                        h.p as f64 / 2.0
                    ),
                    h.constant[i],
                ));
            }
        }
        report.check(
            format!("moments match closed form | eps={s}"),
            worst <= tol,
            format!("max deviation {worst:.3e} delta (tolerance {tol:e} delta)"),
        );
        report.table.push(serde_json::to_value(&r)?);
    }
    Ok(report)
}

/// Weak consistency: discrete conditional moments next to Monte Carlo
/// moments of Brownian motion started at `x0` over one coarse step `theta`.
pub fn moment_consistency_experiment(
    cfg: &WalkConfig,
    x0: [f64; 2],
    n_paths: usize,
    substeps: u32,
    seed: u64,
) -> Result<ExperimentReport> {
    if x0[0].hypot(x0[1]) > cfg.stop_radius() {
        return Err(Error::InvalidInput(format!(
            "x0 = {x0:?} lies in the stopping band"
        )));
    }
    if n_paths < 2 {
        return Err(Error::InvalidInput(
            "need at least two Brownian samples".into(),
        ));
    }
    let theta = cfg.coarse_step();
    let delta = cfg.fine_step();
    let mut report = ExperimentReport::new(
        "moment_consistency",
        json!({
            "N": cfg.n(),
            "T": cfg.horizon(),
            "x0": x0,
            "paths": n_paths,
            "substeps": substeps,
            "seed": seed,
        }),
    );
    let samples: Vec<[f64; 2]> = par_map(n_paths, |i| {
        let mut rng = stream(seed, Purpose::Brownian, i);
        let s = simulate_stopped_bm(x0, theta, substeps, &mut rng).expect("validated input");
        [s.endpoint[0] - x0[0], s.endpoint[1] - x0[1]]
    });
    let stat = |f: &dyn Fn(&[f64; 2]) -> f64| {
        MeanEstimate::from_samples(&samples.iter().map(f).collect::<Vec<f64>>())
    };
    let w1 = stat(&|d| d[0]);
    let w2 = stat(&|d| d[1]);
    let w11 = stat(&|d| d[0] * d[0]);
    let w22 = stat(&|d| d[1] * d[1]);
    let w12 = stat(&|d| d[0] * d[1]);
    for (name, m) in [
        ("E dW1", w1),
        ("E dW2", w2),
        ("E dW1^2", w11),
        ("E dW2^2", w22),
        ("E dW1 dW2", w12),
    ] {
        report.estimate(Estimate::monte_carlo(name, m.mean, m.std_error));
    }
    report.target("E dW^2 / theta", 1.0, Provenance::Paper);
    let k = TOLERANCES.mc_sigmas;
    report.check(
        "continuous first moments vanish",
        w1.mean.abs() <= k * w1.std_error && w2.mean.abs() <= k * w2.std_error,
        format!("({:.3e}, {:.3e}) within {k} sigma", w1.mean, w2.mean),
    );
    report.check(
        "continuous cross moment vanishes",
        w12.mean.abs() <= k * w12.std_error,
        format!("{:.3e} within {k} sigma", w12.mean),
    );
    let bound = 2.0 / cfg.n() as f64;
    for sign in [Sign::Minus, Sign::Plus] {
        let r = conditional_moments_exact(cfg.n(), delta, sign)?;
        let s = sign_label(sign);
        report.estimate(Estimate::exact(
            format!("E dX1^2 | eps={s}"),
            r.second[0][0],
        ));
        report.estimate(Estimate::exact(
            format!("E dX2^2 | eps={s}"),
            r.second[1][1],
        ));
        report.check(
            format!("discrete first and cross moments vanish | eps={s}"),
            r.mean == [0.0, 0.0] && r.second[0][1] == 0.0,
            format!("mean {:?}, cross {}", r.mean, r.second[0][1]),
        );
        let gaps = [
            (
                (r.second[0][0] - w11.mean).abs() / theta,
                w11.std_error / theta,
            ),
            (
                (r.second[1][1] - w22.mean).abs() / theta,
                w22.std_error / theta,
            ),
        ];
        report.check(
            format!("second moments agree | eps={s}"),
            gaps.iter().all(|(g, se)| *g <= bound + k * se),
            format!(
                "|disc - cont| / theta = ({:.4}, {:.4}) <= 2/N + {k} se",
                gaps[0].0, gaps[1].0
            ),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_passes_for_small_n() {
        for n in [1, 2, 3, 5] {
            let r = moments_table(n, 1e-3).unwrap();
            assert!(r.passed(), "{:?}", r.verdict_lines());
        }
        let r = moments_table(2, 0.01).unwrap();
        assert!((r.find_estimate("E dX1^2 | eps=-").unwrap().value - 0.03).abs() < 1e-15);
    }

    #[test]
    fn consistency_at_an_interior_point() {
        let cfg = WalkConfig::new(8, 4.0).unwrap();
        let r = moment_consistency_experiment(&cfg, [0.3, -0.2], 4000, 20, 1).unwrap();
        assert!(r.passed(), "{:?}", r.verdict_lines());
        assert!(moment_consistency_experiment(&cfg, [0.95, 0.0], 10, 2, 1).is_err());
    }
}
