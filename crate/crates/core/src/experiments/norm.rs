//! Numerical lower bounds on the `L^p` norm of the dyadic shift and the norm
//! comparison with the conjugate function.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::json;

use super::convergence::path_summaries;
use super::{par_map, Estimate, ExperimentReport, Provenance};
use crate::circle::{value_norm, FourierFunction, NormSpec};
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::haar::{self, DyadicInterval};
use crate::martingale::SummaryOptions;
use crate::rng::{stream, Purpose};
use crate::stats::lp_norm_estimate;
use crate::walk::WalkConfig;

/// Largest depth accepted by [`shift_norm_lower_bound`].
pub const MAX_OPTIMIZER_DEPTH: u32 = 14;

/// Best ratio `||S f||_p / ||f||_p` found by the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBound {
    pub value: f64,
    pub p: f64,
    pub depth: u32,
    pub restarts: usize,
    pub iterations: usize,
    /// Ratio reached by each restart, in order.
    pub per_restart: Vec<f64>,
    /// False if some restart hit the iteration cap while still improving.
    pub converged: bool,
}

/// `S` acting on the samples of a dyadic step function.
fn apply_shift(f: &[f64]) -> Vec<f64> {
    let c = haar::analyze_scalar(f).expect("power-of-two length");
    haar::synthesize(&haar::dyadic_shift(&c), c.depth()).expect("same depth")
}

fn lp_mass(u: &[f64], p: f64) -> f64 {
    u.iter().map(|v| v.abs().powf(p)).sum()
}

/// `grad log ||u||_p = |u|^{p-1} sign(u) / sum |u|^p`.
fn log_norm_gradient(u: &[f64], p: f64) -> Vec<f64> {
    let mass = lp_mass(u, p);
    u.iter()
        .map(|&v| v.signum() * v.abs().powf(p - 1.0) / mass)
        .collect()
}

fn log_ratio(f: &[f64], p: f64) -> f64 {
    (lp_mass(&apply_shift(f), p).ln() - lp_mass(f, p).ln()) / p
}

fn normalize(f: &mut [f64], p: f64) {
    let n = (lp_mass(f, p) / f.len() as f64).powf(1.0 / p);
    for v in f.iter_mut() {
        *v /= n;
    }
}

/// Gradient ascent on `log ||S f||_p - log ||f||_p` from `start`, with a
/// backtracking step and renormalization onto the unit `L^p` sphere.
fn ascend(mut f: Vec<f64>, p: f64, iterations: usize) -> (f64, bool) {
    normalize(&mut f, p);
    let mut value = log_ratio(&f, p);
    let mut eta: f64 = 0.5;
    let mut stalled = 0;
    for _ in 0..iterations {
        let sf = apply_shift(&f);
        // The shift is antisymmetric on samples, so its transpose is -S.
        let back = apply_shift(&log_norm_gradient(&sf, p));
        let own = log_norm_gradient(&f, p);
        let grad: Vec<f64> = back.iter().zip(&own).map(|(b, o)| -b - o).collect();
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !(gnorm > 0.0) {
            return (value, true);
        }
        let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut improved = false;
        let mut step = (eta * 2.0).min(1.0);
        while step > 1e-12 {
            let mut trial: Vec<f64> = f
                .iter()
                .zip(&grad)
                .map(|(v, g)| v + step * fnorm * g / gnorm)
                .collect();
            normalize(&mut trial, p);
            let t = log_ratio(&trial, p);
            if t > value {
                if t - value < 1e-12 {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                f = trial;
                value = t;
                eta = step;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || stalled >= 10 {
            return (value, true);
        }
    }
    (value, false)
}

/// Lower bound on `||S||_{p -> p}` from dyadic step functions at resolution
/// `2^-depth`.
///
/// Restart 0 starts from a single Haar function, where the ratio is exactly
/// 1; the others start from Gaussian samples. A scalar function times a
/// fixed unit vector has the same ratio in every `|.|_q`, so the bound holds
/// for all value norms and `q` only enters the report.
pub fn shift_norm_lower_bound(
    p: f64,
    q: f64,
    depth: u32,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> Result<NormBound> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Config(format!("p = {p} must be finite and > 1")));
    }
    if !(q >= 1.0) {
        return Err(Error::Config(format!("q = {q} must be >= 1")));
    }
    if !(2..=MAX_OPTIMIZER_DEPTH).contains(&depth) {
        return Err(Error::Config(format!(
            "depth {depth} outside 2..={MAX_OPTIMIZER_DEPTH}"
        )));
    }
    if restarts == 0 {
        return Err(Error::Config("at least one restart is required".into()));
    }
    let len = 1usize << depth;
    let results = par_map(restarts, |r| {
        let start: Vec<f64> = if r == 0 {
            let i = DyadicInterval::new(1, 0).expect("valid");
            (0..len)
                .map(|k| haar::haar_function(i, (k as f64 + 0.5) / len as f64))
                .collect()
        } else {
            let mut rng = stream(seed, Purpose::Optimizer, r);
            (0..len).map(|_| rng.sample(StandardNormal)).collect()
        };
        ascend(start, p, iterations)
    });
    let per_restart: Vec<f64> = results.iter().map(|(v, _)| v.exp()).collect();
    let value = per_restart.iter().copied().fold(f64::MIN, f64::max);
    Ok(NormBound {
        value,
        p,
        depth,
        restarts,
        iterations,
        per_restart,
        converged: results.iter().all(|(_, c)| *c),
    })
}

/// Trigonometric polynomial with independent standard Gaussian coefficients.
pub fn random_fourier<R: Rng + ?Sized>(rng: &mut R, degree: usize, dim: usize) -> FourierFunction {
    let mut row = || {
        (0..dim)
            .map(|_| rng.sample(StandardNormal))
            .collect::<Vec<f64>>()
    };
    let a0 = row();
    let cos = (0..degree).map(|_| row()).collect();
    let sin = (0..degree).map(|_| row()).collect();
    FourierFunction::new(a0, cos, sin).expect("consistent shapes")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerOptions {
    pub depth: u32,
    pub restarts: usize,
    pub iterations: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            depth: 10,
            restarts: 6,
            iterations: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormComparisonOptions {
    pub optimizer: OptimizerOptions,
    /// Walk used for the Monte Carlo ratio `||M^g|| / ||M^f||`.
    pub walk: Option<WalkConfig>,
    pub paths: usize,
    /// Number of leading test functions that also get the Monte Carlo ratio.
    pub monte_carlo_functions: usize,
}

impl Default for NormComparisonOptions {
    fn default() -> Self {
        Self {
            optimizer: OptimizerOptions::default(),
            walk: None,
            paths: 0,
            monte_carlo_functions: 0,
        }
    }
}

/// Compares `||H F||_p / ||F||_p` over a test set with a lower bound on
/// `||S||_{p -> p}`, optionally alongside the martingale ratio
/// `||M^g_T||_p / ||M^f_T||_p`.
pub fn norm_comparison_experiment(
    test_set: &[FourierFunction],
    ns: &NormSpec,
    options: &NormComparisonOptions,
    seed: u64,
) -> Result<ExperimentReport> {
    if test_set.is_empty() {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    let mut report = ExperimentReport::new(
        "norm_comparison",
        json!({
            "norm": ns,
            "test_set_size": test_set.len(),
            "options": options,
            "seed": seed,
        }),
    );
    let ratios: Vec<f64> = test_set
        .iter()
        .map(|f| {
            ns.check_for(f)?;
            Ok(f.conjugate().lp_norm_boundary(ns) / f.lp_norm_boundary(ns))
        })
        .collect::<Result<_>>()?;
    let max_ratio = ratios.iter().copied().fold(f64::MIN, f64::max);
    report.estimate(Estimate::exact("max ||HF||_p / ||F||_p", max_ratio));
    for (i, r) in ratios.iter().enumerate() {
        report
            .table
            .push(json!({ "function": i, "analytic_ratio": r }));
    }

    let scalar_hilbert = ns.p == 2.0 && test_set.iter().all(|f| f.dim() == 1);
    if scalar_hilbert {
        let tol = TOLERANCES.parseval;
        let ok = test_set.iter().zip(&ratios).all(|(f, r)| {
            let energy = f.parseval_energy();
            let exact = ((energy - f.a0()[0] * f.a0()[0]) / energy).sqrt();
            *r <= 1.0 + tol
                && (r - exact).abs() <= tol
                && ((f.a0()[0] == 0.0) == ((r - 1.0).abs() <= tol))
        });
        report.target("||H||_2", 1.0, Provenance::Derived);
        report.check(
            "Parseval: ||HF||_2 <= ||F||_2, equality iff a0 = 0",
            ok,
            format!(
                "max ratio {max_ratio:.12} over {} functions",
                test_set.len()
            ),
        );
    }

    let o = &options.optimizer;
    let bound = shift_norm_lower_bound(ns.p, ns.q, o.depth, o.restarts, o.iterations, seed)?;
    report.estimate(Estimate::exact("||S||_p lower bound", bound.value));
    report.estimate(Estimate::exact(
        "optimizer converged",
        f64::from(u8::from(bound.converged)),
    ));
    if ns.p == 2.0 {
        let floor = TOLERANCES.shift_p2_floor;
        report.check(
            "||S||_2 lower bound",
            bound.value >= floor,
            format!("{:.6} >= {floor}", bound.value),
        );
    }
    let slack = TOLERANCES.norm_slack;
    report.check(
        "norm ordering",
        max_ratio <= bound.value + slack,
        format!(
            "max ||HF||_p/||F||_p = {max_ratio:.5} <= ||S|| bound {:.5} + {slack}",
            bound.value
        ),
    );

    if let Some(cfg) = &options.walk {
        let count = options.monte_carlo_functions.min(test_set.len());
        let tol = TOLERANCES.martingale_ratio;
        for (i, f) in test_set.iter().take(count).enumerate() {
            let summaries = path_summaries(f, cfg, options.paths, seed, SummaryOptions::default())?;
            let mf: Vec<f64> = summaries.iter().map(|s| value_norm(&s.mf, ns.q)).collect();
            let mg: Vec<f64> = summaries.iter().map(|s| value_norm(&s.mg, ns.q)).collect();
            let (nf, sf) = lp_norm_estimate(&mf, ns.p);
            let (ng, sg) = lp_norm_estimate(&mg, ns.p);
            let ratio = ng / nf;
            let se = ratio * ((sf / nf).powi(2) + (sg / ng).powi(2)).sqrt();
            report.estimate(Estimate::monte_carlo(
                format!("||M^g||/||M^f|| [{i}]"),
                ratio,
                se,
            ));
            report.check(
                format!("martingale ratio [{i}]"),
                (ratio - ratios[i]).abs() <= tol,
                format!("{ratio:.4} vs analytic {:.4} (tolerance {tol})", ratios[i]),
            );
        }
    }
    Ok(report)
}
