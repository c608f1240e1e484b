//! Monte Carlo convergence of the stopped walk and its martingale transforms
//! to the Brownian picture.

use serde::Serialize;
use serde_json::json;

use super::{
    non_increasing_within, strictly_decreasing_beyond, try_par_map, Estimate, ExperimentReport,
    Provenance,
};
use crate::circle::{value_norm, FourierFunction, NormSpec};
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::martingale::{
    boundary_lp_reference, simulate_path_summary, PathSummary, SummaryOptions,
};
use crate::stats::{lp_norm_estimate, MeanEstimate};
use crate::walk::{survival_probability, WalkConfig};

/// An `N`-sweep at a fixed horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub n_values: Vec<u32>,
    pub horizon: f64,
    pub paths: usize,
}

impl Sweep {
    fn configs(&self) -> Result<Vec<WalkConfig>> {
        self.n_values
            .iter()
            .map(|&n| WalkConfig::new(n, self.horizon))
            .collect()
    }
}

/// Terminal summaries of `n_paths` Monte Carlo paths, in path order.
pub fn path_summaries(
    f: &FourierFunction,
    cfg: &WalkConfig,
    n_paths: usize,
    seed: u64,
    options: SummaryOptions,
) -> Result<Vec<PathSummary>> {
    if n_paths == 0 {
        return Err(Error::Config("at least one path is required".into()));
    }
    try_par_map(n_paths, |i| simulate_path_summary(f, cfg, seed, i, options))
}

fn component_label(base: &str, j: usize, dim: usize) -> String {
    if dim == 1 {
        base.to_string()
    } else {
        format!("{base}[{j}]")
    }
}

fn mean_of(values: &[f64]) -> Estimate {
    let m = MeanEstimate::from_samples(values);
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        Estimate::exact("", first)
    } else {
        Estimate::monte_carlo("", m.mean, m.std_error)
    }
}

fn named(mut e: Estimate, name: String) -> Estimate {
    e.name = name;
    e
}

/// Options of [`weak_convergence_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct WeakOptions {
    pub sweep: Option<Sweep>,
    /// Horizons of the survival sweep `P(tau_eps > T)`, at walk parameter
    /// `survival_n`.
    pub survival_horizons: Vec<f64>,
    pub survival_n: u32,
    pub survival_paths: usize,
}

/// `E psi(X_T^{tau_eps})` against `E psi(W_T^tau) = psi(0, 0)`.
pub fn weak_convergence_experiment(
    psi: &FourierFunction,
    cfg: &WalkConfig,
    n_paths: usize,
    seed: u64,
    options: &WeakOptions,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "weak_convergence",
        json!({
            "function": psi,
            "N": cfg.n(),
            "T": cfg.horizon(),
            "paths": n_paths,
            "seed": seed,
            "options": options,
        }),
    );
    let dim = psi.dim();
    let gap_of = |cfg: &WalkConfig, paths: usize| -> Result<Vec<Estimate>> {
        let summaries = path_summaries(psi, cfg, paths, seed, SummaryOptions::default())?;
        Ok((0..dim)
            .map(|j| {
                let values: Vec<f64> = summaries.iter().map(|s| s.f_terminal[j]).collect();
                mean_of(&values)
            })
            .collect())
    };
    let main = gap_of(cfg, n_paths)?;
    let mut worst_gap = 0.0f64;
    for (j, e) in main.into_iter().enumerate() {
        let target = psi.a0()[j];
        worst_gap = worst_gap.max((e.value - target).abs());
        report.target(
            component_label("psi(0,0)", j, dim),
            target,
            Provenance::Paper,
        );
        report.estimate(named(e, component_label("E psi(X_T)", j, dim)));
    }
    let tol = TOLERANCES.weak_mean;
    report.check(
        "weak gap",
        worst_gap <= tol,
        format!("|E psi(X_T) - psi(0,0)| = {worst_gap:.5} <= {tol}"),
    );

    if let Some(sweep) = &options.sweep {
        let mut gaps = Vec::new();
        for c in sweep.configs()? {
            let est = gap_of(&c, sweep.paths)?;
            let e = &est[0];
            let gap = (e.value - psi.a0()[0]).abs();
            gaps.push((gap, e.se()));
            report.table.push(json!({
                "sweep": "N",
                "N": c.n(),
                "T": c.horizon(),
                "paths": sweep.paths,
                "estimate": e.value,
                "std_error": e.se(),
                "gap": gap,
            }));
        }
        let k = TOLERANCES.trend_sigmas;
        report.check(
            "weak gap non-increasing in N",
            non_increasing_within(&gaps, k),
            format!(
                "gaps {:?} over N = {:?}, slack {k} sigma",
                rounded(&gaps),
                sweep.n_values
            ),
        );
    }

    if !options.survival_horizons.is_empty() {
        let mut points = Vec::new();
        for &t in &options.survival_horizons {
            let c = WalkConfig::new(options.survival_n, t)?;
            let s = survival_probability(&c, options.survival_paths, seed)?;
            points.push((s.probability, s.std_error));
            report.table.push(json!({
                "sweep": "survival",
                "N": c.n(),
                "T": t,
                "paths": s.paths,
                "probability": s.probability,
                "std_error": s.std_error,
                "interval": [s.interval.0, s.interval.1],
            }));
        }
        let k = TOLERANCES.trend_sigmas;
        report.check(
            "survival non-increasing in T",
            non_increasing_within(&points, k),
            format!(
                "P(tau > T) = {:?} over T = {:?}",
                rounded(&points),
                options.survival_horizons
            ),
        );
    }
    Ok(report)
}

fn rounded(v: &[(f64, f64)]) -> Vec<f64> {
    v.iter().map(|(x, _)| (x * 1e5).round() / 1e5).collect()
}

/// Options of [`transform_convergence_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct TransformOptions {
    pub sweep: Option<Sweep>,
}

fn remainder_norm(
    f: &FourierFunction,
    cfg: &WalkConfig,
    ns: &NormSpec,
    n_paths: usize,
    seed: u64,
) -> Result<(Estimate, f64)> {
    let options = SummaryOptions {
        shift: false,
        remainder: true,
    };
    let summaries = path_summaries(f, cfg, n_paths, seed, options)?;
    let mut consistency = 0.0f64;
    let abs: Vec<f64> = summaries
        .iter()
        .map(|s| {
            let r = s.remainder.as_ref().expect("remainder requested");
            for j in 0..r.len() {
                consistency = consistency.max((s.f_terminal[j] - s.mf[j] - r[j]).abs());
            }
            value_norm(r, ns.q)
        })
        .collect();
    let (norm, se) = lp_norm_estimate(&abs, ns.p);
    let e = if se == 0.0 && abs.iter().all(|&v| v == abs[0]) {
        Estimate::exact("", norm)
    } else {
        Estimate::monte_carlo("", norm, se)
    };
    Ok((e, consistency))
}

/// `||f(X_T^{tau_eps}) - M_T^f||_p`, the discrete Ito remainder.
///
/// Per path the difference is accumulated step by step as the Taylor
/// remainder `f(B_l) - f(B_{l-1}) - grad f(B_{l-1}) . dB_l`, which is
/// identically zero for linear `f`.
pub fn transform_convergence_experiment(
    f: &FourierFunction,
    cfg: &WalkConfig,
    ns: &NormSpec,
    n_paths: usize,
    seed: u64,
    options: &TransformOptions,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "transform_convergence",
        json!({
            "function": f,
            "N": cfg.n(),
            "T": cfg.horizon(),
            "norm": ns,
            "paths": n_paths,
            "seed": seed,
            "options": options,
        }),
    );
    let (main, consistency) = remainder_norm(f, cfg, ns, n_paths, seed)?;
    report.estimate(named(main.clone(), "||f(X_T) - M_T^f||_p".into()));
    report.estimate(Estimate::exact(
        "max |f(X_T) - M_T^f - remainder|",
        consistency,
    ));
    report.target("||f(X_T) - M_T^f||_p limit", 0.0, Provenance::Paper);
    if f.degree() <= 1 {
        report.check(
            "linear f has zero remainder",
            main.exact && main.value == 0.0,
            format!("estimate {} (exact: {})", main.value, main.exact),
        );
    }
    if let Some(sweep) = &options.sweep {
        let mut points = Vec::new();
        for c in sweep.configs()? {
            let (e, _) = remainder_norm(f, &c, ns, sweep.paths, seed)?;
            points.push((e.value, e.se()));
            report.table.push(json!({
                "sweep": "N",
                "N": c.n(),
                "T": c.horizon(),
                "paths": sweep.paths,
                "estimate": e.value,
                "std_error": e.se(),
            }));
        }
        let k = TOLERANCES.trend_sigmas;
        let decreasing = if f.degree() <= 1 {
            points.iter().all(|p| p.0 == 0.0)
        } else {
            strictly_decreasing_beyond(&points, k)
        };
        report.check(
            "remainder decreasing in N",
            decreasing,
            format!(
                "estimates {:?} over N = {:?}, each drop beyond {k} sigma",
                points.iter().map(|p| p.0).collect::<Vec<_>>(),
                sweep.n_values
            ),
        );
    }
    Ok(report)
}

/// Options of [`lp_convergence_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpOptions {
    /// Exponents evaluated on the same paths.
    pub ps: Vec<f64>,
    pub q: f64,
    pub quadrature: usize,
    /// The primary cell.
    pub n: u32,
    pub horizon: f64,
    pub paths: usize,
    /// Independent seeds averaged at the primary cell.
    pub seeds: Vec<u64>,
    /// Sweep table over `n_sweep x t_sweep`; cells with `N < 2T` are skipped.
    pub n_sweep: Vec<u32>,
    pub t_sweep: Vec<f64>,
    pub sweep_paths: usize,
}

impl LpOptions {
    pub fn single(p: f64, n: u32, horizon: f64, paths: usize, seed: u64) -> Self {
        Self {
            ps: vec![p],
            q: 2.0,
            quadrature: crate::circle::DEFAULT_QUADRATURE,
            n,
            horizon,
            paths,
            seeds: vec![seed],
            n_sweep: Vec::new(),
            t_sweep: Vec::new(),
            sweep_paths: 0,
        }
    }
}

/// `||M^f_T||_p` and `||M^g_T||_p` for each exponent, with errors.
fn martingale_norms(
    f: &FourierFunction,
    cfg: &WalkConfig,
    ps: &[f64],
    q: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<((f64, f64), (f64, f64))>> {
    let summaries = path_summaries(f, cfg, paths, seed, SummaryOptions::default())?;
    let mf: Vec<f64> = summaries.iter().map(|s| value_norm(&s.mf, q)).collect();
    let mg: Vec<f64> = summaries.iter().map(|s| value_norm(&s.mg, q)).collect();
    Ok(ps
        .iter()
        .map(|&p| (lp_norm_estimate(&mf, p), lp_norm_estimate(&mg, p)))
        .collect())
}

/// `||M_T^f||_p` against the boundary norm `||f(W^tau_infinity)||_p`.
pub fn lp_convergence_experiment(
    f: &FourierFunction,
    options: &LpOptions,
) -> Result<ExperimentReport> {
    if options.ps.is_empty() || options.seeds.is_empty() {
        return Err(Error::Config(
            "need at least one exponent and one seed".into(),
        ));
    }
    let specs: Vec<NormSpec> = options
        .ps
        .iter()
        .map(|&p| {
            let ns = NormSpec::new(p, options.q, options.quadrature)?;
            ns.check_for(f)?;
            Ok(ns)
        })
        .collect::<Result<_>>()?;
    let cfg = WalkConfig::new(options.n, options.horizon)?;
    let mut report = ExperimentReport::new(
        "lp_convergence",
        json!({ "function": f, "options": options }),
    );
    let g = f.conjugate();
    let targets: Vec<(f64, f64)> = specs
        .iter()
        .map(|ns| (boundary_lp_reference(f, ns), boundary_lp_reference(&g, ns)))
        .collect();
    for (ns, (tf, tg)) in specs.iter().zip(&targets) {
        report.target(format!("||f(W)||_{}", ns.p), *tf, Provenance::Derived);
        report.target(format!("||Hf(W)||_{}", ns.p), *tg, Provenance::Derived);
    }

    let per_seed: Vec<Vec<((f64, f64), (f64, f64))>> = options
        .seeds
        .iter()
        .map(|&seed| martingale_norms(f, &cfg, &options.ps, options.q, options.paths, seed))
        .collect::<Result<_>>()?;
    let seeds = options.seeds.len() as f64;
    for (i, ns) in specs.iter().enumerate() {
        let avg = |pick: fn(&((f64, f64), (f64, f64))) -> (f64, f64)| {
            let vals: Vec<(f64, f64)> = per_seed.iter().map(|r| pick(&r[i])).collect();
            let mean = vals.iter().map(|v| v.0).sum::<f64>() / seeds;
            let se = vals.iter().map(|v| v.1 * v.1).sum::<f64>().sqrt() / seeds;
            (mean, se)
        };
        let (mf, mf_se) = avg(|r| r.0);
        let (mg, mg_se) = avg(|r| r.1);
        let p = ns.p;
        let push = |report: &mut ExperimentReport, name: String, v: f64, se: f64| {
            if se == 0.0 {
                report.estimate(Estimate::exact(name, v));
            } else {
                report.estimate(Estimate::monte_carlo(name, v, se));
            }
        };
        push(&mut report, format!("||M^f_T||_{p}"), mf, mf_se);
        push(&mut report, format!("||M^g_T||_{p}"), mg, mg_se);
        for (k, r) in per_seed.iter().enumerate() {
            report.table.push(json!({
                "sweep": "seed",
                "seed": options.seeds[k],
                "p": p,
                "N": cfg.n(),
                "T": cfg.horizon(),
                "Mf": r[i].0 .0,
                "Mf_se": r[i].0 .1,
                "Mg": r[i].1 .0,
                "Mg_se": r[i].1 .1,
            }));
        }
        let tol = TOLERANCES.lp(p);
        let gap = (mf - targets[i].0).abs();
        report.check(
            format!("L^{p} norm at N={}, T={}", cfg.n(), cfg.horizon()),
            gap <= tol,
            format!(
                "||M^f_T||_{p} = {mf:.5} +- {mf_se:.5}, target {:.5}, gap {gap:.5} <= {tol}",
                targets[i].0
            ),
        );
    }

    if !options.n_sweep.is_empty() && !options.t_sweep.is_empty() {
        let mut cells = Vec::new();
        for &t in &options.t_sweep {
            for &n in &options.n_sweep {
                let Ok(c) = WalkConfig::new(n, t) else {
                    report
                        .table
                        .push(json!({"sweep": "NT", "N": n, "T": t, "skipped": "N < 2T"}));
                    continue;
                };
                let r = martingale_norms(
                    f,
                    &c,
                    &options.ps,
                    options.q,
                    options.sweep_paths,
                    options.seeds[0],
                )?;
                for (i, ns) in specs.iter().enumerate() {
                    let ((mf, se), (mg, mg_se)) = r[i];
                    report.table.push(json!({
                        "sweep": "NT",
                        "N": n,
                        "T": t,
                        "p": ns.p,
                        "paths": options.sweep_paths,
                        "Mf": mf,
                        "Mf_se": se,
                        "Mg": mg,
                        "Mg_se": mg_se,
                        "gap": (mf - targets[i].0).abs(),
                    }));
                }
                cells.push((n, t, r));
            }
        }
        // Trend at the largest horizon admitted by every N of the sweep.
        let common_t = options
            .t_sweep
            .iter()
            .copied()
            .filter(|&t| {
                options
                    .n_sweep
                    .iter()
                    .all(|&n| WalkConfig::new(n, t).is_ok())
            })
            .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))));
        if let Some(t) = common_t {
            for (i, ns) in specs.iter().enumerate() {
                let gaps: Vec<(f64, f64)> = cells
                    .iter()
                    .filter(|c| c.1 == t)
                    .map(|c| ((c.2[i].0 .0 - targets[i].0).abs(), c.2[i].0 .1))
                    .collect();
                let k = TOLERANCES.trend_sigmas;
                report.check(
                    format!("L^{} gap non-increasing in N at T={t}", ns.p),
                    non_increasing_within(&gaps, k),
                    format!("gaps {:?} over N = {:?}", rounded(&gaps), options.n_sweep),
                );
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_psi_is_exact() {
        let cfg = WalkConfig::new(4, 2.0).unwrap();
        let one = FourierFunction::constant(vec![1.0]).unwrap();
        let r = weak_convergence_experiment(&one, &cfg, 100, 1, &WeakOptions::default()).unwrap();
        let e = r.find_estimate("E psi(X_T)").unwrap();
        assert!(e.exact);
        assert_eq!(e.value, 1.0);
        assert!(r.passed());
    }

    #[test]
    fn linear_remainder_is_zero() {
        let cfg = WalkConfig::new(4, 2.0).unwrap();
        let ns = NormSpec::with_p(2.0).unwrap();
        let r = transform_convergence_experiment(
            &FourierFunction::cos_mode(1),
            &cfg,
            &ns,
            200,
            3,
            &TransformOptions::default(),
        )
        .unwrap();
        let e = r.find_estimate("||f(X_T) - M_T^f||_p").unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.exact);
        assert!(r.passed());
        let c = FourierFunction::constant(vec![2.0]).unwrap();
        let r =
            transform_convergence_experiment(&c, &cfg, &ns, 50, 3, &TransformOptions::default())
                .unwrap();
        assert_eq!(r.find_estimate("||f(X_T) - M_T^f||_p").unwrap().value, 0.0);
    }

    #[test]
    fn re_z2_remainder_is_twice_delta_times_axis_imbalance() {
        // Re z^2 has remainder Re h^2 = +-2 delta per step.
        let cfg = WalkConfig::new(4, 2.0).unwrap();
        let f = FourierFunction::cos_mode(2);
        let options = SummaryOptions {
            shift: false,
            remainder: true,
        };
        for s in path_summaries(&f, &cfg, 20, 5, options).unwrap() {
            let r = s.remainder.unwrap()[0];
            let units = r / (2.0 * cfg.fine_step());
            assert!((units - units.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_lp_norm_is_exact() {
        let c = FourierFunction::constant(vec![-0.75]).unwrap();
        let r = lp_convergence_experiment(&c, &LpOptions::single(3.0, 4, 2.0, 64, 1)).unwrap();
        let e = r.find_estimate("||M^f_T||_3").unwrap();
        assert!(e.exact);
        assert_eq!(e.value, 0.75);
    }

    #[test]
    fn lp_sweep_skips_invalid_cells() {
        let mut o = LpOptions::single(2.0, 4, 2.0, 32, 1);
        o.n_sweep = vec![2, 4];
        o.t_sweep = vec![1.0, 2.0];
        o.sweep_paths = 16;
        let r = lp_convergence_experiment(&FourierFunction::cos_mode(1), &o).unwrap();
        let skipped = r
            .table
            .iter()
            .filter(|row| row.get("skipped").is_some())
            .count();
        assert_eq!(skipped, 1);
        assert!(r.find_check("L^2 gap non-increasing in N at T=1").is_some());
    }
}
