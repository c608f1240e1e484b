//! The acceptance suite: one function per criterion, each returning a
//! pass/fail line. Parameters, budgets and tolerances are pinned here.

use std::time::{Duration, Instant};

use crate::circle::{FourierFunction, NormSpec};
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::experiments::{
    kernel_average_experiment, lp_convergence_experiment, moments_table,
    norm_comparison_experiment, random_fourier, shift_norm_lower_bound,
    transform_convergence_experiment, weak_convergence_experiment, ExperimentReport, KernelOptions,
    LpOptions, NormComparisonOptions, OptimizerOptions, Sweep, TransformOptions, WeakOptions,
};
use crate::martingale::{discrete_transforms, shift_transform};
use crate::presets::preset;
use crate::report::render_json;
use crate::rng::{stream, Purpose};
use crate::walk::{run_path, shift_increment_lattice, DigitStream, WalkConfig};

/// Master seed of the suite.
pub const SEED: u64 = 20_240_601;

/// `(id, title, runtime budget in seconds)`.
pub const CRITERIA: [(u8, &str, Option<u64>); 10] = [
    (1, "exact shift identity S dB = dB^T", Some(1)),
    (2, "exact conditional moments", Some(5)),
    (
        3,
        "exact martingale-transform identity S M^f = M^g",
        Some(30),
    ),
    (4, "conjugate-operator algebra", None),
    (5, "L^p convergence of M^f", Some(600)),
    (6, "weak convergence and survival", Some(300)),
    (7, "transform convergence", Some(300)),
    (8, "norm ordering", Some(300)),
    (9, "kernel averaging", Some(300)),
    (10, "determinism across worker counts", None),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl CriterionOutcome {
    /// `criterion N [PASS|FAIL] title (elapsed / budget)`.
    pub fn line(&self) -> String {
        let budget = self
            .budget
            .map(|b| format!(" / {}s", b.as_secs()))
            .unwrap_or_default();
        format!(
            "criterion {:>2} [{}] {} ({:.2}s{budget})",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64()
        )
    }
}

struct Partial {
    passed: bool,
    details: Vec<String>,
}

impl Partial {
    fn new() -> Self {
        Self {
            passed: true,
            details: Vec::new(),
        }
    }

    fn assert(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details
            .push(format!("[{}] {detail}", if ok { "PASS" } else { "FAIL" }));
    }

    fn absorb(&mut self, report: &ExperimentReport) {
        for c in &report.checks {
            self.assert(c.passed, format!("{}: {}", c.name, c.detail));
        }
    }
}

/// Runs criterion `id`.
pub fn run(id: u8) -> Result<CriterionOutcome> {
    let &(_, title, budget) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::Config(format!("no acceptance criterion {id}")))?;
    let start = Instant::now();
    let partial = match id {
        1 => shift_identity()?,
        2 => moments()?,
        3 => transform_identity()?,
        4 => conjugate_algebra()?,
        5 => lp_convergence()?,
        6 => weak_convergence()?,
        7 => transform_convergence()?,
        8 => norm_ordering()?,
        9 => kernel_averaging()?,
        10 => determinism()?,
        _ => unreachable!(),
    };
    let elapsed = start.elapsed();
    let budget = budget.map(Duration::from_secs);
    let mut details = partial.details;
    let in_budget = budget.is_none_or(|b| elapsed <= b);
    if let Some(b) = budget {
        details.push(format!(
            "[{}] runtime {:.2}s <= {}s",
            if in_budget { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            b.as_secs()
        ));
    }
    Ok(CriterionOutcome {
        id,
        title,
        passed: partial.passed && in_budget,
        details,
        elapsed,
        budget,
    })
}

/// Runs every criterion in order.
pub fn run_all() -> Result<Vec<CriterionOutcome>> {
    CRITERIA.iter().map(|c| run(c.0)).collect()
}

fn shift_identity() -> Result<Partial> {
    let mut p = Partial::new();
    for l in 1..=12usize {
        let s = shift_increment_lattice(l, l as u32 + 1)?;
        p.assert(
            s.is_rotation(),
            format!("l = {l}: S dB = dB^T on {} atoms", s.db1.len()),
        );
    }
    Ok(p)
}

fn moments() -> Result<Partial> {
    let mut p = Partial::new();
    for n in [2u32, 4, 8, 12] {
        let cfg = WalkConfig::new(n, 1.0)?;
        let report = moments_table(n, cfg.fine_step())?;
        p.absorb(&report);
        for row in &report.table {
            let sums = &row["lattice_sums"];
            let zero = sums[0] == 0 && sums[1] == 0 && sums[4] == 0;
            p.assert(
                zero,
                format!(
                    "N = {n}, prev {}: lattice mean and cross sums are exactly 0",
                    row["prev_sign"]
                ),
            );
        }
    }
    Ok(p)
}

fn transform_identity() -> Result<Partial> {
    let mut p = Partial::new();
    let cfg = WalkConfig::new(8, 4.0)?;
    let f = preset("re_z3_plus_im_z2")?;
    let paths = 10_000u64;
    let len = cfg.fine_steps() as usize + 1;
    let deviations: Vec<f64> = crate::experiments::try_par_map(paths as usize, |i| {
        let path = run_path(&cfg, &DigitStream::random(SEED, i, len));
        let pair = discrete_transforms(&f, &path)?;
        let shifted = shift_transform(&f, &path)?;
        Ok(shifted
            .iter()
            .zip(pair.mg_values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    })?;
    let worst = deviations.iter().copied().fold(0.0, f64::max);
    p.assert(
        worst == 0.0,
        format!("max |S M^f - M^g| over {paths} paths and all checkpoints = {worst:e}"),
    );
    Ok(p)
}

fn conjugate_algebra() -> Result<Partial> {
    let mut p = Partial::new();
    let mut modes = true;
    for n in 1..=16 {
        modes &= FourierFunction::cos_mode(n).conjugate() == FourierFunction::sin_mode(n);
        modes &=
            FourierFunction::sin_mode(n).conjugate() == FourierFunction::cos_mode(n).scale(-1.0);
    }
    p.assert(
        modes,
        "H cos n = sin n and H sin n = -cos n for n <= 16, exact coefficients".into(),
    );

    let mut rng = stream(SEED, Purpose::TestSet, 4);
    let tol = TOLERANCES.parseval;
    let mut square = true;
    let mut parseval = 0.0f64;
    for i in 0..50usize {
        let f = random_fourier(&mut rng, 1 + i % 12, 1 + i % 3);
        let mean_free = f.add(&FourierFunction::constant(f.a0().to_vec())?.scale(-1.0))?;
        square &= f.conjugate().conjugate() == mean_free.scale(-1.0);
        let ns = NormSpec::new(2.0, 2.0, 1024)?;
        let energy = f.parseval_energy();
        let a0 = f.a0().iter().map(|v| v * v).sum::<f64>();
        let lhs = f.lp_norm_boundary(&ns).powi(2);
        let conj = f.conjugate().lp_norm_boundary(&ns).powi(2);
        parseval = parseval
            .max((lhs - energy).abs() / energy)
            .max((conj - (energy - a0)).abs() / energy);
    }
    p.assert(
        square,
        "H^2 = -(I - mean) on 50 random functions, exact coefficients".into(),
    );
    p.assert(
        parseval <= tol,
        format!("Parseval for F and HF: max relative deviation {parseval:.2e} <= {tol:e}"),
    );
    Ok(p)
}

fn lp_convergence() -> Result<Partial> {
    let mut p = Partial::new();
    let options = LpOptions {
        ps: vec![2.0, 4.0],
        q: 2.0,
        quadrature: crate::circle::DEFAULT_QUADRATURE,
        n: 8,
        horizon: 4.0,
        paths: 200_000,
        seeds: vec![SEED, SEED + 1, SEED + 2],
        n_sweep: vec![4, 8, 16],
        t_sweep: vec![2.0],
        sweep_paths: 20_000,
    };
    let report = lp_convergence_experiment(&preset("cos")?, &options)?;
    p.absorb(&report);
    Ok(p)
}

fn weak_convergence() -> Result<Partial> {
    let mut p = Partial::new();
    let cfg = WalkConfig::new(8, 4.0)?;
    let options = WeakOptions {
        sweep: None,
        survival_horizons: vec![1.0, 2.0, 4.0, 8.0],
        survival_n: 16,
        survival_paths: 2_000,
    };
    let report = weak_convergence_experiment(&preset("re_z2")?, &cfg, 100_000, SEED, &options)?;
    p.absorb(&report);
    Ok(p)
}

fn transform_convergence() -> Result<Partial> {
    let mut p = Partial::new();
    let ns = NormSpec::with_p(2.0)?;
    let options = TransformOptions {
        sweep: Some(Sweep {
            n_values: vec![4, 8, 16],
            horizon: 2.0,
            paths: 4_000,
        }),
    };
    let cfg = WalkConfig::new(8, 4.0)?;
    let report =
        transform_convergence_experiment(&preset("re_z2")?, &cfg, &ns, 4_000, SEED, &options)?;
    p.absorb(&report);
    let linear = transform_convergence_experiment(
        &preset("cos")?,
        &cfg,
        &ns,
        10_000,
        SEED,
        &TransformOptions::default(),
    )?;
    p.absorb(&linear);
    Ok(p)
}

fn norm_ordering() -> Result<Partial> {
    let mut p = Partial::new();
    let mut rng = stream(SEED, Purpose::TestSet, 8);
    let hundred: Vec<FourierFunction> = (0..100)
        .map(|i| random_fourier(&mut rng, 1 + i % 8, 1))
        .collect();
    let twenty: Vec<FourierFunction> = (0..20)
        .map(|i| random_fourier(&mut rng, 1 + i % 8, 1))
        .collect();
    let options = NormComparisonOptions {
        optimizer: OptimizerOptions {
            depth: 10,
            restarts: 6,
            iterations: 400,
        },
        ..NormComparisonOptions::default()
    };
    let r2 = norm_comparison_experiment(&hundred, &NormSpec::with_p(2.0)?, &options, SEED)?;
    p.absorb(&r2);
    let r4 = norm_comparison_experiment(&twenty, &NormSpec::with_p(4.0)?, &options, SEED)?;
    p.absorb(&r4);
    Ok(p)
}

fn kernel_averaging() -> Result<Partial> {
    let mut p = Partial::new();
    let options = KernelOptions {
        r_samples: 128,
        alpha_density: 256.0,
        seed: SEED,
        ..KernelOptions::default()
    };
    p.absorb(&kernel_average_experiment(&options)?);
    Ok(p)
}

/// Small versions of every randomized experiment, rendered to JSON.
pub fn determinism_fingerprint() -> Result<Vec<String>> {
    let seed = SEED;
    let cfg = WalkConfig::new(4, 2.0)?;
    let echo = serde_json::json!({ "seed": seed });
    let mut out = Vec::new();
    let weak = weak_convergence_experiment(
        &preset("re_z2")?,
        &cfg,
        2_000,
        seed,
        &WeakOptions {
            sweep: Some(Sweep {
                n_values: vec![4, 8],
                horizon: 2.0,
                paths: 500,
            }),
            survival_horizons: vec![1.0, 2.0],
            survival_n: 4,
            survival_paths: 500,
        },
    )?;
    out.push(render_json(&weak, &echo, seed, None)?);
    let mut lp = LpOptions::single(2.0, 4, 2.0, 2_000, seed);
    lp.ps.push(4.0);
    lp.seeds.push(seed + 1);
    out.push(render_json(
        &lp_convergence_experiment(&preset("cos")?, &lp)?,
        &echo,
        seed,
        None,
    )?);
    let transform = transform_convergence_experiment(
        &preset("re_z3_plus_im_z2")?,
        &cfg,
        &NormSpec::with_p(3.0)?,
        1_000,
        seed,
        &TransformOptions::default(),
    )?;
    out.push(render_json(&transform, &echo, seed, None)?);
    let mut rng = stream(seed, Purpose::TestSet, 10);
    let set: Vec<FourierFunction> = (0..4).map(|_| random_fourier(&mut rng, 3, 1)).collect();
    let norm = norm_comparison_experiment(
        &set,
        &NormSpec::with_p(4.0)?,
        &NormComparisonOptions {
            optimizer: OptimizerOptions {
                depth: 6,
                restarts: 4,
                iterations: 50,
            },
            walk: Some(cfg),
            paths: 500,
            monte_carlo_functions: 2,
        },
        seed,
    )?;
    out.push(render_json(&norm, &echo, seed, None)?);
    let kernel = kernel_average_experiment(&KernelOptions {
        r_sweep: vec![2.0, 4.0],
        r_samples: 8,
        alpha_density: 8.0,
        seed,
        ..KernelOptions::default()
    })?;
    out.push(render_json(&kernel, &echo, seed, None)?);
    Ok(out)
}

fn determinism() -> Result<Partial> {
    let mut p = Partial::new();
    let mut runs = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        runs.push((threads, pool.install(determinism_fingerprint)?));
    }
    let repeat = determinism_fingerprint()?;
    let (_, reference) = &runs[0];
    for (threads, run) in &runs[1..] {
        p.assert(
            run == reference,
            format!(
                "{} reports at {threads} workers byte-identical to 1 worker",
                run.len()
            ),
        );
    }
    p.assert(&repeat == reference, "repeated run byte-identical".into());
    Ok(p)
}

/// `shift_norm_lower_bound` is reachable from here for the CLI's summary.
pub fn shift_bound(p: f64) -> Result<f64> {
    Ok(shift_norm_lower_bound(p, 2.0, 10, 6, 400, SEED)?.value)
}
