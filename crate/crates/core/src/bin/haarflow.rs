use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use haarflow::acceptance;
use haarflow::config::{FunctionSource, RunConfig};
use haarflow::experiments::{
    kernel_average_experiment, lp_convergence_experiment, moments_table,
    norm_comparison_experiment, random_fourier, transform_convergence_experiment,
    weak_convergence_experiment, ExperimentReport, KernelOptions, LpOptions, NormComparisonOptions,
    OptimizerOptions, Sweep, TransformOptions, WeakOptions,
};
use haarflow::presets::list_presets;
use haarflow::report::write_report;
use haarflow::rng::{stream, Purpose};
use haarflow::walk::shift_increment_lattice;
use haarflow::{Error, Result};

#[derive(Parser)]
#[command(
    name = "haarflow",
    version,
    about = "Dyadic shift and dyadic walk experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Run parameters; each flag overrides the value from `--config`.
#[derive(Args, Default, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<u32>,
    #[arg(long = "T")]
    t: Option<f64>,
    /// Preset boundary function (see `list-presets`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Quadrature nodes on the circle.
    #[arg(long = "Q")]
    quadrature: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact check of S dB_l = dB_l^T on all 2^(l+1) atoms for l <= depth.
    VerifyShift {
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Exact conditional moments of the walk increments. Without an explicit
    /// T, uses T = min(4, N/2).
    Moments {
        #[command(flatten)]
        common: Common,
    },
    /// E psi(X_T) against psi(0); sweeps.N and sweeps.T add N and survival sweeps.
    WeakConvergence {
        #[command(flatten)]
        common: Common,
    },
    /// ||f(X_T) - M^f_T||_p; sweeps.N adds an N sweep.
    TransformConvergence {
        #[command(flatten)]
        common: Common,
    },
    /// ||M^f_T||_p and ||M^g_T||_p against the boundary norms.
    LpConvergence {
        /// Independent seeds averaged at the primary cell.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[command(flatten)]
        common: Common,
    },
    /// ||H F||_p / ||F||_p over random F against a lower bound on ||S||_p.
    NormCompare {
        #[arg(long, default_value_t = 20)]
        test_set: usize,
        #[arg(long, default_value_t = 10)]
        depth: u32,
        #[arg(long, default_value_t = 6)]
        restarts: usize,
        #[arg(long, default_value_t = 400)]
        iterations: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Dyadic and classical kernel averages over random grids.
    KernelAverage {
        #[arg(long, default_value_t = 0.3)]
        t_point: f64,
        #[arg(long, default_value_t = 0.7)]
        x_point: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the acceptance suite, optionally restricted to some criteria.
    AllAcceptance {
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    ListPresets,
}

fn resolve(common: &Common, experiment: &str) -> Result<(RunConfig, bool)> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let horizon_given = common.t.is_some() || common.config.is_some();
    cfg.experiment = Some(experiment.to_string());
    if let Some(v) = common.n {
        cfg.n = v;
    }
    if let Some(v) = common.t {
        cfg.t = v;
    }
    if let Some(v) = &common.preset {
        cfg.function = FunctionSource::Preset(v.clone());
    }
    if let Some(v) = common.p {
        cfg.p = v;
    }
    if let Some(v) = common.q {
        cfg.q = v;
    }
    if let Some(v) = common.quadrature {
        cfg.quadrature = v;
    }
    if let Some(v) = common.paths {
        cfg.paths = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = &common.output_dir {
        cfg.output_dir = v.clone();
    }
    Ok((cfg, horizon_given))
}

fn validated(common: &Common, experiment: &str) -> Result<RunConfig> {
    let (cfg, _) = resolve(common, experiment)?;
    cfg.validate()?;
    Ok(cfg)
}

fn verify_shift(depth: usize) -> Result<ExperimentReport> {
    if depth == 0 || depth > 20 {
        return Err(Error::Config(format!("depth {depth} outside 1..=20")));
    }
    let mut report = ExperimentReport::new("verify_shift", serde_json::json!({ "depth": depth }));
    let mut all = true;
    for l in 1..=depth {
        let s = shift_increment_lattice(l, l as u32 + 1)?;
        all &= s.is_rotation();
        report.check(
            format!("S dB_{l} = dB_{l}^T"),
            s.is_rotation(),
            format!("{} atoms", s.db1.len()),
        );
    }
    if all {
        println!("𝒮dB = dB^⊤ exact on 2^{} atoms", depth + 1);
    }
    Ok(report)
}

fn run_experiment(command: &Command) -> Result<(ExperimentReport, RunConfig)> {
    match command {
        Command::VerifyShift { depth, common } => {
            let (cfg, _) = resolve(common, "verify-shift")?;
            Ok((verify_shift(*depth)?, cfg))
        }
        Command::Moments { common } => {
            let (mut cfg, horizon_given) = resolve(common, "moments")?;
            if !horizon_given {
                cfg.t = cfg.t.min(cfg.n as f64 / 2.0);
            }
            cfg.validate()?;
            let walk = cfg.walk()?;
            let report = moments_table(cfg.n, walk.fine_step())?;
            println!("{:<28} {:>16} {:>10}", "moment", "value", "/ delta");
            for e in &report.estimates {
                println!(
                    "{:<28} {:>16.6e} {:>10.4}",
                    e.name,
                    e.value,
                    e.value / walk.fine_step()
                );
            }
            Ok((report, cfg))
        }
        Command::WeakConvergence { common } => {
            let cfg = validated(common, "weak-convergence")?;
            let walk = cfg.walk()?;
            let options = WeakOptions {
                sweep: cfg.sweeps.n.clone().map(|n_values| Sweep {
                    n_values,
                    horizon: cfg.t,
                    paths: cfg.paths,
                }),
                survival_horizons: cfg.sweeps.t.clone().unwrap_or_default(),
                survival_n: cfg.n,
                survival_paths: cfg.paths,
            };
            let report = weak_convergence_experiment(
                &cfg.boundary_function()?,
                &walk,
                cfg.paths,
                cfg.seed,
                &options,
            )?;
            Ok((report, cfg))
        }
        Command::TransformConvergence { common } => {
            let cfg = validated(common, "transform-convergence")?;
            let options = TransformOptions {
                sweep: cfg.sweeps.n.clone().map(|n_values| Sweep {
                    n_values,
                    horizon: cfg.t,
                    paths: cfg.paths,
                }),
            };
            let report = transform_convergence_experiment(
                &cfg.boundary_function()?,
                &cfg.walk()?,
                &cfg.norm()?,
                cfg.paths,
                cfg.seed,
                &options,
            )?;
            Ok((report, cfg))
        }
        Command::LpConvergence { seeds, common } => {
            let cfg = validated(common, "lp-convergence")?;
            let mut options = LpOptions::single(cfg.p, cfg.n, cfg.t, cfg.paths, cfg.seed);
            options.q = cfg.q;
            options.quadrature = cfg.quadrature;
            options.seeds = (0..(*seeds).max(1)).map(|i| cfg.seed + i).collect();
            if let Some(ns) = &cfg.sweeps.n {
                options.n_sweep = ns.clone();
                options.t_sweep = cfg.sweeps.t.clone().unwrap_or_else(|| vec![cfg.t]);
                options.sweep_paths = cfg.paths;
            }
            let report = lp_convergence_experiment(&cfg.boundary_function()?, &options)?;
            Ok((report, cfg))
        }
        Command::NormCompare {
            test_set,
            depth,
            restarts,
            iterations,
            common,
        } => {
            let cfg = validated(common, "norm-compare")?;
            if *test_set == 0 {
                return Err(Error::Config("test set must be non-empty".into()));
            }
            let f = cfg.boundary_function()?;
            let mut rng = stream(cfg.seed, Purpose::TestSet, 0);
            let mut set = vec![f.clone()];
            set.extend((1..*test_set).map(|i| random_fourier(&mut rng, 1 + i % 8, f.dim())));
            let options = NormComparisonOptions {
                optimizer: OptimizerOptions {
                    depth: *depth,
                    restarts: *restarts,
                    iterations: *iterations,
                },
                walk: Some(cfg.walk()?),
                paths: cfg.paths,
                monte_carlo_functions: 1,
            };
            let report = norm_comparison_experiment(&set, &cfg.norm()?, &options, cfg.seed)?;
            Ok((report, cfg))
        }
        Command::KernelAverage {
            t_point,
            x_point,
            common,
        } => {
            let cfg = validated(common, "kernel-average")?;
            let mut options = KernelOptions {
                t: *t_point,
                x: *x_point,
                seed: cfg.seed,
                ..KernelOptions::default()
            };
            if let Some(rs) = &cfg.sweeps.r {
                options.r_sweep = rs.clone();
            }
            Ok((kernel_average_experiment(&options)?, cfg))
        }
        Command::AllAcceptance { only, output_dir } => {
            let ids: Vec<u8> = if only.is_empty() {
                acceptance::CRITERIA.iter().map(|c| c.0).collect()
            } else {
                only.clone()
            };
            let mut cfg = RunConfig {
                experiment: Some("all-acceptance".into()),
                seed: acceptance::SEED,
                ..RunConfig::default()
            };
            if let Some(dir) = output_dir {
                cfg.output_dir = dir.clone();
            }
            let mut report =
                ExperimentReport::new("acceptance", serde_json::json!({ "criteria": ids }));
            for id in ids {
                let outcome = acceptance::run(id)?;
                println!("{}", outcome.line());
                for d in &outcome.details {
                    println!("    {d}");
                }
                report.check(
                    format!("criterion {id}: {}", outcome.title),
                    outcome.passed,
                    outcome.details.join("; "),
                );
            }
            Ok((report, cfg))
        }
        Command::ListPresets => unreachable!("handled before dispatch"),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("HAARFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::Config(format!(
                "HAARFLOW_THREADS = {value:?} is not a positive integer"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::InvalidInput(_) | Error::Diagonal(_)
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::ListPresets = cli.command {
        print!("{}", list_presets());
        return ExitCode::SUCCESS;
    }
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (report, cfg) = match run_experiment(&cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_config_error(&e) { 2 } else { 1 });
        }
    };
    if !matches!(cli.command, Command::AllAcceptance { .. }) {
        for line in report.verdict_lines() {
            println!("{line}");
        }
    }
    let echo = match serde_json::to_value(&cfg) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match write_report(&report, &echo, cfg.seed, &cfg.output_dir) {
        Ok(files) => println!("wrote {} and {}", files.json.display(), files.csv.display()),
        Err(e) => {
            eprintln!("error: writing reports: {e}");
            return ExitCode::from(1);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
