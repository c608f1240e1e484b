//! Kernels of the dyadic and classical shifts on translated and dilated
//! grids of the line, and their average over translations and dilations.
//!
//! The grid of parameters `(alpha, r)` has intervals
//! `[alpha + m L, alpha + (m + 1) L)` with `L = r 2^-k`, `r` in `[1, 2)`.
//! Averages take `alpha` uniform on `[-R, R]` and `r` with density
//! `dr / (r log 2)`, sampled as `r = 2^U` with `U` uniform on `[0, 1)`.

use std::f64::consts::SQRT_2;

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{par_map, Estimate, ExperimentReport, Provenance};
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::stats::{pairwise_sum, MeanEstimate};

/// Sampling plan and scale window for one point pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// Translations are averaged over `[-R, R]`.
    pub alpha_range: f64,
    pub r_samples: usize,
    pub alpha_samples: usize,
    /// Generations `k_min..=k_max`; generation `k` has length `r 2^-k`.
    pub scale_window: (i32, i32),
}

/// Length range `[|t - x| / 4, 4 (|t - x| + |t| + |x| + R + 1)]` whose
/// generations every window must contain.
pub fn mandated_lengths(t: f64, x: f64, alpha_range: f64) -> (f64, f64) {
    let d = (t - x).abs();
    (d / 4.0, 4.0 * (d + t.abs() + x.abs() + alpha_range + 1.0))
}

impl GridSpec {
    /// The smallest window covering [`mandated_lengths`].
    pub fn new(
        t: f64,
        x: f64,
        alpha_range: f64,
        r_samples: usize,
        alpha_samples: usize,
    ) -> Result<Self> {
        if t == x {
            return Err(Error::Diagonal(t));
        }
        if !(alpha_range > 0.0 && alpha_range.is_finite()) {
            return Err(Error::Config(format!("R = {alpha_range} must be positive")));
        }
        if r_samples == 0 || alpha_samples == 0 {
            return Err(Error::Config("sample counts must be positive".into()));
        }
        let (lo, hi) = mandated_lengths(t, x, alpha_range);
        let k_min = -(hi.log2().ceil() as i32);
        let k_max = (-lo.log2()).ceil() as i32;
        Ok(Self {
            alpha_range,
            r_samples,
            alpha_samples,
            scale_window: (k_min, k_max),
        })
    }

    pub fn with_window(mut self, k_min: i32, k_max: i32) -> Self {
        self.scale_window = (k_min, k_max);
        self
    }

    /// Whether the window contains every generation the pair `(t, x)` needs.
    pub fn covers(&self, t: f64, x: f64) -> bool {
        let (lo, hi) = mandated_lengths(t, x, self.alpha_range);
        let (k_min, k_max) = self.scale_window;
        2f64.powi(-k_min) >= hi && 2f64.powi(-k_max) <= lo
    }

    fn generations(&self) -> impl Iterator<Item = i32> {
        self.scale_window.0..=self.scale_window.1
    }
}

/// Position of `t` and `x` inside the grid interval of length `len` that
/// contains `t`, as fractions in `[0, 1)`, or `None` if `x` lies elsewhere.
#[inline]
fn common_interval(alpha: f64, len: f64, t: f64, x: f64) -> Option<(f64, f64)> {
    let start = alpha + ((t - alpha) / len).floor() * len;
    let u = (x - start) / len;
    if (0.0..1.0).contains(&u) {
        Some(((t - start) / len, u))
    } else {
        None
    }
}

/// Sign of the Haar function of a child interval at relative position `v`
/// inside that child's parent.
#[inline]
fn child_haar_sign(v: f64) -> f64 {
    let w = (2.0 * v).fract();
    if w < 0.5 {
        -1.0
    } else {
        1.0
    }
}

fn check_pair(t: f64, x: f64, spec: &GridSpec) -> Result<()> {
    if t == x {
        return Err(Error::Diagonal(t));
    }
    if !spec.covers(t, x) {
        return Err(Error::Config(format!(
            "scale window {:?} does not cover the pair ({t}, {x})",
            spec.scale_window
        )));
    }
    Ok(())
}

/// `K^{alpha,r}(t, x) = sum_J [-h_{J-}(t) h_{J+}(x) + h_{J+}(t) h_{J-}(x)]`.
///
/// Only the grid interval holding both points in different children
/// contributes at a given scale, with value `+-2/L`.
pub fn kernel_pointwise(alpha: f64, r: f64, t: f64, x: f64, spec: &GridSpec) -> Result<f64> {
    check_pair(t, x, spec)?;
    Ok(dyadic_kernel(alpha, r, t, x, spec))
}

#[inline]
fn dyadic_kernel(alpha: f64, r: f64, t: f64, x: f64, spec: &GridSpec) -> f64 {
    let mut sum = 0.0;
    for k in spec.generations() {
        let len = r * 2f64.powi(-k);
        if let Some((v, u)) = common_interval(alpha, len, t, x) {
            let t_left = v < 0.5;
            let x_left = u < 0.5;
            if t_left != x_left {
                let product = child_haar_sign(v) * child_haar_sign(u) * 2.0 / len;
                sum += if t_left { -product } else { product };
            }
        }
    }
    sum
}

/// Kernel of the classical shift `h_J -> (h_{J+} - h_{J-}) / sqrt 2`:
/// `sum_J h_J(t) (h_{J+} - h_{J-})(x) / sqrt 2`.
///
/// Scales above the window add `-1/L_top` when both points lie right of
/// `alpha`, `+1/L_top` when both lie left, and nothing otherwise; this
/// geometric tail is summed in closed form.
pub fn classical_kernel_pointwise(
    alpha: f64,
    r: f64,
    t: f64,
    x: f64,
    spec: &GridSpec,
) -> Result<f64> {
    check_pair(t, x, spec)?;
    Ok(classical_kernel(alpha, r, t, x, spec))
}

#[inline]
fn classical_kernel(alpha: f64, r: f64, t: f64, x: f64, spec: &GridSpec) -> f64 {
    let mut sum = 0.0;
    for k in spec.generations() {
        let len = r * 2f64.powi(-k);
        if let Some((v, u)) = common_interval(alpha, len, t, x) {
            let h_t = if v < 0.5 { -1.0 } else { 1.0 } / len.sqrt();
            // (h_{J+} - h_{J-})(x): only the child holding x is nonzero.
            let child = child_haar_sign(u) * (2.0 / len).sqrt();
            let diff = if u < 0.5 { -child } else { child };
            sum += h_t * diff / SQRT_2;
        }
    }
    let top = r * 2f64.powi(-spec.scale_window.0);
    if t >= alpha && x >= alpha {
        sum -= 1.0 / top;
    } else if t < alpha && x < alpha {
        sum += 1.0 / top;
    }
    sum
}

/// Averages of the dyadic kernel at `(t, x)` and `(x, t)` and of the
/// classical kernel at `(t, x)`, on one stratified `(alpha, r)` sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelAverages {
    pub dyadic: MeanEstimate,
    pub dyadic_swapped: MeanEstimate,
    pub classical: MeanEstimate,
}

/// Stratified average: `r_samples` strata in `log2 r` and `alpha_samples`
/// strata in `alpha`, each jittered uniformly.
pub fn kernel_averages(t: f64, x: f64, spec: &GridSpec, seed: u64) -> Result<KernelAverages> {
    check_pair(t, x, spec)?;
    check_pair(x, t, spec)?;
    let n_alpha = spec.alpha_samples;
    let n_r = spec.r_samples;
    let width = 2.0 * spec.alpha_range / n_alpha as f64;
    let rows = par_map(n_r, |j| {
        let mut rng = stream(seed, Purpose::Kernel, j);
        let mut d = Vec::with_capacity(n_alpha);
        let mut s = Vec::with_capacity(n_alpha);
        let mut c = Vec::with_capacity(n_alpha);
        for i in 0..n_alpha {
            let u: f64 = rng.random();
            let w: f64 = rng.random();
            let r = 2f64.powf((j as f64 + u) / n_r as f64);
            let alpha = -spec.alpha_range + (i as f64 + w) * width;
            d.push(dyadic_kernel(alpha, r, t, x, spec));
            s.push(dyadic_kernel(alpha, r, x, t, spec));
            c.push(classical_kernel(alpha, r, t, x, spec));
        }
        (d, s, c)
    });
    let flatten = |pick: fn(&(Vec<f64>, Vec<f64>, Vec<f64>)) -> &Vec<f64>| {
        let all: Vec<f64> = rows
            .iter()
            .flat_map(|row| pick(row).iter().copied())
            .collect();
        MeanEstimate::from_samples(&all)
    };
    Ok(KernelAverages {
        dyadic: flatten(|r| &r.0),
        dyadic_swapped: flatten(|r| &r.1),
        classical: flatten(|r| &r.2),
    })
}

/// Report of [`kernel_averages`] for a single grid.
pub fn kernel_average(t: f64, x: f64, spec: &GridSpec, seed: u64) -> Result<ExperimentReport> {
    let a = kernel_averages(t, x, spec, seed)?;
    let mut report = ExperimentReport::new(
        "kernel_average",
        json!({ "t": t, "x": x, "grid": spec, "seed": seed }),
    );
    report.estimate(Estimate::monte_carlo(
        "dyadic average",
        a.dyadic.mean,
        a.dyadic.std_error,
    ));
    report.estimate(Estimate::monte_carlo(
        "dyadic average, swapped",
        a.dyadic_swapped.mean,
        a.dyadic_swapped.std_error,
    ));
    report.estimate(Estimate::monte_carlo(
        "(t - x) classical average",
        (t - x) * a.classical.mean,
        (t - x).abs() * a.classical.std_error,
    ));
    report.target("dyadic average", 0.0, Provenance::Paper);
    push_antisymmetry(&mut report, &a);
    Ok(report)
}

fn push_antisymmetry(report: &mut ExperimentReport, a: &KernelAverages) {
    let k = TOLERANCES.mc_sigmas;
    let se = (a.dyadic.std_error.powi(2) + a.dyadic_swapped.std_error.powi(2)).sqrt();
    let sum = a.dyadic.mean + a.dyadic_swapped.mean;
    report.check(
        "dyadic average antisymmetric",
        sum.abs() <= k * se + 1e-15,
        format!("avg(t,x) + avg(x,t) = {sum:.3e}"),
    );
}

/// Options of [`kernel_average_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelOptions {
    pub t: f64,
    pub x: f64,
    pub r_sweep: Vec<f64>,
    pub r_samples: usize,
    /// Translation samples per unit length of `[-R, R]`.
    pub alpha_density: f64,
    /// Point pairs for the classical proportionality check, evaluated at the
    /// largest `R`.
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            t: 0.3,
            x: 0.7,
            r_sweep: vec![4.0, 16.0, 64.0],
            r_samples: 64,
            alpha_density: 64.0,
            pairs: vec![(0.3, 0.7), (0.1, 0.9), (0.2, 0.5)],
            seed: 7,
        }
    }
}

impl KernelOptions {
    fn grid(&self, t: f64, x: f64, alpha_range: f64) -> Result<GridSpec> {
        let alpha_samples = (self.alpha_density * 2.0 * alpha_range).ceil().max(1.0) as usize;
        GridSpec::new(t, x, alpha_range, self.r_samples, alpha_samples)
    }
}

/// `R`-sweep of the dyadic kernel average at `(t, x)` and the classical
/// average across point pairs.
pub fn kernel_average_experiment(options: &KernelOptions) -> Result<ExperimentReport> {
    if options.r_sweep.is_empty() {
        return Err(Error::Config("empty R sweep".into()));
    }
    let (t, x) = (options.t, options.x);
    let mut report = ExperimentReport::new("kernel_average", json!({ "options": options }));
    report.target("dyadic average", 0.0, Provenance::Paper);
    let mut magnitudes = Vec::new();
    let mut last = None;
    for &r in &options.r_sweep {
        let spec = options.grid(t, x, r)?;
        let a = kernel_averages(t, x, &spec, options.seed)?;
        magnitudes.push(a.dyadic.mean.abs() + TOLERANCES.mc_sigmas * a.dyadic.std_error);
        report.table.push(json!({
            "sweep": "R",
            "R": r,
            "alpha_samples": spec.alpha_samples,
            "r_samples": spec.r_samples,
            "scale_window": [spec.scale_window.0, spec.scale_window.1],
            "dyadic": a.dyadic.mean,
            "dyadic_se": a.dyadic.std_error,
            "dyadic_swapped": a.dyadic_swapped.mean,
            "classical": a.classical.mean,
            "classical_se": a.classical.std_error,
        }));
        last = Some(a);
    }
    let a = last.expect("non-empty sweep");
    report.estimate(Estimate::monte_carlo(
        "dyadic average",
        a.dyadic.mean,
        a.dyadic.std_error,
    ));
    report.estimate(Estimate::monte_carlo(
        "dyadic average, swapped",
        a.dyadic_swapped.mean,
        a.dyadic_swapped.std_error,
    ));
    let k = TOLERANCES.mc_sigmas;
    report.check(
        "dyadic average decreasing in R",
        magnitudes.windows(2).all(|w| w[1] < w[0]),
        format!(
            "|avg| + {k} se = {magnitudes:?} over R = {:?}",
            options.r_sweep
        ),
    );
    report.check(
        "dyadic average consistent with 0",
        a.dyadic.mean.abs() <= k * a.dyadic.std_error,
        format!(
            "|avg| = {:.3e} <= {k} se = {:.3e}",
            a.dyadic.mean.abs(),
            k * a.dyadic.std_error
        ),
    );
    let bound = TOLERANCES.kernel_dyadic / (t - x).abs();
    let final_value = a.dyadic.mean.abs();
    report.check(
        "dyadic average small",
        final_value <= bound,
        format!("|avg| = {final_value:.3e} <= {bound:.4}"),
    );
    push_antisymmetry(&mut report, &a);

    if !options.pairs.is_empty() {
        let r_max = options.r_sweep.iter().copied().fold(f64::MIN, f64::max);
        let mut scaled = Vec::new();
        for &(pt, px) in &options.pairs {
            let spec = options.grid(pt, px, r_max)?;
            let c = kernel_averages(pt, px, &spec, options.seed)?.classical;
            let v = (pt - px) * c.mean;
            scaled.push(v);
            report.estimate(Estimate::monte_carlo(
                format!("(t - x) classical average at ({pt}, {px})"),
                v,
                (pt - px).abs() * c.std_error,
            ));
        }
        let mean = pairwise_sum(&scaled) / scaled.len() as f64;
        let spread = scaled.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean.abs();
        let tol = TOLERANCES.classical_spread;
        report.estimate(Estimate::exact("classical proportionality constant", mean));
        report.check(
            "classical average proportional to 1/(t - x)",
            spread <= tol,
            format!("(t - x) avg = {scaled:.4?}, relative spread {spread:.4} <= {tol}"),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GridSpec {
        GridSpec::new(0.3, 0.7, 4.0, 4, 16).unwrap()
    }

    #[test]
    fn window_covers_mandated_lengths() {
        let s = spec();
        assert!(s.covers(0.3, 0.7));
        let (lo, hi) = mandated_lengths(0.3, 0.7, 4.0);
        assert!((lo - 0.1).abs() < 1e-15);
        assert!((hi - 4.0 * 6.4).abs() < 1e-12);
        assert!(!s.with_window(0, 2).covers(0.3, 0.7));
        assert!(matches!(
            GridSpec::new(0.5, 0.5, 1.0, 1, 1),
            Err(Error::Diagonal(_))
        ));
    }

    #[test]
    fn diagonal_is_rejected() {
        assert!(matches!(
            kernel_pointwise(0.0, 1.0, 0.3, 0.3, &spec()),
            Err(Error::Diagonal(_))
        ));
    }

    #[test]
    fn same_child_scales_contribute_nothing() {
        // 0.3 and 0.4 share the child [0.25, 0.5) of [0, 0.5) and the child
        // [0, 1) of [0, 2): those generations add nothing.
        let s = GridSpec::new(0.3, 0.4, 1.0, 1, 1).unwrap();
        for k in [-1, 1] {
            assert_eq!(dyadic_kernel(0.0, 1.0, 0.3, 0.4, &s.with_window(k, k)), 0.0);
        }
        // [0.25, 0.375) | [0.375, 0.5) separates them at generation 2.
        assert_ne!(dyadic_kernel(0.0, 1.0, 0.3, 0.4, &s.with_window(2, 2)), 0.0);
    }

    #[test]
    fn single_separating_scale() {
        // alpha = 0, r = 1: the unit interval [0, 1) splits 0.3 | 0.7, with
        // h_{J-}(0.3) = +sqrt2 and h_{J+}(0.7) = -sqrt2, so the term is
        // -(sqrt2)(-sqrt2) = +2 = 2/L. Finer grid intervals separate them
        // nowhere, coarser ones hold both in [0, L/2).
        let s = spec();
        let k = kernel_pointwise(0.0, 1.0, 0.3, 0.7, &s).unwrap();
        assert_eq!(k, 2.0);
        assert_eq!(kernel_pointwise(0.0, 1.0, 0.7, 0.3, &s).unwrap(), -2.0);
    }

    #[test]
    fn enlarging_the_window_changes_nothing() {
        let mut rng = stream(4, Purpose::TestSet, 0);
        for _ in 0..200 {
            let t: f64 = rng.random_range(-2.0..2.0);
            let x: f64 = rng.random_range(-2.0..2.0);
            let alpha: f64 = rng.random_range(-4.0..4.0);
            let r: f64 = rng.random_range(1.0..2.0);
            let s = GridSpec::new(t, x, 4.0, 1, 1).unwrap();
            let (k0, k1) = s.scale_window;
            let wide = s.with_window(k0 - 5, k1 + 5);
            assert_eq!(
                kernel_pointwise(alpha, r, t, x, &s).unwrap(),
                kernel_pointwise(alpha, r, t, x, &wide).unwrap()
            );
            let a = classical_kernel_pointwise(alpha, r, t, x, &s).unwrap();
            let b = classical_kernel_pointwise(alpha, r, t, x, &wide).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn classical_kernel_direct_sum_matches_tail_formula() {
        // Brute-force sum over 40 extra coarse generations.
        let s = GridSpec::new(0.3, 0.7, 4.0, 1, 1).unwrap();
        let (k0, k1) = s.scale_window;
        for alpha in [-3.0, 0.1, 0.5, 2.0] {
            let mut direct = 0.0;
            for k in (k0 - 40)..=k1 {
                let len = 1.3 * 2f64.powi(-k);
                if let Some((v, u)) = common_interval(alpha, len, 0.3, 0.7) {
                    let h_t = if v < 0.5 { -1.0 } else { 1.0 } / len.sqrt();
                    let child = child_haar_sign(u) * (2.0 / len).sqrt();
                    direct += h_t * if u < 0.5 { -child } else { child } / SQRT_2;
                }
            }
            let closed = classical_kernel_pointwise(alpha, 1.3, 0.3, 0.7, &s).unwrap();
            assert!((direct - closed).abs() < 1e-12, "{direct} {closed}");
        }
    }

    #[test]
    fn averages_are_antisymmetric() {
        let s = GridSpec::new(0.3, 0.7, 4.0, 8, 64).unwrap();
        let a = kernel_averages(0.3, 0.7, &s, 1).unwrap();
        assert_eq!(a.dyadic.mean, -a.dyadic_swapped.mean);
        let r = kernel_average(0.3, 0.7, &s, 1).unwrap();
        assert!(r.passed());
    }
}
