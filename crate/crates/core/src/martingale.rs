//! Discrete martingale transforms of the stopped walk, the shift transform
//! `S M^f`, and a stopped Brownian motion simulator for the continuous side.
//!
//! `M^f_k = f(0) + sum grad f(B_{l-1}) . dB_l`.
//! `M^g_k = sum (f_y, -f_x)(B_{l-1}) . dB_l`, the gradient turned clockwise,
//! so that `S M^f = M^g` holds with `S dB = (-dB^2, dB^1)`.
//! Its limit is `-g(W)` for the conjugate `g`, with the same `L^p` norm.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::circle::{FourierFunction, NormSpec, DISC_TOLERANCE};
use crate::error::{Error, Result};
use crate::rng::RandomDigits;
use crate::walk::{self, PathRecord, Step, StepObserver, WalkConfig};

/// Checkpoint spacing of a [`MartingalePair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// Values at `k = nN`, `n = 0..=N^4`.
    Coarse,
    /// Values at every fine index `k = 0..=N^5`.
    Fine,
}

/// `M^f` and `M^g` along one path, frozen after the stopping index.
#[derive(Debug, Clone)]
pub struct MartingalePair<'a> {
    path: &'a PathRecord,
    dim: usize,
    stride: u64,
    mf: Vec<f64>,
    mg: Vec<f64>,
}

impl<'a> MartingalePair<'a> {
    pub fn path(&self) -> &'a PathRecord {
        self.path
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of checkpoints.
    pub fn len(&self) -> usize {
        self.mf.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.mf.is_empty()
    }

    /// Fine steps between checkpoints: `N` for coarse, 1 for fine.
    pub fn stride(&self) -> u64 {
        self.stride
    }

    pub fn mf(&self, i: usize) -> &[f64] {
        &self.mf[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mg(&self, i: usize) -> &[f64] {
        &self.mg[i * self.dim..(i + 1) * self.dim]
    }

    /// `M^f_T`.
    pub fn terminal_mf(&self) -> &[f64] {
        self.mf(self.len() - 1)
    }

    /// `M^g_T`.
    pub fn terminal_mg(&self) -> &[f64] {
        self.mg(self.len() - 1)
    }

    /// All `M^g` checkpoints, flattened row-major.
    pub fn mg_values(&self) -> &[f64] {
        &self.mg
    }

    pub fn mf_values(&self) -> &[f64] {
        &self.mf
    }
}

fn checkpoint_count(cfg: &WalkConfig, stride: u64) -> usize {
    (cfg.fine_steps() / stride) as usize + 1
}

fn stride_of(cfg: &WalkConfig, resolution: Resolution) -> u64 {
    match resolution {
        Resolution::Coarse => cfg.n() as u64,
        Resolution::Fine => 1,
    }
}

/// Walks the recorded steps of `path`, calling `step` with the gradient at
/// `B_{l-1}` and the increment `dB_l`, and storing the running sums at every
/// checkpoint.
fn accumulate<Fn1>(
    f: &FourierFunction,
    path: &PathRecord,
    stride: u64,
    initial: &[f64],
    mut step: Fn1,
) -> Result<Vec<f64>>
where
    Fn1: FnMut(&[f64], &[f64], [f64; 2], &mut [f64]),
{
    let cfg = path.config();
    let dim = f.dim();
    let size = cfg.increment_size();
    let mut dx = vec![0.0; dim];
    let mut dy = vec![0.0; dim];
    let mut value = initial.to_vec();
    let mut out = Vec::with_capacity(checkpoint_count(cfg, stride) * dim);
    out.extend_from_slice(&value);
    let last = path.last_fine_index();
    for l in 1..=cfg.fine_steps() {
        if l <= last {
            let before = path.fine_position(l - 1);
            if before[0].hypot(before[1]) > 1.0 + DISC_TOLERANCE {
                return Err(Error::Domain {
                    x: before[0],
                    y: before[1],
                });
            }
            f.gradient_into(before, &mut dx, &mut dy);
            let d = path.lattice_increment(l);
            let db = [d[0] as f64 * size, d[1] as f64 * size];
            step(&dx, &dy, db, &mut value);
        }
        if l % stride == 0 {
            out.extend_from_slice(&value);
        }
    }
    Ok(out)
}

#[inline]
fn mf_step(dx: &[f64], dy: &[f64], db: [f64; 2], value: &mut [f64]) {
    for j in 0..value.len() {
        value[j] += dx[j] * db[0] + dy[j] * db[1];
    }
}

#[inline]
fn mg_step(dx: &[f64], dy: &[f64], db: [f64; 2], value: &mut [f64]) {
    for j in 0..value.len() {
        value[j] += dy[j] * db[0] + (-dx[j]) * db[1];
    }
}

#[inline]
fn shift_step(dx: &[f64], dy: &[f64], db: [f64; 2], value: &mut [f64]) {
    let sdb = [-db[1], db[0]];
    for j in 0..value.len() {
        value[j] += dx[j] * sdb[0] + dy[j] * sdb[1];
    }
}

/// `M^f` and `M^g` at coarse checkpoints.
pub fn discrete_transforms<'a>(
    f: &FourierFunction,
    path: &'a PathRecord,
) -> Result<MartingalePair<'a>> {
    discrete_transforms_at(f, path, Resolution::Coarse)
}

pub fn discrete_transforms_at<'a>(
    f: &FourierFunction,
    path: &'a PathRecord,
    resolution: Resolution,
) -> Result<MartingalePair<'a>> {
    let stride = stride_of(path.config(), resolution);
    debug_assert!(f.conjugate().a0().iter().all(|&v| v == 0.0));
    let zero = vec![0.0; f.dim()];
    let mf = accumulate(f, path, stride, f.a0(), mf_step)?;
    let mg = accumulate(f, path, stride, &zero, mg_step)?;
    Ok(MartingalePair {
        path,
        dim: f.dim(),
        stride,
        mf,
        mg,
    })
}

/// `(S M^f)_k = sum grad f(B_{l-1}) . S dB_l`, with `S dB_l = (-dB^2_l, dB^1_l)`,
/// at coarse checkpoints, flattened row-major like [`MartingalePair::mg_values`].
pub fn shift_transform(f: &FourierFunction, path: &PathRecord) -> Result<Vec<f64>> {
    shift_transform_at(f, path, Resolution::Coarse)
}

pub fn shift_transform_at(
    f: &FourierFunction,
    path: &PathRecord,
    resolution: Resolution,
) -> Result<Vec<f64>> {
    let stride = stride_of(path.config(), resolution);
    accumulate(f, path, stride, &vec![0.0; f.dim()], shift_step)
}

/// Terminal quantities of one Monte Carlo path, computed while the digits
/// stream past without storing the path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSummary {
    pub terminal: [f64; 2],
    pub stop_n: Option<u64>,
    /// `f(X_T^{tau_eps})`.
    pub f_terminal: Vec<f64>,
    pub mf: Vec<f64>,
    pub mg: Vec<f64>,
    /// `(S M^f)_T`, when requested.
    pub shift: Option<Vec<f64>>,
    /// Accumulated Taylor remainders, equal to `f(X_T) - M^f_T`, when requested.
    pub remainder: Option<Vec<f64>>,
}

/// Optional per-path accumulators of [`simulate_path_summary`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SummaryOptions {
    pub shift: bool,
    pub remainder: bool,
}

struct TransformObserver<'f> {
    f: &'f FourierFunction,
    size: f64,
    dx: Vec<f64>,
    dy: Vec<f64>,
    mf: Vec<f64>,
    mg: Vec<f64>,
    shift: Option<Vec<f64>>,
    remainder: Option<(Vec<f64>, Vec<f64>)>,
    escaped: Option<[f64; 2]>,
}

impl StepObserver for TransformObserver<'_> {
    #[inline]
    fn on_step(&mut self, before: [i64; 2], step: Step) {
        let z = [before[0] as f64 * self.size, before[1] as f64 * self.size];
        if z[0] * z[0] + z[1] * z[1] > 1.0 + DISC_TOLERANCE {
            self.escaped.get_or_insert(z);
        }
        self.f.gradient_into(z, &mut self.dx, &mut self.dy);
        let d = step.lattice();
        let db = [d[0] as f64 * self.size, d[1] as f64 * self.size];
        mf_step(&self.dx, &self.dy, db, &mut self.mf);
        mg_step(&self.dx, &self.dy, db, &mut self.mg);
        if let Some(s) = self.shift.as_mut() {
            shift_step(&self.dx, &self.dy, db, s);
        }
        if let Some((total, scratch)) = self.remainder.as_mut() {
            self.f.taylor_remainder_into(z, db, scratch);
            for (t, r) in total.iter_mut().zip(scratch.iter()) {
                *t += r;
            }
        }
    }
}

/// Runs path `index` of the Monte Carlo stream `seed` and returns its
/// terminal martingale values.
pub fn simulate_path_summary(
    f: &FourierFunction,
    cfg: &WalkConfig,
    seed: u64,
    index: u64,
    options: SummaryOptions,
) -> Result<PathSummary> {
    let mut obs = TransformObserver {
        f,
        size: cfg.increment_size(),
        dx: vec![0.0; f.dim()],
        dy: vec![0.0; f.dim()],
        mf: f.a0().to_vec(),
        mg: vec![0.0; f.dim()],
        shift: options.shift.then(|| vec![0.0; f.dim()]),
        remainder: options
            .remainder
            .then(|| (vec![0.0; f.dim()], vec![0.0; f.dim()])),
        escaped: None,
    };
    let mut digits = RandomDigits::new(seed, index);
    let outcome = walk::drive(cfg, &mut digits, &mut obs);
    if let Some([x, y]) = obs.escaped {
        return Err(Error::Domain { x, y });
    }
    let terminal = cfg.position(outcome.position);
    Ok(PathSummary {
        terminal,
        stop_n: outcome.stop_n,
        f_terminal: f.eval(terminal)?,
        mf: obs.mf,
        mg: obs.mg,
        shift: obs.shift,
        remainder: obs.remainder.map(|(total, _)| total),
    })
}

/// One draw of Brownian motion stopped at the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppedBMSample {
    pub endpoint: [f64; 2],
    pub stopped: bool,
    /// Time of the first substep at or beyond the circle, relative to the start.
    pub exit_time: Option<f64>,
}

/// Euler simulation of `W` from `x0` over time `horizon`, with exact
/// Gaussian increments of variance `horizon / substeps` per coordinate.
///
/// Stops at the first substep with `|W| >= 1` and projects the position
/// radially onto the circle.
pub fn simulate_stopped_bm<R: Rng + ?Sized>(
    x0: [f64; 2],
    horizon: f64,
    substeps: u32,
    rng: &mut R,
) -> Result<StoppedBMSample> {
    if substeps == 0 {
        return Err(Error::InvalidInput("substeps must be >= 1".into()));
    }
    if x0[0].hypot(x0[1]) >= 1.0 {
        return Err(Error::Domain { x: x0[0], y: x0[1] });
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} must be >= 0"
        )));
    }
    let dt = horizon / substeps as f64;
    let sd = dt.sqrt();
    let mut w = x0;
    for i in 1..=substeps {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        w[0] += sd * g1;
        w[1] += sd * g2;
        let r = w[0].hypot(w[1]);
        if r >= 1.0 {
            return Ok(StoppedBMSample {
                endpoint: [w[0] / r, w[1] / r],
                stopped: true,
                exit_time: Some(i as f64 * dt),
            });
        }
    }
    Ok(StoppedBMSample {
        endpoint: w,
        stopped: false,
        exit_time: None,
    })
}

/// `||f(W_infinity^tau)||_p` for Brownian motion from the origin: the exit
/// law is uniform on the circle, so this is the boundary norm.
pub fn boundary_lp_reference(f: &FourierFunction, ns: &NormSpec) -> f64 {
    f.lp_norm_boundary(ns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use crate::stats::MeanEstimate;
    use crate::walk::{run_path, DigitStream};

    fn re_z() -> FourierFunction {
        FourierFunction::cos_mode(1)
    }

    fn re_z2() -> FourierFunction {
        FourierFunction::cos_mode(2)
    }

    fn random_path(cfg: &WalkConfig, i: u64) -> PathRecord {
        run_path(
            cfg,
            &DigitStream::random(21, i, cfg.fine_steps() as usize + 1),
        )
    }

    #[test]
    fn linear_function_recovers_the_walk() {
        let cfg = WalkConfig::new(4, 2.0).unwrap();
        let path = random_path(&cfg, 0);
        let pair = discrete_transforms(&re_z(), &path).unwrap();
        assert_eq!(pair.len(), cfg.coarse_steps() as usize + 1);
        for n in 0..pair.len() {
            let x = path.coarse_position(n as u64);
            assert!((pair.mf(n)[0] - x[0]).abs() < 1e-12);
            // Clockwise multiplier: M^g = -B^2.
            assert!((pair.mg(n)[0] + x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_function_is_inert() {
        let cfg = WalkConfig::new(2, 1.0).unwrap();
        let path = random_path(&cfg, 1);
        let f = FourierFunction::constant(vec![2.5]).unwrap();
        let pair = discrete_transforms(&f, &path).unwrap();
        assert!(pair.mf_values().iter().all(|&v| v == 2.5));
        assert!(pair.mg_values().iter().all(|&v| v == 0.0));
        assert!(shift_transform(&f, &path)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn re_z2_on_the_zero_point_matches_hand_computation() {
        // x = 0: every digit is 0, so eps = -1 throughout and the walk moves
        // left along the first axis by sqrt(2 delta) per step.
        let cfg = WalkConfig::new(2, 1.0).unwrap();
        let s = DigitStream::from_digits(&[false; 33]);
        let path = run_path(&cfg, &s);
        let pair = discrete_transforms_at(&re_z2(), &path, Resolution::Fine).unwrap();
        let size = cfg.increment_size();
        let (mut mf, mut mg) = (0.0f64, 0.0f64);
        let mut x = 0.0f64;
        let stop_k = path.stop_k().unwrap_or(32);
        for k in 1..=32u64 {
            if k <= stop_k {
                // grad Re z^2 = (2x, -2y) with y = 0.
                mf += 2.0 * x * -size;
                mg += 0.0;
                x -= size;
            }
            assert!((pair.mf(k as usize)[0] - mf).abs() < 1e-14, "k = {k}");
            assert!((pair.mg(k as usize)[0] - mg).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_transform_is_bit_identical_to_mg() {
        let cfg = WalkConfig::new(4, 2.0).unwrap();
        let f = FourierFunction::new(
            vec![0.3],
            vec![vec![0.0], vec![0.0], vec![1.0]],
            vec![vec![0.0], vec![1.0], vec![0.0]],
        )
        .unwrap();
        for i in 0..20 {
            let path = random_path(&cfg, i);
            let pair = discrete_transforms(&f, &path).unwrap();
            let shifted = shift_transform(&f, &path).unwrap();
            assert_eq!(shifted, pair.mg_values());
            let fine = discrete_transforms_at(&f, &path, Resolution::Fine).unwrap();
            assert_eq!(
                shift_transform_at(&f, &path, Resolution::Fine).unwrap(),
                fine.mg_values()
            );
        }
    }

    #[test]
    fn frozen_after_stopping() {
        let cfg = WalkConfig::new(4, 2.0).unwrap();
        for i in 0..10 {
            let path = random_path(&cfg, i);
            let pair = discrete_transforms(&re_z2(), &path).unwrap();
            if let Some(n) = path.stop_n() {
                for m in n as usize..pair.len() {
                    assert_eq!(pair.mf(m), pair.mf(n as usize));
                    assert_eq!(pair.mg(m), pair.mg(n as usize));
                }
            }
        }
    }

    #[test]
    fn martingale_increments_cancel_over_the_next_digit() {
        // After the first k+1 digits the next step flips sign with the next
        // digit, so the two continuations of M^f average to M^f.
        let cfg = WalkConfig::new(2, 1.0).unwrap();
        let f = re_z2().add(&FourierFunction::sin_mode(1)).unwrap();
        let depth = 10u32;
        for i in 0..(1u64 << (depth - 1)) {
            let base = DigitStream::from_binary_fraction(i, depth - 1).unwrap();
            let mut ends = Vec::new();
            for last in [false, true] {
                let mut digits: Vec<bool> = (1..depth as usize)
                    .map(|j| base.digit(j).unwrap())
                    .collect();
                digits.push(last);
                let path = run_path(&cfg, &DigitStream::from_digits(&digits));
                let pair = discrete_transforms_at(&f, &path, Resolution::Fine).unwrap();
                let k = (depth - 1) as usize;
                ends.push((pair.mf(k - 1)[0], pair.mf(k)[0]));
            }
            assert_eq!(ends[0].0, ends[1].0);
            let up = ends[1].1 - ends[1].0;
            let down = ends[0].1 - ends[0].0;
            assert!((up + down).abs() < 1e-15, "{up} {down}");
        }
    }

    #[test]
    fn subordination_per_step() {
        let cfg = WalkConfig::new(4, 2.0).unwrap();
        let f = re_z2().add(&FourierFunction::sin_mode(3)).unwrap();
        let path = random_path(&cfg, 3);
        let pair = discrete_transforms_at(&f, &path, Resolution::Fine).unwrap();
        let two_delta = 2.0 * cfg.fine_step();
        for l in 1..=path.last_fine_index() as usize {
            let dmf = pair.mf(l)[0] - pair.mf(l - 1)[0];
            let dmg = pair.mg(l)[0] - pair.mg(l - 1)[0];
            let g = f.gradient(path.fine_position(l as u64 - 1)).unwrap();
            let expected = two_delta * (g.dx[0] * g.dx[0] + g.dy[0] * g.dy[0]);
            assert!((dmf * dmf + dmg * dmg - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn streamed_summary_matches_recorded_path() {
        let cfg = WalkConfig::new(4, 2.0).unwrap();
        let f = re_z2();
        for i in 0..5 {
            let options = SummaryOptions {
                shift: true,
                remainder: true,
            };
            let summary = simulate_path_summary(&f, &cfg, 9, i, options).unwrap();
            let path = run_path(
                &cfg,
                &DigitStream::random(9, i, cfg.fine_steps() as usize + 1),
            );
            let pair = discrete_transforms(&f, &path).unwrap();
            assert_eq!(summary.mf, pair.terminal_mf());
            assert_eq!(summary.mg, pair.terminal_mg());
            assert_eq!(summary.shift.as_deref(), Some(pair.terminal_mg()));
            assert_eq!(summary.terminal, path.terminal_position());
            assert_eq!(summary.stop_n, path.stop_n());
            let r = summary.remainder.unwrap()[0];
            assert!((summary.f_terminal[0] - summary.mf[0] - r).abs() < 1e-12);
        }
    }

    #[test]
    fn brownian_increments_have_the_right_moments() {
        let theta = 4.0 / 8f64.powi(4);
        let mut rng = stream(1, Purpose::Brownian, 0);
        let mut d1 = Vec::new();
        let mut d11 = Vec::new();
        let mut d12 = Vec::new();
        for _ in 0..20_000 {
            let s = simulate_stopped_bm([0.2, -0.3], theta, 10, &mut rng).unwrap();
            let a = s.endpoint[0] - 0.2;
            let b = s.endpoint[1] + 0.3;
            d1.push(a);
            d11.push(a * a);
            d12.push(a * b);
            assert!(!s.stopped);
        }
        let m = MeanEstimate::from_samples(&d1);
        assert!(m.mean.abs() < 4.0 * m.std_error);
        let m = MeanEstimate::from_samples(&d11);
        assert!((m.mean - theta).abs() < 4.0 * m.std_error);
        let m = MeanEstimate::from_samples(&d12);
        assert!(m.mean.abs() < 4.0 * m.std_error);
    }

    #[test]
    fn boundary_start_stops_about_half_the_time() {
        // One substep of variance sigma^2 from distance a below the boundary:
        // locally a half-plane, so P(stop) ~ P(G > a/sigma).
        let mut rng = stream(2, Purpose::Brownian, 0);
        let horizon: f64 = 1e-6;
        let a: f64 = 0.001;
        let sigma = horizon.sqrt();
        let oracle = 0.5 * libm_erfc(a / sigma / std::f64::consts::SQRT_2);
        let n = 20_000;
        let stopped = (0..n)
            .filter(|_| {
                simulate_stopped_bm([0.999, 0.0], horizon, 1, &mut rng)
                    .unwrap()
                    .stopped
            })
            .count();
        let p = stopped as f64 / n as f64;
        let se = (oracle * (1.0 - oracle) / n as f64).sqrt();
        assert!((p - oracle).abs() < 4.0 * se + 0.01, "{p} vs {oracle}");
        let sample = simulate_stopped_bm([0.999, 0.0], 1.0, 10, &mut rng).unwrap();
        assert!(sample.stopped);
        assert!((sample.endpoint[0].hypot(sample.endpoint[1]) - 1.0).abs() < 1e-12);
    }

    // Abramowitz-Stegun 7.1.26, enough for a test oracle.
    fn libm_erfc(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.3275911 * x);
        let poly = t
            * (0.254829592
                + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        poly * (-x * x).exp()
    }

    #[test]
    fn boundary_reference_values() {
        let ns = NormSpec::with_p(2.0).unwrap();
        assert!((boundary_lp_reference(&re_z(), &ns) - 0.5f64.sqrt()).abs() < 1e-12);
        let one = FourierFunction::constant(vec![1.0]).unwrap();
        assert!((boundary_lp_reference(&one, &ns) - 1.0).abs() < 1e-12);
        let ns4 = NormSpec::with_p(4.0).unwrap();
        assert!((boundary_lp_reference(&re_z(), &ns4) - 0.375f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_brownian_input() {
        let mut rng = stream(3, Purpose::Brownian, 0);
        assert!(simulate_stopped_bm([0.0, 0.0], 1.0, 0, &mut rng).is_err());
        assert!(simulate_stopped_bm([1.0, 0.0], 1.0, 1, &mut rng).is_err());
    }
}
