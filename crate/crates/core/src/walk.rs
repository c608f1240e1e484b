//! The Rademacher sequence, the two-dimensional dyadic random walk `B`, its
//! coarse samples `X_n = B_{nN}` and the stopping time at the band
//! `|X_n| >= 1 - eps`.
//!
//! `eps_k(x)` reads binary digit `k + 1` of `x` (digit 1 is the most
//! significant fractional bit): `-1` for a 0, `+1` for a 1. Step `l >= 1`
//! moves the first coordinate by `eps_l sqrt(2 delta)` when `eps_{l-1} = -1`
//! and the second coordinate otherwise. Positions are kept as integer
//! multiples of `sqrt(2 delta)` and converted to floating point on demand, so
//! every path is bit-reproducible.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::haar::{self, HaarCoefficients, LatticeHaar};
use crate::rng::RandomDigits;
use crate::stats::{pairwise_sum, wilson_interval};

/// Scaling regime `T = N^5 delta`, `theta = N delta`, `eps = 1/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkConfig {
    n: u32,
    horizon: f64,
}

impl WalkConfig {
    /// Rejects `N < 2T`: below that the coarse increment bound
    /// `sqrt(2T) N^{-3/2}` exceeds `eps` and the stopped walk may leave the
    /// disc.
    pub fn new(n: u32, horizon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("N must be a positive integer".into()));
        }
        if n > 64 {
            return Err(Error::Config(format!("N = {n} exceeds the supported 64")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Config(format!("T = {horizon} must be positive")));
        }
        if (n as f64) < 2.0 * horizon {
            return Err(Error::Config(format!(
                "N = {n} < 2T = {}: coarse steps could jump over the stopping band",
                2.0 * horizon
            )));
        }
        Ok(Self { n, horizon })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `N^5`.
    pub fn fine_steps(&self) -> u64 {
        (self.n as u64).pow(5)
    }

    /// `N^4`.
    pub fn coarse_steps(&self) -> u64 {
        (self.n as u64).pow(4)
    }

    /// `delta = T / N^5`.
    pub fn fine_step(&self) -> f64 {
        self.horizon / self.fine_steps() as f64
    }

    /// `theta = N delta = T / N^4`.
    pub fn coarse_step(&self) -> f64 {
        self.horizon / self.coarse_steps() as f64
    }

    /// `eps = 1/N`.
    pub fn epsilon(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Length `sqrt(2 delta)` of every fine increment.
    pub fn increment_size(&self) -> f64 {
        (2.0 * self.fine_step()).sqrt()
    }

    /// Inner radius `1 - eps` of the stopping band.
    pub fn stop_radius(&self) -> f64 {
        1.0 - self.epsilon()
    }

    /// Worst-case coarse increment `N sqrt(2 delta) = sqrt(2T) N^{-3/2}`.
    pub fn max_coarse_increment(&self) -> f64 {
        self.n as f64 * self.increment_size()
    }

    /// Floating-point position of a lattice point.
    #[inline]
    pub fn position(&self, lattice: [i64; 2]) -> [f64; 2] {
        let s = self.increment_size();
        [lattice[0] as f64 * s, lattice[1] as f64 * s]
    }

    #[inline]
    pub(crate) fn in_band(&self, lattice: [i64; 2]) -> bool {
        let [x, y] = self.position(lattice);
        x.hypot(y) >= self.stop_radius()
    }
}

/// A value of a Rademacher variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn from_digit(digit: bool) -> Self {
        if digit {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A finite sequence of binary digits of a point `x` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitStream {
    words: Vec<u64>,
    len: usize,
}

impl DigitStream {
    pub fn empty() -> Self {
        Self {
            words: Vec::new(),
            len: 0,
        }
    }

    /// Digits in order, digit 1 first.
    pub fn from_digits(digits: &[bool]) -> Self {
        let mut words = vec![0u64; digits.len().div_ceil(64)];
        for (i, &d) in digits.iter().enumerate() {
            if d {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Self {
            words,
            len: digits.len(),
        }
    }

    /// The `bits` digits of `x = numerator / 2^bits`.
    pub fn from_binary_fraction(numerator: u64, bits: u32) -> Result<Self> {
        if bits > 63 || numerator >> bits != 0 {
            return Err(Error::InvalidInput(format!(
                "{numerator} / 2^{bits} is not a dyadic point of [0, 1)"
            )));
        }
        let digits: Vec<bool> = (1..=bits)
            .map(|j| (numerator >> (bits - j)) & 1 == 1)
            .collect();
        Ok(Self::from_digits(&digits))
    }

    /// `len` digits from the counter-based stream of path `path_index`.
    pub fn random(seed: u64, path_index: u64, len: usize) -> Self {
        let mut source = RandomDigits::new(seed, path_index);
        let digits: Vec<bool> = (0..len).map(|_| source.next_digit()).collect();
        Self::from_digits(&digits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Digit `j`, counted from 1.
    pub fn digit(&self, j: usize) -> Result<bool> {
        if j == 0 || j > self.len {
            return Err(Error::ExhaustedStream {
                requested: j,
                available: self.len,
            });
        }
        let i = j - 1;
        Ok((self.words[i / 64] >> (i % 64)) & 1 == 1)
    }

    pub fn cursor(&self) -> DigitCursor<'_> {
        DigitCursor {
            stream: self,
            next: 1,
        }
    }
}

/// Sequential reader of a [`DigitStream`].
#[derive(Debug, Clone)]
pub struct DigitCursor<'a> {
    stream: &'a DigitStream,
    next: usize,
}

/// Anything that yields binary digits in order.
pub trait DigitSource {
    fn next_digit(&mut self) -> Option<bool>;
}

impl DigitSource for DigitCursor<'_> {
    #[inline]
    fn next_digit(&mut self) -> Option<bool> {
        let d = self.stream.digit(self.next).ok()?;
        self.next += 1;
        Some(d)
    }
}

impl DigitSource for RandomDigits {
    #[inline]
    fn next_digit(&mut self) -> Option<bool> {
        Some(RandomDigits::next_digit(self))
    }
}

/// `eps_k`, read from digit `k + 1`.
pub fn rademacher(s: &DigitStream, k: usize) -> Result<i64> {
    Ok(Sign::from_digit(s.digit(k + 1)?).value())
}

/// `dB_l` in units of `sqrt(2 delta)`; exactly one coordinate is `+-1`.
pub fn lattice_increment(s: &DigitStream, l: usize) -> Result<[i64; 2]> {
    if l == 0 {
        return Err(Error::InvalidInput("increments start at l = 1".into()));
    }
    let previous = rademacher(s, l - 1)?;
    let current = rademacher(s, l)?;
    Ok(if previous == -1 {
        [current, 0]
    } else {
        [0, current]
    })
}

/// `dB_l = (1(eps_{l-1} = -1) eps_l, 1(eps_{l-1} = +1) eps_l) sqrt(2 delta)`.
pub fn increment(s: &DigitStream, l: usize, delta: f64) -> Result<[f64; 2]> {
    let [a, b] = lattice_increment(s, l)?;
    let size = (2.0 * delta).sqrt();
    Ok([a as f64 * size, b as f64 * size])
}

/// One fine step of the walk: the axis that moves and the direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub axis: usize,
    pub sign: i64,
}

impl Step {
    #[inline]
    pub fn lattice(self) -> [i64; 2] {
        let mut d = [0, 0];
        d[self.axis] = self.sign;
        d
    }
}

/// Callback for every fine step, given the position `B_{l-1}` before it.
pub trait StepObserver {
    fn on_step(&mut self, before: [i64; 2], step: Step);
}

impl StepObserver for () {
    #[inline]
    fn on_step(&mut self, _before: [i64; 2], _step: Step) {}
}

/// Terminal state of a driven walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkOutcome {
    /// Lattice position of the stopped walk at the horizon.
    pub position: [i64; 2],
    /// Coarse stopping index `n_eps`, `None` if the walk never reached the band.
    pub stop_n: Option<u64>,
    /// Fine steps actually taken.
    pub steps: u64,
    /// True if the digit source ran out before the horizon.
    pub exhausted: bool,
}

/// Runs the stopped walk up to `N^5` fine steps, feeding every step to `obs`.
///
/// The band is only tested at coarse indices; after stopping no further
/// digits are consumed.
pub fn drive<S: DigitSource, O: StepObserver>(
    cfg: &WalkConfig,
    src: &mut S,
    obs: &mut O,
) -> WalkOutcome {
    let mut pos = [0i64, 0i64];
    let mut outcome = WalkOutcome {
        position: pos,
        stop_n: None,
        steps: 0,
        exhausted: false,
    };
    if cfg.in_band(pos) {
        outcome.stop_n = Some(0);
        return outcome;
    }
    let Some(first) = src.next_digit() else {
        outcome.exhausted = true;
        return outcome;
    };
    let mut previous_minus = !first;
    let per_block = cfg.n as u64;
    for n in 0..cfg.coarse_steps() {
        for _ in 0..per_block {
            let Some(d) = src.next_digit() else {
                outcome.position = pos;
                outcome.exhausted = true;
                return outcome;
            };
            let step = Step {
                axis: if previous_minus { 0 } else { 1 },
                sign: if d { 1 } else { -1 },
            };
            obs.on_step(pos, step);
            pos[step.axis] += step.sign;
            outcome.steps += 1;
            previous_minus = !d;
        }
        if cfg.in_band(pos) {
            outcome.stop_n = Some(n + 1);
            break;
        }
    }
    outcome.position = pos;
    outcome
}

/// One realization of the stopped walk.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    config: WalkConfig,
    /// Lattice positions `B_0, ..., B_{k_last}`; the process is frozen after.
    lattice: Vec<[i64; 2]>,
    stop_n: Option<u64>,
    exhausted: bool,
}

struct Recorder(Vec<[i64; 2]>);

impl StepObserver for Recorder {
    fn on_step(&mut self, before: [i64; 2], step: Step) {
        let mut next = before;
        next[step.axis] += step.sign;
        self.0.push(next);
    }
}

/// Runs the stopped walk on the digits of `s`.
///
/// A stream shorter than `N^5 + 1` digits ends the path early; the record is
/// then flagged as exhausted.
pub fn run_path(cfg: &WalkConfig, s: &DigitStream) -> PathRecord {
    let mut recorder = Recorder(vec![[0, 0]]);
    let outcome = drive(cfg, &mut s.cursor(), &mut recorder);
    PathRecord {
        config: *cfg,
        lattice: recorder.0,
        stop_n: outcome.stop_n,
        exhausted: outcome.exhausted,
    }
}

impl PathRecord {
    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    /// `n_eps`, or `None` if the walk never stopped.
    pub fn stop_n(&self) -> Option<u64> {
        self.stop_n
    }

    /// `k_eps = N n_eps`.
    pub fn stop_k(&self) -> Option<u64> {
        self.stop_n.map(|n| n * self.config.n as u64)
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    /// Index of the last recorded fine position.
    pub fn last_fine_index(&self) -> u64 {
        (self.lattice.len() - 1) as u64
    }

    /// `B_k` of the stopped process, in lattice units.
    pub fn lattice_position(&self, k: u64) -> [i64; 2] {
        let k = (k as usize).min(self.lattice.len() - 1);
        self.lattice[k]
    }

    /// `dB_l` of the stopped process in lattice units; zero after stopping.
    pub fn lattice_increment(&self, l: u64) -> [i64; 2] {
        if l == 0 || l as usize >= self.lattice.len() {
            return [0, 0];
        }
        let a = self.lattice[l as usize - 1];
        let b = self.lattice[l as usize];
        [b[0] - a[0], b[1] - a[1]]
    }

    /// `B_k` of the stopped process.
    pub fn fine_position(&self, k: u64) -> [f64; 2] {
        self.config.position(self.lattice_position(k))
    }

    /// `X_n = B_{nN}` of the stopped process.
    pub fn coarse_position(&self, n: u64) -> [f64; 2] {
        self.fine_position(n * self.config.n as u64)
    }

    /// Coarse positions `X_0, ..., X_{N^4}`.
    pub fn coarse_positions(&self) -> Vec<[f64; 2]> {
        (0..=self.config.coarse_steps())
            .map(|n| self.coarse_position(n))
            .collect()
    }

    /// Position at the horizon, `X_T^{tau_eps}`.
    pub fn terminal_position(&self) -> [f64; 2] {
        self.fine_position(self.last_fine_index())
    }

    /// Debug dump with columns `n, X1, X2, stopped`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "X1", "X2", "stopped"])?;
        let last_coarse = match self.stop_n {
            Some(n) => n,
            None => self.last_fine_index() / self.config.n as u64,
        };
        for n in 0..=last_coarse {
            let [x, y] = self.coarse_position(n);
            let stopped = self.stop_n.is_some_and(|s| n >= s);
            w.write_record([
                n.to_string(),
                format!("{x:e}"),
                format!("{y:e}"),
                (stopped as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn increment_samples(l: usize, depth: u32) -> Result<(Vec<i64>, Vec<i64>)> {
    if l == 0 {
        return Err(Error::InvalidInput("increments start at l = 1".into()));
    }
    let required = l as u32 + 1;
    if depth < required {
        return Err(Error::DepthTooSmall { depth, required });
    }
    let atoms = 1u64 << depth;
    let mut db1 = Vec::with_capacity(atoms as usize);
    let mut db2 = Vec::with_capacity(atoms as usize);
    for i in 0..atoms {
        let s = DigitStream::from_binary_fraction(i, depth)?;
        let [a, b] = lattice_increment(&s, l)?;
        db1.push(a);
        db2.push(b);
    }
    Ok((db1, db2))
}

/// The dyadic shift applied to the Haar expansions of `dB^1_l` and `dB^2_l`
/// at resolution `2^-depth`.
pub fn shift_increment(
    l: usize,
    delta: f64,
    depth: u32,
) -> Result<(HaarCoefficients, HaarCoefficients)> {
    let (db1, db2) = increment_samples(l, depth)?;
    let size = (2.0 * delta).sqrt();
    let to_float = |v: &[i64]| v.iter().map(|&a| a as f64 * size).collect::<Vec<f64>>();
    let c1 = haar::analyze_scalar(&to_float(&db1))?;
    let c2 = haar::analyze_scalar(&to_float(&db2))?;
    Ok((haar::dyadic_shift(&c1), haar::dyadic_shift(&c2)))
}

/// Exact lattice form of [`shift_increment`] on all `2^depth` atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedIncrement {
    pub l: usize,
    pub depth: u32,
    pub db1: Vec<i64>,
    pub db2: Vec<i64>,
    pub shifted_db1: Vec<i64>,
    pub shifted_db2: Vec<i64>,
}

impl ShiftedIncrement {
    /// `S dB^1 = -dB^2` and `S dB^2 = dB^1` on every atom.
    pub fn is_rotation(&self) -> bool {
        self.shifted_db1
            .iter()
            .zip(&self.db2)
            .all(|(s, b)| *s == -b)
            && self.shifted_db2.iter().zip(&self.db1).all(|(s, a)| s == a)
    }
}

pub fn shift_increment_lattice(l: usize, depth: u32) -> Result<ShiftedIncrement> {
    let (db1, db2) = increment_samples(l, depth)?;
    let shifted_db1 = LatticeHaar::analyze(&db1)?.dyadic_shift().synthesize()?;
    let shifted_db2 = LatticeHaar::analyze(&db2)?.dyadic_shift().synthesize()?;
    Ok(ShiftedIncrement {
        l,
        depth,
        db1,
        db2,
        shifted_db1,
        shifted_db2,
    })
}

/// Higher absolute moment `E|dX^i|^p` with the constant `C` in `C theta^{p/2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HigherMoment {
    pub p: u32,
    pub moment: [f64; 2],
    pub constant: [f64; 2],
}

/// Exact conditional moments of `dX_{n+1}` given `eps_{nN}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: u32,
    pub prev_sign: Sign,
    pub delta: f64,
    pub theta: f64,
    /// Number of equally likely continuations, `2^N`.
    pub continuations: u64,
    /// Lattice sums over all continuations: `a, b, a^2, b^2, ab`.
    pub lattice_sums: [i128; 5],
    pub mean: [f64; 2],
    pub second: [[f64; 2]; 2],
    pub higher: Vec<HigherMoment>,
}

impl MomentReport {
    /// `E[(dX^1)^2] = (N-1) delta + 2 delta 1(prev = -1)`, similarly for the
    /// second coordinate with `prev = +1`, and no cross moment.
    pub fn predicted_second(n: u32, delta: f64, prev: Sign) -> [[f64; 2]; 2] {
        let base = (n as f64 - 1.0) * delta;
        let extra = |s: Sign| if prev == s { 2.0 * delta } else { 0.0 };
        [
            [base + extra(Sign::Minus), 0.0],
            [0.0, base + extra(Sign::Plus)],
        ]
    }
}

/// Largest `N` accepted by [`conditional_moments_exact`].
pub const MAX_ENUMERATION: u32 = 20;

/// Enumerates all `2^N` continuations after `eps_{nN} = prev_sign` and
/// accumulates the moments of `dX_{n+1}` in integers, scaling by `delta` once
/// at the end.
pub fn conditional_moments_exact(n: u32, delta: f64, prev_sign: Sign) -> Result<MomentReport> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    if n > MAX_ENUMERATION {
        return Err(Error::EnumerationTooLarge(n));
    }
    const POWERS: [u32; 3] = [3, 4, 6];
    let mut sums = [0i128; 5];
    let mut abs_sums = [[0i128; 2]; 3];
    for mask in 0u64..(1u64 << n) {
        let mut previous_minus = prev_sign == Sign::Minus;
        let (mut a, mut b) = (0i64, 0i64);
        for j in 0..n {
            let e = if (mask >> j) & 1 == 1 { 1 } else { -1 };
            if previous_minus {
                a += e;
            } else {
                b += e;
            }
            previous_minus = e == -1;
        }
        let (a, b) = (a as i128, b as i128);
        sums[0] += a;
        sums[1] += b;
        sums[2] += a * a;
        sums[3] += b * b;
        sums[4] += a * b;
        for (slot, &p) in abs_sums.iter_mut().zip(&POWERS) {
            slot[0] += a.abs().pow(p);
            slot[1] += b.abs().pow(p);
        }
    }
    let count = 1u64 << n;
    let step = (2.0 * delta).sqrt();
    let theta = n as f64 * delta;
    let avg = |s: i128| s as f64 / count as f64;
    let two_delta = 2.0 * delta;
    let higher = POWERS
        .iter()
        .zip(&abs_sums)
        .map(|(&p, s)| {
            let scale = step.powi(p as i32);
            let moment = [avg(s[0]) * scale, avg(s[1]) * scale];
            let norm = theta.powf(p as f64 / 2.0);
            HigherMoment {
                p,
                moment,
                constant: [moment[0] / norm, moment[1] / norm],
            }
        })
        .collect();
    Ok(MomentReport {
        n,
        prev_sign,
        delta,
        theta,
        continuations: count,
        lattice_sums: sums,
        mean: [avg(sums[0]) * step, avg(sums[1]) * step],
        second: [
            [avg(sums[2]) * two_delta, avg(sums[4]) * two_delta],
            [avg(sums[4]) * two_delta, avg(sums[3]) * two_delta],
        ],
        higher,
    })
}

/// Monte Carlo estimate of `P(tau_eps > T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub probability: f64,
    pub std_error: f64,
    /// 95% Wilson score interval.
    pub interval: (f64, f64),
    pub survived: usize,
    pub paths: usize,
}

pub fn survival_probability(
    cfg: &WalkConfig,
    n_paths: usize,
    seed: u64,
) -> Result<SurvivalEstimate> {
    if n_paths == 0 {
        return Err(Error::InvalidInput("at least one path is required".into()));
    }
    let alive: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut digits = RandomDigits::new(seed, i);
            let outcome = drive(cfg, &mut digits, &mut ());
            if outcome.stop_n.is_none() {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let survived = pairwise_sum(&alive) as usize;
    let p = survived as f64 / n_paths as f64;
    Ok(SurvivalEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / n_paths as f64).sqrt(),
        interval: wilson_interval(survived, n_paths, 1.96),
        survived,
        paths: n_paths,
    })
}
