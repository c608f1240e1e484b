//! Dyadic intervals of `[0, 1)`, the Haar system, and the two Haar shifts.
//!
//! The Haar function of an interval `I` is negative on the left child and
//! positive on the right child, `h_I = |I|^{-1/2} (1_{I_+} - 1_{I_-})`. With
//! this sign the Rademacher variable of generation `k` is
//! `eps_k = sum_{I in D_k} sqrt|I| h_I`.
//!
//! Coefficient trees are stored densely, one array per generation indexed by
//! position, with `dim` consecutive entries per interval.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// Largest supported tree depth.
pub const MAX_DEPTH: u32 = 24;

/// The dyadic interval `[m 2^-k, (m+1) 2^-k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    generation: u32,
    position: u64,
}

impl DyadicInterval {
    /// The root interval `I_0 = [0, 1)`.
    pub const UNIT: DyadicInterval = DyadicInterval {
        generation: 0,
        position: 0,
    };

    pub fn new(generation: u32, position: u64) -> Result<Self> {
        if generation > 62 {
            return Err(Error::InvalidInput(format!(
                "generation {generation} exceeds 62"
            )));
        }
        if position >= 1u64 << generation {
            return Err(Error::InvalidInput(format!(
                "position {position} out of range for generation {generation}"
            )));
        }
        Ok(Self {
            generation,
            position,
        })
    }

    /// The interval of generation `k` containing `x` in `[0, 1)`.
    pub fn containing(generation: u32, x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidInput(format!("{x} is not in [0, 1)")));
        }
        let scale = (generation as f64).exp2();
        let position = ((x * scale).floor() as u64).min((1u64 << generation) - 1);
        Self::new(generation, position)
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    /// `|I| = 2^-k`, exact in binary floating point.
    pub fn length(&self) -> f64 {
        (-(self.generation as f64)).exp2()
    }

    pub fn start(&self) -> f64 {
        self.position as f64 * self.length()
    }

    pub fn end(&self) -> f64 {
        (self.position + 1) as f64 * self.length()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start() && x < self.end()
    }

    pub fn left(&self) -> Self {
        Self {
            generation: self.generation + 1,
            position: 2 * self.position,
        }
    }

    pub fn right(&self) -> Self {
        Self {
            generation: self.generation + 1,
            position: 2 * self.position + 1,
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.generation > 0).then(|| Self {
            generation: self.generation - 1,
            position: self.position / 2,
        })
    }

    pub fn sibling(&self) -> Option<Self> {
        (self.generation > 0).then_some(Self {
            generation: self.generation,
            position: self.position ^ 1,
        })
    }

    /// True for left children; the root is no one's child.
    pub fn is_left_child(&self) -> bool {
        self.generation > 0 && self.position % 2 == 0
    }

    pub fn is_right_child(&self) -> bool {
        self.generation > 0 && self.position % 2 == 1
    }
}

/// The `L^2`-normalized Haar function `h_I` evaluated at `x`.
pub fn haar_function(interval: DyadicInterval, x: f64) -> f64 {
    if !interval.contains(x) {
        return 0.0;
    }
    let amplitude = 1.0 / interval.length().sqrt();
    if interval.right().contains(x) {
        amplitude
    } else {
        -amplitude
    }
}

/// Mean value plus Haar coefficients `(f, h_I)` for generations `0..depth`,
/// with values in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficients {
    dim: usize,
    depth: u32,
    mean: Vec<f64>,
    levels: Vec<Vec<f64>>,
}

impl HaarCoefficients {
    pub fn zeros(dim: usize, depth: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "value dimension must be positive".into(),
            ));
        }
        check_depth(depth)?;
        let levels = (0..depth).map(|k| vec![0.0; dim << k]).collect();
        Ok(Self {
            dim,
            depth,
            mean: vec![0.0; dim],
            levels,
        })
    }

    /// A tree holding only a mean value.
    pub fn constant(mean: Vec<f64>, depth: u32) -> Result<Self> {
        let mut c = Self::zeros(mean.len(), depth)?;
        c.mean = mean;
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn mean_mut(&mut self) -> &mut [f64] {
        &mut self.mean
    }

    /// Coefficient on `h_I`; zero vector semantics for intervals below the
    /// stored depth are handled by returning `None`.
    pub fn coeff(&self, interval: DyadicInterval) -> Option<&[f64]> {
        let k = interval.generation() as usize;
        let level = self.levels.get(k)?;
        let start = interval.position() as usize * self.dim;
        Some(&level[start..start + self.dim])
    }

    pub fn coeff_mut(&mut self, interval: DyadicInterval) -> Option<&mut [f64]> {
        let dim = self.dim;
        let k = interval.generation() as usize;
        let level = self.levels.get_mut(k)?;
        let start = interval.position() as usize * dim;
        Some(&mut level[start..start + dim])
    }

    pub fn set_coeff(&mut self, interval: DyadicInterval, value: &[f64]) -> Result<()> {
        if value.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "expected {} components, got {}",
                self.dim,
                value.len()
            )));
        }
        let depth = self.depth;
        let slot = self.coeff_mut(interval).ok_or_else(|| {
            Error::InvalidInput(format!(
                "generation {} beyond depth {depth}",
                interval.generation()
            ))
        })?;
        slot.copy_from_slice(value);
        Ok(())
    }

    /// Coefficients of generation `k`, position-major.
    pub fn level(&self, k: u32) -> &[f64] {
        &self.levels[k as usize]
    }

    /// Number of coefficient slots, `2^depth - 1`.
    pub fn len(&self) -> usize {
        (1usize << self.depth) - 1
    }

    pub fn is_empty(&self) -> bool {
        self.depth == 0
    }

    /// All `(interval, coefficient)` pairs, coarse to fine.
    pub fn iter(&self) -> impl Iterator<Item = (DyadicInterval, &[f64])> + '_ {
        self.levels.iter().enumerate().flat_map(move |(k, level)| {
            level.chunks(self.dim).enumerate().map(move |(m, c)| {
                (
                    DyadicInterval {
                        generation: k as u32,
                        position: m as u64,
                    },
                    c,
                )
            })
        })
    }

    /// Euclidean norm of the coefficient sequence, mean excluded.
    pub fn coefficient_norm(&self) -> f64 {
        self.levels
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Re-embed in a deeper tree (extra generations are zero).
    pub fn with_depth(&self, depth: u32) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::DepthTooSmall {
                depth,
                required: self.depth,
            });
        }
        check_depth(depth)?;
        let mut out = self.clone();
        out.depth = depth;
        for k in self.depth..depth {
            out.levels.push(vec![0.0; self.dim << k]);
        }
        Ok(out)
    }
}

fn check_depth(depth: u32) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::InvalidInput(format!(
            "depth {depth} exceeds the maximum {MAX_DEPTH}"
        )));
    }
    Ok(())
}

fn depth_of(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "sample count {len} is not a power of two"
        )));
    }
    let depth = len.trailing_zeros();
    check_depth(depth)?;
    Ok(depth)
}

/// Haar analysis of a dyadic step function.
///
/// `samples` holds `2^K` values of `R^dim`, flattened; atom `i` is the value
/// on `[i 2^-K, (i+1) 2^-K)`.
pub fn analyze(samples: &[f64], dim: usize) -> Result<HaarCoefficients> {
    if dim == 0 || samples.len() % dim != 0 {
        return Err(Error::InvalidInput(format!(
            "{} samples do not split into values of dimension {dim}",
            samples.len()
        )));
    }
    let depth = depth_of(samples.len() / dim)?;
    let mut out = HaarCoefficients::zeros(dim, depth)?;
    // Bottom-up pyramid of interval averages.
    let mut averages = samples.to_vec();
    for k in (0..depth).rev() {
        let count = 1usize << k;
        let scale = 0.5 * (-(k as f64)).exp2().sqrt();
        let mut parent = vec![0.0; count * dim];
        let level = &mut out.levels[k as usize];
        for m in 0..count {
            for j in 0..dim {
                let left = averages[(2 * m) * dim + j];
                let right = averages[(2 * m + 1) * dim + j];
                level[m * dim + j] = scale * (right - left);
                parent[m * dim + j] = 0.5 * (left + right);
            }
        }
        averages = parent;
    }
    out.mean.copy_from_slice(&averages[..dim]);
    Ok(out)
}

/// Scalar convenience for [`analyze`].
pub fn analyze_scalar(samples: &[f64]) -> Result<HaarCoefficients> {
    analyze(samples, 1)
}

/// Values on the `2^depth` atoms of the function with Haar data `c`.
pub fn synthesize(c: &HaarCoefficients, depth: u32) -> Result<Vec<f64>> {
    if depth < c.depth {
        return Err(Error::DepthTooSmall {
            depth,
            required: c.depth,
        });
    }
    check_depth(depth)?;
    let dim = c.dim;
    let mut averages = c.mean.clone();
    for k in 0..depth {
        let count = 1usize << k;
        let mut children = vec![0.0; 2 * count * dim];
        match c.levels.get(k as usize) {
            Some(level) => {
                let inv_sqrt_len = (k as f64 * 0.5).exp2();
                for m in 0..count {
                    for j in 0..dim {
                        let avg = averages[m * dim + j];
                        let jump = level[m * dim + j] * inv_sqrt_len;
                        children[(2 * m) * dim + j] = avg - jump;
                        children[(2 * m + 1) * dim + j] = avg + jump;
                    }
                }
            }
            None => {
                for m in 0..count {
                    for j in 0..dim {
                        let avg = averages[m * dim + j];
                        children[(2 * m) * dim + j] = avg;
                        children[(2 * m + 1) * dim + j] = avg;
                    }
                }
            }
        }
        averages = children;
    }
    Ok(averages)
}

/// The dyadic Hilbert transform: the mean and `h_{I_0}` go to zero and
/// `h_{I_+} -> h_{I_-}`, `h_{I_-} -> -h_{I_+}` for every sibling pair.
pub fn dyadic_shift(c: &HaarCoefficients) -> HaarCoefficients {
    let dim = c.dim;
    let mut out = HaarCoefficients::zeros(dim, c.depth).expect("depth already validated");
    for k in 1..c.depth as usize {
        let src = &c.levels[k];
        let dst = &mut out.levels[k];
        for pair in 0..(1usize << (k - 1)) {
            let left = 2 * pair * dim;
            let right = left + dim;
            for j in 0..dim {
                dst[left + j] = src[right + j];
                dst[right + j] = -src[left + j];
            }
        }
    }
    out
}

/// The classical Haar shift `h_I -> (h_{I_+} - h_{I_-}) / sqrt 2`.
///
/// The image of generation `depth - 1` lives one generation deeper, so the
/// output tree has depth `c.depth() + 1`.
pub fn classical_shift(c: &HaarCoefficients) -> Result<HaarCoefficients> {
    let dim = c.dim;
    let mut out = HaarCoefficients::zeros(dim, c.depth + 1)?;
    for k in 0..c.depth as usize {
        let src = &c.levels[k];
        let dst = &mut out.levels[k + 1];
        for m in 0..(1usize << k) {
            for j in 0..dim {
                let v = src[m * dim + j] * FRAC_1_SQRT_2;
                dst[(2 * m) * dim + j] = -v;
                dst[(2 * m + 1) * dim + j] = v;
            }
        }
    }
    Ok(out)
}

/// Integer Haar data of an integer-valued dyadic step function.
///
/// For each interval `I` the difference `D_I` of the atom sums over the right
/// and left children is kept; it equals `(f, h_I) sqrt|I| 2^K`. Siblings share
/// the same normalization, so the dyadic shift acts on `D` exactly as on the
/// normalized coefficients and the whole round trip runs in integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeHaar {
    depth: u32,
    total: i64,
    diffs: Vec<Vec<i64>>,
}

impl LatticeHaar {
    pub fn analyze(samples: &[i64]) -> Result<Self> {
        let depth = depth_of(samples.len())?;
        let mut diffs = vec![Vec::new(); depth as usize];
        let mut sums = samples.to_vec();
        for k in (0..depth as usize).rev() {
            let (d, parent): (Vec<i64>, Vec<i64>) = sums
                .chunks_exact(2)
                .map(|pair| (pair[1] - pair[0], pair[0] + pair[1]))
                .unzip();
            diffs[k] = d;
            sums = parent;
        }
        Ok(Self {
            depth,
            total: sums[0],
            diffs,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Sum of the atom values, `2^K` times the mean.
    pub fn total(&self) -> i64 {
        self.total
    }

    pub fn diff(&self, interval: DyadicInterval) -> Option<i64> {
        self.diffs
            .get(interval.generation() as usize)
            .map(|level| level[interval.position() as usize])
    }

    pub fn dyadic_shift(&self) -> Self {
        let mut diffs: Vec<Vec<i64>> = self.diffs.iter().map(|d| vec![0; d.len()]).collect();
        for (k, level) in self.diffs.iter().enumerate().skip(1) {
            for pair in 0..level.len() / 2 {
                diffs[k][2 * pair] = level[2 * pair + 1];
                diffs[k][2 * pair + 1] = -level[2 * pair];
            }
        }
        Self {
            depth: self.depth,
            total: 0,
            diffs,
        }
    }

    /// Atom values; fails if the data is not that of an integer function.
    pub fn synthesize(&self) -> Result<Vec<i64>> {
        let mut sums = vec![self.total];
        for level in &self.diffs {
            let mut children = Vec::with_capacity(2 * sums.len());
            for (&s, &d) in sums.iter().zip(level) {
                if (s + d) % 2 != 0 {
                    return Err(Error::InvalidInput(
                        "lattice Haar data has no integer synthesis".into(),
                    ));
                }
                children.push((s - d) / 2);
                children.push((s + d) / 2);
            }
            sums = children;
        }
        Ok(sums)
    }
}
