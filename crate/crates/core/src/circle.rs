//! `R^d`-valued trigonometric polynomials on the unit circle.
//!
//! A function `a0 + sum_n (a_n cos n t + b_n sin n t)` extends harmonically to
//! the disc as the real part of the polynomial `a0 + sum_n (a_n - i b_n) z^n`,
//! so values, gradients and the conjugate function are all available in closed
//! form.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radius tolerance for points treated as lying on the closed disc.
pub const DISC_TOLERANCE: f64 = 1e-12;

/// Default number of quadrature nodes on the circle.
pub const DEFAULT_QUADRATURE: usize = 4096;

/// A trigonometric polynomial of degree `degree` with values in `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFourier", into = "RawFourier")]
pub struct FourierFunction {
    dim: usize,
    degree: usize,
    a0: Vec<f64>,
    cos_coeffs: Vec<Vec<f64>>,
    sin_coeffs: Vec<Vec<f64>>,
}

/// JSON layout: `{dim, degree, a0, cos, sin}`, `cos[n-1]` holding `a_n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawFourier {
    dim: usize,
    degree: usize,
    a0: Vec<f64>,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl TryFrom<RawFourier> for FourierFunction {
    type Error = Error;

    fn try_from(raw: RawFourier) -> Result<Self> {
        let f = FourierFunction::new(raw.a0, raw.cos, raw.sin)?;
        if f.dim != raw.dim || f.degree != raw.degree {
            return Err(Error::InvalidInput(format!(
                "declared dim/degree ({}, {}) disagree with coefficients ({}, {})",
                raw.dim, raw.degree, f.dim, f.degree
            )));
        }
        Ok(f)
    }
}

impl From<FourierFunction> for RawFourier {
    fn from(f: FourierFunction) -> Self {
        RawFourier {
            dim: f.dim,
            degree: f.degree,
            a0: f.a0,
            cos: f.cos_coeffs,
            sin: f.sin_coeffs,
        }
    }
}

/// Gradient of an `R^d`-valued function of the plane: a `2 x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

/// Rotation `[[0, -1], [1, 0]]` applied to the 2-vector structure of a
/// gradient: `(row_x, row_y) -> (-row_y, row_x)`.
pub fn perp(v: &Gradient) -> Gradient {
    Gradient {
        dx: v.dy.iter().map(|y| -y).collect(),
        dy: v.dx.clone(),
    }
}

/// `|v|_q` on `R^d`; `q = f64::INFINITY` gives the max norm.
pub fn value_norm(v: &[f64], q: f64) -> f64 {
    if v.len() == 1 {
        return v[0].abs();
    }
    if q.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else if q == 2.0 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else if q == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else {
        v.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Exponents and quadrature size for boundary `L^p` norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    /// Exponent of the `L^p` norm, `p > 1`.
    pub p: f64,
    /// Exponent of the value-space norm `|.|_q`, `1 <= q <= inf`.
    pub q: f64,
    /// Number of equispaced quadrature nodes, a power of two.
    pub quadrature: usize,
}

impl NormSpec {
    pub fn new(p: f64, q: f64, quadrature: usize) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("p = {p} must be finite and > 1")));
        }
        if !(q >= 1.0) {
            return Err(Error::Config(format!("q = {q} must be >= 1")));
        }
        if quadrature < 4 || !quadrature.is_power_of_two() {
            return Err(Error::Config(format!(
                "quadrature size {quadrature} must be a power of two >= 4"
            )));
        }
        Ok(Self { p, q, quadrature })
    }

    pub fn with_p(p: f64) -> Result<Self> {
        Self::new(p, 2.0, DEFAULT_QUADRATURE)
    }

    /// Checks `Q >= 4 degree`.
    pub fn check_for(&self, f: &FourierFunction) -> Result<()> {
        if self.quadrature < 4 * f.degree() {
            return Err(Error::Config(format!(
                "quadrature size {} below 4 x degree {}",
                self.quadrature,
                f.degree()
            )));
        }
        Ok(())
    }
}

impl FourierFunction {
    /// Builds `a0 + sum (cos[n-1] cos n t + sin[n-1] sin n t)`.
    pub fn new(a0: Vec<f64>, cos: Vec<Vec<f64>>, sin: Vec<Vec<f64>>) -> Result<Self> {
        let dim = a0.len();
        if dim == 0 {
            return Err(Error::InvalidInput(
                "value dimension must be positive".into(),
            ));
        }
        if cos.len() != sin.len() {
            return Err(Error::InvalidInput(format!(
                "{} cosine rows but {} sine rows",
                cos.len(),
                sin.len()
            )));
        }
        if cos.iter().chain(&sin).any(|row| row.len() != dim) {
            return Err(Error::InvalidInput(format!(
                "every coefficient row must have {dim} components"
            )));
        }
        let all_finite = a0
            .iter()
            .chain(cos.iter().flatten())
            .chain(sin.iter().flatten());
        if !all_finite.into_iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        Ok(Self {
            dim,
            degree: cos.len(),
            a0,
            cos_coeffs: cos,
            sin_coeffs: sin,
        })
    }

    pub fn constant(value: Vec<f64>) -> Result<Self> {
        Self::new(value, Vec::new(), Vec::new())
    }

    /// Scalar `cos n t`, the boundary values of `Re z^n`.
    pub fn cos_mode(n: usize) -> Self {
        Self::scalar_mode(n, true)
    }

    /// Scalar `sin n t`, the boundary values of `Im z^n`.
    pub fn sin_mode(n: usize) -> Self {
        Self::scalar_mode(n, false)
    }

    fn scalar_mode(n: usize, cosine: bool) -> Self {
        assert!(n >= 1, "mode index starts at 1");
        let mut cos = vec![vec![0.0]; n];
        let mut sin = vec![vec![0.0]; n];
        if cosine {
            cos[n - 1][0] = 1.0;
        } else {
            sin[n - 1][0] = 1.0;
        }
        Self {
            dim: 1,
            degree: n,
            a0: vec![0.0],
            cos_coeffs: cos,
            sin_coeffs: sin,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn a0(&self) -> &[f64] {
        &self.a0
    }

    /// `a_n`, for `n` in `1..=degree`.
    pub fn cos_coeff(&self, n: usize) -> &[f64] {
        &self.cos_coeffs[n - 1]
    }

    /// `b_n`, for `n` in `1..=degree`.
    pub fn sin_coeff(&self, n: usize) -> &[f64] {
        &self.sin_coeffs[n - 1]
    }

    /// Sum of two functions with the same value dimension.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidInput("value dimensions differ".into()));
        }
        let degree = self.degree.max(other.degree);
        let row = |f: &Self, n: usize, cosine: bool| -> Vec<f64> {
            if n <= f.degree {
                if cosine {
                    f.cos_coeffs[n - 1].clone()
                } else {
                    f.sin_coeffs[n - 1].clone()
                }
            } else {
                vec![0.0; f.dim]
            }
        };
        let sum = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let cos = (1..=degree)
            .map(|n| sum(row(self, n, true), row(other, n, true)))
            .collect();
        let sin = (1..=degree)
            .map(|n| sum(row(self, n, false), row(other, n, false)))
            .collect();
        Self::new(sum(self.a0.clone(), other.a0.clone()), cos, sin)
    }

    /// Componentwise `c * f`.
    pub fn scale(&self, c: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| c * x).collect::<Vec<f64>>();
        Self {
            dim: self.dim,
            degree: self.degree,
            a0: s(&self.a0),
            cos_coeffs: self.cos_coeffs.iter().map(s).collect(),
            sin_coeffs: self.sin_coeffs.iter().map(s).collect(),
        }
    }

    /// Complex coefficient `a_n - i b_n` of `z^n` for component `j`.
    #[inline]
    fn analytic_coeff(&self, n: usize, j: usize) -> Complex64 {
        Complex64::new(self.cos_coeffs[n - 1][j], -self.sin_coeffs[n - 1][j])
    }

    fn check_disc(z: [f64; 2]) -> Result<()> {
        if z[0].hypot(z[1]) > 1.0 + DISC_TOLERANCE || !z[0].is_finite() || !z[1].is_finite() {
            return Err(Error::Domain { x: z[0], y: z[1] });
        }
        Ok(())
    }

    /// Harmonic extension at a point of the closed disc.
    pub fn eval(&self, z: [f64; 2]) -> Result<Vec<f64>> {
        Self::check_disc(z)?;
        let mut out = vec![0.0; self.dim];
        self.eval_into(z, &mut out);
        Ok(out)
    }

    /// Harmonic extension without the domain check.
    pub fn eval_into(&self, z: [f64; 2], out: &mut [f64]) {
        let z = Complex64::new(z[0], z[1]);
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in (1..=self.degree).rev() {
                acc = (acc + self.analytic_coeff(n, j)) * z;
            }
            *slot = self.a0[j] + acc.re;
        }
    }

    /// Boundary value at angle `theta`.
    pub fn boundary(&self, theta: f64) -> Vec<f64> {
        let mut out = self.a0.clone();
        for n in 1..=self.degree {
            let (s, c) = (n as f64 * theta).sin_cos();
            for (j, slot) in out.iter_mut().enumerate() {
                *slot += self.cos_coeffs[n - 1][j] * c + self.sin_coeffs[n - 1][j] * s;
            }
        }
        out
    }

    /// The conjugate function: `a0 -> 0`, `cos n t -> sin n t`,
    /// `sin n t -> -cos n t`.
    pub fn conjugate(&self) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            a0: vec![0.0; self.dim],
            cos_coeffs: self
                .sin_coeffs
                .iter()
                .map(|row| row.iter().map(|b| -b).collect())
                .collect(),
            sin_coeffs: self.cos_coeffs.clone(),
        }
    }

    /// Exact gradient of the harmonic extension.
    pub fn gradient(&self, z: [f64; 2]) -> Result<Gradient> {
        Self::check_disc(z)?;
        let mut g = Gradient {
            dx: vec![0.0; self.dim],
            dy: vec![0.0; self.dim],
        };
        self.gradient_into(z, &mut g.dx, &mut g.dy);
        Ok(g)
    }

    /// Gradient without the domain check, written into caller buffers.
    ///
    /// With `Phi' = sum n c_n z^(n-1)`, the Cauchy-Riemann equations give
    /// `f_x = Re Phi'` and `f_y = -Im Phi'`.
    #[inline]
    pub fn gradient_into(&self, z: [f64; 2], dx: &mut [f64], dy: &mut [f64]) {
        let z = Complex64::new(z[0], z[1]);
        for j in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in (1..=self.degree).rev() {
                acc = acc * z + self.analytic_coeff(n, j) * n as f64;
            }
            dx[j] = acc.re;
            dy[j] = -acc.im;
        }
    }

    /// Second-order Taylor remainder `f(z + h) - f(z) - grad f(z) . h`,
    /// evaluated as `Re sum_{m >= 2} Phi^(m)(z) h^m / m!` so that it vanishes
    /// identically for linear `f`.
    pub fn taylor_remainder_into(&self, z: [f64; 2], h: [f64; 2], out: &mut [f64]) {
        let z = Complex64::new(z[0], z[1]);
        let h = Complex64::new(h[0], h[1]);
        let m = self.degree;
        let mut b = vec![Complex64::new(0.0, 0.0); m + 1];
        for (j, slot) in out.iter_mut().enumerate() {
            if m < 2 {
                *slot = 0.0;
                continue;
            }
            b[0] = Complex64::new(0.0, 0.0);
            for n in 1..=m {
                b[n] = self.analytic_coeff(n, j);
            }
            for i in 0..m {
                for k in (i..m).rev() {
                    let next = b[k + 1];
                    b[k] += z * next;
                }
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (2..=m).rev() {
                acc = acc * h + b[k];
            }
            *slot = (acc * h * h).re;
        }
    }

    /// `((1/2pi) int |f(e^it)|_q^p dt)^(1/p)` by the trapezoid rule.
    pub fn lp_norm_boundary(&self, ns: &NormSpec) -> f64 {
        let q = ns.quadrature;
        let samples: Vec<f64> = (0..q)
            .map(|i| {
                let theta = TAU * i as f64 / q as f64;
                value_norm(&self.boundary(theta), ns.q).powf(ns.p)
            })
            .collect();
        (crate::stats::pairwise_sum(&samples) / q as f64).powf(1.0 / ns.p)
    }

    /// The same norm against arc length: `(2 pi)^(1/p)` times the probability
    /// normalized value.
    pub fn lp_norm_boundary_arclength(&self, ns: &NormSpec) -> f64 {
        TAU.powf(1.0 / ns.p) * self.lp_norm_boundary(ns)
    }

    /// `|a0|^2 + (1/2) sum (|a_n|^2 + |b_n|^2)`, the squared `L^2` norm for
    /// the Euclidean value norm.
    pub fn parseval_energy(&self) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        sq(&self.a0)
            + 0.5
                * self
                    .cos_coeffs
                    .iter()
                    .chain(&self.sin_coeffs)
                    .map(|row| sq(row))
                    .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eval_examples() {
        let cos = FourierFunction::cos_mode(1);
        assert_eq!(cos.eval([0.0, 0.0]).unwrap(), vec![0.0]);
        assert!(close(cos.eval([0.5, 0.0]).unwrap()[0], 0.5, 1e-15));
        let c = FourierFunction::constant(vec![2.0, -1.0]).unwrap();
        assert_eq!(c.eval([0.3, -0.4]).unwrap(), vec![2.0, -1.0]);
        assert!(matches!(cos.eval([1.0, 0.1]), Err(Error::Domain { .. })));
        assert!(cos.eval([1.0, 0.0]).is_ok());
    }

    #[test]
    fn boundary_matches_extension() {
        let f = FourierFunction::new(
            vec![0.5],
            vec![vec![1.0], vec![-0.25], vec![0.125]],
            vec![vec![0.0], vec![2.0], vec![-1.0]],
        )
        .unwrap();
        for i in 0..16 {
            let t = TAU * i as f64 / 16.0;
            let inner = f.eval([t.cos(), t.sin()]).unwrap()[0];
            assert!(close(inner, f.boundary(t)[0], 1e-13));
        }
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(
            FourierFunction::cos_mode(1).conjugate(),
            FourierFunction::sin_mode(1)
        );
        assert_eq!(
            FourierFunction::sin_mode(1).conjugate(),
            FourierFunction::cos_mode(1).scale(-1.0)
        );
    }

    #[test]
    fn gradient_examples() {
        let re_z = FourierFunction::cos_mode(1);
        let im_z = FourierFunction::sin_mode(1);
        let re_z2 = FourierFunction::cos_mode(2);
        for z in [[0.0, 0.0], [0.3, -0.5], [-0.7, 0.1]] {
            let g = re_z.gradient(z).unwrap();
            assert_eq!((g.dx[0], g.dy[0]), (1.0, 0.0));
            let g = im_z.gradient(z).unwrap();
            assert_eq!((g.dx[0], g.dy[0]), (0.0, 1.0));
            let g = re_z2.gradient(z).unwrap();
            assert!(close(g.dx[0], 2.0 * z[0], 1e-15));
            assert!(close(g.dy[0], -2.0 * z[1], 1e-15));
        }
        assert!(re_z.gradient([0.9, 0.9]).is_err());
    }

    #[test]
    fn taylor_remainder_matches_direct_difference() {
        let f = FourierFunction::new(
            vec![0.5],
            vec![vec![0.3], vec![-1.0], vec![0.2]],
            vec![vec![0.1], vec![0.7], vec![-0.4]],
        )
        .unwrap();
        let z = [0.3, -0.2];
        for h in [[1e-2, 0.0], [0.0, -1e-2], [0.05, 0.02]] {
            let mut r = [0.0];
            f.taylor_remainder_into(z, h, &mut r);
            let g = f.gradient(z).unwrap();
            let a = f.eval([z[0] + h[0], z[1] + h[1]]).unwrap()[0];
            let b = f.eval(z).unwrap()[0];
            let direct = a - b - g.dx[0] * h[0] - g.dy[0] * h[1];
            assert!(close(r[0], direct, 1e-13), "{} {}", r[0], direct);
        }
        let mut r = [1.0];
        FourierFunction::cos_mode(1).taylor_remainder_into(z, [0.1, 0.1], &mut r);
        assert_eq!(r[0], 0.0);
        // Re z^2: remainder Re h^2.
        FourierFunction::cos_mode(2).taylor_remainder_into(z, [0.0, 0.1], &mut r);
        assert!(close(r[0], -0.01, 1e-16));
    }

    #[test]
    fn perp_examples() {
        let g = Gradient {
            dx: vec![1.0],
            dy: vec![0.0],
        };
        assert_eq!(
            perp(&g),
            Gradient {
                dx: vec![0.0],
                dy: vec![1.0]
            }
        );
        let g = Gradient {
            dx: vec![0.0],
            dy: vec![1.0],
        };
        assert_eq!(
            perp(&g),
            Gradient {
                dx: vec![-1.0],
                dy: vec![0.0]
            }
        );
    }

    #[test]
    fn conjugate_gradient_is_perp() {
        let f = FourierFunction::new(
            vec![1.0, 0.0],
            vec![vec![0.3, 1.0], vec![-1.2, 0.5]],
            vec![vec![0.7, -0.2], vec![0.1, 0.0]],
        )
        .unwrap();
        let g = f.conjugate();
        for z in [[0.2, 0.1], [-0.6, 0.3], [0.0, -0.9]] {
            let lhs = g.gradient(z).unwrap();
            let rhs = perp(&f.gradient(z).unwrap());
            for j in 0..2 {
                assert!(close(lhs.dx[j], rhs.dx[j], 1e-14));
                assert!(close(lhs.dy[j], rhs.dy[j], 1e-14));
            }
        }
    }

    #[test]
    fn lp_norm_examples() {
        let ns = NormSpec::with_p(2.0).unwrap();
        let cos = FourierFunction::cos_mode(1);
        assert!(close(
            cos.lp_norm_boundary(&ns),
            std::f64::consts::FRAC_1_SQRT_2,
            1e-14
        ));
        assert!(close(
            FourierFunction::sin_mode(1).lp_norm_boundary(&ns),
            std::f64::consts::FRAC_1_SQRT_2,
            1e-14
        ));
        let one = FourierFunction::constant(vec![1.0]).unwrap();
        for p in [1.5, 2.0, 3.0, 7.0] {
            let ns = NormSpec::with_p(p).unwrap();
            assert!(close(one.lp_norm_boundary(&ns), 1.0, 1e-14));
        }
        let ns4 = NormSpec::with_p(4.0).unwrap();
        assert!(close(
            cos.lp_norm_boundary(&ns4),
            0.375f64.powf(0.25),
            1e-14
        ));
    }

    #[test]
    fn arclength_normalization() {
        let ns = NormSpec::with_p(2.0).unwrap();
        let one = FourierFunction::constant(vec![1.0]).unwrap();
        assert!(close(
            one.lp_norm_boundary_arclength(&ns),
            TAU.sqrt(),
            1e-13
        ));
    }

    #[test]
    fn norm_spec_validation() {
        assert!(NormSpec::new(1.0, 2.0, 64).is_err());
        assert!(NormSpec::new(2.0, 0.5, 64).is_err());
        assert!(NormSpec::new(2.0, 2.0, 100).is_err());
        assert!(NormSpec::new(2.0, f64::INFINITY, 64).is_ok());
        let ns = NormSpec::new(2.0, 2.0, 8).unwrap();
        assert!(ns.check_for(&FourierFunction::cos_mode(3)).is_err());
    }

    #[test]
    fn value_norms() {
        let v = [3.0, -4.0];
        assert_eq!(value_norm(&v, 2.0), 5.0);
        assert_eq!(value_norm(&v, 1.0), 7.0);
        assert_eq!(value_norm(&v, f64::INFINITY), 4.0);
        assert!(close(value_norm(&v, 3.0), (27.0f64 + 64.0).cbrt(), 1e-14));
    }

    #[test]
    fn json_layout() {
        let f = FourierFunction::new(vec![1.0], vec![vec![2.0]], vec![vec![3.0]]).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(
            text,
            r#"{"dim":1,"degree":1,"a0":[1.0],"cos":[[2.0]],"sin":[[3.0]]}"#
        );
        let back: FourierFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"dim":2,"degree":1,"a0":[1.0],"cos":[[2.0]],"sin":[[3.0]]}"#;
        assert!(serde_json::from_str::<FourierFunction>(bad).is_err());
    }
}
