//! Runnable numerical experiments and the report type they share.

pub mod convergence;
pub mod kernel;
pub mod moments;
pub mod norm;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

pub use convergence::{
    lp_convergence_experiment, transform_convergence_experiment, weak_convergence_experiment,
    LpOptions, Sweep, TransformOptions, WeakOptions,
};
pub use kernel::{
    classical_kernel_pointwise, kernel_average, kernel_average_experiment, kernel_averages,
    kernel_pointwise, GridSpec, KernelAverages, KernelOptions,
};
pub use moments::{moment_consistency_experiment, moments_table};
pub use norm::{
    norm_comparison_experiment, random_fourier, shift_norm_lower_bound, NormBound,
    NormComparisonOptions, OptimizerOptions,
};

/// Where a reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// Stated in the source result.
    #[serde(rename = "PAPER")]
    Paper,
    /// Immediate from the definitions.
    #[serde(rename = "TRIVIAL")]
    Trivial,
    /// Computed independently (quadrature, enumeration, an oracle).
    #[serde(rename = "DERIVED")]
    Derived,
}

/// A measured quantity: exact, or with a Monte Carlo standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub exact: bool,
}

impl Estimate {
    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            std_error: None,
            exact: true,
        }
    }

    pub fn monte_carlo(name: impl Into<String>, value: f64, std_error: f64) -> Self {
        Self {
            name: name.into(),
            value,
            std_error: Some(std_error),
            exact: false,
        }
    }

    pub fn se(&self) -> f64 {
        self.std_error.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Target {
    pub name: String,
    pub value: f64,
    pub provenance: Provenance,
}

/// One asserted property with its outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: serde_json::Value,
    pub estimates: Vec<Estimate>,
    pub targets: Vec<Target>,
    pub checks: Vec<Check>,
    /// Sweep tables, one JSON object per row.
    pub table: Vec<serde_json::Value>,
}

impl ExperimentReport {
    pub fn new(name: &str, parameters: serde_json::Value) -> Self {
        Self {
            name: name.to_string(),
            parameters,
            estimates: Vec::new(),
            targets: Vec::new(),
            checks: Vec::new(),
            table: Vec::new(),
        }
    }

    pub fn estimate(&mut self, e: Estimate) -> &mut Self {
        self.estimates.push(e);
        self
    }

    pub fn target(
        &mut self,
        name: impl Into<String>,
        value: f64,
        provenance: Provenance,
    ) -> &mut Self {
        self.targets.push(Target {
            name: name.into(),
            value,
            provenance,
        });
        self
    }

    pub fn check(
        &mut self,
        name: impl Into<String>,
        passed: bool,
        detail: impl Into<String>,
    ) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
        self
    }

    pub fn find_estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One line per check.
    pub fn verdict_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )
            })
            .collect()
    }
}

/// Maps `f` over `0..n` in parallel and returns the results in index order.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Fallible [`par_map`]; the first error in index order wins.
pub fn try_par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    par_map(n, f).into_iter().collect()
}

/// `b <= a + k sqrt(se_a^2 + se_b^2)` for every consecutive pair.
pub fn non_increasing_within(values: &[(f64, f64)], k: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1].0 <= w[0].0 + k * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt())
}

/// `b < a - k sqrt(se_a^2 + se_b^2)` for every consecutive pair.
pub fn strictly_decreasing_beyond(values: &[(f64, f64)], k: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1].0 < w[0].0 - k * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_serializes_as_tags() {
        let json =
            serde_json::to_string(&[Provenance::Paper, Provenance::Trivial, Provenance::Derived])
                .unwrap();
        assert_eq!(json, r#"["PAPER","TRIVIAL","DERIVED"]"#);
    }

    #[test]
    fn report_verdicts() {
        let mut r = ExperimentReport::new("demo", serde_json::json!({}));
        r.check("a", true, "ok").check("b", false, "off by one");
        assert!(!r.passed());
        assert_eq!(r.verdict_lines()[1], "[FAIL] b: off by one");
    }

    #[test]
    fn trend_helpers() {
        assert!(non_increasing_within(&[(1.0, 0.1), (1.2, 0.1)], 2.0));
        assert!(!non_increasing_within(&[(1.0, 0.1), (1.5, 0.1)], 2.0));
        assert!(strictly_decreasing_beyond(
            &[(1.0, 0.01), (0.5, 0.01), (0.1, 0.0)],
            2.0
        ));
        assert!(!strictly_decreasing_beyond(&[(1.0, 0.1), (0.9, 0.1)], 2.0));
    }

    #[test]
    fn par_map_keeps_order() {
        assert_eq!(par_map(100, |i| i * 2)[37], 74);
        let r: Result<Vec<u64>> = try_par_map(5, |i| {
            if i == 3 {
                Err(crate::Error::InvalidInput("three".into()))
            } else {
                Ok(i)
            }
        });
        assert!(r.is_err());
    }
}
