//! JSON and CSV emission of experiment reports.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;
use crate::experiments::ExperimentReport;

#[derive(Serialize)]
struct Envelope<'a> {
    experiment: &'a str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<&'a str>,
    config: &'a serde_json::Value,
    passed: bool,
    report: &'a ExperimentReport,
}

/// Pretty JSON of a report with the effective configuration echoed; the
/// timestamp field is left out when `None`.
pub fn render_json(
    report: &ExperimentReport,
    config: &serde_json::Value,
    seed: u64,
    timestamp: Option<&str>,
) -> Result<String> {
    let envelope = Envelope {
        experiment: &report.name,
        seed,
        timestamp,
        config,
        passed: report.passed(),
        report,
    };
    Ok(serde_json::to_string_pretty(&envelope)? + "\n")
}

/// Removes the top-level `timestamp` field from a rendered report.
pub fn strip_timestamp(json: &str) -> Result<String> {
    let mut value: serde_json::Value = serde_json::from_str(json)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("timestamp");
    }
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

/// One row per estimate: `name, value, std_error, exact`.
pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "value", "std_error", "exact"])?;
    for e in &report.estimates {
        w.write_record([
            e.name.clone(),
            format!("{:e}", e.value),
            e.std_error.map(|s| format!("{s:e}")).unwrap_or_default(),
            e.exact.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Milliseconds since the Unix epoch.
pub fn timestamp_now() -> String {
    let ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    ms.to_string()
}

/// Files written by [`write_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub json: PathBuf,
    pub csv: PathBuf,
}

/// Writes `<experiment>_<seed>_<timestamp>.json` and the matching `.csv`.
pub fn write_report(
    report: &ExperimentReport,
    config: &serde_json::Value,
    seed: u64,
    dir: &Path,
) -> Result<ReportFiles> {
    std::fs::create_dir_all(dir)?;
    let stamp = timestamp_now();
    let stem = format!("{}_{}_{}", report.name, seed, stamp);
    let json = dir.join(format!("{stem}.json"));
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&json, render_json(report, config, seed, Some(&stamp))?)?;
    write_csv(report, std::fs::File::create(&csv)?)?;
    Ok(ReportFiles { json, csv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{Estimate, Provenance};

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", serde_json::json!({"N": 4}));
        r.estimate(Estimate::exact("a", 1.5))
            .estimate(Estimate::monte_carlo("b", 0.25, 0.01))
            .target("a", 1.5, Provenance::Trivial)
            .check("a exact", true, "");
        r
    }

    #[test]
    fn timestamp_is_the_only_difference() {
        let r = sample();
        let cfg = serde_json::json!({"seed": 3});
        let a = render_json(&r, &cfg, 3, Some("1")).unwrap();
        let b = render_json(&r, &cfg, 3, Some("2")).unwrap();
        assert_ne!(a, b);
        assert_eq!(strip_timestamp(&a).unwrap(), strip_timestamp(&b).unwrap());
        assert!(a.contains("\"TRIVIAL\""));
    }

    #[test]
    fn files_are_named_and_written() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_report(&sample(), &serde_json::json!({}), 11, dir.path()).unwrap();
        let name = files
            .json
            .file_name()
            .unwrap()
            .to_string_lossy()
            .to_string();
        assert!(name.starts_with("demo_11_") && name.ends_with(".json"));
        let csv = std::fs::read_to_string(&files.csv).unwrap();
        assert!(csv.starts_with("name,value,std_error,exact\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("a,1.5e0,,true"));
    }
}
