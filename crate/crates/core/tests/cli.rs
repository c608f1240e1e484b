use std::path::Path;
use std::process::{Command, Output};

use haarflow::report::strip_timestamp;

fn haarflow(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_haarflow"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("HAARFLOW_THREADS", t),
        None => cmd.env_remove("HAARFLOW_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn only_json(dir: &Path) -> String {
    let files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    assert_eq!(files.len(), 1, "{files:?}");
    std::fs::read_to_string(&files[0]).unwrap()
}

#[test]
fn verify_shift_prints_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = haarflow(
        &["verify-shift", "--depth", "12", "--output-dir", out],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("𝒮dB = dB^⊤ exact on 2^13 atoms"));
    let csv = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|e| e == "csv")
        })
        .count();
    assert_eq!(csv, 1);
}

#[test]
fn moments_table_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = haarflow(
        &[
            "moments",
            "--N",
            "4",
            "--output-dir",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("E dX1^2 | eps=-"));
}

#[test]
fn list_presets_names_every_preset() {
    let o = haarflow(&["list-presets"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["cos", "sin", "re_z2", "re_z3_plus_im_z2", "const"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn invalid_configuration_exits_with_2() {
    assert_eq!(
        haarflow(&["lp-convergence", "--N", "4", "--T", "4"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        haarflow(&["lp-convergence", "--p", "1"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        haarflow(&["moments", "--N", "4"], Some("zero"))
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"N": 8, "colour": "red"}"#).unwrap();
    let o = haarflow(&["lp-convergence", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = haarflow(
        &[
            "lp-convergence",
            "--N",
            "4",
            "--T",
            "2",
            "--paths",
            "200",
            "--output-dir",
            out,
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("[FAIL]"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"N": 4, "T": 2, "function": "re_z2", "paths": 300, "seed": 5, "output_dir": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = haarflow(
        &[
            "weak-convergence",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "9",
        ],
        None,
    );
    assert!(
        o.status.code().is_some_and(|c| c == 0 || c == 1),
        "{}",
        stdout(&o)
    );
    let json: serde_json::Value = serde_json::from_str(&only_json(&out)).unwrap();
    assert_eq!(json["seed"], 9);
    assert_eq!(json["config"]["seed"], 9);
    assert_eq!(json["config"]["paths"], 300);
    assert_eq!(json["config"]["function"], "re_z2");
    assert_eq!(json["config"]["experiment"], "weak-convergence");
}

#[test]
fn reports_identical_across_thread_counts() {
    let mut reports = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for threads in ["1", "4", "8"] {
        let args = [
            "transform-convergence",
            "--preset",
            "re_z3_plus_im_z2",
            "--N",
            "4",
            "--T",
            "2",
            "--paths",
            "400",
            "--seed",
            "3",
            "--output-dir",
            out,
        ];
        let o = haarflow(&args, Some(threads));
        assert!(o.status.code().is_some_and(|c| c == 0 || c == 1));
        reports.push(strip_timestamp(&only_json(dir.path())).unwrap());
        for entry in std::fs::read_dir(dir.path()).unwrap() {
            std::fs::remove_file(entry.unwrap().path()).unwrap();
        }
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}
