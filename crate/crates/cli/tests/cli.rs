use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quake_lab::report::{parse_scan_csv, SummaryFile};
use quake_lab_core::spectrum::PathScanReport;
use tempfile::TempDir;

fn quake_lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quake-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("QUAKE_LAB_PRECISION")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn summary(dir: &Path) -> SummaryFile {
    serde_json::from_str(&read(dir, "summary.json")).unwrap()
}

const SMALL: &str = r#"
[family]
N = 30
l_alpha = "1/n"

[lamination]
kind = "transversal"
w = "pow(n,2)"
weight_over_l = 0.5
"#;

fn with_config(text: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.toml"), text).unwrap();
    dir
}

#[test]
fn counterexample_defaults_dip_only_at_two() {
    let dir = TempDir::new().unwrap();
    let o = quake_lab(&["counterexample", "--out", "r"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&dir.path().join("r"));
    assert_eq!(s.window, 200);
    let ts: Vec<f64> = s.summaries.iter().map(|e| e.t).collect();
    assert_eq!(ts, (0..=8).map(|i| 0.5 * i as f64).collect::<Vec<_>>());
    for e in &s.summaries {
        assert_eq!(e.dip_flag, e.t == 2.0, "t = {}", e.t);
    }
    assert!(read(&dir.path().join("r"), "counterexample.toml").contains("N = 200"));
}

#[test]
fn generated_config_reproduces_the_scan() {
    let dir = TempDir::new().unwrap();
    let o = quake_lab(&["counterexample", "--out", "a", "--window", "40"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = quake_lab(&["scan", "--config", "a/counterexample.toml", "--out", "b"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["scan.csv", "summary.json"] {
        assert_eq!(read(&dir.path().join("a"), f), read(&dir.path().join("b"), f), "{f}");
    }
}

#[test]
fn scan_at_time_zero() {
    let dir = with_config(SMALL);
    let o = quake_lab(&["scan", "--config", "run.toml", "--out", "r", "--t-grid", "0"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(&dir.path().join("r"), "scan.csv");
    assert!(csv.starts_with("t,n,l0,lt,log_ratio,twist_diff_norm\n"));
    let rows = parse_scan_csv(&csv).unwrap();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.log_ratio == 0.0));
}

#[test]
fn summaries_recompute_from_rows() {
    let dir = with_config(SMALL);
    let o = quake_lab(&["scan", "--config", "run.toml", "--out", "r", "--t-grid", "0,1,2,3.5"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("r");
    let rows = parse_scan_csv(&read(&out, "scan.csv")).unwrap();
    let s = summary(&out);
    let grid: Vec<f64> = s.summaries.iter().map(|e| e.t).collect();
    let again = PathScanReport::summarize(&rows, &grid, s.dip_threshold);
    for (a, b) in again.iter().zip(&s.summaries) {
        assert_eq!(a.sup_abs_log_ratio.to_bits(), b.sup_abs_log_ratio.to_bits());
        assert_eq!(a.inf_ratio.to_bits(), b.inf_ratio.unwrap().to_bits());
        assert_eq!(a.dip_flag, b.dip_flag);
    }
}

#[test]
fn worker_count_does_not_change_reports() {
    let dir = with_config(SMALL);
    for (cmd, files) in [
        ("scan", &["scan.csv", "summary.json"][..]),
        ("check", &["check.json"][..]),
        ("build", &["blocks.csv"][..]),
        ("quake", &["quake.csv"][..]),
        ("norms", &["norms.json"][..]),
    ] {
        let mut outs = Vec::new();
        for w in ["1", "8"] {
            let d = format!("{cmd}-{w}");
            let o = quake_lab(&[cmd, "--config", "run.toml", "--out", &d, "--workers", w], dir.path());
            assert!(code(&o) <= 1, "{cmd}: {}", stderr(&o));
            outs.push(files.iter().map(|f| read(&dir.path().join(&d), f)).collect::<Vec<_>>());
        }
        assert_eq!(outs[0], outs[1], "{cmd}");
    }
}

#[test]
fn check_fails_on_the_counterexample() {
    let dir = with_config(SMALL);
    let o = quake_lab(&["check", "--config", "run.toml", "--out", "r"], dir.path());
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&read(&dir.path().join("r"), "check.json")).unwrap();
    assert_eq!(v["theorem1"]["pass"], false);
    assert_eq!(v["necessity"]["verdict"], "Bounded");
}

#[test]
fn check_passes_on_acute_leaves() {
    let dir = with_config(&SMALL.replace("\"pow(n,2)\"", "\"-2*n\""));
    let o = quake_lab(&["check", "--config", "run.toml", "--out", "r"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn exit_codes() {
    let dir = with_config(SMALL);
    let p = dir.path();
    assert_eq!(code(&quake_lab(&["frobnicate", "--config", "run.toml"], p)), 4);
    assert_eq!(code(&quake_lab(&["scan"], p)), 4);
    assert_eq!(code(&quake_lab(&["scan", "--config", "run.toml", "--t-grid", "1,-1"], p)), 4);
    assert_eq!(code(&quake_lab(&["scan", "--config", "run.toml", "--workers", "0"], p)), 4);
    assert_eq!(code(&quake_lab(&["scan", "--config", "missing.toml"], p)), 2);
    fs::write(p.join("out-file"), "").unwrap();
    assert_eq!(code(&quake_lab(&["scan", "--config", "run.toml", "--out", "out-file"], p)), 5);

    fs::write(p.join("bad.toml"), SMALL.replace("\"1/n\"", "\"log(n-5)\"")).unwrap();
    let o = quake_lab(&["build", "--config", "bad.toml"], p);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4") && stderr(&o).contains("n = 1"), "{}", stderr(&o));

    fs::write(p.join("syntax.toml"), SMALL.replace("\"pow(n,2)\"", "\"pow(n,,2)\"")).unwrap();
    let o = quake_lab(&["build", "--config", "syntax.toml"], p);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("column 7"), "{}", stderr(&o));

    // Dual curves this far out exceed the representable range.
    let far = "[family]\nN = 2\nl_alpha = 2.0\n[lamination]\nkind = \"transversal\"\nw = 1000\nweight = 0.5\n";
    fs::write(p.join("far.toml"), far).unwrap();
    assert_eq!(code(&quake_lab(&["build", "--config", "far.toml"], p)), 3);
}

#[test]
fn precision_environment() {
    let dir = with_config(SMALL);
    let run = |v: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_quake-lab"))
            .args(["scan", "--config", "run.toml", "--out", out, "--t-grid", "1,2"])
            .current_dir(dir.path())
            .env("QUAKE_LAB_PRECISION", v)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("bogus", "x")), 2);
    let o = run("extended", "e");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&dir.path().join("e"));
    assert_eq!(s.precision, "extended");
    assert!(s.summaries[1].dip_flag);
}
