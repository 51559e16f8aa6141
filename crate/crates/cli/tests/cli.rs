//! End-to-end checks of the binary: exit codes, file output, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oqr"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("oqr-cli-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

const FAST_SINGLE: &str = r#"
[initial]
mode = "single"
J = 0
M = 0

[pulse]
E0_V_per_m = 2e6

[basis]
J_max = 6

[simulate]
trace_points = 48
theta_points = 25
density_time_points = 6
free_periods = 1.1

[scan]
E0_min_V_per_m = 1e5
E0_max_V_per_m = 2e6
E0_count = 3
delta1_min_THz = 0.0
delta1_max_THz = 0.0
delta1_count = 1
"#;

#[test]
fn spectrum_writes_csv() {
    let dir = tmpdir("spectrum");
    let status = bin()
        .args(["spectrum", "--points", "33", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("omega_THz,abs_A\n"));
    assert_eq!(csv.lines().count(), 34);
    assert!(dir.join("metadata.json").exists());
    assert!(dir.join("plot_spectrum.py").exists());
}

#[test]
fn simulate_single_state_with_trajectory() {
    let dir = tmpdir("simulate");
    let cfg = write_config(&dir, FAST_SINGLE);
    let out = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&dir)
        .args(["simulate", "--trajectory"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("A_OQR"), "{stdout}");
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("t_ps,cos_theta\n"));
    assert_eq!(trace.lines().count(), 49);
    assert!(dir.join("density.csv").exists());
    assert!(dir.join("report.json").exists());
    let traj = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t_ps,re_c0,im_c0,re_c1,im_c1"));
}

#[test]
fn scan_is_deterministic_across_thread_counts() {
    let dir1 = tmpdir("scan1");
    let cfg1 = write_config(&dir1, FAST_SINGLE);
    let status = bin()
        .args(["--config"])
        .arg(&cfg1)
        .args(["--out"])
        .arg(&dir1)
        .args(["--threads", "1", "scan"])
        .status()
        .unwrap();
    assert!(status.success());

    let dir2 = tmpdir("scan2");
    let cfg2 = write_config(&dir2, FAST_SINGLE);
    let status = bin()
        .args(["--config"])
        .arg(&cfg2)
        .args(["--out"])
        .arg(&dir2)
        .args(["--threads", "3", "scan"])
        .status()
        .unwrap();
    assert!(status.success());

    for name in ["scan_a_oqr.csv", "scan_points.csv", "scan_phases.csv"] {
        let a = fs::read(dir1.join(name)).unwrap();
        let b = fs::read(dir2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between thread counts");
    }

    // Matrix layout: header row of delta1 values, first column of E0 values.
    let matrix = fs::read_to_string(dir1.join("scan_a_oqr.csv")).unwrap();
    let mut lines = matrix.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "E0_V_per_m,0");
    assert_eq!(lines.clone().count(), 3);
    for line in lines {
        assert_eq!(line.split(',').count(), 2);
        let e0: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert!((1e5..=2e6).contains(&e0));
    }
}

#[test]
fn magnus_orders_csv_layout() {
    let dir = tmpdir("orders");
    let cfg = write_config(
        &dir,
        r#"
[initial]
mode = "single"

[pulse]
E0_V_per_m = 8e6

[scan]
E0_min_V_per_m = 1e6
E0_max_V_per_m = 8e6
E0_count = 3

[magnus]
time_points = 8
"#,
    );
    let status = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&dir)
        .arg("magnus-orders")
        .status()
        .unwrap();
    assert!(status.success());
    let fin = fs::read_to_string(dir.join("magnus_orders_final.csv")).unwrap();
    assert!(fin.starts_with("E0_V_per_m,order_tag,pop_J0,pop_J1,pop_J2\n"));
    for tag in [",1,", ",2,", ",3,", ",123,"] {
        assert!(fin.contains(tag), "missing order tag {tag}");
    }
    let time = fs::read_to_string(dir.join("magnus_orders_time.csv")).unwrap();
    assert!(time.starts_with("t_ps,order_tag,pop_J0,pop_J1,pop_J2\n"));
}

#[test]
fn json_format_switch() {
    let dir = tmpdir("json");
    let cfg = write_config(&dir, FAST_SINGLE);
    let status = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&dir)
        .args(["--format", "json", "simulate"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.join("simulate.json").exists());
    assert!(!dir.join("trace.csv").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tmpdir("bad");
    let cfg = write_config(&dir, "[initial]\nmode = \"nonsense\"\n");
    let out = bin()
        .args(["--config"])
        .arg(&cfg)
        .arg("simulate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    // Unknown molecule preset.
    let cfg = write_config(&dir, "[molecule]\nname = \"argonite\"\n");
    let out = bin().args(["--config"]).arg(&cfg).arg("scan").output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unsupported magnus initial state is a config-level rejection.
    let cfg = write_config(
        &dir,
        "[initial]\nmode = \"single\"\nJ = 2\n\n[scan]\nE0_count = 2\ndelta1_count = 1\n",
    );
    let out = bin()
        .args(["--config"])
        .arg(&cfg)
        .arg("magnus-orders")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_configs_resolve() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e == "toml").unwrap_or(false) {
            let file = oqr_core::config::load(Some(&path)).unwrap();
            oqr_core::config::resolve(file, &oqr_core::config::Overrides::default())
                .unwrap_or_else(|e| panic!("{} does not resolve: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4, "expected the shipped configs, found {seen}");
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tmpdir("leak");
    // A deliberately tiny basis at strong field trips the truncation check.
    let cfg = write_config(
        &dir,
        r#"
[initial]
mode = "single"

[pulse]
E0_V_per_m = 3e7

[basis]
J_max = 2

[simulate]
trace_points = 32
theta_points = 25
density_time_points = 4
"#,
    );
    let out = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&dir)
        .arg("simulate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation leak"));
}
