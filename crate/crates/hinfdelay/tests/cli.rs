//! CLI behavior beyond the acceptance contract: approximant plotting,
//! flag validation and failure modes.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> TempDir {
        let dir = std::env::temp_dir().join(format!("hinfdelay-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hinfdelay"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const LAG_TOML: &str = "n = 1\nnu = 1\nny = 1\nA0 = [-1.0]\nB = [1.0]\nC = [1.0]\nD = [0.0]\n";
const S1_TOML: &str = "n = 1\nnu = 1\nny = 1\nA0 = [-3.0]\nB = [1.0]\nC = [1.0]\nD = [0.0]\n\n[[delays]]\ntau = 1.0\nA = [1.0]\n";

fn read_csv_values(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| line.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn approx_plot_of_delay_free_system_matches_exact() {
    let tmp = TempDir::new("approx-exact");
    let lag = write(&tmp.0, "lag.toml", LAG_TOML);
    let exact_csv = tmp.0.join("exact.csv");
    let approx_csv = tmp.0.join("approx.csv");
    let run = |approx: &str, out: &Path| {
        let status = bin()
            .args(["sigma-plot"])
            .arg(&lag)
            .args([
                "--omega-max",
                "8",
                "--points",
                "40",
                "--approx",
                approx,
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("exact", &exact_csv);
    run("6", &approx_csv);
    for (row_e, row_a) in read_csv_values(&exact_csv)
        .iter()
        .zip(read_csv_values(&approx_csv))
    {
        for (a, b) in row_e.iter().zip(row_a.iter()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn approx_plot_of_delayed_system_is_exact_at_zero_frequency() {
    let tmp = TempDir::new("approx-s1");
    let s1 = write(&tmp.0, "s1.toml", S1_TOML);
    let csv = tmp.0.join("s1.csv");
    let status = bin()
        .args(["sigma-plot"])
        .arg(&s1)
        .args([
            "--omega-max",
            "4",
            "--points",
            "9",
            "--approx",
            "8",
            "--out",
        ])
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv_values(&csv);
    assert_eq!(rows.len(), 9);
    assert!((rows[0][1] - 0.5).abs() < 1e-12);
}

#[test]
fn sigma_plot_defaults_sweep_range_to_coefficient_scale() {
    let tmp = TempDir::new("default-range");
    let s1 = write(&tmp.0, "s1.toml", S1_TOML);
    let csv = tmp.0.join("default.csv");
    let status = bin()
        .args(["sigma-plot"])
        .arg(&s1)
        .args(["--points", "11", "--out"])
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv_values(&csv);
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][0], 0.0);
    assert!(rows[10][0] > 10.0);
}

#[test]
fn spectrum_crossing_of_s1_sits_on_the_level() {
    // |G(j omega)| = 0.4 at the flagged frequency
    let tmp = TempDir::new("spectrum-s1");
    let s1 = write(&tmp.0, "s1.toml", S1_TOML);
    let out = bin()
        .arg("spectrum")
        .arg(&s1)
        .args(["--xi", "0.4", "--N", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let omega: f64 = stdout
        .lines()
        .find(|l| l.contains("[imaginary axis"))
        .and_then(|l| l.split("omega = ").nth(1))
        .map(|s| s.trim_end_matches(']').trim().parse().unwrap())
        .expect("an imaginary-axis eigenvalue should be flagged");
    // closed form: |G(jw)|^2 = 1 / ((3 - cos w)^2 + (w + sin w)^2)
    let denom = (3.0 - omega.cos()).powi(2) + (omega + omega.sin()).powi(2);
    let gain = 1.0 / denom.sqrt();
    assert!((gain - 0.4).abs() < 1e-6, "omega = {omega}: |G| = {gain}");
}

#[test]
fn omega_hint_flag_is_accepted() {
    let tmp = TempDir::new("hint");
    let s1 = write(&tmp.0, "s1.toml", S1_TOML);
    let out = bin()
        .arg("norm")
        .arg(&s1)
        .args(["--omega-hint", "0.0", "--tol", "1e-9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("norm = 0.5"), "stdout:\n{stdout}");
}

#[test]
fn unknown_method_is_an_input_error() {
    let tmp = TempDir::new("bad-method");
    let s1 = write(&tmp.0, "s1.toml", S1_TOML);
    let out = bin()
        .arg("norm")
        .arg(&s1)
        .args(["--method", "newton"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_file_is_an_input_error() {
    let out = bin()
        .arg("norm")
        .arg("/nonexistent/system.toml")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("error"), "stderr:\n{stderr}");
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("norm"));
    assert!(stdout.contains("sigma-plot"));
    assert!(stdout.contains("spectrum"));
}
