//! Runs the `noon` binary end to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn noon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noon"))
        .args(args)
        .output()
        .unwrap()
}

fn noon_in(dir: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<&str> = extra.to_vec();
    args.extend(["--out", dir.to_str().unwrap()]);
    noon(&args)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_writes_one_row_per_encoding_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = noon_in(
        dir.path(),
        &["simulate", "--preset", "pf6", "--format", "csv"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("series_pf6.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time_s,re_l6,im_l6,re_l4,im_l4,re_l2,im_l2,re_l1,im_l1"
    );
    assert_eq!(lines.count(), 512);
    assert!(!dir.path().join("series_pf6.json").exists());
}

#[test]
fn zero_field_gives_constant_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "delta = 0.0\ndecoherence_on = false\n");
    let out = noon_in(
        dir.path(),
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let table = rows(&dir.path().join("series_pf6.csv"));
    for row in &table {
        assert_eq!(row[1..], table[0][1..]);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let cfg = write_config(
            dir.path(),
            "noise_sigma = 1e-9\nt_max_list = [0.002, 0.02]\n",
        );
        let cfg = cfg.to_str().unwrap();
        for cmd in ["simulate", "estimate", "scan", "thermometer"] {
            let out = noon_in(
                dir.path(),
                &[
                    cmd, "--config", cfg, "--seed", "42", "--preset", "tmp", "--preset", "pf6",
                ],
            );
            assert_eq!(
                code(&out),
                0,
                "{cmd}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 20);
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
}

#[test]
fn merged_clean_runs_center_on_the_true_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "decoherence_on = false\n");
    let cfg = cfg.to_str().unwrap();
    let sim = noon_in(
        dir.path(),
        &[
            "simulate", "--config", cfg, "--preset", "tmp", "--preset", "pf6", "--format", "json",
        ],
    );
    assert_eq!(code(&sim), 0);
    let tmp = dir.path().join("series_tmp.json");
    let pf6 = dir.path().join("series_pf6.json");
    let est = noon_in(
        dir.path(),
        &[
            "estimate",
            "--input",
            tmp.to_str().unwrap(),
            "--input",
            pf6.to_str().unwrap(),
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&est), 0, "{}", String::from_utf8_lossy(&est.stderr));
    let table = rows(&dir.path().join("estimates.csv"));
    let mut ls: Vec<u32> = table.iter().map(|r| r[1].parse().unwrap()).collect();
    ls.sort_unstable();
    ls.dedup();
    assert_eq!(ls, [1, 2, 3, 4, 5, 6, 7, 9]);
    for row in &table {
        let l: f64 = row[1].parse().unwrap();
        let delta: f64 = row[4].parse().unwrap();
        let r: f64 = row[6].parse().unwrap();
        assert!((delta - 11.73e-6).abs() < 0.05 * 11.73e-6, "{row:?}");
        assert!((r / l - 1.0).abs() < 0.03, "{row:?}");
    }
}

#[test]
fn dephasing_costs_advantage() {
    let dir = tempfile::tempdir().unwrap();
    let out = noon_in(dir.path(), &["estimate", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let six = rows(&dir.path().join("estimates.csv"))
        .into_iter()
        .find(|r| r[1] == "6")
        .unwrap();
    assert!(six[6].parse::<f64>().unwrap() < 6.0);
    assert!(dir.path().join("spectrum_pf6_l6.csv").exists());
}

#[test]
fn scan_reports_every_line_at_every_window() {
    let dir = tempfile::tempdir().unwrap();
    let out = noon_in(dir.path(), &["scan", "--preset", "tmp", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(rows(&dir.path().join("scan_tmp.csv")).len(), 5 * 5);
    assert!(String::from_utf8_lossy(&out.stdout).contains("best T_max"));
}

#[test]
fn thermometer_sweeps_nine_set_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = noon_in(dir.path(), &["thermometer"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&dir.path().join("thermometer_pf6.csv"));
    assert_eq!(table.len(), 9);
    for row in &table {
        let set: f64 = row[0].parse().unwrap();
        let est: f64 = row[2].parse().unwrap();
        assert!((set - est).abs() < 0.5);
    }
    for f in [
        "calibration_pf6.json",
        "thermometer_pf6.json",
        "thermometer_pf6.svg",
        "thermometer_spectra_pf6.svg",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn single_temperature_sweep_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep_temps_c = [25.0]\n");
    let out = noon_in(
        dir.path(),
        &[
            "thermometer",
            "--config",
            cfg.to_str().unwrap(),
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(rows(&dir.path().join("thermometer_pf6.csv")).len(), 1);
}

#[test]
fn every_figure_has_an_svg() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["simulate", "estimate"] {
        assert_eq!(
            code(&noon_in(
                dir.path(),
                &[cmd, "--preset", "tmp", "--format", "svg"]
            )),
            0
        );
    }
    for f in [
        "lines_tmp.svg",
        "peaks_tmp.svg",
        "field_spectra_tmp.svg",
        "advantage.svg",
    ] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.starts_with("<svg"), "{f}");
        assert!(!text.contains("NaN"), "{f}");
    }
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&noon(&["frobnicate"])), 1);
    assert_eq!(code(&noon(&["simulate", "--preset", "benzene"])), 1);
    assert_eq!(code(&noon(&["--help"])), 0);

    let missing = dir.path().join("nope.json");
    assert_eq!(
        code(&noon_in(
            dir.path(),
            &["estimate", "--input", missing.to_str().unwrap()]
        )),
        1
    );

    let cfg = write_config(dir.path(), "t_max_list = []\n");
    assert_eq!(
        code(&noon_in(
            dir.path(),
            &["scan", "--config", cfg.to_str().unwrap()]
        )),
        1
    );

    let cfg = write_config(dir.path(), "colour = \"blue\"\n");
    assert_eq!(
        code(&noon_in(
            dir.path(),
            &["simulate", "--config", cfg.to_str().unwrap()]
        )),
        1
    );

    let cfg = write_config(
        dir.path(),
        "calibration_low_c = 25.0\ncalibration_high_c = 25.0\n",
    );
    assert_eq!(
        code(&noon_in(
            dir.path(),
            &["thermometer", "--config", cfg.to_str().unwrap()]
        )),
        1
    );
}

#[test]
fn numerical_failure_exits_with_two() {
    // no polarization, so every line is identically zero
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "epsilon = 0.0\n");
    let out = noon_in(dir.path(), &["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}
