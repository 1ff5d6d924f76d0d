//! End-to-end tests of the command-line driver: CSV schemas, byte-level
//! reproducibility, error exit codes, and the transform pipeline over both
//! transports.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hpnfft"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).skip(1).collect()
}

/// Minimal hand-rolled points file, independent of the writer under test.
fn write_ndpt(path: &Path, dim: u32, coords: &[f64], values: &[(f64, f64)]) {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"NDPT");
    bytes.extend_from_slice(&1u16.to_le_bytes());
    bytes.extend_from_slice(&dim.to_le_bytes());
    bytes.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for (j, v) in values.iter().enumerate() {
        for t in 0..dim as usize {
            bytes.extend_from_slice(&coords[j * dim as usize + t].to_le_bytes());
        }
        bytes.extend_from_slice(&v.0.to_le_bytes());
        bytes.extend_from_slice(&v.1.to_le_bytes());
    }
    std::fs::write(path, bytes).unwrap();
}

fn sample_file(path: &Path, count: usize) {
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for j in 0..count {
        let a = -0.5 + (j as f64 * 0.61803) % 1.0;
        let b = -0.5 + (j as f64 * 0.31415 + 0.2) % 1.0;
        coords.push(a);
        coords.push(b);
        values.push(((j as f64 * 0.1).sin().abs(), (j as f64 * 0.2).cos().abs()));
    }
    write_ndpt(path, 2, &coords, &values);
}

#[test]
fn precision_csv_is_byte_reproducible_and_has_stable_schema() {
    let args = [
        "precision",
        "--dims",
        "8,8",
        "--points",
        "120",
        "--m-range",
        "2:3",
        "--windows",
        "gaussian,kaiser_bessel",
        "--seed",
        "99",
    ];
    let first = stdout_of(&run(&args));
    let second = stdout_of(&run(&args));
    assert_eq!(first, second, "fixed seed must reproduce identical bytes");

    let header: Vec<&str> = first
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!(header, vec!["window", "m", "error_forward", "error_adjoint"]);
    assert_eq!(data_rows(&first).len(), 4);
}

#[test]
fn precision_single_row() {
    let out = stdout_of(&run(&[
        "precision",
        "--dims",
        "8,8",
        "--points",
        "64",
        "--m-range",
        "8:8",
        "--windows",
        "gaussian",
    ]));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("gaussian,8,"));
}

#[test]
fn precision_oracle_cost_guard() {
    let out = run(&[
        "precision",
        "--dims",
        "128,128,128",
        "--points",
        "1000000",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--force"), "stderr: {stderr}");
}

#[test]
fn perf_reports_unit_speedup_for_the_baseline() {
    let out = stdout_of(&run(&[
        "perf",
        "--sides",
        "8",
        "--workers",
        "1",
        "--repetitions",
        "5",
        "--m",
        "2",
    ]));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 1);
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(fields[0], "512");
    assert_eq!(fields[1], "1");
    assert_eq!(fields[3], "1.000");
    assert_eq!(fields[4].split(';').count(), 5);
}

#[test]
fn madelung_single_alpha_row_matches_reference_constant() {
    let out = stdout_of(&run(&[
        "madelung",
        "--cells",
        "1",
        "--alpha",
        "4.5",
        "--mode",
        "direct",
    ]));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 1);
    let madelung: f64 = rows[0].split(',').last().unwrap().parse().unwrap();
    assert!((madelung - 2.5194).abs() < 2e-3, "constant {madelung}");
}

#[test]
fn transform_roundtrip_over_both_transports() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("points.ndpt");
    sample_file(&input, 50);
    let coeffs_inproc = dir.path().join("c_inproc.csv");
    let coeffs_tcp = dir.path().join("c_tcp.csv");

    let base = ["transform", "--dims", "8,8", "--workers", "3"];
    let mut args: Vec<&str> = base.to_vec();
    let input_s = input.to_str().unwrap();
    let out_inproc = coeffs_inproc.to_str().unwrap();
    args.extend_from_slice(&["--input", input_s, "--out", out_inproc]);
    assert!(run(&args).status.success());

    let out_tcp = coeffs_tcp.to_str().unwrap();
    let mut args: Vec<&str> = base.to_vec();
    args.extend_from_slice(&["--input", input_s, "--transport", "tcp", "--out", out_tcp]);
    assert!(run(&args).status.success());

    assert_eq!(
        std::fs::read(&coeffs_inproc).unwrap(),
        std::fs::read(&coeffs_tcp).unwrap(),
        "transports must agree bit-for-bit"
    );

    // Feed the coefficients back through the adjoint and check the output
    // file structure.
    let back = dir.path().join("back.ndpt");
    let back_s = back.to_str().unwrap();
    let out = run(&[
        "transform",
        "--dims",
        "8,8",
        "--direction",
        "adjoint",
        "--input",
        input_s,
        "--coeffs",
        out_inproc,
        "--workers",
        "2",
        "--out",
        back_s,
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(&back).unwrap();
    assert_eq!(bytes.len(), 18 + 50 * 4 * 8);
    assert_eq!(&bytes[..4], b"NDPT");
}

#[test]
fn empty_points_file_transforms_to_zero_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.ndpt");
    write_ndpt(&input, 2, &[], &[]);
    assert_eq!(std::fs::metadata(&input).unwrap().len(), 18);
    let out = stdout_of(&run(&[
        "transform",
        "--dims",
        "4,4",
        "--input",
        input.to_str().unwrap(),
    ]));
    for row in data_rows(&out) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn malformed_points_files_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad_magic = dir.path().join("magic.ndpt");
    std::fs::write(&bad_magic, b"XXXX\x01\x00\x02\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00").unwrap();
    let out = run(&["transform", "--dims", "4,4", "--input", bad_magic.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 0"));

    // A coordinate exactly at the open boundary is rejected by name.
    let boundary = dir.path().join("boundary.ndpt");
    write_ndpt(&boundary, 2, &[0.1, 0.5], &[(1.0, 0.0)]);
    let out = run(&["transform", "--dims", "4,4", "--input", boundary.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("record 0"), "stderr: {stderr}");
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["precision", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["madelung", "--mode", "quantum"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["precision", "--m-range", "9:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn worker_with_unreachable_host_exits_with_communication_code() {
    let out = run(&["worker", "--connect", "127.0.0.1:1"]);
    assert_eq!(out.status.code(), Some(4));
}
