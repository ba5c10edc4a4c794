use std::path::PathBuf;
use std::process::{Command, Output};

use qklauder::observables::{uncertainty_scan, PhysicalScales};
use qklauder::qkernel::{Deformation, Truncation};
use qklauder::revival::{autocorrelation_scan_with, Execution};
use qklauder::CoherentState;

fn qklauder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qklauder")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qklauder-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn value(text: &str, key: &str) -> f64 {
    let line =
        text.lines().find(|l| l.starts_with(&format!("{key} ="))).unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split('=').nth(1).unwrap().trim().parse().unwrap()
}

#[test]
fn revival_times_defaults_reproduce_reference() {
    let o = qklauder(&["revival-times"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!((value(&text, "T_cl") - 6.65).abs() <= 0.01);
    assert!((value(&text, "n_bar") - 6.1875).abs() <= 0.005);
    assert!((value(&text, "T_rev") / value(&text, "T_cl") - 200.0).abs() <= 1.0);
}

#[test]
fn autocorr_starts_at_one() {
    let o = qklauder(&["autocorr", "--t-max", "10", "--steps", "11"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re,im,abs2"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[3] - 1.0).abs() < 1e-14);
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn expect_at_zero_angle_has_zero_momentum() {
    let o = qklauder(&["expect", "--gamma", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "<P>"), 0.0);
    assert!(text.contains("<A+A+A> ="));
}

#[test]
fn verify_passes_and_fault_is_named() {
    let o = qklauder(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = qklauder(&["verify", "--inject-fault", "imaginary-sine"]);
    assert_eq!(o.status.code(), Some(1));
    let fails: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("FAIL")).map(String::from).collect();
    assert!(fails.iter().any(|l| l.contains("closed_form_vs_variance")), "{fails:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("closed_form_vs_variance"));
}

#[test]
fn invalid_config_is_rejected_before_output() {
    let out = scratch("never.csv");
    let o = qklauder(&["uncertainty", "--q", "1.2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!out.exists());

    let o = qklauder(&["revival-times", "--q", "0.5", "--tau", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn divergent_series_is_a_numerical_error() {
    let o = qklauder(&["autocorr", "--q", "0.5", "--J", "6"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("radius"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn uncertainty_csv_rows() {
    let o = qklauder(&["uncertainty", "--t-max", "12", "--steps", "49"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,gamma,dX,dP,product,bound,ratio"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 49);
    assert!((rows[0][6] - 1.0).abs() <= 1e-9);
    for r in &rows {
        assert!(r[6] >= 1.0 - 1e-9);
        assert_eq!(r[5], rows[0][5]);
    }
}

#[test]
fn output_is_byte_deterministic() {
    let a = scratch("det_a.csv");
    let b = scratch("det_b.csv");
    for p in [&a, &b] {
        let o = qklauder(&["autocorr", "--t-max", "50", "--steps", "777", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn serial_and_parallel_scans_are_identical() {
    let d = Deformation::from_tau(0.005).unwrap();
    let scales = PhysicalScales::default();
    let t = Truncation::default();
    let run = |e| autocorrelation_scan_with(6.0, &d, &scales, &t, 0.0, 40.0, 997, e).unwrap().to_csv_string();
    assert_eq!(run(Execution::Serial), run(Execution::Parallel));

    let s = CoherentState::new(6.0, 0.0, d, t).unwrap();
    let run = |e| uncertainty_scan(&s, &scales, 0.0, 10.0, 301, e).unwrap().to_csv_string();
    assert_eq!(run(Execution::Serial), run(Execution::Parallel));
}

#[test]
fn plot_rejects_empty_csv() {
    let input = scratch("empty.csv");
    std::fs::write(&input, "t,abs2\n").unwrap();
    let svg = scratch("empty.svg");
    let o = qklauder(&["plot", input.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!svg.exists());
}

#[test]
fn plot_missing_column() {
    let input = scratch("cols.csv");
    std::fs::write(&input, "t,abs2\n0,1\n1,0.5\n").unwrap();
    let svg = scratch("cols.svg");
    let o = qklauder(&["plot", input.to_str().unwrap(), "--y", "ratio", "--svg", svg.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!svg.exists());
}

#[test]
fn plot_two_points_is_one_segment() {
    let input = scratch("two.csv");
    std::fs::write(&input, "t,abs2\n0,1\n1,0.25\n").unwrap();
    let svg = scratch("two.svg");
    let o = qklauder(&["plot", input.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    let line = text.lines().find(|l| l.starts_with("<polyline")).unwrap();
    let points = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
    assert_eq!(points.split(' ').count(), 2);
}

#[test]
fn autocorr_writes_svg_alongside_csv() {
    let csv = scratch("panel.csv");
    let svg = scratch("panel.svg");
    let o = qklauder(&[
        "autocorr",
        "--t-max",
        "20",
        "--steps",
        "201",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 202);
}
