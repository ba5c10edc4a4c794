use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qklauder_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(qk_last_error()) }.to_string_lossy().into_owned()
}

fn reference_point_q() -> f64 {
    (-0.005f64).exp()
}

#[test]
fn state_lifecycle() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(qk_state_new(reference_point_q(), 6.0, 0.0, 1.0, 1.0, 1.0, &mut s), QkStatus::Ok);
        assert!(!s.is_null());
        let mut u = QkUncertainty::default();
        assert_eq!(qk_state_uncertainty(s, &mut u), QkStatus::Ok);
        assert!((u.ratio - 1.0).abs() < 1e-9);
        assert!((u.product - u.dx * u.dp).abs() < 1e-12);

        let mut p = f64::NAN;
        assert_eq!(qk_state_expect_p(s, &mut p), QkStatus::Ok);
        assert_eq!(p, 0.0);

        let mut later = ptr::null_mut();
        assert_eq!(qk_state_evolve(s, 1.5, &mut later), QkStatus::Ok);
        let (mut x0, mut x1) = (0.0, 0.0);
        assert_eq!(qk_state_expect_x(s, &mut x0), QkStatus::Ok);
        assert_eq!(qk_state_expect_x(later, &mut x1), QkStatus::Ok);
        assert_ne!(x0, x1);

        // the autocorrelation does not depend on the starting angle
        let (mut re0, mut im0, mut re1, mut im1) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(qk_state_autocorrelation(s, 3.0, &mut re0, &mut im0), QkStatus::Ok);
        assert_eq!(qk_state_autocorrelation(later, 3.0, &mut re1, &mut im1), QkStatus::Ok);
        assert_eq!((re0, im0), (re1, im1));
        assert!(re0 * re0 + im0 * im0 < 1.0);

        qk_state_free(later);
        qk_state_free(s);
        qk_state_free(ptr::null_mut());
    }
}

#[test]
fn free_functions() {
    unsafe {
        let mut r = QkRevivalTimes::default();
        assert_eq!(qk_revival_times(reference_point_q(), 6.0, 1.0, 1.0, 1.0, &mut r), QkStatus::Ok);
        assert!((r.t_cl - 6.65).abs() < 0.01);
        assert!((r.t_rev / r.t_cl - 200.0).abs() < 1.0);

        let mut n = 0.0;
        assert_eq!(qk_mean_occupation(reference_point_q(), 6.0, &mut n), QkStatus::Ok);
        assert_eq!(n, r.n_bar);

        let (mut e, mut re, mut im) = (0.0, 0.0, 0.0);
        assert_eq!(qk_q_exponential(0.8, 1.0, &mut e), QkStatus::Ok);
        assert_eq!(qk_f_q(0.8, 1.0, 0.0, &mut re, &mut im), QkStatus::Ok);
        assert_eq!((re, im), (e, 0.0));
        assert_eq!(qk_f_q(0.8, 1.0, 0.9, &mut re, &mut im), QkStatus::Ok);
        assert!(im != 0.0 && re < e);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(qk_q_exponential(0.5, 6.0, &mut v), QkStatus::Divergence);
        assert!(last_error().contains("radius"), "{}", last_error());
        assert_eq!(qk_q_exponential(0.5, 1.0, &mut v), QkStatus::Ok);
        assert_eq!(last_error(), "");

        assert_eq!(qk_q_exponential(1.5, 1.0, &mut v), QkStatus::InvalidArgument);
        assert_eq!(qk_q_exponential(0.5, 1.0, ptr::null_mut()), QkStatus::NullPointer);
        assert_eq!(qk_state_expect_x(ptr::null(), &mut v), QkStatus::NullPointer);

        let mut r = QkRevivalTimes::default();
        assert_eq!(qk_revival_times(1.0, 2.0, 1.0, 1.0, 1.0, &mut r), QkStatus::NoRevivalStructure);

        let mut s = ptr::null_mut();
        assert_eq!(qk_state_new(0.9, 1.0, 0.0, -1.0, 1.0, 1.0, &mut s), QkStatus::InvalidArgument);
        assert!(s.is_null());
        assert_eq!(qk_state_new(0.9, 1.0, 0.0, 1.0, 1.0, 1.0, ptr::null_mut()), QkStatus::NullPointer);
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn header_functions() -> Vec<String> {
    let header = std::fs::read_to_string(crate_dir().join("include/qklauder.h")).unwrap();
    header
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| w.starts_with("qk_"))
        .map(String::from)
        .collect()
}

#[test]
fn header_declares_every_export() {
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let declared = header_functions();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 11);
    for name in exports {
        assert!(declared.iter().any(|d| d == name), "{name} missing from header");
    }
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().map(|o| o.status.success()).unwrap_or(false))
}

#[test]
fn header_compiles_as_c_and_cxx() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; header compile check not run");
        return;
    };
    let include = crate_dir().join("include");
    for lang in ["c", "c++"] {
        let status = Command::new(cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-"])
            .arg(format!("-I{}", include.display()))
            .stdin(std::process::Stdio::piped())
            .spawn()
            .and_then(|mut child| {
                use std::io::Write;
                child.stdin.take().unwrap().write_all(b"#include \"qklauder.h\"\n")?;
                child.wait()
            })
            .unwrap();
        assert!(status.success(), "header does not compile as {lang}");
    }
}

/// The static library cargo places next to the test binary's `deps` directory.
fn static_library() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libqklauder_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_and_runs() {
    let (Some(cc), Some(lib)) = (compiler(), static_library()) else {
        eprintln!("C compiler or static library unavailable; link check not run");
        return;
    };
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("qklauder_smoke");
    let status = Command::new(cc)
        .arg(crate_dir().join("tests/smoke.c"))
        .arg(format!("-I{}", crate_dir().join("include").display()))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "linking against {} failed", lib.display());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
