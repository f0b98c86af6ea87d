use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qjacobi_ffi::*;

fn last_error() -> String {
    let p = qj_last_error();
    assert!(!p.is_null(), "no error message");
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn preset(name: &str) -> *mut QjParams {
    let name = CString::new(name).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { qj_params_preset(name.as_ptr(), &mut p) }, QjStatus::Ok);
    p
}

fn transform(p: *const QjParams, k_min: i64, k_max: i64) -> *mut QjTransform {
    let mut t = ptr::null_mut();
    let s = unsafe { qj_transform_new(p, k_min, k_max, 0, &mut t) };
    assert_eq!(s, QjStatus::Ok, "{}", last_error());
    t
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(qj_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn params_round_trip_and_validation() {
    let p = preset("ps2");
    let mut v = QjParamValues::default();
    assert_eq!(unsafe { qj_params_values(p, &mut v) }, QjStatus::Ok);
    assert!(qj_last_error().is_null());
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { qj_params_new(&v, &mut again) }, QjStatus::Ok);
    let mut w = QjParamValues::default();
    assert_eq!(unsafe { qj_params_values(again, &mut w) }, QjStatus::Ok);
    assert_eq!(v, w);

    let mut bad = v;
    bad.q = 1.5;
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qj_params_new(&bad, &mut out) }, QjStatus::ParameterDomain);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    let unknown = CString::new("ps9").unwrap();
    assert_eq!(unsafe { qj_params_preset(unknown.as_ptr(), &mut out) }, QjStatus::Config);
    assert!(last_error().contains("ps9"));
    unsafe {
        qj_params_free(p);
        qj_params_free(again);
        qj_params_free(ptr::null_mut());
    }
}

#[test]
fn null_arguments_are_reported() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qj_params_preset(ptr::null(), &mut out) }, QjStatus::NullPointer);
    assert_eq!(unsafe { qj_params_new(ptr::null(), &mut out) }, QjStatus::NullPointer);
    let p = preset("ps1");
    assert_eq!(unsafe { qj_transform_new(p, -10, 5, 0, ptr::null_mut()) }, QjStatus::NullPointer);
    assert_eq!(unsafe { qj_transform_new(p, 2, 5, 0, &mut ptr::null_mut()) }, QjStatus::InvalidArgument);
    unsafe { qj_params_free(p) };
}

#[test]
fn forward_inverse_and_isometry() {
    let p = preset("ps1");
    let t = transform(p, -20, 8);
    let (mut k_min, mut k_max, mut nodes, mut points) = (0, 0, 0, 0);
    assert_eq!(unsafe { qj_transform_shape(t, &mut k_min, &mut k_max, &mut nodes, &mut points) }, QjStatus::Ok);
    assert_eq!((k_min, k_max), (-20, 8));
    assert!(nodes > 0);

    let n = (k_max - k_min + 1) as usize;
    let mut f = vec![QjComplex::default(); 2 * n];
    f[n + (3 - k_min) as usize] = QjComplex { re: 1.0, im: -0.5 };
    f[(-2 - k_min) as usize] = QjComplex { re: 0.25, im: 0.0 };

    let mut g = ptr::null_mut();
    assert_eq!(unsafe { qj_transform_forward(t, f.as_ptr(), f.len(), &mut g) }, QjStatus::Ok, "{}", last_error());
    let mut back = vec![QjComplex::default(); 2 * n];
    assert_eq!(unsafe { qj_transform_inverse(t, g, back.as_mut_ptr(), back.len()) }, QjStatus::Ok);
    let err = f.iter().zip(&back).map(|(a, b)| (a.re - b.re).hypot(a.im - b.im)).fold(0.0, f64::max);
    assert!(err < 1e-8, "roundtrip error {err}");

    // A spectral function rebuilt from its plain values has the same inner products.
    let mut norm = QjComplex::default();
    assert_eq!(unsafe { qj_transform_inner(t, g, g, &mut norm) }, QjStatus::Ok);
    assert!(norm.re > 0.0 && norm.im.abs() <= 1e-10 * norm.re);

    let mut circle = vec![QjComplex::default(); 2 * nodes];
    let mut pts = vec![QjComplex::default(); points];
    assert_eq!(unsafe { qj_spectral_values(g, circle.as_mut_ptr(), circle.len(), pts.as_mut_ptr(), pts.len()) }, QjStatus::Ok);
    let mut plain = ptr::null_mut();
    assert_eq!(
        unsafe { qj_spectral_new(t, circle.as_ptr(), circle.len(), pts.as_ptr(), pts.len(), &mut plain) },
        QjStatus::Ok
    );
    let mut mixed = QjComplex::default();
    assert_eq!(unsafe { qj_transform_inner(t, plain, g, &mut mixed) }, QjStatus::Ok);
    assert!((mixed.re - norm.re).hypot(mixed.im - norm.im) <= 1e-6 * norm.re, "{mixed:?} vs {norm:?}");

    let mut psi = vec![0.0; nodes];
    let mut gamma = vec![0.0; points];
    assert_eq!(unsafe { qj_transform_spectrum(t, psi.as_mut_ptr(), psi.len(), gamma.as_mut_ptr(), gamma.len()) }, QjStatus::Ok);
    assert!(psi.windows(2).all(|w| w[0] < w[1]));
    assert!(gamma.iter().all(|g| g.is_finite() && (g.abs() - 1.0).abs() > 1e-9));

    unsafe {
        qj_spectral_free(plain);
        qj_spectral_free(g);
        qj_transform_free(t);
        qj_params_free(p);
    }
}

#[test]
fn sizes_are_checked() {
    let p = preset("ps1");
    let t = transform(p, -12, 6);
    let n = 19;
    let f = vec![QjComplex { re: 1.0, im: 0.0 }; 2 * n - 1];
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { qj_transform_forward(t, f.as_ptr(), f.len(), &mut g) }, QjStatus::GridMismatch);
    let mut f = vec![QjComplex::default(); 2 * n];
    f[0].re = 1.0;
    assert_eq!(unsafe { qj_transform_forward(t, f.as_ptr(), f.len(), &mut g) }, QjStatus::Ok);
    let mut small = vec![QjComplex::default(); n];
    assert_eq!(unsafe { qj_transform_inverse(t, g, small.as_mut_ptr(), small.len()) }, QjStatus::BufferTooSmall);
    assert!(last_error().contains("needed"));
    let mut one = [0.0];
    assert_eq!(unsafe { qj_transform_spectrum(t, one.as_mut_ptr(), 1, ptr::null_mut(), 0) }, QjStatus::BufferTooSmall);
    unsafe {
        qj_spectral_free(g);
        qj_transform_free(t);
        qj_params_free(p);
    }
}

#[test]
fn verify_counts_results() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    let cfg = format!(r#"{{"params":"ps1","suites":["theta","grid"],"report_path":{:?}}}"#, report.to_str().unwrap());
    let cfg = CString::new(cfg).unwrap();
    let mut counts = QjRunCounts::default();
    assert_eq!(unsafe { qj_verify(cfg.as_ptr(), &mut counts) }, QjStatus::Ok, "{}", last_error());
    assert!(counts.total > 0);
    assert_eq!(counts.failed, 0);
    assert_eq!(counts.passed, counts.total);
    assert!(std::fs::read_to_string(&report).unwrap().lines().count() > counts.total);

    let bad = CString::new(r#"{"params":"ps1","suites":["nonsense"]}"#).unwrap();
    assert_eq!(unsafe { qj_verify(bad.as_ptr(), &mut counts) }, QjStatus::Config);
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header_and_static_library() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libqjacobi_ffi.a");
    assert!(lib.exists(), "{} was not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("roundtrip");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(manifest.join("examples/roundtrip.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success(), "{cc} failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("roundtrip error"));
}
