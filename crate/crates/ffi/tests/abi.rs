use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use wavegrid_ffi::*;

fn message() -> String {
    let p = wg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn settings(codec: WgCodec, c: f64) -> WgCompression {
    WgCompression {
        levels: 3,
        mode: WgThresholdMode::Capped,
        threshold: c,
        codec,
        chunk_size: 0,
    }
}

fn signal(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 37 % 101) as f64 * 0.07).sin() + 0.01 * i as f64).collect()
}

#[test]
fn dwt_idwt_round_trip() {
    let dims = [33usize];
    let x = signal(33);
    let mut c = vec![0.0; 33];
    let mut y = vec![0.0; 33];
    unsafe {
        assert_eq!(wg_dwt(dims.as_ptr(), 1, 4, x.as_ptr(), c.as_mut_ptr()), WgStatus::Ok);
        assert_eq!(wg_idwt(dims.as_ptr(), 1, 4, c.as_ptr(), y.as_mut_ptr()), WgStatus::Ok);
    }
    for (a, b) in x.iter().zip(&y) {
        assert!((a - b).abs() < 1e-13);
    }
    // samples sit first in corner layout
    assert_eq!(c[0], x[0]);
    assert_eq!(c[2], x[32]);
}

#[test]
fn bad_arguments_report_status_and_message() {
    let dims = [30usize];
    let x = vec![0.0; 30];
    let mut y = vec![0.0; 30];
    let s = unsafe { wg_dwt(dims.as_ptr(), 1, 1, x.as_ptr(), y.as_mut_ptr()) };
    assert_eq!(s, WgStatus::InvalidArgument);
    assert!(message().contains("30"));
    let s = unsafe { wg_dwt(ptr::null(), 1, 1, x.as_ptr(), y.as_mut_ptr()) };
    assert_eq!(s, WgStatus::NullPointer);
    let s = unsafe { wg_patch_deserialize(b"nope".as_ptr(), 4, &mut ptr::null_mut()) };
    assert_ne!(s, WgStatus::Ok);
    let mut bad = settings(WgCodec::Csr, 0.0);
    bad.chunk_size = 10;
    let mut out = ptr::null_mut();
    let s = unsafe { wg_patch_compress([9usize].as_ptr(), 1, 1, signal(9).as_ptr(), &bad, &mut out) };
    assert_eq!(s, WgStatus::InvalidArgument);
    assert!(out.is_null());
}

#[test]
fn threshold_counts_zeroed_details() {
    let dims = [9usize];
    let mut c = vec![5.0, 6.0, 7.0, 0.1, -0.1, 3.0, 0.0, 0.2, -4.0];
    let mut zeroed = 0;
    let s = unsafe { wg_threshold(dims.as_ptr(), 1, 2, WgThresholdMode::Constant, 0.5, c.as_mut_ptr(), &mut zeroed) };
    assert_eq!(s, WgStatus::Ok);
    assert_eq!(zeroed, 4);
    assert_eq!(c, [5.0, 6.0, 7.0, 0.0, 0.0, 3.0, 0.0, 0.0, -4.0]);
}

#[test]
fn patch_lifecycle_for_both_codecs() {
    let dims = [17usize, 33];
    let n = 17 * 33;
    let mut data = signal(n);
    data.extend(signal(n).iter().map(|v| 2.0 * v));
    for codec in [WgCodec::Csr, WgCodec::Lz] {
        unsafe {
            let mut patch = ptr::null_mut();
            let s = wg_patch_compress(dims.as_ptr(), 2, 2, data.as_ptr(), &settings(codec, 0.0), &mut patch);
            assert_eq!(s, WgStatus::Ok, "{}", message());
            let (mut values, mut dense, mut packed) = (0, 0, 0);
            assert_eq!(wg_patch_info(patch, &mut values, &mut dense, &mut packed), WgStatus::Ok);
            assert_eq!((values, dense), (2 * n, 16 * n));
            assert!(packed > 0);

            let (mut bytes, mut len) = (ptr::null_mut(), 0);
            assert_eq!(wg_patch_serialize(patch, &mut bytes, &mut len), WgStatus::Ok);
            let mut copy = ptr::null_mut();
            assert_eq!(wg_patch_deserialize(bytes, len, &mut copy), WgStatus::Ok);
            wg_bytes_free(bytes, len);

            let mut out = vec![0.0; 2 * n];
            assert_eq!(wg_patch_decompress(copy, out.as_mut_ptr(), out.len()), WgStatus::Ok);
            for (a, b) in out.iter().zip(&data) {
                assert!((a - b).abs() < 1e-12);
            }
            assert_eq!(wg_patch_decompress(copy, out.as_mut_ptr(), n), WgStatus::InvalidArgument);
            wg_patch_free(patch);
            wg_patch_free(copy);
        }
    }
    unsafe { wg_patch_free(ptr::null_mut()) };
}

#[test]
fn simulation_runs_to_the_end() {
    unsafe {
        let mut cfg = std::mem::zeroed::<WgSimConfig>();
        assert_eq!(wg_sim_config_default(WgScheme::Swe, &mut cfg), WgStatus::Ok);
        assert_eq!(cfg.nx, 129);
        cfg.nx = 33;
        cfg.t_end = 0.02;
        cfg.threads = 1;
        cfg.compression.levels = 3;
        cfg.compression.threshold = 0.0005;
        cfg.compression.mode = WgThresholdMode::Constant;
        let mut sim = ptr::null_mut();
        assert_eq!(wg_simulation_new(&cfg, &mut sim), WgStatus::Ok, "{}", message());
        let mut m = WgStepMetrics::default();
        let mut first = None;
        while wg_simulation_finished(sim) == 0 {
            assert_eq!(wg_simulation_step(sim, &mut m), WgStatus::Ok);
            first.get_or_insert(m.global_mass);
        }
        assert!(m.l2_error.is_nan());
        assert!((m.global_mass - first.unwrap()).abs() < 1e-10);
        assert_eq!(wg_simulation_time(sim), 0.02);
        assert_eq!(wg_simulation_step(sim, &mut m), WgStatus::Finished);
        let mut h = vec![0.0; 33 * 33];
        assert_eq!(wg_simulation_copy_field(sim, 0, h.as_mut_ptr(), h.len()), WgStatus::Ok);
        assert!(h.iter().all(|v| *v > 0.5));
        assert_eq!(wg_simulation_copy_field(sim, 3, h.as_mut_ptr(), h.len()), WgStatus::InvalidArgument);
        wg_simulation_free(sim);
        assert_eq!(wg_scheme_components(WgScheme::Swe), 3);

        cfg.nx = 30;
        let mut bad = ptr::null_mut();
        assert_eq!(wg_simulation_new(&cfg, &mut bad), WgStatus::Config);
        assert!(bad.is_null());
        assert!(wg_simulation_time(ptr::null()).is_nan());
    }
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(wg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().map(|o| o.status.success()).unwrap_or(false)
}

#[test]
fn header_is_valid_c_and_cpp() {
    if !have_cc() {
        eprintln!("cc not found, skipping header check");
        return;
    }
    let header = header_dir().join("wavegrid.h");
    assert!(header.exists());
    for lang in ["c", "c++"] {
        let o = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
            .unwrap();
        assert!(o.status.success(), "{lang}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

/// Target profile directory that holds the static library.
fn lib_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?.to_path_buf();
    dir.join("libwavegrid_ffi.a").exists().then_some(dir)
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = (have_cc().then(lib_dir)).flatten() else {
        eprintln!("cc or static library not available, skipping");
        return;
    };
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let o = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header_dir())
        .arg(lib.join("libwavegrid_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = Command::new(&exe).output().unwrap();
    assert!(r.status.success(), "{r:?}");
    assert!(String::from_utf8_lossy(&r.stdout).starts_with("steps "));
}
