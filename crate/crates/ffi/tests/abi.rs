use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qclust_ffi::*;

fn last_error() -> String {
    let p = qc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn dataset(values: &[f64], rows: usize, cols: usize) -> *mut QcDataset {
    let mut out = ptr::null_mut();
    let status = unsafe { qc_dataset_new(values.as_ptr(), rows, cols, &mut out) };
    assert_eq!(status, QcStatus::Ok);
    out
}

#[test]
fn kmeans_round_trip() {
    let values = [0.0, 0.0, 0.2, 0.0, 2.0, 2.0, 2.2, 2.0, 0.1, 0.1];
    let data = dataset(&values, 5, 2);
    assert_eq!(unsafe { qc_dataset_rows(data) }, 5);
    assert_eq!(unsafe { qc_dataset_cols(data) }, 2);

    let mut opts = qc_kmeans_options_default();
    opts.restarts = 3;
    let mut result = ptr::null_mut();
    assert_eq!(unsafe { qc_kmeans(data, &opts, &mut result) }, QcStatus::Ok);
    assert_eq!(unsafe { qc_result_k(result) }, 2);
    assert_eq!(unsafe { qc_result_len(result) }, 5);
    assert!(unsafe { qc_result_converged(result) });
    assert!(unsafe { qc_result_iterations(result) } >= 1);

    let mut labels = [usize::MAX; 5];
    assert_eq!(
        unsafe { qc_result_assignments(result, labels.as_mut_ptr(), 5) },
        QcStatus::Ok
    );
    assert_eq!(labels[0], labels[1]);
    assert_eq!(labels[0], labels[4]);
    assert_eq!(labels[2], labels[3]);
    assert_ne!(labels[0], labels[2]);

    let mut centroids = [0.0; 4];
    assert_eq!(
        unsafe { qc_result_centroids(result, centroids.as_mut_ptr(), 4) },
        QcStatus::Ok
    );
    let far = labels[2];
    assert!((centroids[far * 2] - 2.1).abs() < 1e-12);
    assert!((centroids[far * 2 + 1] - 2.0).abs() < 1e-12);

    let mut small = [0usize; 2];
    assert_eq!(
        unsafe { qc_result_assignments(result, small.as_mut_ptr(), 2) },
        QcStatus::BufferTooSmall
    );
    assert!(last_error().contains("need 5"));

    let mut metrics = QcMetrics::default();
    assert_eq!(
        unsafe { qc_evaluate(data, labels.as_ptr(), 5, &mut metrics) },
        QcStatus::Ok
    );
    assert!(metrics.silhouette > 0.8);

    unsafe {
        qc_result_free(result);
        qc_dataset_free(data);
    }
}

#[test]
fn fidelities_match_closed_form() {
    let x: [f64; 2] = [0.4, 2.0];
    let c: [f64; 2] = [1.1, 1.5];
    let expected: f64 = x
        .iter()
        .zip(&c)
        .map(|(a, b)| (a - b).cos().powi(2))
        .product();
    let mut f = -1.0;
    assert_eq!(
        unsafe { qc_swap_test_fidelity(x.as_ptr(), c.as_ptr(), 2, 0, 0, &mut f) },
        QcStatus::Ok
    );
    assert!((f - expected).abs() < 1e-12);
    assert_eq!(
        unsafe { qc_kernel_fidelity(x.as_ptr(), c.as_ptr(), 2, 0, 0, &mut f) },
        QcStatus::Ok
    );
    assert!((f - expected).abs() < 1e-12);
    assert_eq!(
        unsafe { qc_kernel_fidelity(x.as_ptr(), c.as_ptr(), 2, 10_000, 5, &mut f) },
        QcStatus::Ok
    );
    assert!((f - expected).abs() < 0.04);
}

#[test]
fn errors_map_to_status_codes() {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { qc_dataset_new(ptr::null(), 1, 1, &mut out) },
        QcStatus::NullPointer
    );
    assert!(out.is_null());

    let nan = [f64::NAN];
    assert_eq!(
        unsafe { qc_dataset_new(nan.as_ptr(), 1, 1, &mut out) },
        QcStatus::DataError
    );

    let bad = [4.0];
    let ok = [1.0];
    let mut f = 0.0;
    assert_eq!(
        unsafe { qc_swap_test_fidelity(bad.as_ptr(), ok.as_ptr(), 1, 0, 0, &mut f) },
        QcStatus::InvalidArgument
    );
    assert!(last_error().contains("index 0"), "{}", last_error());

    let data = dataset(&[0.0, 1.0, 2.0], 3, 1);
    let mut opts = qc_kmeans_options_default();
    opts.k = 4;
    let mut result = ptr::null_mut();
    assert_eq!(
        unsafe { qc_kmeans(data, &opts, &mut result) },
        QcStatus::InvalidArgument
    );
    assert!(result.is_null());

    let one_cluster = [0usize; 3];
    let mut metrics = QcMetrics::default();
    assert_eq!(
        unsafe { qc_evaluate(data, one_cluster.as_ptr(), 3, &mut metrics) },
        QcStatus::MetricUndefined
    );

    unsafe {
        qc_dataset_free(data);
        qc_dataset_free(ptr::null_mut());
        qc_result_free(ptr::null_mut());
    }
}

#[test]
fn successful_call_clears_last_error() {
    let mut out = ptr::null_mut();
    let _ = unsafe { qc_dataset_new(ptr::null(), 1, 1, &mut out) };
    assert!(!qc_last_error_message().is_null());
    let data = dataset(&[1.0], 1, 1);
    assert!(qc_last_error_message().is_null());
    unsafe { qc_dataset_free(data) };
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/qclust.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "qc_dataset_new",
        "qc_kmeans",
        "qc_result_assignments",
        "qc_swap_test_fidelity",
        "qc_kernel_fidelity",
        "qc_evaluate",
        "qc_last_error_message",
        "QC_STATUS_OK = 0",
        "typedef struct QcDataset QcDataset;",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }

    let lib = target_dir().join("libqclust_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("C toolchain or static library unavailable; compiled header check skipped");
        return;
    }
    let tmp = std::env::temp_dir().join(format!("qclust_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&tmp)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke test failed to build");
    let run = Command::new(&tmp).output().unwrap();
    let _ = std::fs::remove_file(&tmp);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
