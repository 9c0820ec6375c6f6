//! C ABI over `qclust`.
//!
//! Conventions:
//! * every fallible function returns a [`QcStatus`]; outputs go through
//!   pointer arguments and are written only on `QC_STATUS_OK`;
//! * objects are opaque handles created by `*_new`/`qc_kmeans` and released
//!   with the matching `*_free` (which accepts NULL);
//! * after a failure, [`qc_last_error_message`] describes it. The string is
//!   owned by the library and valid until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qclust::cluster::{kmeans_best_of, ClusteringResult, DistanceMeasure, KMeansConfig};
use qclust::encode::{kernel_fidelity, swap_test_fidelity, AngleVector, FidelityMode};
use qclust::metrics::evaluate;
use qclust::{Dataset, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad argument or configuration (k, shots, out-of-range angles, ...).
    InvalidArgument = 2,
    /// Malformed input data (non-finite values, wrong shape, ...).
    DataError = 3,
    /// A metric is undefined for the given partition.
    MetricUndefined = 4,
    /// Caller-provided output buffer is too small.
    BufferTooSmall = 5,
    Internal = 70,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcMeasure {
    Euclidean = 0,
    SwapTest = 1,
    QuantumKernel = 2,
}

/// Options for [`qc_kmeans`]; start from [`qc_kmeans_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QcKMeansOptions {
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub measure: QcMeasure,
    /// 0 evaluates fidelities exactly.
    pub shots: u64,
    /// Independent restarts; the best is kept. 0 is treated as 1.
    pub restarts: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QcMetrics {
    pub silhouette: f64,
    pub davies_bouldin: f64,
    pub calinski_harabasz: f64,
}

/// Opaque row-major dataset.
pub struct QcDataset(Dataset);

/// Opaque clustering result.
pub struct QcResult(ClusteringResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> QcStatus {
    match err {
        Error::Config(_) | Error::Usage(_) | Error::Encoding { .. } => QcStatus::InvalidArgument,
        Error::MetricUndefined(_) => QcStatus::MetricUndefined,
        Error::Internal(_) => QcStatus::Internal,
        _ => QcStatus::DataError,
    }
}

fn fail(status: QcStatus, message: impl Into<String>) -> QcStatus {
    set_last_error(message.into());
    status
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), QcStatus>) -> QcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QcStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(QcStatus::Internal, "panic inside qclust"),
    }
}

fn check<T>(r: qclust::Result<T>) -> Result<T, QcStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), QcStatus> {
    if p.is_null() {
        Err(fail(QcStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

/// Message for the most recent failure on this thread, or NULL.
#[no_mangle]
pub extern "C" fn qc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qc_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    VERSION.as_ptr()
}

/// Copies `rows * cols` row-major values into a new dataset.
///
/// # Safety
/// `values` must point to `rows * cols` readable doubles; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qc_dataset_new(
    values: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut QcDataset,
) -> QcStatus {
    guard(|| {
        non_null(values, "values")?;
        non_null(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(QcStatus::InvalidArgument, "rows * cols overflows"))?;
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let dataset = check(Dataset::from_flat(rows, cols, data))?;
        *out = Box::into_raw(Box::new(QcDataset(dataset)));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be NULL or a handle from [`qc_dataset_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qc_dataset_free(dataset: *mut QcDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_dataset_rows(dataset: *const QcDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.n_rows())
}

/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_dataset_cols(dataset: *const QcDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.n_cols())
}

/// Euclidean, exact, k = 2, 300 iterations, tolerance 1e-6, one restart.
#[no_mangle]
pub extern "C" fn qc_kmeans_options_default() -> QcKMeansOptions {
    let base = KMeansConfig::new(2);
    QcKMeansOptions {
        k: base.k,
        max_iter: base.max_iter,
        tol: base.tol,
        seed: base.seed,
        measure: QcMeasure::Euclidean,
        shots: 0,
        restarts: 1,
    }
}

fn fidelity_mode(shots: u64, seed: u64) -> FidelityMode {
    if shots == 0 {
        FidelityMode::Exact
    } else {
        FidelityMode::Sampled { shots, seed }
    }
}

/// Clusters `dataset`. Quantum measures expect features in `[0, pi]`.
///
/// # Safety
/// `dataset` must be a live handle, `options` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qc_kmeans(
    dataset: *const QcDataset,
    options: *const QcKMeansOptions,
    out: *mut *mut QcResult,
) -> QcStatus {
    guard(|| {
        non_null(dataset, "dataset")?;
        non_null(options, "options")?;
        non_null(out, "out")?;
        let data = &(*dataset).0;
        let o = *options;
        let config = KMeansConfig {
            max_iter: o.max_iter,
            tol: o.tol,
            seed: o.seed,
            measure: match o.measure {
                QcMeasure::Euclidean => DistanceMeasure::Euclidean,
                QcMeasure::SwapTest => DistanceMeasure::SwapTest,
                QcMeasure::QuantumKernel => DistanceMeasure::QuantumKernel,
            },
            fidelity_mode: fidelity_mode(o.shots, o.seed),
            ..KMeansConfig::new(o.k)
        };
        let best = check(kmeans_best_of(data, &config, o.restarts.max(1)))?;
        *out = Box::into_raw(Box::new(QcResult(best.result)));
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a handle from [`qc_kmeans`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qc_result_free(result: *mut QcResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of clusters.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_result_k(result: *const QcResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.k())
}

/// Number of assigned points.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_result_len(result: *const QcResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.assignments.len())
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_result_iterations(result: *const QcResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.iterations)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_result_converged(result: *const QcResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.converged)
}

/// Copies the cluster index of every point into `out[0..len]`.
///
/// # Safety
/// `result` must be a live handle and `out` writable for `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn qc_result_assignments(
    result: *const QcResult,
    out: *mut usize,
    capacity: usize,
) -> QcStatus {
    guard(|| {
        non_null(result, "result")?;
        non_null(out, "out")?;
        let a = &(*result).0.assignments;
        if capacity < a.len() {
            return Err(fail(
                QcStatus::BufferTooSmall,
                format!("need {} slots, got {capacity}", a.len()),
            ));
        }
        std::ptr::copy_nonoverlapping(a.as_ptr(), out, a.len());
        Ok(())
    })
}

/// Copies the `k x cols` row-major centroid matrix into `out`.
///
/// # Safety
/// `result` must be a live handle and `out` writable for `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn qc_result_centroids(
    result: *const QcResult,
    out: *mut f64,
    capacity: usize,
) -> QcStatus {
    guard(|| {
        non_null(result, "result")?;
        non_null(out, "out")?;
        let flat: Vec<f64> = (*result).0.centroids.iter().flatten().copied().collect();
        if capacity < flat.len() {
            return Err(fail(
                QcStatus::BufferTooSmall,
                format!("need {} slots, got {capacity}", flat.len()),
            ));
        }
        std::ptr::copy_nonoverlapping(flat.as_ptr(), out, flat.len());
        Ok(())
    })
}

unsafe fn angle_pair(
    x: *const f64,
    c: *const f64,
    n: usize,
) -> Result<(AngleVector, AngleVector), QcStatus> {
    non_null(x, "x")?;
    non_null(c, "c")?;
    let x = check(AngleVector::new(std::slice::from_raw_parts(x, n).to_vec()))?;
    let c = check(AngleVector::new(std::slice::from_raw_parts(c, n).to_vec()))?;
    Ok((x, c))
}

/// Swap-test fidelity of two angle vectors of length `n`; `shots == 0`
/// gives the exact value.
///
/// # Safety
/// `x` and `c` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qc_swap_test_fidelity(
    x: *const f64,
    c: *const f64,
    n: usize,
    shots: u64,
    seed: u64,
    out: *mut f64,
) -> QcStatus {
    guard(|| {
        non_null(out, "out")?;
        let (x, c) = angle_pair(x, c, n)?;
        *out = check(swap_test_fidelity(&x, &c, fidelity_mode(shots, seed)))?.value();
        Ok(())
    })
}

/// Kernel-circuit fidelity (all-zeros readout) of two angle vectors.
///
/// # Safety
/// `x` and `c` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qc_kernel_fidelity(
    x: *const f64,
    c: *const f64,
    n: usize,
    shots: u64,
    seed: u64,
    out: *mut f64,
) -> QcStatus {
    guard(|| {
        non_null(out, "out")?;
        let (x, c) = angle_pair(x, c, n)?;
        *out = check(kernel_fidelity(&x, &c, fidelity_mode(shots, seed)))?.value();
        Ok(())
    })
}

/// Silhouette, Davies–Bouldin and Calinski–Harabasz scores of a labelling.
///
/// # Safety
/// `dataset` must be a live handle, `assignments` must point to `len`
/// values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qc_evaluate(
    dataset: *const QcDataset,
    assignments: *const usize,
    len: usize,
    out: *mut QcMetrics,
) -> QcStatus {
    guard(|| {
        non_null(dataset, "dataset")?;
        non_null(assignments, "assignments")?;
        non_null(out, "out")?;
        let labels = std::slice::from_raw_parts(assignments, len);
        let m = check(evaluate(&(*dataset).0, labels))?;
        *out = QcMetrics {
            silhouette: m.silhouette,
            davies_bouldin: m.davies_bouldin,
            calinski_harabasz: m.calinski_harabasz,
        };
        Ok(())
    })
}
