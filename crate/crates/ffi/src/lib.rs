//! C ABI over the hepaflow library.
//!
//! Every fallible call returns an [`HfStatus`]; on failure the message is
//! available from [`hf_last_error`] on the same thread. Objects are opaque
//! handles released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hepaflow::dataset::{load_ilpd, Dataset};
use hepaflow::eval::{brier, roc_auc};
use hepaflow::numerics::SeededRng;
use hepaflow::pipeline::{self, PipelineConfig};
use hepaflow::preprocess::{generate_synthetic, SyntheticSpec};
use hepaflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Data = 4,
    Numeric = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A loaded or simulated dataset.
pub struct HfDataset {
    inner: Dataset,
}

/// The result of a full pipeline run.
pub struct HfReport {
    summary: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> HfStatus {
    match err {
        Error::Config(_) => HfStatus::Config,
        Error::Data(_) => HfStatus::Data,
        Error::Numeric(_) | Error::Input(_) => HfStatus::Numeric,
        Error::Io { .. } => HfStatus::Io,
        Error::Stage { source, .. } => status_of(source),
    }
}

fn guard(f: impl FnOnce() -> Result<(), HfStatus>) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            HfStatus::Panic
        }
    }
}

fn fail(err: Error) -> HfStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, HfStatus> {
    if p.is_null() {
        set_error(format!("`{name}` is null"));
        return Err(HfStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("`{name}` is not valid UTF-8"));
        HfStatus::InvalidUtf8
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), HfStatus> {
    if p.is_null() {
        set_error(format!("`{name}` is null"));
        Err(HfStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an ILPD CSV (Gender dropped, target mapped to 1 = disease).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_load(path: *const c_char, out: *mut *mut HfDataset) -> HfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        non_null(out, "out")?;
        let (inner, _) = load_ilpd(Path::new(path)).map_err(fail)?;
        *out = Box::into_raw(Box::new(HfDataset { inner }));
        Ok(())
    })
}

/// Generates a simulated cohort from a JSON spec (`{}` for defaults).
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_simulate(spec_json: *const c_char, out: *mut *mut HfDataset) -> HfStatus {
    guard(|| {
        let text = str_arg(spec_json, "spec_json")?;
        non_null(out, "out")?;
        let spec: SyntheticSpec = serde_json::from_str(text)
            .map_err(|e| fail(Error::Config(format!("invalid synthetic spec: {e}"))))?;
        let inner = generate_synthetic(&spec, &mut SeededRng::new(spec.seed)).map_err(fail)?;
        *out = Box::into_raw(Box::new(HfDataset { inner }));
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_rows(ds: *const HfDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_rows())
}

/// # Safety
/// `ds` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_cols(ds: *const HfDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_features())
}

/// Copies the row-major feature matrix into `buf` (`len` doubles, at least
/// rows × cols). Missing cells are NaN.
///
/// # Safety
/// `ds` must be a handle from this library; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_copy_features(ds: *const HfDataset, buf: *mut f64, len: usize) -> HfStatus {
    guard(|| {
        non_null(ds, "ds")?;
        non_null(buf, "buf")?;
        let data = (*ds).inner.features.as_slice();
        if len < data.len() {
            set_error(format!("buffer holds {len} values, need {}", data.len()));
            return Err(HfStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// Copies the 0/1 labels into `buf` (`len` bytes, at least rows).
///
/// # Safety
/// `ds` must be a handle from this library; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_copy_labels(ds: *const HfDataset, buf: *mut u8, len: usize) -> HfStatus {
    guard(|| {
        non_null(ds, "ds")?;
        non_null(buf, "buf")?;
        let labels = &(*ds).inner.labels;
        if len < labels.len() {
            set_error(format!("buffer holds {len} labels, need {}", labels.len()));
            return Err(HfStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(labels.as_ptr(), buf, labels.len());
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_dataset_free(ds: *mut HfDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Runs the full pipeline from a JSON config and writes its report files.
/// Relative paths in the config resolve against the working directory.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_run(config_json: *const c_char, out: *mut *mut HfReport) -> HfStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        non_null(out, "out")?;
        let cfg = PipelineConfig::from_json(text).map_err(fail)?;
        let report = pipeline::run(&cfg).map_err(fail)?;
        let json = serde_json::to_string(&report)
            .map_err(|e| fail(Error::Input(format!("cannot serialize report: {e}"))))?;
        let summary = CString::new(json).map_err(|_| fail(Error::Input("report contains NUL".into())))?;
        *out = Box::into_raw(Box::new(HfReport { summary }));
        Ok(())
    })
}

/// The run summary as JSON, owned by the report.
///
/// # Safety
/// `report` must be null or a live handle from [`hf_run`].
#[no_mangle]
pub unsafe extern "C" fn hf_report_summary_json(report: *const HfReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.summary.as_ptr())
}

/// # Safety
/// `report` must be null or a handle from [`hf_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_report_free(report: *mut HfReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn scored<'a>(labels: *const u8, scores: *const f64, n: usize) -> Result<(&'a [u8], &'a [f64]), HfStatus> {
    non_null(labels, "labels")?;
    non_null(scores, "scores")?;
    Ok((std::slice::from_raw_parts(labels, n), std::slice::from_raw_parts(scores, n)))
}

/// ROC AUC of positive-class scores (ties get half credit).
///
/// # Safety
/// `labels` and `scores` must each hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_roc_auc(labels: *const u8, scores: *const f64, n: usize, out: *mut f64) -> HfStatus {
    guard(|| {
        non_null(out, "out")?;
        let (y, s) = scored(labels, scores, n)?;
        *out = roc_auc(y, s).map_err(fail)?;
        Ok(())
    })
}

/// Mean squared error between P(positive) and the 0/1 outcome.
///
/// # Safety
/// `labels` and `probabilities` must each hold `n` values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hf_brier(labels: *const u8, probabilities: *const f64, n: usize, out: *mut f64) -> HfStatus {
    guard(|| {
        non_null(out, "out")?;
        let (y, p) = scored(labels, probabilities, n)?;
        *out = brier(y, p).map_err(fail)?;
        Ok(())
    })
}
