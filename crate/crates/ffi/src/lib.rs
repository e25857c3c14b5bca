//! C ABI over the hades library.
//!
//! Every fallible call returns a [`HadesStatus`]; on failure the message is
//! available from [`hades_last_error`] on the same thread until the next call.
//! Objects cross the boundary as opaque handles that must be released with the
//! matching `_free` function. Strings returned through out-parameters are
//! owned by the caller and released with [`hades_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::path::Path;
use std::ptr;

use hades::analysis::{hellinger, jensen_shannon, relevance, AnalysisError};
use hades::service::config::{read_json, UiDefaults};
use hades::service::{load_bundle, Api, ServiceError};
use hades::topics::TopicModel;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HadesStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    InvalidData = 5,
    Panic = 6,
}

/// A fitted topic model.
pub struct HadesModel {
    model: TopicModel,
}

/// A loaded analysis bundle answering API requests.
pub struct HadesBundle {
    api: Api,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(HadesStatus, String);

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::Io { .. } | ServiceError::MissingStage { .. } => HadesStatus::Io,
            ServiceError::SchemaViolation { .. }
            | ServiceError::VersionMismatch { .. }
            | ServiceError::DanglingReference(_) => HadesStatus::InvalidData,
            _ => HadesStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure(HadesStatus::InvalidArgument, e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(HadesStatus::InvalidArgument, message.into())
}

/// Runs `f`, records any failure and converts panics into `Panic`.
fn guard<F: FnOnce() -> Result<(), Failure> + UnwindSafe>(f: F) -> HadesStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(f) {
        Ok(Ok(())) => HadesStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HadesStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(HadesStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(HadesStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hades_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn hades_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hades_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Hellinger distance between two distributions of length `len`.
///
/// # Safety
/// `p` and `q` must point to `len` doubles; `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn hades_hellinger(p: *const f64, q: *const f64, len: usize, out: *mut f64) -> HadesStatus {
    guard(|| {
        let (p, q) = (slice_arg(p, len, "p")?, slice_arg(q, len, "q")?);
        non_null(out, "out")?;
        *out = hellinger(p, q)?;
        Ok(())
    })
}

/// Jensen-Shannon divergence (natural log) between two distributions.
///
/// # Safety
/// Same as [`hades_hellinger`].
#[no_mangle]
pub unsafe extern "C" fn hades_jensen_shannon(p: *const f64, q: *const f64, len: usize, out: *mut f64) -> HadesStatus {
    guard(|| {
        let (p, q) = (slice_arg(p, len, "p")?, slice_arg(q, len, "q")?);
        non_null(out, "out")?;
        *out = jensen_shannon(p, q)?;
        Ok(())
    })
}

/// Loads a model file written by `hades fit`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hades_model_load(path: *const c_char, out: *mut *mut HadesModel) -> HadesStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let model: TopicModel = read_json(Path::new(path))?;
        model
            .validate()
            .map_err(|e| Failure(HadesStatus::InvalidData, format!("{path}: {e}")))?;
        *out = Box::into_raw(Box::new(HadesModel { model }));
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from [`hades_model_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hades_model_free(model: *mut HadesModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of topics, documents and vocabulary terms. Any out pointer may be NULL.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hades_model_shape(
    model: *const HadesModel,
    topics: *mut usize,
    docs: *mut usize,
    terms: *mut usize,
) -> HadesStatus {
    guard(|| {
        non_null(model, "model")?;
        let m = &(*model).model;
        for (p, v) in [(topics, m.k), (docs, m.n_docs()), (terms, m.n_terms())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Copies document `doc`'s topic distribution into `buf`, which must hold
/// exactly K doubles.
///
/// # Safety
/// `model` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hades_model_theta(
    model: *const HadesModel,
    doc: usize,
    buf: *mut f64,
    len: usize,
) -> HadesStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(buf, "buf")?;
        let m = &(*model).model;
        let row = m
            .theta
            .get(doc)
            .ok_or_else(|| invalid(format!("document {doc} out of range 0..{}", m.n_docs())))?;
        if len != row.len() {
            return Err(invalid(format!(
                "buffer holds {len} values, model has {} topics",
                row.len()
            )));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(row);
        Ok(())
    })
}

/// Relevance-ranked terms per topic plus corpus saliency, as JSON.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable. Free the result with
/// [`hades_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hades_model_relevance_json(
    model: *const HadesModel,
    lambda: f64,
    top_n: usize,
    out: *mut *mut c_char,
) -> HadesStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        if !(0.0..=1.0).contains(&lambda) {
            return Err(invalid(format!("lambda {lambda} outside [0, 1]")));
        }
        if top_n == 0 {
            return Err(invalid("top_n must be positive"));
        }
        let ranking = relevance(&(*model).model, lambda, top_n);
        let json = serde_json::to_string(&ranking).map_err(|e| Failure(HadesStatus::Panic, e.to_string()))?;
        *out = into_c_string(json);
        Ok(())
    })
}

/// Loads an exported analysis bundle directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hades_bundle_load(path: *const c_char, out: *mut *mut HadesBundle) -> HadesStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let bundle = load_bundle(Path::new(path))?;
        *out = Box::into_raw(Box::new(HadesBundle {
            api: Api::new(bundle, UiDefaults::default()),
        }));
        Ok(())
    })
}

/// Releases a bundle. NULL is ignored.
///
/// # Safety
/// `bundle` must come from [`hades_bundle_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hades_bundle_free(bundle: *mut HadesBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Answers an API GET, e.g. path `/api/sections/energy/terms` with query
/// `lambda=0.6`. `query` may be NULL. The HTTP status goes to `http_status`
/// and the JSON body to `body`; a 4xx answer still returns `Ok`.
///
/// # Safety
/// `bundle` must be a live handle; strings NUL-terminated; out pointers
/// writable. Free `body` with [`hades_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hades_bundle_get(
    bundle: *const HadesBundle,
    path: *const c_char,
    query: *const c_char,
    http_status: *mut u16,
    body: *mut *mut c_char,
) -> HadesStatus {
    guard(|| {
        non_null(bundle, "bundle")?;
        let path = str_arg(path, "path")?;
        let query = if query.is_null() { "" } else { str_arg(query, "query")? };
        non_null(http_status, "http_status")?;
        non_null(body, "body")?;
        let response = (*bundle).api.get(path, query);
        *http_status = response.status;
        *body = into_c_string(String::from_utf8_lossy(&response.to_bytes()).trim_end().to_string());
        Ok(())
    })
}
