//! C ABI for the annotation engine.
//!
//! Every fallible call returns a [`TaStatus`]. On failure the message is kept
//! per thread and read with [`ta_last_error`]. Strings handed out by the
//! library are released with [`ta_string_free`]; engines with [`ta_engine_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use topic_annotator::classifier::{levenshtein_sim, ClassifierConfig};
use topic_annotator::eval::{evaluate, parse_topic_sets, Averaging};
use topic_annotator::ingest::parse_upload;
use topic_annotator::pipeline::{to_stable_json, Engine, EngineConfig, LoadError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    LoadFailed = 4,
    ParseFailed = 5,
    Panic = 6,
}

/// Classifier settings; start from [`ta_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TaConfig {
    pub lev_threshold: f64,
    pub knn_k: u32,
    pub knn_min_sim: f64,
    /// Nonzero to cut semantic topics at the elbow of their relevance curve.
    pub elbow: i32,
}

/// Loaded ontology, model and code scheme.
pub struct TaEngine {
    inner: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(TaStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TaStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TaStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| Failure(TaStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// As for [`opt_str`].
unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    opt_str(p, what)?.ok_or_else(|| Failure(TaStatus::NullArgument, format!("{what} is null")))
}

fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(TaStatus::InvalidArgument, "output contains NUL".into()))?;
    // SAFETY: callers check `out` for null before producing output.
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn null_check<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(TaStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

#[no_mangle]
pub extern "C" fn ta_config_default() -> TaConfig {
    let d = ClassifierConfig::default();
    TaConfig { lev_threshold: d.lev_threshold, knn_k: d.knn_k as u32, knn_min_sim: d.knn_min_sim, elbow: d.elbow as i32 }
}

/// Load an engine. `model_path` and `scheme_path` may be null; `config` may be
/// null for defaults. On success `*out` owns a new engine.
///
/// # Safety
/// Path arguments are null or NUL-terminated strings, `config` is null or points
/// to a `TaConfig`, and `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ta_engine_new(
    ontology_path: *const c_char,
    model_path: *const c_char,
    scheme_path: *const c_char,
    config: *const TaConfig,
    out: *mut *mut TaEngine,
) -> TaStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = ptr::null_mut();
        let ontology = req_str(ontology_path, "ontology_path")?;
        let model = opt_str(model_path, "model_path")?;
        let scheme = opt_str(scheme_path, "scheme_path")?;
        let c = if config.is_null() { ta_config_default() } else { *config };
        let cfg = EngineConfig {
            ontology: PathBuf::from(ontology),
            model: model.map(PathBuf::from),
            scheme: scheme.map(PathBuf::from),
            classifier: ClassifierConfig {
                lev_threshold: c.lev_threshold,
                knn_k: c.knn_k as usize,
                knn_min_sim: c.knn_min_sim,
                elbow: c.elbow != 0,
                ..Default::default()
            },
        };
        let engine = Engine::load(&cfg).map_err(|e| match e {
            LoadError::Config(c) => Failure(TaStatus::InvalidArgument, c.to_string()),
            other => Failure(TaStatus::LoadFailed, other.to_string()),
        })?;
        *out = Box::into_raw(Box::new(TaEngine { inner: engine }));
        Ok(())
    })
}

/// # Safety
/// `engine` is null or was returned by [`ta_engine_new`] and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ta_engine_free(engine: *mut TaEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Number of topics in the engine's ontology, or 0 for a null engine.
///
/// # Safety
/// `engine` is null or a live engine.
#[no_mangle]
pub unsafe extern "C" fn ta_engine_topic_count(engine: *const TaEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.inner.ontology().len())
}

/// Classify a ZIP archive or single book XML of `len` bytes and write the JSON
/// report to `*out_json`. Entries that fail to parse are listed in the report.
///
/// # Safety
/// `engine` is a live engine, `data` points to `len` readable bytes, and
/// `out_json` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ta_engine_classify(
    engine: *const TaEngine,
    data: *const u8,
    len: usize,
    min_chapters: u32,
    out_json: *mut *mut c_char,
) -> TaStatus {
    guard(|| {
        null_check(out_json, "out_json")?;
        *out_json = ptr::null_mut();
        let engine = engine.as_ref().ok_or_else(|| Failure(TaStatus::NullArgument, "engine is null".into()))?;
        null_check(data, "data")?;
        if min_chapters == 0 {
            return Err(Failure(TaStatus::InvalidArgument, "min_chapters must be at least 1".into()));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let contents = parse_upload(bytes).map_err(|e| Failure(TaStatus::ParseFailed, e.to_string()))?;
        if contents.books.is_empty() {
            let detail: Vec<String> = contents.errors.iter().map(|e| e.to_string()).collect();
            return Err(Failure(TaStatus::ParseFailed, format!("no books: {}", detail.join("; "))));
        }
        let analysis = engine.inner.analyze(contents.books, contents.errors, true);
        out_string(out_json, to_stable_json(&analysis.report(min_chapters as usize, None)))
    })
}

/// Normalized Levenshtein similarity of two strings after label normalization.
///
/// # Safety
/// `a` and `b` are NUL-terminated strings and `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ta_levenshtein_sim(a: *const c_char, b: *const c_char, out: *mut f64) -> TaStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = levenshtein_sim(req_str(a, "a")?, req_str(b, "b")?);
        Ok(())
    })
}

/// Score predictions against a gold standard; both are JSON documents in the
/// evaluation format. Nonzero `macro_average` selects macro headline scores.
///
/// # Safety
/// `gold_json` and `predicted_json` are NUL-terminated strings and `out_json`
/// is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ta_evaluate(
    gold_json: *const c_char,
    predicted_json: *const c_char,
    macro_average: i32,
    out_json: *mut *mut c_char,
) -> TaStatus {
    guard(|| {
        null_check(out_json, "out_json")?;
        *out_json = ptr::null_mut();
        let parse = |p, what| -> Result<_, Failure> {
            parse_topic_sets(req_str(p, what)?).map_err(|e| Failure(TaStatus::ParseFailed, format!("{what}: {e}")))
        };
        let gold = parse(gold_json, "gold_json")?;
        let predicted = parse(predicted_json, "predicted_json")?;
        let averaging = if macro_average != 0 { Averaging::Macro } else { Averaging::Micro };
        let report = evaluate(&gold, &predicted, averaging, true);
        out_string(out_json, serde_json::to_string(&report).expect("report serializes"))
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ta_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ta_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ta_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
