//! C ABI over the attribution, evasion and encoding entry points.
//!
//! Every function returns an [`UnstyleStatus`]. On failure the message is
//! available from [`unstyle_last_error`] on the same thread until the next
//! call. Strings returned through out-parameters are owned by the caller and
//! must be released with [`unstyle_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use unstyle::attrib::{AttribError, AttributionModel, Attributor};
use unstyle::corpus::TestCase;
use unstyle::frontend::{encode, parse_source, EncodeError, EncodeLimits};
use unstyle::interp::check_equivalence;
use unstyle::mcts::{evade, Objective, SearchConfig, SearchError};
use unstyle::transforms::enumerate_actions;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnstyleStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Io = 4,
    Model = 5,
    Search = 6,
    Format = 7,
    Panic = 8,
}

/// A trained attribution model.
pub struct UnstyleModel {
    inner: AttributionModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (UnstyleStatus, String);

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UnstyleStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UnstyleStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            UnstyleStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a NUL-terminated string valid for the call.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((UnstyleStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (UnstyleStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err((UnstyleStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

fn attrib_failure(e: AttribError) -> Failure {
    match e {
        AttribError::Syntax(_) => (UnstyleStatus::Syntax, e.to_string()),
        AttribError::Io(_) => (UnstyleStatus::Io, e.to_string()),
        other => (UnstyleStatus::Model, other.to_string()),
    }
}

/// Library version; static storage, never freed.
#[no_mangle]
pub extern "C" fn unstyle_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn unstyle_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn unstyle_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a model saved by `unstyle train-attrib`.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn unstyle_model_load(path: *const c_char, out: *mut *mut UnstyleModel) -> UnstyleStatus {
    guard(|| {
        check_out(out, "out")?;
        let path = text(path, "path")?;
        let inner = AttributionModel::load(Path::new(path)).map_err(attrib_failure)?;
        *out = Box::into_raw(Box::new(UnstyleModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn unstyle_model_from_json(json: *const c_char, out: *mut *mut UnstyleModel) -> UnstyleStatus {
    guard(|| {
        check_out(out, "out")?;
        let inner = AttributionModel::from_json(text(json, "json")?).map_err(attrib_failure)?;
        *out = Box::into_raw(Box::new(UnstyleModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` is null or came from a load function and was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn unstyle_model_free(model: *mut UnstyleModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of authors the model distinguishes; 0 for a null model.
///
/// # Safety
/// `model` is null or a live model.
#[no_mangle]
pub unsafe extern "C" fn unstyle_model_author_count(model: *const UnstyleModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.labels().len())
}

/// Most probable author of `source`.
///
/// # Safety
/// Pointers are valid; `out_author` is writable.
#[no_mangle]
pub unsafe extern "C" fn unstyle_model_predict(
    model: *const UnstyleModel,
    source: *const c_char,
    out_author: *mut *mut c_char,
) -> UnstyleStatus {
    guard(|| {
        check_out(out_author, "out_author")?;
        let m = model.as_ref().ok_or((UnstyleStatus::NullArgument, "model is null".to_string()))?;
        let p = m.inner.predict_source(text(source, "source")?).map_err(attrib_failure)?;
        *out_author = owned(p.author);
        Ok(())
    })
}

/// Tokens, leaf paths and data-flow graph as one JSON document.
///
/// # Safety
/// `source` is a NUL-terminated string; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn unstyle_encode(source: *const c_char, out_json: *mut *mut c_char) -> UnstyleStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let e = encode(text(source, "source")?, EncodeLimits::default()).map_err(|e| match e {
            EncodeError::Syntax(s) => (UnstyleStatus::Syntax, s.to_string()),
            EncodeError::Dfg(d) => (UnstyleStatus::Syntax, d.to_string()),
        })?;
        *out_json = owned(serde_json::to_string(&e).expect("encoding serializes"));
        Ok(())
    })
}

/// Number of applicable transform actions.
///
/// # Safety
/// `source` is a NUL-terminated string; `out_count` is writable.
#[no_mangle]
pub unsafe extern "C" fn unstyle_action_count(source: *const c_char, out_count: *mut usize) -> UnstyleStatus {
    guard(|| {
        check_out(out_count, "out_count")?;
        let p = parse_source(text(source, "source")?).map_err(|e| (UnstyleStatus::Syntax, e.to_string()))?;
        *out_count = enumerate_actions(&p).len();
        Ok(())
    })
}

/// Untargeted search with default settings except `budget` and `seed`. The
/// result JSON carries `success`, `final_code`, `predicted` and `sequence`.
///
/// # Safety
/// Pointers are valid; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn unstyle_evade(
    model: *const UnstyleModel,
    source: *const c_char,
    author: *const c_char,
    budget: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> UnstyleStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let m = model.as_ref().ok_or((UnstyleStatus::NullArgument, "model is null".to_string()))?;
        let p = parse_source(text(source, "source")?).map_err(|e| (UnstyleStatus::Syntax, e.to_string()))?;
        let objective = Objective::Untargeted(text(author, "author")?.to_string());
        let cfg = SearchConfig { budget, seed, ..Default::default() };
        let r = evade(&p, &m.inner, &objective, &cfg).map_err(|e| match e {
            SearchError::Attrib(a) => attrib_failure(a),
            other => (UnstyleStatus::Search, other.to_string()),
        })?;
        *out_json = owned(serde_json::to_string(&r).expect("results serialize"));
        Ok(())
    })
}

/// Runs both programs on every test; `tests_json` is an array of
/// `{"input": ..., "expected_output": ...}`. Writes 1 when equivalent, else 0.
///
/// # Safety
/// Pointers are valid; `out_equivalent` is writable.
#[no_mangle]
pub unsafe extern "C" fn unstyle_check_equivalence(
    original: *const c_char,
    candidate: *const c_char,
    tests_json: *const c_char,
    out_equivalent: *mut i32,
) -> UnstyleStatus {
    guard(|| {
        check_out(out_equivalent, "out_equivalent")?;
        let p = parse_source(text(original, "original")?).map_err(|e| (UnstyleStatus::Syntax, e.to_string()))?;
        let tests: Vec<TestCase> = serde_json::from_str(text(tests_json, "tests_json")?)
            .map_err(|e| (UnstyleStatus::Format, e.to_string()))?;
        let v = check_equivalence(&p, text(candidate, "candidate")?, &tests)
            .map_err(|e| (UnstyleStatus::Format, e.to_string()))?;
        *out_equivalent = v.is_equivalent() as i32;
        Ok(())
    })
}
