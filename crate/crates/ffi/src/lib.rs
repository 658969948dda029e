//! C ABI over the `spsmc` pipeline.
//!
//! Inputs are opaque handles created by [`spsmc_input_load`] or
//! [`spsmc_input_from_text`] and released with [`spsmc_input_free`]. Every
//! fallible call returns an [`SpsmcStatus`]; on failure the message is
//! available from [`spsmc_last_error_message`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and released with
//! [`spsmc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use spsmc::expand::AtBound;
use spsmc::frontend::SourceKind;
use spsmc::pipeline::Input;
use spsmc::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpsmcStatus {
    Ok = 0,
    /// A null pointer or a string that is not UTF-8.
    InvalidArgument = 1,
    /// Syntax or well-formedness errors in the input text.
    Parse = 2,
    /// Any other input error: unreadable file, missing model, zero bound.
    Input = 3,
    /// A state-space or search limit was reached.
    Capacity = 4,
    /// An internal panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpsmcSourceKind {
    /// A server system (`.sps`).
    Model = 0,
    /// A specification (`.mfstl`).
    Spec = 1,
    /// A system followed by `MFSTLSPEC` (`.spsml`).
    Combined = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpsmcAtBound {
    Block = 0,
    Freeze = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpsmcVerdict {
    Holds = 0,
    Violated = 1,
}

/// A parsed input file.
pub struct SpsmcInput(Input);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(SpsmcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => SpsmcStatus::Parse,
            _ if e.is_capacity() => SpsmcStatus::Capacity,
            _ => SpsmcStatus::Input,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(SpsmcStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpsmcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpsmcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error".into());
            SpsmcStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("`{name}` is not UTF-8")))
}

unsafe fn input_arg<'a>(p: *const SpsmcInput) -> Result<&'a Input, Fail> {
    p.as_ref().map(|i| &i.0).ok_or_else(|| invalid("`input` is null"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(invalid("`out` is null"));
    }
    let c = CString::new(s).map_err(|_| Fail(SpsmcStatus::Internal, "output contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_input(out: *mut *mut SpsmcInput, input: Input) -> Result<(), Fail> {
    if out.is_null() {
        return Err(invalid("`out` is null"));
    }
    *out = Box::into_raw(Box::new(SpsmcInput(input)));
    Ok(())
}

/// Parses the file at `path`, choosing the format by extension. `model_path`
/// may be null; when given it names a `.sps` file supplying the system for a
/// `.mfstl` specification.
///
/// # Safety
/// `path` and `model_path` must be null or point to nul-terminated strings;
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn spsmc_input_load(
    path: *const c_char,
    model_path: *const c_char,
    out: *mut *mut SpsmcInput,
) -> SpsmcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let model = match model_path.is_null() {
            true => None,
            false => Some(str_arg(model_path, "model_path")?),
        };
        let input = Input::load(Path::new(path), model.map(Path::new))?;
        write_input(out, input)
    })
}

/// Parses `text` as the given kind. For a specification, `model` may be a
/// previously parsed input that carries a server system, or null.
///
/// # Safety
/// `text` must point to a nul-terminated string, `model` must be null or a
/// live handle, and `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn spsmc_input_from_text(
    text: *const c_char,
    kind: SpsmcSourceKind,
    model: *const SpsmcInput,
    out: *mut *mut SpsmcInput,
) -> SpsmcStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let sps = match model.as_ref() {
            None => None,
            Some(m) => Some(m.0.sps()?),
        };
        let kind = match kind {
            SpsmcSourceKind::Model => SourceKind::Model,
            SpsmcSourceKind::Spec => SourceKind::Spec,
            SpsmcSourceKind::Combined => SourceKind::Combined,
        };
        write_input(out, Input::from_text(text, kind, sps)?)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `input` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spsmc_input_free(input: *mut SpsmcInput) {
    if !input.is_null() {
        drop(Box::from_raw(input));
    }
}

/// Writes the per-type bound profile, one `type: r=R n=N` line per type.
///
/// # Safety
/// `input` must be a live handle and `out` valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn spsmc_bound(input: *const SpsmcInput, out: *mut *mut c_char) -> SpsmcStatus {
    guard(|| {
        let bounds = input_arg(input)?.bounds()?;
        write_string(out, bounds.to_string())
    })
}

/// Writes the grounded LTL formula.
///
/// # Safety
/// `input` must be a live handle and `out` valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn spsmc_ground(input: *const SpsmcInput, out: *mut *mut c_char) -> SpsmcStatus {
    guard(|| {
        let (_, ltl) = input_arg(input)?.ground()?;
        write_string(out, ltl.render())
    })
}

/// Checks the specification against the system. On success `verdict` is set
/// and, when `report` is not null, the rendered verdict (with the
/// counterexample when violated) is written to it.
///
/// # Safety
/// `input` must be a live handle, `verdict` valid for writing, and `report`
/// null or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn spsmc_check(
    input: *const SpsmcInput,
    at_bound: SpsmcAtBound,
    verdict: *mut SpsmcVerdict,
    report: *mut *mut c_char,
) -> SpsmcStatus {
    guard(|| {
        if verdict.is_null() {
            return Err(invalid("`verdict` is null"));
        }
        let mode = match at_bound {
            SpsmcAtBound::Block => AtBound::Block,
            SpsmcAtBound::Freeze => AtBound::Freeze,
        };
        let r = input_arg(input)?.check(mode)?;
        *verdict = match r.verdict.holds {
            true => SpsmcVerdict::Holds,
            false => SpsmcVerdict::Violated,
        };
        if !report.is_null() {
            write_string(report, r.verdict.render(&r.kripke))?;
        }
        Ok(())
    })
}

/// Writes the SMV encoding.
///
/// # Safety
/// `input` must be a live handle and `out` valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn spsmc_emit_smv(input: *const SpsmcInput, out: *mut *mut c_char) -> SpsmcStatus {
    guard(|| {
        let doc = input_arg(input)?.emit_smv()?;
        write_string(out, doc.text)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spsmc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The message for the last failed call on this thread, or null. The
/// pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn spsmc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn spsmc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
