//! C ABI over the copyless checker and simulator.
//!
//! Programs and endpoint types are opaque handles created by `*_parse` and
//! released by the matching `*_free`. Every fallible call returns a status code;
//! on failure, `copyless_last_error` describes the cause.
//! Strings handed out by the library are freed with `copyless_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use copyless::algebra::{dual, subtype, weight, TyVarSet, Weight};
use copyless::cli::check_program;
use copyless::frontend::{parse_etype, parse_program, SourceProgram};
use copyless::runtime::{explore, run, Configuration};
use copyless::syntax::{EndpointType, Process};

/// Result codes. The first four coincide with the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    TypeError = 1,
    Violation = 2,
    ParseError = 3,
    InvalidArgument = 4,
    Internal = 5,
}

/// A parsed program.
pub struct Program {
    source: SourceProgram,
}

/// A closed endpoint type.
pub struct TypeHandle {
    ty: EndpointType,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: Status, msg: impl Into<String>) -> Status {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `Status::Internal`.
fn guard<F: FnOnce() -> Status + UnwindSafe>(f: F) -> Status {
    clear_error();
    catch_unwind(f).unwrap_or_else(|_| fail(Status::Internal, "internal error"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Status> {
    if s.is_null() {
        return Err(fail(Status::InvalidArgument, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(Status::InvalidArgument, "string is not UTF-8"))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Description of the last failure on this thread, or null. Valid until the
/// next library call on the same thread.
#[no_mangle]
pub extern "C" fn copyless_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn copyless_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn copyless_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses program source.
///
/// # Safety
/// `src` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copyless_program_parse(src: *const c_char, out: *mut *mut Program) -> Status {
    guard(|| {
        if out.is_null() {
            return fail(Status::InvalidArgument, "null output pointer");
        }
        let text = match read_str(src) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_program(text) {
            Ok(source) => {
                *out = Box::into_raw(Box::new(Program { source }));
                Status::Ok
            }
            Err(e) => fail(Status::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `p` must be null or a handle from `copyless_program_parse`, freed once.
#[no_mangle]
pub unsafe extern "C" fn copyless_program_free(p: *mut Program) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Type checks the program under its declared environment.
///
/// # Safety
/// `p` must be a live program handle.
#[no_mangle]
pub unsafe extern "C" fn copyless_program_check(p: *const Program) -> Status {
    guard(|| {
        let Some(p) = p.as_ref() else { return fail(Status::InvalidArgument, "null program") };
        match check_program(&p.source) {
            Ok(_) => Status::Ok,
            Err(e) => fail(Status::TypeError, e.to_string()),
        }
    })
}

fn runnable(p: &Program, unchecked: bool) -> Result<Configuration, Status> {
    if !p.source.env.is_empty() || !p.source.tyvars.is_empty() {
        return Err(fail(Status::InvalidArgument, "only closed programs can be executed"));
    }
    if !unchecked {
        check_program(&p.source).map_err(|e| fail(Status::TypeError, e.to_string()))?;
    }
    Ok(Configuration::initial(p.source.main.as_ref().unwrap_or(&Process::Idle)))
}

/// Runs the program with a seeded random scheduler. Writes the JSON run
/// report to `out_json`; returns `COPYLESS_STATUS_VIOLATION` when the monitor
/// flags the final configuration.
///
/// # Safety
/// `p` must be a live program handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copyless_program_run(
    p: *const Program,
    seed: u64,
    max_steps: u64,
    unchecked: bool,
    out_json: *mut *mut c_char,
) -> Status {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), out_json.is_null()) else {
            return fail(Status::InvalidArgument, "null argument");
        };
        let c0 = match runnable(p, unchecked) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let r = run(&c0, seed, usize::try_from(max_steps).unwrap_or(usize::MAX));
        *out_json = to_c(serde_json::to_string(&r).expect("serializable"));
        if r.verdict.is_good() {
            Status::Ok
        } else {
            fail(Status::Violation, r.verdict.to_string())
        }
    })
}

/// Explores all schedules up to `depth` steps, visiting at most `budget`
/// states. Writes the JSON report to `out_json`.
///
/// # Safety
/// `p` must be a live program handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copyless_program_explore(
    p: *const Program,
    depth: u32,
    budget: u64,
    unchecked: bool,
    out_json: *mut *mut c_char,
) -> Status {
    guard(|| {
        let (Some(p), false) = (p.as_ref(), out_json.is_null()) else {
            return fail(Status::InvalidArgument, "null argument");
        };
        let c0 = match runnable(p, unchecked) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let rep = explore(&c0, depth as usize, usize::try_from(budget).unwrap_or(usize::MAX));
        *out_json = to_c(serde_json::to_string(&rep).expect("serializable"));
        match rep.violations.first() {
            None => Status::Ok,
            Some(v) => fail(Status::Violation, v.verdict.to_string()),
        }
    })
}

/// Parses a closed endpoint type.
///
/// # Safety
/// `src` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copyless_type_parse(src: *const c_char, out: *mut *mut TypeHandle) -> Status {
    guard(|| {
        if out.is_null() {
            return fail(Status::InvalidArgument, "null output pointer");
        }
        let text = match read_str(src) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_etype(text) {
            Ok(ty) => {
                *out = Box::into_raw(Box::new(TypeHandle { ty }));
                Status::Ok
            }
            Err(e) => fail(Status::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `t` must be null or a type handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn copyless_type_free(t: *mut TypeHandle) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Renders a type in concrete syntax.
///
/// # Safety
/// `t` must be a live type handle.
#[no_mangle]
pub unsafe extern "C" fn copyless_type_render(t: *const TypeHandle) -> *mut c_char {
    match t.as_ref() {
        Some(t) => to_c(t.ty.to_string()),
        None => ptr::null_mut(),
    }
}

/// The dual of `t` as a new handle.
///
/// # Safety
/// `t` must be a live type handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copyless_type_dual(t: *const TypeHandle, out: *mut *mut TypeHandle) -> Status {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(Status::InvalidArgument, "null argument");
        };
        match dual(&t.ty) {
            Ok(ty) => {
                *out = Box::into_raw(Box::new(TypeHandle { ty }));
                Status::Ok
            }
            Err(e) => fail(Status::TypeError, e.to_string()),
        }
    })
}

/// Writes whether `t <= s`.
///
/// # Safety
/// `t`, `s` must be live type handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copyless_type_subtype(t: *const TypeHandle, s: *const TypeHandle, out: *mut bool) -> Status {
    guard(|| {
        let (Some(t), Some(s), false) = (t.as_ref(), s.as_ref(), out.is_null()) else {
            return fail(Status::InvalidArgument, "null argument");
        };
        *out = subtype(&t.ty, &s.ty);
        Status::Ok
    })
}

/// Writes the weight of `t`. `*finite` is false for an infinite weight,
/// in which case `*value` is left untouched.
///
/// # Safety
/// `t` must be a live type handle; `finite` and `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn copyless_type_weight(t: *const TypeHandle, finite: *mut bool, value: *mut u64) -> Status {
    guard(|| {
        let (Some(t), false, false) = (t.as_ref(), finite.is_null(), value.is_null()) else {
            return fail(Status::InvalidArgument, "null argument");
        };
        match weight(&TyVarSet::new(), &t.ty) {
            Weight::Finite(n) => {
                *finite = true;
                *value = n;
            }
            Weight::Infinite => *finite = false,
        }
        Status::Ok
    })
}
