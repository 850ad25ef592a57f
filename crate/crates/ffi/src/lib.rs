//! C ABI over k3red.
//!
//! Every fallible function returns a `K3Status`; on failure a message is
//! available from `k3_last_error` on the same thread until the next call.
//! Handles are opaque and must be released with their `_free` function.
//! Strings returned by the library are released with `k3_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use k3red::cli::parse_document;
use k3red::frobenius::{analyze, FrobCharPoly, Height};
use k3red::lattice::GramMatrix;
use k3red::predictor::{predict_reduction, predict_singular, ArtinInvariant, ArtinLabel, K3CmInput, ReductionReport};
use k3red::witt::{artin_invariant_via_cokernel, FCrystal, LocalFieldData};
use k3red::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K3Status {
    Ok = 0,
    InvalidInput = 1,
    Inconsistent = 2,
    Schema = 3,
    Precision = 4,
    Internal = 5,
    NullPointer = 6,
    Utf8 = 7,
    Panic = 8,
}

/// Artin invariant sentinel: the surface is not supersingular.
pub const K3_ARTIN_NOT_APPLICABLE: i32 = -1;
/// Artin invariant sentinel: supersingular, but no formula applies.
pub const K3_ARTIN_NOT_DETERMINED: i32 = -2;
/// Height sentinel for a supersingular reduction.
pub const K3_HEIGHT_INFINITE: u32 = 0;

/// Opaque reduction report.
pub struct K3Report(ReductionReport);

/// Opaque F-crystal.
pub struct K3Crystal(FCrystal);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> K3Status {
    match err {
        Error::InvalidInput(_) => K3Status::InvalidInput,
        Error::Inconsistent(_) => K3Status::Inconsistent,
        Error::Schema(_) => K3Status::Schema,
        Error::Precision { .. } => K3Status::Precision,
        Error::Internal(_) => K3Status::Internal,
    }
}

fn fail(status: K3Status, msg: impl Into<String>) -> K3Status {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), K3Status>) -> K3Status {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => K3Status::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(K3Status::Panic, "panic inside k3red"),
    }
}

fn lift<T>(r: k3red::Result<T>) -> Result<T, K3Status> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, K3Status> {
    if s.is_null() {
        return Err(fail(K3Status::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(K3Status::Utf8, "argument is not valid UTF-8"))
}

fn to_c_string(s: String) -> Result<*mut c_char, K3Status> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(K3Status::Internal, "output contains a nul byte"))
}

fn check_out<T>(out: *mut T) -> Result<(), K3Status> {
    if out.is_null() {
        return Err(fail(K3Status::NullPointer, "null output pointer"));
    }
    Ok(())
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), K3Status> {
    check_out(out)?;
    ptr::write(out, value);
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn k3_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn k3_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Kronecker symbol (a/m) written to `out`; m = 0 is rejected.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn k3_kronecker(a: i64, m: i64, out: *mut i32) -> K3Status {
    guard(|| {
        let v = lift(k3red::arith::kronecker_symbol(a, m))?;
        write_out(out, v as i32)
    })
}

/// Predicts from a JSON input document (the `predict` CLI format).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn k3_predict_json(json: *const c_char, out: *mut *mut K3Report) -> K3Status {
    guard(|| {
        check_out(out)?;
        let text = read_str(json)?;
        let input: K3CmInput = lift(parse_document("input", text))?;
        let report = lift(predict_reduction(&input))?;
        write_out(out, Box::into_raw(Box::new(K3Report(report))))
    })
}

/// Singular K3 with transcendental lattice [[a1, a2], [a2, a3]].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn k3_predict_singular(
    a1: i64,
    a2: i64,
    a3: i64,
    p: u64,
    out: *mut *mut K3Report,
) -> K3Status {
    guard(|| {
        let g = lift(GramMatrix::new(vec![vec![a1, a2], vec![a2, a3]]))?;
        let report = lift(predict_singular(&g, p))?;
        write_out(out, Box::into_raw(Box::new(K3Report(report))))
    })
}

/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn k3_report_picard(report: *const K3Report) -> u32 {
    report.as_ref().map_or(0, |r| r.0.picard)
}

/// Height, or `K3_HEIGHT_INFINITE` (0) when supersingular.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn k3_report_height(report: *const K3Report) -> u32 {
    report.as_ref().map_or(0, |r| match r.0.height {
        Height::Finite(h) => h,
        Height::Infinite => K3_HEIGHT_INFINITE,
    })
}

/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn k3_report_supersingular(report: *const K3Report) -> bool {
    report.as_ref().is_some_and(|r| r.0.supersingular)
}

/// Artin invariant, or one of the `K3_ARTIN_*` sentinels.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn k3_report_artin(report: *const K3Report) -> i32 {
    report.as_ref().map_or(K3_ARTIN_NOT_DETERMINED, |r| match r.0.artin_invariant {
        ArtinInvariant::Value(a) => a as i32,
        ArtinInvariant::Label(ArtinLabel::NotApplicable) => K3_ARTIN_NOT_APPLICABLE,
        ArtinInvariant::Label(ArtinLabel::NotDetermined) => K3_ARTIN_NOT_DETERMINED,
    })
}

/// The report as JSON; free with `k3_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn k3_report_to_json(report: *const K3Report, out: *mut *mut c_char) -> K3Status {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| fail(K3Status::NullPointer, "null report"))?;
        let s = lift(serde_json::to_string_pretty(&r.0).map_err(|e| Error::Internal(e.to_string())))?;
        write_out(out, to_c_string(s)?)
    })
}

/// # Safety
/// `report` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn k3_report_free(report: *mut K3Report) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Analyzes a Frobenius polynomial document; writes the report as JSON.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn k3_frobenius_json(json: *const c_char, strict: bool, out: *mut *mut c_char) -> K3Status {
    guard(|| {
        check_out(out)?;
        let text = read_str(json)?;
        let fp: FrobCharPoly = lift(parse_document("input", text))?;
        let report = lift(analyze(&fp, strict))?;
        let s = lift(serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string())))?;
        write_out(out, to_c_string(s)?)
    })
}

/// Crystal over W(F_{p^m})/p^N with Eisenstein polynomial T^e − p.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn k3_crystal_new(
    p: u64,
    d: u32,
    e: u32,
    precision: u32,
    residue_degree: u32,
    out: *mut *mut K3Crystal,
) -> K3Status {
    guard(|| {
        let lfd = lift(LocalFieldData::new(p, d, e))?;
        let crystal = lift(FCrystal::build(&lfd, residue_degree, precision))?;
        write_out(out, Box::into_raw(Box::new(K3Crystal(crystal))))
    })
}

/// W-length of the cokernel, i.e. the Artin invariant.
///
/// # Safety
/// `crystal` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn k3_crystal_artin_invariant(crystal: *const K3Crystal, out: *mut u32) -> K3Status {
    guard(|| {
        let c = crystal.as_ref().ok_or_else(|| fail(K3Status::NullPointer, "null crystal"))?;
        let a = lift(artin_invariant_via_cokernel(&c.0))?;
        write_out(out, a.artin_invariant)
    })
}

/// # Safety
/// `crystal` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn k3_crystal_free(crystal: *mut K3Crystal) {
    if !crystal.is_null() {
        drop(Box::from_raw(crystal));
    }
}
