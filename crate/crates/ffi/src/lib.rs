//! C ABI over `qklauder`.
//!
//! Every function returns a [`QkStatus`]; results go through out-pointers.
//! On failure a description is available from [`qk_last_error`] on the same
//! thread. States are opaque heap handles released with [`qk_state_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qklauder::observables::{expect_p, expect_x, uncertainty};
use qklauder::qkernel::{f_q, q_exponential};
use qklauder::revival::{autocorrelation, revival_times};
use qklauder::{mean_occupation, CoherentState, Deformation, Error, PhysicalScales, Truncation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Divergence = 3,
    NonConvergence = 4,
    Overflow = 5,
    NoRevivalStructure = 6,
    Internal = 7,
    Panic = 8,
}

/// A coherent state together with the physical scales used for its observables.
pub struct QkState {
    state: CoherentState,
    scales: PhysicalScales,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QkUncertainty {
    pub dx: f64,
    pub dp: f64,
    pub product: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QkRevivalTimes {
    pub n_bar: f64,
    pub t_cl: f64,
    pub t_rev: f64,
    pub t_suprev: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> QkStatus {
    match err {
        Error::InvalidParameter(_) | Error::DegenerateDeformation | Error::IncompatibleStates { .. } => {
            QkStatus::InvalidArgument
        }
        Error::Divergence { .. } => QkStatus::Divergence,
        Error::NonConvergence { .. } | Error::InsufficientTruncation { .. } => QkStatus::NonConvergence,
        Error::Overflow(_) => QkStatus::Overflow,
        Error::NoRevivalStructure => QkStatus::NoRevivalStructure,
        _ => QkStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (QkStatus, String)>) -> QkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QkStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QkStatus::Panic
        }
    }
}

fn lift<T>(r: Result<T, Error>) -> Result<T, (QkStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (QkStatus, String) {
    (QkStatus::NullPointer, format!("{what} is null"))
}

/// Writes `value` through `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), (QkStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `state` must be null or a live handle from this library.
unsafe fn borrow<'a>(state: *const QkState) -> Result<&'a QkState, (QkStatus, String)> {
    state.as_ref().ok_or_else(|| null("state"))
}

fn deformation(q: f64) -> Result<Deformation, (QkStatus, String)> {
    lift(Deformation::new(q))
}

/// Message for the most recent failure on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn qk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates `|J, gamma>_q` with default truncation. `*out` receives the handle.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_state_new(
    q: f64,
    j: f64,
    gamma: f64,
    hbar: f64,
    mass: f64,
    omega: f64,
    out: *mut *mut QkState,
) -> QkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scales = lift(PhysicalScales::new(hbar, mass, omega))?;
        let state = lift(CoherentState::new(j, gamma, deformation(q)?, Truncation::default()))?;
        put(out, Box::into_raw(Box::new(QkState { state, scales })), "out")
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qk_state_free(state: *mut QkState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// New handle for the state evolved by `dt`.
///
/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_state_evolve(state: *const QkState, dt: f64, out: *mut *mut QkState) -> QkStatus {
    guard(|| {
        let s = borrow(state)?;
        if !dt.is_finite() {
            return Err((QkStatus::InvalidArgument, format!("dt must be finite, got {dt}")));
        }
        let evolved = QkState { state: s.state.evolve(dt, s.scales.omega()), scales: s.scales };
        put(out, Box::into_raw(Box::new(evolved)), "out")
    })
}

/// `<X>` of the state.
///
/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_state_expect_x(state: *const QkState, out: *mut f64) -> QkStatus {
    guard(|| {
        let s = borrow(state)?;
        put(out, lift(expect_x(&s.state, &s.scales))?, "out")
    })
}

/// `<P>` of the state.
///
/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_state_expect_p(state: *const QkState, out: *mut f64) -> QkStatus {
    guard(|| {
        let s = borrow(state)?;
        put(out, lift(expect_p(&s.state, &s.scales))?, "out")
    })
}

/// Uncertainty product and its lower bound.
///
/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_state_uncertainty(state: *const QkState, out: *mut QkUncertainty) -> QkStatus {
    guard(|| {
        let s = borrow(state)?;
        let r = lift(uncertainty(&s.state, &s.scales))?;
        let value = QkUncertainty { dx: r.dx, dp: r.dp, product: r.product, bound: r.bound, ratio: r.ratio };
        put(out, value, "out")
    })
}

/// Overlap of the state with itself evolved by `t`; independent of the state's angle.
///
/// # Safety
/// `state` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_state_autocorrelation(
    state: *const QkState,
    t: f64,
    re: *mut f64,
    im: *mut f64,
) -> QkStatus {
    guard(|| {
        let s = borrow(state)?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let st = &s.state;
        let a = lift(autocorrelation(st.j(), s.scales.omega() * t, st.deformation(), st.truncation()))?;
        put(re, a.re, "re")?;
        put(im, a.im, "im")
    })
}

/// `E_q(J)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_q_exponential(q: f64, j: f64, out: *mut f64) -> QkStatus {
    guard(|| {
        let v = lift(q_exponential(j, &deformation(q)?, &Truncation::default()))?;
        put(out, v.value.re, "out")
    })
}

/// `F_q(J, gamma)`.
///
/// # Safety
/// `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_f_q(q: f64, j: f64, gamma: f64, re: *mut f64, im: *mut f64) -> QkStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let v = lift(f_q(j, gamma, &deformation(q)?, &Truncation::default()))?;
        put(re, v.value.re, "re")?;
        put(im, v.value.im, "im")
    })
}

/// Mean occupation `J E_q'(J) / E_q(J)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_mean_occupation(q: f64, j: f64, out: *mut f64) -> QkStatus {
    guard(|| put(out, lift(mean_occupation(j, &deformation(q)?, &Truncation::default()))?, "out"))
}

/// Classical, revival and superrevival times.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qk_revival_times(
    q: f64,
    j: f64,
    hbar: f64,
    mass: f64,
    omega: f64,
    out: *mut QkRevivalTimes,
) -> QkStatus {
    guard(|| {
        let scales = lift(PhysicalScales::new(hbar, mass, omega))?;
        let r = lift(revival_times(j, &deformation(q)?, &scales, &Truncation::default()))?;
        put(out, QkRevivalTimes { n_bar: r.n_bar, t_cl: r.t_cl, t_rev: r.t_rev, t_suprev: r.t_suprev }, "out")
    })
}
