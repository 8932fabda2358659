//! C ABI for `pqcircle`.
//!
//! Every fallible function returns a [`PqStatus`]. On failure a message is
//! available from [`pq_last_error_message`] on the same thread. Objects are
//! passed as opaque handles that the caller releases with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pqcircle::atomic::{build_atomic_measure, measure_moment, pushforward_times_n, AtomicMeasure};
use pqcircle::cantor::{cantor_eval, UnitPoint, EXACT_DEPTH};
use pqcircle::equidist::weyl_sum_square;
use pqcircle::mod1::{Mod1Rational, MultiplierPair, OrbitGrid};
use pqcircle::transfer::{
    apply_tn, fixpoint_search, Evaluable, FixpointTrace, GridFunction, SearchMode,
};
use pqcircle::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PrecisionExhausted = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Built-in functions on `[0, 1]`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqFunction {
    Identity = 0,
    Square = 1,
    Cube = 2,
    Cantor = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqSearchMode {
    Mean = 0,
    Alternate = 1,
}

pub struct PqAtomicMeasure(AtomicMeasure);

pub struct PqGridFunction(GridFunction);

pub struct PqFixpointTrace(FixpointTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: PqStatus,
    message: String,
}

impl Failure {
    fn new(status: PqStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::PrecisionExhausted { .. } | Error::MantissaOverflow(_) => {
                PqStatus::PrecisionExhausted
            }
            _ => PqStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            PqStatus::Ok
        }
        Ok(Err(f)) => {
            set_error(&f.message);
            f.status
        }
        Err(_) => {
            set_error("internal panic");
            PqStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(
            PqStatus::NullPointer,
            format!("{name} is NULL"),
        ))
    } else {
        Ok(())
    }
}

/// Copies `src` into a caller buffer of `len` elements.
unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, len: usize) -> Result<(), Failure> {
    non_null(buf, "buf")?;
    if len < src.len() {
        return Err(Failure::new(
            PqStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        ));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

fn function(kind: PqFunction) -> Evaluable {
    match kind {
        PqFunction::Identity => Evaluable::Identity,
        PqFunction::Square => Evaluable::monomial(2),
        PqFunction::Cube => Evaluable::monomial(3),
        PqFunction::Cantor => Evaluable::Cantor,
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Succeeds iff `p, q ≥ 2` are not powers of a common integer.
#[no_mangle]
pub extern "C" fn pq_check_pair(p: u64, q: u64) -> PqStatus {
    guard(|| {
        MultiplierPair::new(p, q)?;
        Ok(())
    })
}

/// Cantor function at `num/den ∈ [0, 1]`. `*exact` is set when the value
/// was resolved exactly rather than bracketed.
///
/// # Safety
/// `value` and `exact` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_cantor(
    num: u64,
    den: u64,
    value: *mut f64,
    exact: *mut bool,
) -> PqStatus {
    guard(|| {
        non_null(value, "value")?;
        non_null(exact, "exact")?;
        if den == 0 || num > den {
            return Err(Failure::new(
                PqStatus::InvalidArgument,
                format!("{num}/{den} is not in [0, 1]"),
            ));
        }
        let x = if num == den {
            UnitPoint::One
        } else {
            UnitPoint::from(Mod1Rational::new(num, den)?)
        };
        let c = cantor_eval(&x, EXACT_DEPTH);
        *value = c.to_f64();
        *exact = c.exact().is_some();
        Ok(())
    })
}

/// Normalized Weyl sum `(1/N²) Σ e(k p^i q^j x)` over `0 ≤ i, j < side`
/// for the rational base `x = num/den`, computed with exact phases.
///
/// # Safety
/// `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_weyl_sum_square(
    num: i64,
    den: u64,
    p: u64,
    q: u64,
    side: usize,
    k: i64,
    re: *mut f64,
    im: *mut f64,
) -> PqStatus {
    guard(|| {
        non_null(re, "re")?;
        non_null(im, "im")?;
        let x = Mod1Rational::new(num, den)?;
        let grid = OrbitGrid::new(x, MultiplierPair::new(p, q)?, side)?;
        let w = weyl_sum_square(&grid, k)?;
        *re = w.value.re;
        *im = w.value.im;
        Ok(())
    })
}

/// Ergodic atomic measure through the orbit of `num/den`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_atomic_measure_new(
    num: i64,
    den: u64,
    p: u64,
    q: u64,
    out: *mut *mut PqAtomicMeasure,
) -> PqStatus {
    guard(|| {
        non_null(out, "out")?;
        let m = build_atomic_measure(&Mod1Rational::new(num, den)?, MultiplierPair::new(p, q)?)?;
        *out = Box::into_raw(Box::new(PqAtomicMeasure(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`pq_atomic_measure_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pq_atomic_measure_free(m: *mut PqAtomicMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Denominator `s` of the atoms `j/s`, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_atomic_measure_modulus(m: *const PqAtomicMeasure) -> u64 {
    m.as_ref().map_or(0, |m| m.0.modulus())
}

/// Number of atoms, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_atomic_measure_support_len(m: *const PqAtomicMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.weights().len())
}

/// Writes the atom residues `j` in increasing order.
///
/// # Safety
/// `m` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pq_atomic_measure_support(
    m: *const PqAtomicMeasure,
    buf: *mut u64,
    len: usize,
) -> PqStatus {
    guard(|| {
        non_null(m, "m")?;
        let support: Vec<u64> = (*m).0.support().collect();
        copy_out(&support, buf, len)
    })
}

/// `μ(z^k)`.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_atomic_measure_moment(
    m: *const PqAtomicMeasure,
    k: i64,
    re: *mut f64,
    im: *mut f64,
) -> PqStatus {
    guard(|| {
        non_null(m, "m")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let z = measure_moment(&(*m).0, k);
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Sets `*invariant` to whether the image under `×n` equals the measure.
///
/// # Safety
/// `m` must be a live handle and `invariant` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_atomic_measure_is_invariant(
    m: *const PqAtomicMeasure,
    n: u64,
    invariant: *mut bool,
) -> PqStatus {
    guard(|| {
        non_null(m, "m")?;
        non_null(invariant, "invariant")?;
        *invariant = pushforward_times_n(&(*m).0, n)? == (*m).0;
        Ok(())
    })
}

/// Grid function from `len ≥ 2` samples at `t/(len-1)`.
///
/// # Safety
/// `samples` must be valid for `len` reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_grid_function_new(
    samples: *const f64,
    len: usize,
    out: *mut *mut PqGridFunction,
) -> PqStatus {
    guard(|| {
        non_null(samples, "samples")?;
        non_null(out, "out")?;
        let v = std::slice::from_raw_parts(samples, len).to_vec();
        *out = Box::into_raw(Box::new(PqGridFunction(GridFunction::new(v)?)));
        Ok(())
    })
}

/// A built-in function sampled at `t/k`, `t = 0..=k`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_grid_function_sample(
    kind: PqFunction,
    k: usize,
    out: *mut *mut PqGridFunction,
) -> PqStatus {
    guard(|| {
        non_null(out, "out")?;
        let f = GridFunction::sample(&function(kind), k)?;
        *out = Box::into_raw(Box::new(PqGridFunction(f)));
        Ok(())
    })
}

/// `T_n f` for a built-in `f`, sampled at `t/k`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_apply_tn(
    kind: PqFunction,
    n: u64,
    k: usize,
    out: *mut *mut PqGridFunction,
) -> PqStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = apply_tn(&function(kind), n, k)?;
        *out = Box::into_raw(Box::new(PqGridFunction(g)));
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pq_grid_function_free(f: *mut PqGridFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of samples (`k + 1`), or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_grid_function_len(f: *const PqGridFunction) -> usize {
    f.as_ref().map_or(0, |f| f.0.samples().len())
}

/// # Safety
/// `f` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pq_grid_function_samples(
    f: *const PqGridFunction,
    buf: *mut f64,
    len: usize,
) -> PqStatus {
    guard(|| {
        non_null(f, "f")?;
        copy_out((*f).0.samples(), buf, len)
    })
}

/// Projected fixed-point search for `T_p` and `T_q` from `f0`.
///
/// # Safety
/// `f0` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_fixpoint_search(
    f0: *const PqGridFunction,
    p: u64,
    q: u64,
    iters: usize,
    tol: f64,
    mode: PqSearchMode,
    out: *mut *mut PqFixpointTrace,
) -> PqStatus {
    guard(|| {
        non_null(f0, "f0")?;
        non_null(out, "out")?;
        let mode = match mode {
            PqSearchMode::Mean => SearchMode::Mean,
            PqSearchMode::Alternate => SearchMode::Alternate,
        };
        let trace = fixpoint_search(&(*f0).0, p, q, iters, tol, mode)?;
        *out = Box::into_raw(Box::new(PqFixpointTrace(trace)));
        Ok(())
    })
}

/// # Safety
/// `t` must come from [`pq_fixpoint_search`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pq_fixpoint_trace_free(t: *mut PqFixpointTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of recorded iterates, including the start; 0 for NULL.
///
/// # Safety
/// `t` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_fixpoint_trace_len(t: *const PqFixpointTrace) -> usize {
    t.as_ref().map_or(0, |t| t.0.residuals.len())
}

/// # Safety
/// `t` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pq_fixpoint_trace_residuals(
    t: *const PqFixpointTrace,
    buf: *mut f64,
    len: usize,
) -> PqStatus {
    guard(|| {
        non_null(t, "t")?;
        copy_out(&(*t).0.residuals, buf, len)
    })
}

/// # Safety
/// `t` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pq_fixpoint_trace_distances(
    t: *const PqFixpointTrace,
    buf: *mut f64,
    len: usize,
) -> PqStatus {
    guard(|| {
        non_null(t, "t")?;
        copy_out(&(*t).0.distances, buf, len)
    })
}

/// Copy of the last iterate as a new grid function handle.
///
/// # Safety
/// `t` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_fixpoint_trace_final(
    t: *const PqFixpointTrace,
    out: *mut *mut PqGridFunction,
) -> PqStatus {
    guard(|| {
        non_null(t, "t")?;
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(PqGridFunction((*t).0.final_f.clone())));
        Ok(())
    })
}
