//! C ABI over `hocrip`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_parse`
//! and released by the matching `*_free`. Every fallible call returns a
//! [`HocripStatus`]; the message of the most recent failure on the calling
//! thread is available from [`hocrip_last_error`]. Panics are caught and
//! reported as [`HocripStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hocrip::acf::aperiodic_profile;
use hocrip::cfrac::{expand_cf, type_of};
use hocrip::qirr::QuadraticIrrational;
use hocrip::sensing::{build_toeplitz, rip_order_bound, subset_eigs, SensingMatrix, ToeplitzKind};
use hocrip::sequences::{generate, ComplexSequence, SequenceSpec};
use hocrip::Error;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HocripStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Invalid = 3,
    PrecisionInsufficient = 4,
    IllConditioned = 5,
    Config = 6,
    Io = 7,
    BufferTooSmall = 8,
    Utf8 = 9,
    Panic = 10,
}

/// Matrix layout selector for [`hocrip_matrix_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HocripToeplitz {
    LowerTriangular = 0,
    ZeroPaddedFat = 1,
    SteadyState = 2,
}

impl From<HocripToeplitz> for ToeplitzKind {
    fn from(k: HocripToeplitz) -> Self {
        match k {
            HocripToeplitz::LowerTriangular => ToeplitzKind::LowerTriangular,
            HocripToeplitz::ZeroPaddedFat => ToeplitzKind::ZeroPaddedFat,
            HocripToeplitz::SteadyState => ToeplitzKind::SteadyState,
        }
    }
}

/// Quadratic irrational `(a + b√d)/c`.
pub struct HocripQirr(QuadraticIrrational);

/// Generated complex sequence.
pub struct HocripSequence(ComplexSequence);

/// Implicit Toeplitz sensing matrix.
pub struct HocripMatrix(SensingMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> HocripStatus {
    match err {
        Error::Domain(_) => HocripStatus::Domain,
        Error::Invalid(_) => HocripStatus::Invalid,
        Error::PrecisionInsufficient { .. } => HocripStatus::PrecisionInsufficient,
        Error::IllConditioned(_) => HocripStatus::IllConditioned,
        Error::Config(_) | Error::Json(_) => HocripStatus::Config,
        Error::Io(_) => HocripStatus::Io,
    }
}

struct Fail(HocripStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HocripStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HocripStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside hocrip".into());
            HocripStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(HocripStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(HocripStatus::Utf8, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hocrip_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL, or
/// 0 when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hocrip_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Parses a preset name (`golden`, `sqrt2`, …) or `a,b,c,d` for `(a+b√d)/c`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_q` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hocrip_qirr_parse(text: *const c_char, out_q: *mut *mut HocripQirr) -> HocripStatus {
    guard(|| {
        let slot = out(out_q, "out")?;
        let q = QuadraticIrrational::parse(as_str(text, "text")?)?;
        *slot = Box::into_raw(Box::new(HocripQirr(q)));
        Ok(())
    })
}

/// # Safety
/// `q` must be null or a handle from [`hocrip_qirr_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hocrip_qirr_free(q: *mut HocripQirr) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// # Safety
/// `q` must be a live handle; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn hocrip_qirr_to_f64(q: *const HocripQirr, value: *mut f64) -> HocripStatus {
    guard(|| {
        *out(value, "value")? = as_ref(q, "q")?.0.to_f64();
        Ok(())
    })
}

/// Writes the partial quotients `a_0 … a_{len−1}` into `quotients`.
///
/// # Safety
/// `q` must be a live handle; `quotients` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hocrip_cf_quotients(
    q: *const HocripQirr,
    quotients: *mut i64,
    len: usize,
) -> HocripStatus {
    guard(|| {
        let q = as_ref(q, "q")?;
        if len == 0 {
            return Ok(());
        }
        if quotients.is_null() {
            return Err(null("quotients"));
        }
        let cf = expand_cf(&q.0, len - 1)?;
        let dst = std::slice::from_raw_parts_mut(quotients, len);
        for (k, slot) in dst.iter_mut().enumerate() {
            *slot = cf.quotient(k).to_i64().ok_or_else(|| {
                Fail(HocripStatus::Domain, format!("partial quotient {k} exceeds i64"))
            })?;
        }
        Ok(())
    })
}

/// Ostrowski type of `m` with respect to `beta ∈ (0,1)`.
///
/// # Safety
/// `beta` must be a live handle; `type_index` writable.
#[no_mangle]
pub unsafe extern "C" fn hocrip_ostrowski_type(
    beta: *const HocripQirr,
    m: u64,
    type_index: *mut usize,
) -> HocripStatus {
    guard(|| {
        let beta = as_ref(beta, "beta")?;
        *out(type_index, "type_index")? = type_of(&BigInt::from(m), &beta.0)?;
        Ok(())
    })
}

/// Generates a sequence from a descriptor such as `hoc3:golden`, `prbs`,
/// `sine:sqrt2:re`.
///
/// # Safety
/// `descriptor` must be a NUL-terminated string; `out_seq` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hocrip_sequence_new(
    descriptor: *const c_char,
    length: usize,
    out_seq: *mut *mut HocripSequence,
) -> HocripStatus {
    guard(|| {
        let slot = out(out_seq, "out")?;
        let spec = SequenceSpec::from_descriptor(as_str(descriptor, "descriptor")?, length)?;
        *slot = Box::into_raw(Box::new(HocripSequence(generate(&spec)?)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from [`hocrip_sequence_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hocrip_sequence_free(s: *mut HocripSequence) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hocrip_sequence_len(s: *const HocripSequence) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Copies the samples into split real/imaginary buffers of at least
/// `hocrip_sequence_len` entries.
///
/// # Safety
/// `s` must be a live handle; `re` and `im` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hocrip_sequence_copy(
    s: *const HocripSequence,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> HocripStatus {
    guard(|| {
        let s = as_ref(s, "sequence")?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        if len < s.0.len() {
            return Err(Fail(
                HocripStatus::BufferTooSmall,
                format!("need {} entries, got {len}", s.0.len()),
            ));
        }
        let (re, im) = (
            std::slice::from_raw_parts_mut(re, len),
            std::slice::from_raw_parts_mut(im, len),
        );
        for (i, z) in s.0.samples.iter().enumerate() {
            re[i] = z.re;
            im[i] = z.im;
        }
        Ok(())
    })
}

/// Worst off-peak aperiodic ACF ratio for window `n` (reads `n + 1` samples).
///
/// # Safety
/// `s` must be a live handle; `ratio` and `argmax_tau` writable.
#[no_mangle]
pub unsafe extern "C" fn hocrip_acf_max_ratio(
    s: *const HocripSequence,
    n: usize,
    ratio: *mut f64,
    argmax_tau: *mut i64,
) -> HocripStatus {
    guard(|| {
        let s = as_ref(s, "sequence")?;
        let (ratio, argmax_tau) = (out(ratio, "ratio")?, out(argmax_tau, "argmax_tau")?);
        let (r, tau) = aperiodic_profile(&s.0.samples, n)?.max_ratio();
        *ratio = r;
        *argmax_tau = tau;
        Ok(())
    })
}

/// Builds an `n`-row Toeplitz matrix with `p` columns over `s` (the sequence
/// is copied).
///
/// # Safety
/// `s` must be a live handle; `out_m` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hocrip_matrix_new(
    s: *const HocripSequence,
    n: usize,
    p: usize,
    kind: HocripToeplitz,
    out_m: *mut *mut HocripMatrix,
) -> HocripStatus {
    guard(|| {
        let s = as_ref(s, "sequence")?;
        let slot = out(out_m, "out")?;
        let m = build_toeplitz(&s.0, n, p, kind.into())?;
        *slot = Box::into_raw(Box::new(HocripMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from [`hocrip_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hocrip_matrix_free(m: *mut HocripMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Certified RIP order `q` and the matching Gershgorin bound `r_bound < 1`.
///
/// # Safety
/// `m` must be a live handle; `q` and `r_bound` writable.
#[no_mangle]
pub unsafe extern "C" fn hocrip_matrix_rip_order(
    m: *const HocripMatrix,
    q: *mut usize,
    r_bound: *mut f64,
) -> HocripStatus {
    guard(|| {
        let m = as_ref(m, "matrix")?;
        let (q, r_bound) = (out(q, "q")?, out(r_bound, "r_bound")?);
        let order = rip_order_bound(&m.0);
        *q = order.q;
        *r_bound = order.r_bound;
        Ok(())
    })
}

/// Extreme eigenvalues of the normalized correlation matrix of the columns in
/// `subset`.
///
/// # Safety
/// `m` must be a live handle; `subset` valid for `len` reads; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hocrip_matrix_subset_eigs(
    m: *const HocripMatrix,
    subset: *const usize,
    len: usize,
    lambda_min: *mut f64,
    lambda_max: *mut f64,
) -> HocripStatus {
    guard(|| {
        let m = as_ref(m, "matrix")?;
        if subset.is_null() {
            return Err(null("subset"));
        }
        let (lo, hi) = (out(lambda_min, "lambda_min")?, out(lambda_max, "lambda_max")?);
        let idx = std::slice::from_raw_parts(subset, len);
        let e = subset_eigs(&m.0, idx)?;
        *lo = e.lambda_min;
        *hi = e.lambda_max;
        Ok(())
    })
}
