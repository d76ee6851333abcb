//! C ABI for the `hamf` library.
//!
//! Conventions:
//! - every fallible function returns a [`HamfStatus`] and writes results through
//!   out-pointers, which are left untouched on failure;
//! - the message of the most recent failure on the calling thread is available
//!   from [`hamf_last_error_message`];
//! - objects are opaque handles created by `*_new`/`*_preset` functions and
//!   released with the matching `*_free`;
//! - `abs_tol <= 0` selects the library default tolerance.

use hamf::dist::{sample_values, variance_a, EmpiricalDistribution, Sampler};
use hamf::group::j_factor;
use hamf::hamf::{approx_error, tail_bound, xi_coeff, xi_eval};
use hamf::symbol::qr_symbol;
use hamf::theta::theta_scaled;
use hamf::{CoeffSequence, HamfError, SeriesTolerance, UnimodularInt, UpperHalfPoint};
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamfStatus {
    Ok = 0,
    /// Argument outside the domain of the operation.
    Domain = 1,
    /// A series needed more terms than the configured cap.
    TermCap = 2,
    Numerical = 3,
    /// Coefficients violate their declared decay bound.
    DecayViolation = 4,
    Parse = 5,
    Io = 6,
    NullPointer = 7,
    /// Internal panic; the library state is unaffected but the call produced nothing.
    Panic = 8,
}

/// Abscissa sampler for [`hamf_samples_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamfSampler {
    IidUniform = 0,
    StratifiedGrid = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HamfComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for HamfComplex {
    fn from(z: Complex64) -> Self {
        HamfComplex { re: z.re, im: z.im }
    }
}

/// Opaque coefficient sequence `ĥ_k`.
pub struct HamfSequence(CoeffSequence);

/// Opaque set of horocycle samples `y^{1/4} ξ(x+iy)`.
pub struct HamfSamples(EmpiricalDistribution);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &HamfError) -> HamfStatus {
    match e {
        HamfError::Domain(_) => HamfStatus::Domain,
        HamfError::TermCap { .. } => HamfStatus::TermCap,
        HamfError::Numerical(_) => HamfStatus::Numerical,
        HamfError::DecayViolation { .. } => HamfStatus::DecayViolation,
        HamfError::Parse(_) => HamfStatus::Parse,
        HamfError::Io(_) | HamfError::Csv(_) => HamfStatus::Io,
    }
}

fn guard<F>(f: F) -> HamfStatus
where
    F: FnOnce() -> Result<(), HamfStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HamfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            HamfStatus::Panic
        }
    }
}

fn lib<T>(r: hamf::Result<T>) -> Result<T, HamfStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), HamfStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(HamfStatus::NullPointer)
    } else {
        Ok(())
    }
}

fn tolerance(abs_tol: f64) -> Result<SeriesTolerance, HamfStatus> {
    if abs_tol > 0.0 {
        lib(SeriesTolerance::new(
            abs_tol,
            SeriesTolerance::DEFAULT_MAX_TERMS,
        ))
    } else {
        Ok(SeriesTolerance::default())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hamf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hamf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Residue symbol `(a/b)` for odd `b`, written as -1, 0 or 1.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_qr_symbol(a: i64, b: i64, out: *mut i32) -> HamfStatus {
    guard(|| {
        non_null(out, "out")?;
        let v = lib(qr_symbol(a, b))?;
        *out = i32::from(v.value());
        Ok(())
    })
}

/// Theta multiplier `j_γ(z)` for `γ = [[a, b], [c, d]]` in `Γ₁(4)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_j_factor(
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    x: f64,
    y: f64,
    out: *mut HamfComplex,
) -> HamfStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = lib(UnimodularInt::new(a, b, c, d))?;
        let z = lib(UpperHalfPoint::new(x, y))?;
        *out = lib(j_factor(&g, z))?.into();
        Ok(())
    })
}

/// `θ(k z)` at `z = x + iy`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_theta(
    k: u64,
    x: f64,
    y: f64,
    abs_tol: f64,
    out: *mut HamfComplex,
) -> HamfStatus {
    guard(|| {
        non_null(out, "out")?;
        let tol = tolerance(abs_tol)?;
        let z = lib(UpperHalfPoint::new(x, y))?;
        *out = lib(theta_scaled(k, z, &tol))?.into();
        Ok(())
    })
}

/// Built-in coefficient sequence: `"log-squares"`, `"theta-only"` or `"zero"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_sequence_preset(
    name: *const c_char,
    out: *mut *mut HamfSequence,
) -> HamfStatus {
    guard(|| {
        non_null(name, "name")?;
        non_null(out, "out")?;
        let name = CStr::from_ptr(name).to_str().map_err(|_| {
            set_error("name is not UTF-8".into());
            HamfStatus::Parse
        })?;
        let seq = lib(CoeffSequence::preset(name))?;
        *out = Box::into_raw(Box::new(HamfSequence(seq)));
        Ok(())
    })
}

/// Finitely supported sequence with `ĥ_k = values[k - 1]` for `1 <= k <= len`,
/// certified by `|ĥ_k| <= decay_c · k^(-decay_beta)`.
///
/// # Safety
/// `values` must be valid for `len` reads; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_sequence_from_table(
    values: *const HamfComplex,
    len: usize,
    decay_c: f64,
    decay_beta: f64,
    out: *mut *mut HamfSequence,
) -> HamfStatus {
    guard(|| {
        non_null(out, "out")?;
        let table: Vec<Complex64> = if len == 0 {
            Vec::new()
        } else {
            non_null(values, "values")?;
            std::slice::from_raw_parts(values, len)
                .iter()
                .map(|c| Complex64::new(c.re, c.im))
                .collect()
        };
        let seq = lib(CoeffSequence::from_table(
            "table", table, decay_c, decay_beta,
        ))?;
        *out = Box::into_raw(Box::new(HamfSequence(seq)));
        Ok(())
    })
}

/// # Safety
/// `seq` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hamf_sequence_free(seq: *mut HamfSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// `ξ(z) = Σ_n h(n² z)` at `z = x + iy`.
///
/// # Safety
/// `seq` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_xi_eval(
    seq: *const HamfSequence,
    x: f64,
    y: f64,
    abs_tol: f64,
    out: *mut HamfComplex,
) -> HamfStatus {
    guard(|| {
        non_null(seq, "seq")?;
        non_null(out, "out")?;
        let tol = tolerance(abs_tol)?;
        let z = lib(UpperHalfPoint::new(x, y))?;
        *out = lib(xi_eval(&(*seq).0, z, &tol))?.into();
        Ok(())
    })
}

/// Fourier coefficients `ξ̂_m` for `0 <= m <= m_max`; `out_len` must be at least `m_max + 1`.
///
/// # Safety
/// `seq` must be a live handle; `out` must be valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_xi_coeffs(
    seq: *const HamfSequence,
    m_max: u64,
    out: *mut HamfComplex,
    out_len: usize,
) -> HamfStatus {
    guard(|| {
        non_null(seq, "seq")?;
        non_null(out, "out")?;
        if (out_len as u64) <= m_max {
            set_error(format!("out_len {out_len} < m_max + 1"));
            return Err(HamfStatus::Domain);
        }
        let coeffs = lib(xi_coeff(&(*seq).0, m_max))?;
        let dst = std::slice::from_raw_parts_mut(out, out_len);
        for (d, c) in dst.iter_mut().zip(coeffs.values()) {
            *d = (*c).into();
        }
        Ok(())
    })
}

/// `M^{-1/2} Σ_{m<=M} |ξ̂_m − ξ̂^{(K)}_m|²`.
///
/// # Safety
/// `seq` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_approx_error(
    seq: *const HamfSequence,
    k: u64,
    m: u64,
    out: *mut f64,
) -> HamfStatus {
    guard(|| {
        non_null(seq, "seq")?;
        non_null(out, "out")?;
        *out = lib(approx_error(&(*seq).0, k, m))?.error_sq;
        Ok(())
    })
}

/// Leading-order limit of [`hamf_approx_error`] as `M → ∞`.
///
/// # Safety
/// `seq` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_tail_bound(
    seq: *const HamfSequence,
    k: u64,
    out: *mut f64,
) -> HamfStatus {
    guard(|| {
        non_null(seq, "seq")?;
        non_null(out, "out")?;
        *out = tail_bound(&(*seq).0, k);
        Ok(())
    })
}

/// Truncated variance constant `A` and a bound on the truncation error.
///
/// # Safety
/// `seq` must be a live handle; `out_a` and `out_tail` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_variance_a(
    seq: *const HamfSequence,
    r_max: u64,
    pq_cap: u64,
    out_a: *mut HamfComplex,
    out_tail: *mut f64,
) -> HamfStatus {
    guard(|| {
        non_null(seq, "seq")?;
        non_null(out_a, "out_a")?;
        non_null(out_tail, "out_tail")?;
        let r = lib(variance_a(&(*seq).0, r_max, pq_cap))?;
        *out_a = r.a.into();
        *out_tail = r.tail_estimate;
        Ok(())
    })
}

/// Draw `n` samples of `y^{1/4} ξ(x + iy)`, `0 < y <= 0.1`.
///
/// # Safety
/// `seq` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_samples_new(
    seq: *const HamfSequence,
    y: f64,
    n: usize,
    seed: u64,
    sampler: HamfSampler,
    abs_tol: f64,
    out: *mut *mut HamfSamples,
) -> HamfStatus {
    guard(|| {
        non_null(seq, "seq")?;
        non_null(out, "out")?;
        let tol = tolerance(abs_tol)?;
        let sampler = match sampler {
            HamfSampler::IidUniform => Sampler::IidUniform,
            HamfSampler::StratifiedGrid => Sampler::StratifiedGrid,
        };
        let d = lib(sample_values(&(*seq).0, y, n, seed, sampler, &tol))?;
        *out = Box::into_raw(Box::new(HamfSamples(d)));
        Ok(())
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hamf_samples_len(s: *const HamfSamples) -> usize {
    if s.is_null() {
        0
    } else {
        (*s).0.len()
    }
}

/// Abscissa and value of sample `i`.
///
/// # Safety
/// `s` must be a live handle; `x` and `w` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_samples_get(
    s: *const HamfSamples,
    i: usize,
    x: *mut f64,
    w: *mut HamfComplex,
) -> HamfStatus {
    guard(|| {
        non_null(s, "samples")?;
        non_null(x, "x")?;
        non_null(w, "w")?;
        let d = &(*s).0;
        if i >= d.len() {
            set_error(format!("index {i} out of range for {} samples", d.len()));
            return Err(HamfStatus::Domain);
        }
        *x = d.xs[i];
        *w = d.samples[i].into();
        Ok(())
    })
}

/// Empirical `E|w|²`.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hamf_samples_mean_abs2(
    s: *const HamfSamples,
    out: *mut f64,
) -> HamfStatus {
    guard(|| {
        non_null(s, "samples")?;
        non_null(out, "out")?;
        *out = (*s).0.mean_abs2();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hamf_samples_free(s: *mut HamfSamples) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
