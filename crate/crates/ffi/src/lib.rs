//! C ABI over `lnorm`.
//!
//! Matrices are opaque [`LnormMatrix`] handles created by the
//! `lnorm_matrix_new_*` functions and released with [`lnorm_matrix_free`].
//! Every fallible function returns an [`LnormStatus`] and writes its results
//! through out-pointers; on failure [`lnorm_last_error_message`] describes
//! the error. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lnorm::analytic::{self, DeltaBoundParams};
use lnorm::normest::{self, PowerOptions};
use lnorm::witness::{self, Epsilon};
use lnorm::{Error, GeneratorSequence, NormEstimate, Shape, StructuredMatrix, TruncatedVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LnormStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    NonFinite = 4,
    NegativeEntry = 5,
    DenseCap = 6,
    Overflow = 7,
    NoValidEpsilon = 8,
    Consistency = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LnormShape {
    L = 0,
    C = 1,
    Ctr = 2,
}

impl From<LnormShape> for Shape {
    fn from(s: LnormShape) -> Self {
        match s {
            LnormShape::L => Shape::L,
            LnormShape::C => Shape::C,
            LnormShape::Ctr => Shape::Ctr,
        }
    }
}

/// Opaque matrix handle.
pub struct LnormMatrix {
    inner: StructuredMatrix,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LnormEstimate {
    pub value: f64,
    pub residual: f64,
    pub lower_certificate: f64,
    pub iterations: usize,
    pub truncation: usize,
    pub converged: bool,
}

impl From<&NormEstimate> for LnormEstimate {
    fn from(e: &NormEstimate) -> Self {
        Self {
            value: e.value,
            residual: e.residual,
            lower_certificate: e.lower_certificate,
            iterations: e.iterations,
            truncation: e.truncation,
            converged: e.converged,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LnormLacunaryConstants {
    pub b_n: f64,
    pub eta0: f64,
    pub eta_k: f64,
    pub eta_k_gap: f64,
    pub t_opt: f64,
    pub norm: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LnormAsCertificate {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub ratio: f64,
    pub truncated_ratio: f64,
    pub tail: f64,
    pub image_discrepancy: f64,
    pub pointwise_ok: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LnormPnormCertificate {
    pub ratio: f64,
    pub gamma_m: f64,
    pub norm_p_pow: f64,
    pub lower_bound_pow: f64,
    pub slack: f64,
    pub self_bound_ok: bool,
    pub upper_ok: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LnormLacunaryCertificate {
    pub norm_sq: f64,
    pub ratio_sq: f64,
    pub limit_sq: f64,
    pub lower_bound_sq: f64,
    pub bound_ok: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LnormStatus {
    match e {
        Error::InvalidParameter { .. } => LnormStatus::InvalidArgument,
        Error::LengthMismatch { .. } => LnormStatus::LengthMismatch,
        Error::NonFinite { .. } => LnormStatus::NonFinite,
        Error::NegativeEntry { .. } => LnormStatus::NegativeEntry,
        Error::DenseCapExceeded { .. } => LnormStatus::DenseCap,
        Error::Overflow { .. } => LnormStatus::Overflow,
        Error::NoValidEpsilon { .. } => LnormStatus::NoValidEpsilon,
        Error::Consistency(_) => LnormStatus::Consistency,
    }
}

struct Failure(LnormStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LnormStatus::NullPointer, format!("null pointer: {what}"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LnormStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LnormStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            LnormStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn mat_ref<'a>(m: *const LnormMatrix) -> Result<&'a StructuredMatrix, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("matrix"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn power_options(tol: f64, max_iter: usize) -> Result<PowerOptions, Failure> {
    let tol = if tol > 0.0 { tol } else { normest::DEFAULT_TOL };
    let max_iter = if max_iter > 0 {
        max_iter
    } else {
        normest::DEFAULT_MAX_ITER
    };
    Ok(PowerOptions::new(tol, max_iter)?)
}

unsafe fn new_matrix(
    shape: LnormShape,
    gen: lnorm::Result<GeneratorSequence>,
    out: *mut *mut LnormMatrix,
) -> LnormStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let inner = StructuredMatrix::new(shape.into(), gen?);
        *out = Box::into_raw(Box::new(LnormMatrix { inner }));
        Ok(())
    })
}

/// Matrix generated by `a_n = 1/(n+s)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_matrix_new_as(shape: LnormShape, s: f64, out: *mut *mut LnormMatrix) -> LnormStatus {
    new_matrix(shape, GeneratorSequence::as_sequence(s), out)
}

/// Same coefficients as [`lnorm_matrix_new_as`], labelled as the Cesàro family.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_matrix_new_cesaro(shape: LnormShape, s: f64, out: *mut *mut LnormMatrix) -> LnormStatus {
    new_matrix(shape, GeneratorSequence::cesaro(s), out)
}

/// Lacunary generator `a_{N^j} = N^{-j/2}` (`j >= 1`), zero elsewhere.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_matrix_new_lacunary(
    shape: LnormShape,
    base: u64,
    out: *mut *mut LnormMatrix,
) -> LnormStatus {
    new_matrix(shape, GeneratorSequence::lacunary(base), out)
}

/// Finite generator `values[0..len]`, zero beyond. The values are copied.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_matrix_new_custom(
    shape: LnormShape,
    values: *const f64,
    len: usize,
    out: *mut *mut LnormMatrix,
) -> LnormStatus {
    let gen = match slice(values, len, "values") {
        Ok(v) => GeneratorSequence::custom(v.to_vec()),
        Err(Failure(status, msg)) => {
            set_last_error(&msg);
            return status;
        }
    };
    new_matrix(shape, gen, out)
}

/// Releases a handle. Null is a no-op.
///
/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lnorm_matrix_free(m: *mut LnormMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Entry `(i, j)` of the infinite matrix.
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_matrix_entry(m: *const LnormMatrix, i: u64, j: u64, out: *mut f64) -> LnormStatus {
    guard(|| {
        *out_ref(out, "out")? = mat_ref(m)?.entry(i, j);
        Ok(())
    })
}

/// `y = A_len x` for the leading `len x len` section.
///
/// # Safety
/// `x` and `y` must each point to `len` doubles; they may not overlap.
#[no_mangle]
pub unsafe extern "C" fn lnorm_matrix_matvec(
    m: *const LnormMatrix,
    x: *const f64,
    len: usize,
    y: *mut f64,
) -> LnormStatus {
    guard(|| {
        let mat = mat_ref(m)?;
        let x = TruncatedVector::new(slice(x, len, "x")?.to_vec())?;
        if y.is_null() {
            return Err(null("y"));
        }
        let out = mat.matvec(&x)?;
        std::slice::from_raw_parts_mut(y, len).copy_from_slice(out.as_slice());
        Ok(())
    })
}

/// `||A_M||_{2->2}` by power iteration. `tol <= 0` and `max_iter == 0`
/// select the defaults.
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_norm2_power(
    m: *const LnormMatrix,
    truncation: usize,
    tol: f64,
    max_iter: usize,
    out: *mut LnormEstimate,
) -> LnormStatus {
    guard(|| {
        let e = normest::norm2_power(mat_ref(m)?, truncation, power_options(tol, max_iter)?)?;
        *out_ref(out, "out")? = (&e).into();
        Ok(())
    })
}

/// `||A_M||_{p->p}` by the nonlinear power method (nonnegative matrices).
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_normp_boyd(
    m: *const LnormMatrix,
    truncation: usize,
    p: f64,
    tol: f64,
    max_iter: usize,
    out: *mut LnormEstimate,
) -> LnormStatus {
    guard(|| {
        let e = normest::normp_boyd(mat_ref(m)?, truncation, p, power_options(tol, max_iter)?)?;
        *out_ref(out, "out")? = (&e).into();
        Ok(())
    })
}

/// `s* = (sqrt(6(8+3 sqrt 3)) - sqrt 3 - 3)/12`.
#[no_mangle]
pub extern "C" fn lnorm_s_star() -> f64 {
    analytic::s_star()
}

/// `1/(2 sqrt 2)`.
#[no_mangle]
pub extern "C" fn lnorm_s_upper() -> f64 {
    analytic::s_upper()
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_f_of_s(s: f64, out: *mut f64) -> LnormStatus {
    guard(|| {
        *out_ref(out, "out")? = analytic::f_of_s(s)?;
        Ok(())
    })
}

/// `p^2/(p-1)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_pq_constant(p: f64, out: *mut f64) -> LnormStatus {
    guard(|| {
        *out_ref(out, "out")? = analytic::pq_constant(p)?;
        Ok(())
    })
}

/// `sum_{k=0}^{n-1} Γ(k+b+1)/Γ(k+c)` in closed form.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_gamma_ratio_sum(b: f64, c: f64, n: u64, out: *mut f64) -> LnormStatus {
    guard(|| {
        *out_ref(out, "out")? = analytic::gamma_ratio_sum(b, c, n)?;
        Ok(())
    })
}

/// Delta-method upper bound on `||A_s||_2` with `δ_n = 1/(n+s+1/2)`,
/// evaluated up to `n_max` (0 selects the default) plus the tail limit.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_delta_bound(s: f64, n_max: u64, out: *mut f64) -> LnormStatus {
    guard(|| {
        let n_max = if n_max == 0 { analytic::DEFAULT_N_MAX } else { n_max };
        let params = DeltaBoundParams::new(1.0, s + 0.5, n_max)?;
        let r = analytic::delta_upper_bound(&params, &GeneratorSequence::as_sequence(s)?)?;
        *out_ref(out, "out")? = r.value;
        Ok(())
    })
}

/// `sqrt(N-1)/(sqrt N - 1)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_lacunary_norm(base: u64, out: *mut f64) -> LnormStatus {
    guard(|| {
        *out_ref(out, "out")? = analytic::lacunary_norm(base)?;
        Ok(())
    })
}

/// Lacunary constants at `index`. A NaN `t` selects the optimal `t`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_lacunary_constants(
    base: u64,
    t: f64,
    index: u32,
    out: *mut LnormLacunaryConstants,
) -> LnormStatus {
    guard(|| {
        let t = if t.is_nan() {
            analytic::lacunary_optimal_t(base)?
        } else {
            t
        };
        let c = analytic::lacunary_constants(base, t, index)?;
        *out_ref(out, "out")? = LnormLacunaryConstants {
            b_n: c.b_n,
            eta0: c.eta0,
            eta_k: c.eta_k,
            eta_k_gap: c.eta_k_gap,
            t_opt: c.t_opt,
            norm: c.norm,
        };
        Ok(())
    })
}

/// Builds and certifies the `A_s` witness. A NaN `eps` selects it
/// automatically.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_witness_as(
    s: f64,
    eps: f64,
    truncation: usize,
    out: *mut LnormAsCertificate,
) -> LnormStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let eps = if eps.is_nan() {
            Epsilon::Auto
        } else {
            Epsilon::Fixed(eps)
        };
        let c = witness::certify_as_witness(&witness::build_as_witness(s, truncation, eps)?)?;
        *out = LnormAsCertificate {
            eps: c.eps,
            alpha: c.alpha,
            beta: c.beta,
            ratio: c.ratio,
            truncated_ratio: c.truncated_ratio,
            tail: c.tail,
            image_discrepancy: c.image_discrepancy,
            pointwise_ok: c.pointwise_ok,
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_witness_pnorm(s: f64, p: f64, m: usize, out: *mut LnormPnormCertificate) -> LnormStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let c = witness::certify_pnorm_witness(&witness::build_pnorm_witness(s, p, m)?)?;
        *out = LnormPnormCertificate {
            ratio: c.ratio,
            gamma_m: c.gamma_m,
            norm_p_pow: c.norm_p_pow,
            lower_bound_pow: c.lower_bound_pow,
            slack: c.slack,
            self_bound_ok: c.self_bound_ok,
            upper_ok: c.upper_ok,
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lnorm_witness_lacunary(
    base: u64,
    levels: u32,
    out: *mut LnormLacunaryCertificate,
) -> LnormStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let c = witness::certify_lacunary_witness(&witness::build_lacunary_witness(base, levels)?)?;
        *out = LnormLacunaryCertificate {
            norm_sq: c.norm_sq,
            ratio_sq: c.ratio_sq,
            limit_sq: c.limit_sq,
            lower_bound_sq: c.lower_bound_sq,
            bound_ok: c.bound_ok,
        };
        Ok(())
    })
}

/// Message for the last failing call on this thread, or an empty string.
/// Valid until the next `lnorm_*` call on the same thread.
#[no_mangle]
pub extern "C" fn lnorm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lnorm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
