//! C ABI over `hamburger`.
//!
//! Objects are passed as opaque handles created by `*_new`/`*_build`
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`HbStatus`]; on failure a description is available from
//! [`hb_last_error_message`] on the same thread until the next failing call.
//!
//! Complex numbers cross the boundary as interleaved `(re, im)` pairs of
//! `double`, matrices in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hamburger::cayley::SchurParameter;
use hamburger::io::MomentFile;
use hamburger::linalg::CMat;
use hamburger::moments::{self, MomentSequence, Tolerances};
use hamburger::{nevanlinna, Complex64, Error, ErrorClass, MomentModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Invalid input: malformed data, wrong shapes, unsolvable moments.
    Validation = 2,
    /// A linear system was too ill-conditioned to solve reliably.
    Numerical = 3,
    /// The evaluation point is outside the admissible region.
    Domain = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Validated moment sequence.
pub struct HbMoments(MomentSequence);

/// Gram-space model built from a moment sequence.
pub struct HbModel(MomentModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("no interior nul"));
}

fn status_of(e: &Error) -> HbStatus {
    match (e, e.class()) {
        (Error::Domain { .. }, _) => HbStatus::Domain,
        (_, ErrorClass::Numerical) => HbStatus::Numerical,
        (_, ErrorClass::Validation) => HbStatus::Validation,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (HbStatus, String)>) -> HbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HbStatus::Panic
        }
    }
}

fn lib(e: Error) -> (HbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HbStatus, String) {
    (HbStatus::NullPointer, format!("{what} is NULL"))
}

fn tolerances(tol_psd: f64, tol_rank: f64) -> Result<Tolerances, (HbStatus, String)> {
    let t = Tolerances {
        psd: tol_psd,
        rank: tol_rank,
        ..Tolerances::default()
    };
    t.validate().map_err(lib)?;
    Ok(t)
}

/// Reads `rows * cols` interleaved complex entries.
///
/// # Safety
/// `data` must point to `2 * rows * cols` readable doubles.
unsafe fn read_matrix(data: *const f64, rows: usize, cols: usize) -> CMat {
    let s = std::slice::from_raw_parts(data, 2 * rows * cols);
    CMat::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(s[k], s[k + 1])
    })
}

/// # Safety
/// `out` must point to `2 * m.nrows() * m.ncols()` writable doubles.
unsafe fn write_matrix(m: &CMat, out: *mut f64) {
    let s = std::slice::from_raw_parts_mut(out, 2 * m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let k = 2 * (i * m.ncols() + j);
            s[k] = m[(i, j)].re;
            s[k + 1] = m[(i, j)].im;
        }
    }
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a moment sequence from `count` matrices of size `dim x dim` stored
/// consecutively in `data` (`2 * count * dim * dim` doubles). `count` must be
/// odd and at least 3.
///
/// # Safety
/// `data` must be readable for the stated length and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hb_moments_new(
    dim: usize,
    count: usize,
    data: *const f64,
    tol_herm: f64,
    out: *mut *mut HbMoments,
) -> HbStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let block = 2 * dim * dim;
        let ms = (0..count)
            .map(|k| read_matrix(data.add(k * block), dim, dim))
            .collect();
        let m = MomentSequence::new(ms, tol_herm).map_err(lib)?;
        *out = Box::into_raw(Box::new(HbMoments(m)));
        Ok(())
    })
}

/// Parses the JSON moment-file format used by the command line tool.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hb_moments_from_json(json: *const c_char, tol_herm: f64, out: *mut *mut HbMoments) -> HbStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (HbStatus::Validation, format!("invalid UTF-8: {e}")))?;
        let file: MomentFile = serde_json::from_str(text).map_err(|e| lib(e.into()))?;
        let m = file.to_sequence(tol_herm).map_err(lib)?;
        *out = Box::into_raw(Box::new(HbMoments(m)));
        Ok(())
    })
}

/// Releases a handle from `hb_moments_new`/`hb_moments_from_json`. NULL is ignored.
///
/// # Safety
/// `m` must be NULL or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn hb_moments_free(m: *mut HbMoments) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Matrix size `d` of the moments.
///
/// # Safety
/// `m` must be a live handle and `out_dim` writable.
#[no_mangle]
pub unsafe extern "C" fn hb_moments_dim(m: *const HbMoments, out_dim: *mut usize) -> HbStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("moments"))?;
        *out_dim.as_mut().ok_or_else(|| null("out_dim"))? = m.0.dim();
        Ok(())
    })
}

/// Positivity test of the block Hankel matrix. Any of the output pointers
/// may be NULL.
///
/// # Safety
/// `m` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hb_check_solvability(
    m: *const HbMoments,
    tol_psd: f64,
    tol_rank: f64,
    out_solvable: *mut bool,
    out_min_eigenvalue: *mut f64,
    out_rank: *mut usize,
) -> HbStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("moments"))?;
        let report = moments::check_solvability(&m.0, &tolerances(tol_psd, tol_rank)?);
        if let Some(o) = out_solvable.as_mut() {
            *o = report.solvable;
        }
        if let Some(o) = out_min_eigenvalue.as_mut() {
            *o = report.min_eigenvalue;
        }
        if let Some(o) = out_rank.as_mut() {
            *o = report.rank;
        }
        Ok(())
    })
}

/// Builds the Gram space, shift operator and Cayley data.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hb_model_build(
    m: *const HbMoments,
    tol_psd: f64,
    tol_rank: f64,
    out: *mut *mut HbModel,
) -> HbStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("moments"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let model = MomentModel::build(&m.0, &tolerances(tol_psd, tol_rank)?).map_err(lib)?;
        *out = Box::into_raw(Box::new(HbModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn hb_model_free(model: *mut HbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Matrix size `d`, Gram-space dimension and defect numbers. Any output may
/// be NULL.
///
/// # Safety
/// `model` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hb_model_info(
    model: *const HbModel,
    out_dim: *mut usize,
    out_rank: *mut usize,
    out_defect_plus: *mut usize,
    out_defect_minus: *mut usize,
) -> HbStatus {
    guard(|| {
        let model = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let (dp, dm) = model.defect_dims();
        for (p, v) in [
            (out_dim, model.dim()),
            (out_rank, model.gram.rank()),
            (out_defect_plus, dp),
            (out_defect_minus, dm),
        ] {
            if let Some(o) = p.as_mut() {
                *o = v;
            }
        }
        Ok(())
    })
}

/// `R(z)` for the constant parameter `phi`, a `defect_minus x defect_plus`
/// contraction in interleaved row-major form, or NULL for the zero
/// parameter. Writes `2 * d * d` doubles to `out`.
///
/// # Safety
/// `model` must be a live handle; `phi` NULL or readable for its shape;
/// `out` writable for `2 * d * d` doubles.
#[no_mangle]
pub unsafe extern "C" fn hb_model_evaluate(
    model: *const HbModel,
    phi: *const f64,
    z_re: f64,
    z_im: f64,
    out: *mut f64,
) -> HbStatus {
    guard(|| {
        let model = &model.as_ref().ok_or_else(|| null("model"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let (dp, dm) = model.defect_dims();
        let p = if phi.is_null() {
            SchurParameter::zero(dm, dp)
        } else {
            SchurParameter::new(read_matrix(phi, dm, dp)).map_err(lib)?
        };
        let v = nevanlinna::evaluate_matrix(model, &p, Complex64::new(z_re, z_im)).map_err(lib)?;
        write_matrix(&v.r, out);
        Ok(())
    })
}

/// `R(z)` for the unitary parameter `e^{iθ} E` (equal defect numbers only).
///
/// # Safety
/// `model` must be a live handle and `out` writable for `2 * d * d` doubles.
#[no_mangle]
pub unsafe extern "C" fn hb_model_evaluate_unitary(
    model: *const HbModel,
    theta: f64,
    z_re: f64,
    z_im: f64,
    out: *mut f64,
) -> HbStatus {
    guard(|| {
        let model = &model.as_ref().ok_or_else(|| null("model"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = hamburger::PhiSpec::Unitary { theta }.resolve(&model.cayley).map_err(lib)?;
        let v = nevanlinna::evaluate_matrix(model, &p, Complex64::new(z_re, z_im)).map_err(lib)?;
        write_matrix(&v.r, out);
        Ok(())
    })
}
