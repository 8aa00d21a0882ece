//! C ABI over the `egonet` library.
//!
//! Matrices and ego views cross the boundary as opaque handles created and
//! released through this API. Every fallible call returns an [`EgonetStatus`];
//! on failure `egonet_last_error_message` describes the error on the calling
//! thread. Dense data is exchanged in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use egonet::graph::{AdjacencyMatrix, EgoView, Matrix};
use egonet::tuning::{select_rank, TuningOptions};
use egonet::{Error, Estimator};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgonetStatus {
    Ok = 0,
    InvalidArgument = 1,
    UndefinedAuc = 2,
    Numerical = 3,
    Parse = 4,
    Io = 5,
    Config = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgonetEstimator {
    Le = 0,
    Se = 1,
    LePlus = 2,
}

/// Estimator codes arrive as plain integers so that an out-of-range value is
/// an error rather than undefined behaviour.
fn estimator_from_code(code: i32) -> Result<Estimator, Failure> {
    match code {
        c if c == EgonetEstimator::Le as i32 => Ok(Estimator::Le),
        c if c == EgonetEstimator::Se as i32 => Ok(Estimator::Se),
        c if c == EgonetEstimator::LePlus as i32 => Ok(Estimator::LePlus),
        other => Err(Failure(
            EgonetStatus::InvalidArgument,
            format!("unknown estimator code {other}"),
        )),
    }
}

/// Dense real matrix.
pub struct EgonetMatrix {
    inner: Matrix,
}

/// Observed rows of an egocentric sample.
pub struct EgonetEgoView {
    inner: EgoView,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EgonetStatus {
    match e {
        Error::InvalidArgument(_) => EgonetStatus::InvalidArgument,
        Error::UndefinedAuc(_) => EgonetStatus::UndefinedAuc,
        Error::Numerical(_) => EgonetStatus::Numerical,
        Error::Parse { .. } => EgonetStatus::Parse,
        Error::Io { .. } => EgonetStatus::Io,
        Error::Config(_) => EgonetStatus::Config,
    }
}

struct Failure(EgonetStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EgonetStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic, and maps the outcome to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EgonetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EgonetStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            EgonetStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn store_value<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

/// Message for the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn egonet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egonet_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut EgonetMatrix,
) -> EgonetStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(EgonetStatus::InvalidArgument, "matrix size overflows".into()))?;
        let values = slice(data, len, "data")?;
        store(
            out,
            EgonetMatrix {
                inner: Matrix::from_row_slice(rows, cols, values),
            },
        )
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn egonet_matrix_free(m: *mut EgonetMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn egonet_matrix_rows(m: *const EgonetMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.nrows())
}

/// # Safety
/// `m` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn egonet_matrix_cols(m: *const EgonetMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.ncols())
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egonet_matrix_get(
    m: *const EgonetMatrix,
    row: usize,
    col: usize,
    out: *mut f64,
) -> EgonetStatus {
    guard(|| {
        let m = &as_ref(m, "matrix")?.inner;
        let value = m.get((row, col)).copied().ok_or_else(|| {
            Failure(
                EgonetStatus::InvalidArgument,
                format!("index ({row}, {col}) outside a {}x{} matrix", m.nrows(), m.ncols()),
            )
        })?;
        store_value(out, value)
    })
}

/// Writes all entries row-major into `buffer`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle; `buffer` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn egonet_matrix_copy(
    m: *const EgonetMatrix,
    buffer: *mut f64,
    len: usize,
) -> EgonetStatus {
    guard(|| {
        let m = &as_ref(m, "matrix")?.inner;
        if len != m.len() {
            return Err(Failure(
                EgonetStatus::InvalidArgument,
                format!("buffer holds {len} values, matrix has {}", m.len()),
            ));
        }
        if len == 0 {
            return Ok(());
        }
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let out = std::slice::from_raw_parts_mut(buffer, len);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[i * m.ncols() + j] = m[(i, j)];
            }
        }
        Ok(())
    })
}

/// Ego view whose observed nodes are `0..n`, from `a11` (n x n) and `a12`
/// (n x (N - n)).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egonet_ego_view_from_blocks(
    a11: *const EgonetMatrix,
    a12: *const EgonetMatrix,
    out: *mut *mut EgonetEgoView,
) -> EgonetStatus {
    guard(|| {
        let a11 = as_ref(a11, "a11")?.inner.clone();
        let a12 = as_ref(a12, "a12")?.inner.clone();
        store(
            out,
            EgonetEgoView {
                inner: EgoView::from_blocks(a11, a12)?,
            },
        )
    })
}

/// Ego view of a full 0/1 adjacency matrix with the given observed nodes.
///
/// # Safety
/// `adjacency` must be live; `observed` must hold `n_observed` indices.
#[no_mangle]
pub unsafe extern "C" fn egonet_ego_view_from_adjacency(
    adjacency: *const EgonetMatrix,
    observed: *const usize,
    n_observed: usize,
    out: *mut *mut EgonetEgoView,
) -> EgonetStatus {
    guard(|| {
        let a = AdjacencyMatrix::new(as_ref(adjacency, "adjacency")?.inner.clone())?;
        let observed = slice(observed, n_observed, "observed")?;
        store(
            out,
            EgonetEgoView {
                inner: egonet::extract_ego_view(&a, observed)?,
            },
        )
    })
}

/// # Safety
/// `v` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn egonet_ego_view_free(v: *mut EgonetEgoView) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `v` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn egonet_ego_view_n_observed(v: *const EgonetEgoView) -> usize {
    v.as_ref().map_or(0, |v| v.inner.n_observed())
}

/// # Safety
/// `v` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn egonet_ego_view_n_hidden(v: *const EgonetEgoView) -> usize {
    v.as_ref().map_or(0, |v| v.inner.n_hidden())
}

/// Estimated hidden block ((N - n) x (N - n)), rows and columns in ascending
/// node order. `estimator` is an `EgonetEstimator` value.
///
/// # Safety
/// `view` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egonet_impute(
    view: *const EgonetEgoView,
    estimator: i32,
    rank: usize,
    truncate: bool,
    out: *mut *mut EgonetMatrix,
) -> EgonetStatus {
    guard(|| {
        let view = &as_ref(view, "view")?.inner;
        let fit = estimator_from_code(estimator)?.impute(view, rank, truncate)?;
        store(out, EgonetMatrix { inner: fit.p22_hat })
    })
}

/// # Safety
/// See [`egonet_impute`].
#[no_mangle]
pub unsafe extern "C" fn egonet_le_impute(
    view: *const EgonetEgoView,
    rank: usize,
    truncate: bool,
    out: *mut *mut EgonetMatrix,
) -> EgonetStatus {
    egonet_impute(view, EgonetEstimator::Le as i32, rank, truncate, out)
}

/// # Safety
/// See [`egonet_impute`].
#[no_mangle]
pub unsafe extern "C" fn egonet_se_impute(
    view: *const EgonetEgoView,
    rank: usize,
    truncate: bool,
    out: *mut *mut EgonetMatrix,
) -> EgonetStatus {
    egonet_impute(view, EgonetEstimator::Se as i32, rank, truncate, out)
}

/// # Safety
/// See [`egonet_impute`].
#[no_mangle]
pub unsafe extern "C" fn egonet_le_plus_impute(
    view: *const EgonetEgoView,
    rank: usize,
    truncate: bool,
    out: *mut *mut EgonetMatrix,
) -> EgonetStatus {
    egonet_impute(view, EgonetEstimator::LePlus as i32, rank, truncate, out)
}

/// Full N x N estimate in original node order.
///
/// # Safety
/// `view` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egonet_recover_full(
    view: *const EgonetEgoView,
    rank: usize,
    truncate: bool,
    out: *mut *mut EgonetMatrix,
) -> EgonetStatus {
    guard(|| {
        let view = &as_ref(view, "view")?.inner;
        let fit = egonet::recover_full(view, rank, truncate)?;
        store(
            out,
            EgonetMatrix {
                inner: fit.in_node_order(),
            },
        )
    })
}

/// Mean squared error over all entries.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egonet_mse(
    estimate: *const EgonetMatrix,
    truth: *const EgonetMatrix,
    out: *mut f64,
) -> EgonetStatus {
    guard(|| {
        let v = egonet::mse_block(&as_ref(estimate, "estimate")?.inner, &as_ref(truth, "truth")?.inner)?;
        store_value(out, v)
    })
}

/// Link-prediction AUC over the strict upper triangle of square blocks.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn egonet_auc(
    scores: *const EgonetMatrix,
    truth: *const EgonetMatrix,
    out: *mut f64,
) -> EgonetStatus {
    guard(|| {
        let roc = egonet::auc_link_prediction(&as_ref(scores, "scores")?.inner, &as_ref(truth, "truth")?.inner)?;
        store_value(out, roc.auc)
    })
}

/// Cross-validated rank among `candidates`.
///
/// # Safety
/// `view` must be live; `candidates` must hold `n_candidates` values; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn egonet_select_rank(
    view: *const EgonetEgoView,
    candidates: *const usize,
    n_candidates: usize,
    holdout_fraction: f64,
    repeats: usize,
    estimator: i32,
    seed: u64,
    out: *mut usize,
) -> EgonetStatus {
    guard(|| {
        let view = &as_ref(view, "view")?.inner;
        let options = TuningOptions {
            candidates: slice(candidates, n_candidates, "candidates")?.to_vec(),
            holdout_fraction,
            repeats,
            estimator: estimator_from_code(estimator)?,
            seed,
        };
        store_value(out, select_rank(view, &options)?.chosen_rank)
    })
}
