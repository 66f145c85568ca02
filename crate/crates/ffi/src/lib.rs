//! C ABI over the `l1pca` solvers.
//!
//! Matrices and results are opaque heap handles released with their
//! `*_free` function. Every fallible call returns an [`L1pcaStatus`]; on
//! failure [`l1pca_last_error_message`] describes the last error raised on
//! the calling thread. Matrix buffers are row-major, `rows x cols`, with
//! rows indexing dimensions and columns indexing samples.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use l1pca::nalgebra::DMatrix;
use l1pca::{solve, DataMatrix, Error, Init, Solver, SolverConfig, SolverReport};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum L1pcaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Precondition = 3,
    Numerical = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum L1pcaSolverKind {
    L1bf = 0,
    FixedPoint = 1,
    AltOpt = 2,
    Oracle = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum L1pcaInit {
    /// Random for the fixed-point solver, sv-sign otherwise.
    Default = 0,
    SvSign = 1,
    Random = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct L1pcaConfig {
    pub solver: L1pcaSolverKind,
    pub init: L1pcaInit,
    pub k: usize,
    pub restarts: usize,
    /// 0 selects the solver default.
    pub flip_budget: usize,
    /// Negative or NaN selects the solver default.
    pub tol: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct L1pcaResultInfo {
    pub dim: usize,
    pub samples: usize,
    pub k: usize,
    pub l1_metric: f64,
    /// `|Xb|_2` for K = 1, `|XB|_*` otherwise.
    pub objective: f64,
    pub flips: usize,
    pub restart_winner: usize,
    pub converged: bool,
    pub basis_completed: bool,
}

pub struct L1pcaMatrix {
    data: DataMatrix,
}

pub struct L1pcaResult {
    report: SolverReport,
    samples: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> L1pcaStatus {
    match err.exit_code() {
        2 => L1pcaStatus::InvalidInput,
        3 => L1pcaStatus::Precondition,
        _ => L1pcaStatus::Numerical,
    }
}

fn fail(status: L1pcaStatus, msg: impl Into<String>) -> L1pcaStatus {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> std::result::Result<(), L1pcaStatus>) -> L1pcaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => L1pcaStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(L1pcaStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> L1pcaStatus {
    fail(status_of(&e), e.to_string())
}

/// Reads a row-major buffer; the caller guarantees `rows * cols` values.
unsafe fn read_matrix(data: *const f64, rows: usize, cols: usize) -> std::result::Result<DataMatrix, L1pcaStatus> {
    if data.is_null() {
        return Err(fail(L1pcaStatus::NullPointer, "data is null"));
    }
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| fail(L1pcaStatus::InvalidInput, "rows * cols overflows"))?;
    let slice = std::slice::from_raw_parts(data, len);
    DataMatrix::from_row_major(rows, cols, slice).map_err(lib_err)
}

/// Default configuration: L1-BF, K = 1, one start, seed 0.
#[no_mangle]
pub extern "C" fn l1pca_config_default() -> L1pcaConfig {
    L1pcaConfig {
        solver: L1pcaSolverKind::L1bf,
        init: L1pcaInit::Default,
        k: 1,
        restarts: 1,
        flip_budget: 0,
        tol: -1.0,
        seed: 0,
    }
}

/// Null-terminated message of the last failure on this thread, or an empty
/// string. Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn l1pca_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies a `rows x cols` row-major buffer into a new matrix handle.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn l1pca_matrix_new(
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut L1pcaMatrix,
) -> L1pcaStatus {
    guarded(|| {
        if out.is_null() {
            return Err(fail(L1pcaStatus::NullPointer, "out is null"));
        }
        let data = read_matrix(data, rows, cols)?;
        *out = Box::into_raw(Box::new(L1pcaMatrix { data }));
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or a handle from [`l1pca_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn l1pca_matrix_free(matrix: *mut L1pcaMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Numerical rank of the matrix.
///
/// # Safety
/// `matrix` must be a live handle and `rank` writable.
#[no_mangle]
pub unsafe extern "C" fn l1pca_matrix_rank(matrix: *const L1pcaMatrix, rank: *mut usize) -> L1pcaStatus {
    guarded(|| {
        if matrix.is_null() || rank.is_null() {
            return Err(fail(L1pcaStatus::NullPointer, "matrix or rank is null"));
        }
        *rank = (*matrix).data.rank();
        Ok(())
    })
}

/// Runs the configured solver; on success `*out` owns a new result.
///
/// # Safety
/// `matrix` must be a live handle, `config` readable (or null for the
/// defaults) and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1pca_solve(
    matrix: *const L1pcaMatrix,
    config: *const L1pcaConfig,
    out: *mut *mut L1pcaResult,
) -> L1pcaStatus {
    guarded(|| {
        if matrix.is_null() || out.is_null() {
            return Err(fail(L1pcaStatus::NullPointer, "matrix or out is null"));
        }
        let c = if config.is_null() { l1pca_config_default() } else { *config };
        let solver = match c.solver {
            L1pcaSolverKind::L1bf => Solver::L1bf,
            L1pcaSolverKind::FixedPoint => Solver::Fp,
            L1pcaSolverKind::AltOpt => Solver::Ao,
            L1pcaSolverKind::Oracle => Solver::Oracle,
        };
        let cfg = SolverConfig {
            init: match c.init {
                L1pcaInit::Default => solver.default_init(),
                L1pcaInit::SvSign => Init::SvSign,
                L1pcaInit::Random => Init::Random,
            },
            restarts: c.restarts,
            flip_budget: (c.flip_budget > 0).then_some(c.flip_budget),
            tol: (c.tol >= 0.0).then_some(c.tol),
            seed: c.seed,
        };
        let data = &(*matrix).data;
        let report = solve(data, c.k, solver, &cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(L1pcaResult {
            report,
            samples: data.samples(),
        }));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from [`l1pca_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn l1pca_result_free(result: *mut L1pcaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live handle and `info` writable.
#[no_mangle]
pub unsafe extern "C" fn l1pca_result_info(result: *const L1pcaResult, info: *mut L1pcaResultInfo) -> L1pcaStatus {
    guarded(|| {
        if result.is_null() || info.is_null() {
            return Err(fail(L1pcaStatus::NullPointer, "result or info is null"));
        }
        let r = &(*result).report;
        *info = L1pcaResultInfo {
            dim: r.basis.nrows(),
            samples: (*result).samples,
            k: r.k(),
            l1_metric: r.l1_metric,
            objective: r.objective,
            flips: r.flips,
            restart_winner: r.restart_winner,
            converged: r.converged,
            basis_completed: r.basis_completed,
        };
        Ok(())
    })
}

/// Copies the `dim x k` basis, row-major, into `buf` of `len` doubles.
///
/// # Safety
/// `result` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn l1pca_result_basis(result: *const L1pcaResult, buf: *mut f64, len: usize) -> L1pcaStatus {
    guarded(|| {
        if result.is_null() || buf.is_null() {
            return Err(fail(L1pcaStatus::NullPointer, "result or buf is null"));
        }
        let q = &(*result).report.basis;
        let (rows, cols) = q.shape();
        if len < rows * cols {
            return Err(fail(
                L1pcaStatus::BufferTooSmall,
                format!("basis needs {} doubles, got {len}", rows * cols),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                out[i * cols + j] = q[(i, j)];
            }
        }
        Ok(())
    })
}

/// Copies the `samples x k` sign matrix, row-major, into `buf`.
///
/// # Safety
/// `result` must be a live handle and `buf` writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn l1pca_result_signs(result: *const L1pcaResult, buf: *mut i8, len: usize) -> L1pcaStatus {
    guarded(|| {
        if result.is_null() || buf.is_null() {
            return Err(fail(L1pcaStatus::NullPointer, "result or buf is null"));
        }
        let signs = (*result).report.signs.to_row_major();
        if len < signs.len() {
            return Err(fail(
                L1pcaStatus::BufferTooSmall,
                format!("signs need {} entries, got {len}", signs.len()),
            ));
        }
        ptr::copy_nonoverlapping(signs.as_ptr(), buf, signs.len());
        Ok(())
    })
}

/// Sum of singular values of a row-major `rows x cols` buffer.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn l1pca_nuclear_norm(data: *const f64, rows: usize, cols: usize, out: *mut f64) -> L1pcaStatus {
    guarded(|| {
        if data.is_null() || out.is_null() {
            return Err(fail(L1pcaStatus::NullPointer, "data or out is null"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(L1pcaStatus::InvalidInput, "rows * cols overflows"))?;
        let m = DMatrix::from_row_slice(rows, cols, std::slice::from_raw_parts(data, len));
        *out = l1pca::linalg::nuclear_norm(&m).map_err(lib_err)?;
        Ok(())
    })
}
