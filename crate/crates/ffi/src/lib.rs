//! C ABI over `fedvi-core`.
//!
//! Every function returns a [`FedviStatus`]. On failure a message is kept per
//! thread and can be read with [`fedvi_last_error`]. Operators are opaque
//! handles released with [`fedvi_operator_free`]; strings returned by the
//! library are released with [`fedvi_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use fedvi_core::bench_harness::{fit_power_law, rows_to_csv, run_experiment_with, ExperimentConfig, RunOptions};
use fedvi_core::gap_metrics::{restricted_gap, GapMethod};
use fedvi_core::vi_core::matrix_io::load_affine;
use fedvi_core::vi_core::{make_test_problem, OperatorSpec, ProblemKind, ProblemParams};
use fedvi_core::{Error, Matrix, Vector};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FedviStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    ConfigRejected = 4,
    Io = 5,
    Internal = 6,
}

/// Synthetic problem families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FedviProblemKind {
    Affine = 0,
    BilinearSaddle = 1,
    Skew = 2,
    QuadraticGradient = 3,
    BoundedNonlinear = 4,
    Regularized = 5,
}

impl From<FedviProblemKind> for ProblemKind {
    fn from(k: FedviProblemKind) -> Self {
        match k {
            FedviProblemKind::Affine => ProblemKind::Affine,
            FedviProblemKind::BilinearSaddle => ProblemKind::BilinearSaddle,
            FedviProblemKind::Skew => ProblemKind::Skew,
            FedviProblemKind::QuadraticGradient => ProblemKind::QuadraticGradient,
            FedviProblemKind::BoundedNonlinear => ProblemKind::BoundedNonlinear,
            FedviProblemKind::Regularized => ProblemKind::Regularized,
        }
    }
}

/// Opaque operator handle.
pub struct FedviOperator {
    inner: Arc<OperatorSpec>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FedviStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch { .. } => FedviStatus::DimensionMismatch,
            Error::Io(_) => FedviStatus::Io,
            e if e.is_config_rejection() => match e {
                Error::InvalidParameter { .. } | Error::Unsupported(_) => FedviStatus::InvalidArgument,
                _ => FedviStatus::ConfigRejected,
            },
            _ => FedviStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> FedviStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            FedviStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            FedviStatus::Internal
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(FedviStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FedviStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn operator<'a>(op: *const FedviOperator) -> Result<&'a OperatorSpec, Failure> {
    op.as_ref().map(|h| h.inner.as_ref()).ok_or_else(|| null("op"))
}

unsafe fn emit(out: *mut *mut FedviOperator, op: OperatorSpec) {
    *out = Box::into_raw(Box::new(FedviOperator { inner: Arc::new(op) }));
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn fedvi_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a synthetic test problem. `params_json` may be null for defaults.
///
/// # Safety
/// `params_json` is null or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fedvi_operator_from_problem(
    kind: FedviProblemKind,
    dim: usize,
    seed: u64,
    params_json: *const c_char,
    out: *mut *mut FedviOperator,
) -> FedviStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = if params_json.is_null() {
            ProblemParams::default()
        } else {
            serde_json::from_str(text(params_json, "params_json")?)
                .map_err(|e| Failure(FedviStatus::ConfigRejected, e.to_string()))?
        };
        emit(out, make_test_problem(kind.into(), dim, &params, seed)?);
        Ok(())
    })
}

/// Affine operator `V(z) = A z + b` with `A` given row-major.
///
/// # Safety
/// `a` holds `dim*dim` values, `b` holds `dim` values, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fedvi_operator_affine(
    dim: usize,
    a: *const f64,
    b: *const f64,
    out: *mut *mut FedviOperator,
) -> FedviStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = Matrix::from_row_slice(dim, dim, slice(a, dim * dim, "a")?);
        let b = Vector::from_column_slice(slice(b, dim, "b")?);
        emit(out, OperatorSpec::affine(a, b)?);
        Ok(())
    })
}

/// Load an affine operator from the plain-text matrix format.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fedvi_operator_load(path: *const c_char, out: *mut *mut FedviOperator) -> FedviStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        emit(out, load_affine(Path::new(text(path, "path")?))?);
        Ok(())
    })
}

/// # Safety
/// `op` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fedvi_operator_free(op: *mut FedviOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Dimension of the operator, or 0 for a null handle.
///
/// # Safety
/// `op` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fedvi_operator_dim(op: *const FedviOperator) -> usize {
    op.as_ref().map_or(0, |h| h.inner.dim())
}

/// Declared smoothness constant `L` (may be infinite).
///
/// # Safety
/// `op` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fedvi_operator_lipschitz(op: *const FedviOperator, out: *mut f64) -> FedviStatus {
    guard(|| {
        let op = operator(op)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = op.constants().lipschitz;
        Ok(())
    })
}

/// Evaluate `V(z)` into `out`; both buffers hold `len` values.
///
/// # Safety
/// `op` is a live handle; `z` and `out` hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fedvi_operator_eval(
    op: *const FedviOperator,
    z: *const f64,
    len: usize,
    out: *mut f64,
) -> FedviStatus {
    guard(|| {
        let op = operator(op)?;
        let z = Vector::from_column_slice(slice(z, len, "z")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let v = op.eval(&z)?;
        ptr::copy_nonoverlapping(v.as_ptr(), out, len);
        Ok(())
    })
}

/// Restricted gap of `x_o` over the ball of `radius` around `center`, with
/// the automatic evaluator. `certified` reports whether the value is exact.
///
/// # Safety
/// `op` is a live handle; `x_o` and `center` hold `len` values; `value` and
/// `certified` are writable.
#[no_mangle]
pub unsafe extern "C" fn fedvi_restricted_gap(
    op: *const FedviOperator,
    x_o: *const f64,
    center: *const f64,
    len: usize,
    radius: f64,
    value: *mut f64,
    certified: *mut bool,
) -> FedviStatus {
    guard(|| {
        let op = operator(op)?;
        let x = Vector::from_column_slice(slice(x_o, len, "x_o")?);
        let c = Vector::from_column_slice(slice(center, len, "center")?);
        if value.is_null() || certified.is_null() {
            return Err(null("value"));
        }
        let est = restricted_gap(op, &x, &c, radius, GapMethod::Auto)?;
        *value = est.value;
        *certified = est.certified;
        Ok(())
    })
}

/// Run an experiment described by a JSON config and return its CSV text in
/// `out_csv` (free with [`fedvi_string_free`]). `workers` of 0 uses all cores.
///
/// # Safety
/// `config_json` is a NUL-terminated string; `out_csv` is writable.
#[no_mangle]
pub unsafe extern "C" fn fedvi_run_experiment(
    config_json: *const c_char,
    workers: usize,
    out_csv: *mut *mut c_char,
) -> FedviStatus {
    guard(|| {
        if out_csv.is_null() {
            return Err(null("out_csv"));
        }
        let mut cfg = ExperimentConfig::from_json(text(config_json, "config_json")?)?;
        cfg.output = None;
        let opts = RunOptions {
            workers: (workers > 0).then_some(workers),
            seed_override: None,
        };
        let out = run_experiment_with(&cfg, &opts)?;
        let csv = CString::new(rows_to_csv(&out.rows))
            .map_err(|_| Failure(FedviStatus::Internal, "CSV contains NUL".into()))?;
        *out_csv = csv.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fedvi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Least-squares fit of `log y = intercept + slope · log x`.
///
/// # Safety
/// `xs` and `ys` hold `n` values; the three outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn fedvi_fit_power_law(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    slope: *mut f64,
    intercept: *mut f64,
    r_squared: *mut f64,
) -> FedviStatus {
    guard(|| {
        let xs = slice(xs, n, "xs")?;
        let ys = slice(ys, n, "ys")?;
        if slope.is_null() || intercept.is_null() || r_squared.is_null() {
            return Err(null("slope"));
        }
        let pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        let (s, i, r2) = fit_power_law(&pairs)?;
        *slope = s;
        *intercept = i;
        *r_squared = r2;
        Ok(())
    })
}
