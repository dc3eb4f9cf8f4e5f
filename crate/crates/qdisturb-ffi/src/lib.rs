//! C ABI for the qdisturb library.
//!
//! Objects cross the boundary as opaque handles; every function returns a
//! [`QdStatus`] and writes results through out-pointers. Matrices are passed
//! as row-major `double` buffers with interleaved real and imaginary parts,
//! so one d×d effect occupies `2·d·d` doubles and an observable with n
//! outcomes `n·2·d·d`.

use std::os::raw::c_char;

use num_complex::Complex64;
use qdisturb::disturbance::{
    decide_non_disturbance, disturbance_measure, first_kind_measure, joint_measurability,
    rank1_disturbance, DisturbanceError, DisturbanceOptions, DisturbanceReport,
};
use qdisturb::matrix::ComplexMatrix;
use qdisturb::observables::{self, Observable};

/// Result codes for every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidObservable = 4,
    SolverFailure = 5,
    InternalError = 6,
}

/// Opaque observable handle.
pub struct QdObservable {
    inner: Observable,
}

/// Opaque disturbance report handle.
pub struct QdReport {
    inner: DisturbanceReport,
}

fn disturbance_status(err: &DisturbanceError) -> QdStatus {
    match err {
        DisturbanceError::DimensionMismatch { .. } => QdStatus::DimensionMismatch,
        DisturbanceError::SolverFailed { .. } => QdStatus::SolverFailure,
        DisturbanceError::NotRankOne => QdStatus::InvalidArgument,
        _ => QdStatus::InternalError,
    }
}

unsafe fn observable_ref<'a>(handle: *const QdObservable) -> Option<&'a Observable> {
    handle.as_ref().map(|h| &h.inner)
}

/// Builds an observable from `outcomes` effects of size `dim` x `dim`.
///
/// `data` holds the effects consecutively, each row-major with interleaved
/// `re, im` entries; `len` must equal `outcomes * dim * dim * 2`.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to a writable
/// pointer slot. A handle returned here must be released with
/// [`qd_observable_free`].
#[no_mangle]
pub unsafe extern "C" fn qd_observable_create(
    dim: usize,
    outcomes: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut QdObservable,
) -> QdStatus {
    if data.is_null() || out.is_null() {
        return QdStatus::NullPointer;
    }
    if dim == 0 || outcomes == 0 || len != outcomes * dim * dim * 2 {
        return QdStatus::InvalidArgument;
    }
    let buffer = std::slice::from_raw_parts(data, len);
    let mut effects = Vec::with_capacity(outcomes);
    for x in 0..outcomes {
        let base = x * dim * dim * 2;
        let effect = ComplexMatrix::from_fn(dim, dim, |i, j| {
            let offset = base + (i * dim + j) * 2;
            Complex64::new(buffer[offset], buffer[offset + 1])
        });
        effects.push(effect);
    }
    match Observable::new(effects) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(QdObservable { inner }));
            QdStatus::Ok
        }
        Err(_) => QdStatus::InvalidObservable,
    }
}

/// Releases an observable handle.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by
/// [`qd_observable_create`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qd_observable_free(handle: *mut QdObservable) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Checks the POVM conditions (positivity and normalization) at `tol`.
///
/// # Safety
/// `handle` must be a live observable handle; `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_observable_validate(
    handle: *const QdObservable,
    tol: f64,
    valid: *mut i32,
) -> QdStatus {
    let Some(obs) = observable_ref(handle) else {
        return QdStatus::NullPointer;
    };
    if valid.is_null() {
        return QdStatus::NullPointer;
    }
    *valid = i32::from(observables::validate(obs, tol).passed);
    QdStatus::Ok
}

/// Pairwise commutativity and the largest commutator norm.
///
/// # Safety
/// Both handles must be live; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_commutes(
    a: *const QdObservable,
    b: *const QdObservable,
    commutes: *mut i32,
    max_norm: *mut f64,
) -> QdStatus {
    let (Some(a), Some(b)) = (observable_ref(a), observable_ref(b)) else {
        return QdStatus::NullPointer;
    };
    if commutes.is_null() || max_norm.is_null() {
        return QdStatus::NullPointer;
    }
    match observables::commutes(a, b) {
        Ok((flag, norm)) => {
            *commutes = i32::from(flag);
            *max_norm = norm;
            QdStatus::Ok
        }
        Err(_) => QdStatus::DimensionMismatch,
    }
}

/// Dimension of the operator subspace spanned by the effects.
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_span_dim(handle: *const QdObservable, out: *mut usize) -> QdStatus {
    let Some(obs) = observable_ref(handle) else {
        return QdStatus::NullPointer;
    };
    if out.is_null() {
        return QdStatus::NullPointer;
    }
    *out = observables::span_dim(obs);
    QdStatus::Ok
}

/// Computes the least disturbance D_A(B) and returns a report handle.
///
/// Passing `decision_tol <= 0` keeps the default decision tolerance.
///
/// # Safety
/// Both observable handles must be live; `out` must be writable. The report
/// must be released with [`qd_report_free`].
#[no_mangle]
pub unsafe extern "C" fn qd_disturbance_measure(
    a: *const QdObservable,
    b: *const QdObservable,
    decision_tol: f64,
    out: *mut *mut QdReport,
) -> QdStatus {
    let (Some(a), Some(b)) = (observable_ref(a), observable_ref(b)) else {
        return QdStatus::NullPointer;
    };
    if out.is_null() {
        return QdStatus::NullPointer;
    }
    let mut options = DisturbanceOptions::default();
    if decision_tol > 0.0 {
        options.decision_tol = decision_tol;
    }
    match disturbance_measure(a, b, &options) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(QdReport { inner }));
            QdStatus::Ok
        }
        Err(e) => disturbance_status(&e),
    }
}

/// D_A(A): zero exactly when the observable admits a first-kind measurement.
///
/// # Safety
/// `a` must be live and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_first_kind_measure(
    a: *const QdObservable,
    value: *mut f64,
) -> QdStatus {
    let Some(a) = observable_ref(a) else {
        return QdStatus::NullPointer;
    };
    if value.is_null() {
        return QdStatus::NullPointer;
    }
    match first_kind_measure(a, &DisturbanceOptions::default()) {
        Ok(report) => {
            *value = report.value;
            QdStatus::Ok
        }
        Err(e) => disturbance_status(&e),
    }
}

/// Decides non-disturbance at the default tolerance.
///
/// # Safety
/// Handles must be live and `non_disturbing` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_decide_non_disturbance(
    a: *const QdObservable,
    b: *const QdObservable,
    non_disturbing: *mut i32,
) -> QdStatus {
    let (Some(a), Some(b)) = (observable_ref(a), observable_ref(b)) else {
        return QdStatus::NullPointer;
    };
    if non_disturbing.is_null() {
        return QdStatus::NullPointer;
    }
    match decide_non_disturbance(a, b, &DisturbanceOptions::default()) {
        Ok(flag) => {
            *non_disturbing = i32::from(flag);
            QdStatus::Ok
        }
        Err(e) => disturbance_status(&e),
    }
}

/// Joint-measurability feasibility with its margin.
///
/// # Safety
/// Handles must be live; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn qd_joint_measurability(
    a: *const QdObservable,
    b: *const QdObservable,
    feasible: *mut i32,
    margin: *mut f64,
) -> QdStatus {
    let (Some(a), Some(b)) = (observable_ref(a), observable_ref(b)) else {
        return QdStatus::NullPointer;
    };
    if feasible.is_null() || margin.is_null() {
        return QdStatus::NullPointer;
    }
    match joint_measurability(a, b, &DisturbanceOptions::default()) {
        Ok(report) => {
            *feasible = i32::from(report.feasible);
            *margin = report.margin;
            QdStatus::Ok
        }
        Err(e) => disturbance_status(&e),
    }
}

/// Reduced disturbance optimization for rank-1 observables.
///
/// # Safety
/// Handles must be live and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_rank1_disturbance(
    a: *const QdObservable,
    b: *const QdObservable,
    value: *mut f64,
) -> QdStatus {
    let (Some(a), Some(b)) = (observable_ref(a), observable_ref(b)) else {
        return QdStatus::NullPointer;
    };
    if value.is_null() {
        return QdStatus::NullPointer;
    }
    match rank1_disturbance(a, b, &DisturbanceOptions::default()) {
        Ok(v) => {
            *value = v;
            QdStatus::Ok
        }
        Err(e) => disturbance_status(&e),
    }
}

/// Disturbance value of a computed report.
///
/// # Safety
/// `report` must be a live report handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_report_value(report: *const QdReport, value: *mut f64) -> QdStatus {
    let Some(r) = report.as_ref() else {
        return QdStatus::NullPointer;
    };
    if value.is_null() {
        return QdStatus::NullPointer;
    }
    *value = r.inner.value;
    QdStatus::Ok
}

/// Certified dual lower bound of a report.
///
/// # Safety
/// `report` must be live and `bound` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_report_dual_bound(
    report: *const QdReport,
    bound: *mut f64,
) -> QdStatus {
    let Some(r) = report.as_ref() else {
        return QdStatus::NullPointer;
    };
    if bound.is_null() {
        return QdStatus::NullPointer;
    }
    *bound = r.inner.dual_bound;
    QdStatus::Ok
}

/// Gap between the value and its certified bound.
///
/// # Safety
/// `report` must be live and `gap` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_report_gap(report: *const QdReport, gap: *mut f64) -> QdStatus {
    let Some(r) = report.as_ref() else {
        return QdStatus::NullPointer;
    };
    if gap.is_null() {
        return QdStatus::NullPointer;
    }
    *gap = r.inner.gap;
    QdStatus::Ok
}

/// Whether the report declares the pair non-disturbing.
///
/// # Safety
/// `report` must be live and `non_disturbing` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_report_non_disturbing(
    report: *const QdReport,
    non_disturbing: *mut i32,
) -> QdStatus {
    let Some(r) = report.as_ref() else {
        return QdStatus::NullPointer;
    };
    if non_disturbing.is_null() {
        return QdStatus::NullPointer;
    }
    *non_disturbing = i32::from(r.inner.non_disturbing);
    QdStatus::Ok
}

/// Releases a report handle.
///
/// # Safety
/// `report` must be null or a live report pointer, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qd_report_free(report: *mut QdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn qd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
