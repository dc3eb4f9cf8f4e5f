#ifndef QDISTURB_H
#define QDISTURB_H

/* Generated by cbindgen from the qdisturb-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes for every FFI entry point.
typedef enum QdStatus {
  QdStatus_Ok = 0,
  QdStatus_NullPointer = 1,
  QdStatus_InvalidArgument = 2,
  QdStatus_DimensionMismatch = 3,
  QdStatus_InvalidObservable = 4,
  QdStatus_SolverFailure = 5,
  QdStatus_InternalError = 6,
} QdStatus;

// Opaque observable handle.
typedef struct QdObservable QdObservable;

// Opaque disturbance report handle.
typedef struct QdReport QdReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds an observable from `outcomes` effects of size `dim` x `dim`.
//
// `data` holds the effects consecutively, each row-major with interleaved
// `re, im` entries; `len` must equal `outcomes * dim * dim * 2`.
//
// # Safety
// `data` must point to `len` readable doubles and `out` to a writable
// pointer slot. A handle returned here must be released with
// [`qd_observable_free`].
enum QdStatus qd_observable_create(uintptr_t dim,
                                   uintptr_t outcomes,
                                   const double *data,
                                   uintptr_t len,
                                   struct QdObservable **out);

// Releases an observable handle.
//
// # Safety
// `handle` must be null or a pointer previously returned by
// [`qd_observable_create`], not yet freed.
void qd_observable_free(struct QdObservable *handle);

// Checks the POVM conditions (positivity and normalization) at `tol`.
//
// # Safety
// `handle` must be a live observable handle; `valid` must be writable.
enum QdStatus qd_observable_validate(const struct QdObservable *handle, double tol, int32_t *valid);

// Pairwise commutativity and the largest commutator norm.
//
// # Safety
// Both handles must be live; out-pointers must be writable.
enum QdStatus qd_commutes(const struct QdObservable *a,
                          const struct QdObservable *b,
                          int32_t *commutes,
                          double *max_norm);

// Dimension of the operator subspace spanned by the effects.
//
// # Safety
// `handle` must be live and `out` writable.
enum QdStatus qd_span_dim(const struct QdObservable *handle, uintptr_t *out);

// Computes the least disturbance D_A(B) and returns a report handle.
//
// Passing `decision_tol <= 0` keeps the default decision tolerance.
//
// # Safety
// Both observable handles must be live; `out` must be writable. The report
// must be released with [`qd_report_free`].
enum QdStatus qd_disturbance_measure(const struct QdObservable *a,
                                     const struct QdObservable *b,
                                     double decision_tol,
                                     struct QdReport **out);

// D_A(A): zero exactly when the observable admits a first-kind measurement.
//
// # Safety
// `a` must be live and `value` writable.
enum QdStatus qd_first_kind_measure(const struct QdObservable *a, double *value);

// Decides non-disturbance at the default tolerance.
//
// # Safety
// Handles must be live and `non_disturbing` writable.
enum QdStatus qd_decide_non_disturbance(const struct QdObservable *a,
                                        const struct QdObservable *b,
                                        int32_t *non_disturbing);

// Joint-measurability feasibility with its margin.
//
// # Safety
// Handles must be live; out-pointers writable.
enum QdStatus qd_joint_measurability(const struct QdObservable *a,
                                     const struct QdObservable *b,
                                     int32_t *feasible,
                                     double *margin);

// Reduced disturbance optimization for rank-1 observables.
//
// # Safety
// Handles must be live and `value` writable.
enum QdStatus qd_rank1_disturbance(const struct QdObservable *a,
                                   const struct QdObservable *b,
                                   double *value);

// Disturbance value of a computed report.
//
// # Safety
// `report` must be a live report handle and `value` writable.
enum QdStatus qd_report_value(const struct QdReport *report, double *value);

// Certified dual lower bound of a report.
//
// # Safety
// `report` must be live and `bound` writable.
enum QdStatus qd_report_dual_bound(const struct QdReport *report, double *bound);

// Gap between the value and its certified bound.
//
// # Safety
// `report` must be live and `gap` writable.
enum QdStatus qd_report_gap(const struct QdReport *report, double *gap);

// Whether the report declares the pair non-disturbing.
//
// # Safety
// `report` must be live and `non_disturbing` writable.
enum QdStatus qd_report_non_disturbing(const struct QdReport *report, int32_t *non_disturbing);

// Releases a report handle.
//
// # Safety
// `report` must be null or a live report pointer, not yet freed.
void qd_report_free(struct QdReport *report);

// Library version as a static C string.
const char *qd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDISTURB_H */
