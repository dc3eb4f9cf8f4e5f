//! Numerical tolerances used across the crate.
//!
//! All fixture data consists of exact rationals times √2 or √10, so the
//! defaults sit well above f64 rounding noise while staying far below any
//! structural quantity of interest.

/// Maximum entrywise deviation |M − M†| accepted before an input is
/// rejected as non-Hermitian.
pub const HERMITICITY: f64 = 1e-10;

/// Absolute eigenvalue tolerance for positive-semidefiniteness checks.
pub const EIGENVALUE: f64 = 1e-10;

/// Residual allowed on Σ_x A_x = 1 and on Kraus completeness sums.
pub const NORMALIZATION: f64 = 1e-9;

/// Commutator norm below which a pair of effects counts as commuting.
pub const COMMUTATION: f64 = 1e-9;

/// Relative singular-value cutoff for rank decisions (span dimension).
pub const RANK_CUTOFF: f64 = 1e-9;

/// Eigenvalue window |λ − 1| for membership in a channel fixed space.
pub const FIXED_POINT_WINDOW: f64 = 1e-8;

/// Residual ‖Φ*(F) − F‖ allowed for a computed fixed-space basis element.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-7;

/// Minimum eigenvalue for a fixed state to count as full rank.
pub const FULL_RANK_EIGENVALUE: f64 = 1e-7;

/// Default duality-gap tolerance of the interior-point solver.
pub const SDP_GAP: f64 = 1e-8;

/// Default feasibility tolerance of the interior-point solver.
pub const SDP_FEASIBILITY: f64 = 1e-8;

/// Default iteration cap of the interior-point solver.
pub const SDP_MAX_ITER: usize = 200;

/// Threshold on the disturbance value below which a pair is declared
/// non-disturbing. Deliberately looser than the solver gap tolerance so the
/// logical predicate is insensitive to solver jitter.
pub const DECISION: f64 = 1e-6;
