//! Discrete observables (POVMs), structural predicates, and the explicit
//! joint-observable constructions for smeared two-outcome pairs.

use crate::matrix::{commutator, eigh, operator_norm, ComplexMatrix, MatrixError};
use crate::tol;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ObservableError {
    #[error("observable needs at least one outcome")]
    NoOutcomes,
    #[error("effect {index} is {rows}x{cols}, expected {dim}x{dim}")]
    EffectShape { index: usize, rows: usize, cols: usize, dim: usize },
    #[error("effect {index} has non-finite entries")]
    NonFiniteEffect { index: usize },
    #[error("outcome label count {labels} does not match effect count {effects}")]
    LabelCount { labels: usize, effects: usize },
    #[error("observables act on different dimensions ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected a two-outcome observable, got {outcomes} outcomes")]
    NotTwoOutcome { outcomes: usize },
    #[error("smearing level {mu} outside the admissible interval ({low}, {high}]")]
    SmearingOutOfRange { mu: f64, low: f64, high: f64 },
    #[error("post-processing matrix is not stochastic: {reason}")]
    NotStochastic { reason: String },
    #[error("post-processing matrix has {cols} columns, expected {expected}")]
    PostProcessingShape { cols: usize, expected: usize },
    #[error("observables do not commute (max commutator norm {max_norm:.3e})")]
    NotCommuting { max_norm: f64 },
    #[error("joint observable construction infeasible: effect ({x},{y}) has min eigenvalue {min_eigenvalue:.3e}")]
    ConstructionInfeasible { x: usize, y: usize, min_eigenvalue: f64 },
    #[error("observable is not rank-1")]
    NotRankOne,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A discrete POVM: Hermitian effects summing to the identity, one per
/// outcome. Outcome labels are opaque strings; all computations use indices.
#[derive(Debug, Clone)]
pub struct Observable {
    dim: usize,
    outcomes: Vec<String>,
    effects: Vec<ComplexMatrix>,
}

impl Observable {
    /// Builds an observable with default outcome labels "1", "2", …
    ///
    /// Only structural properties are enforced here; positivity and
    /// normalization are checked by [`validate`], which reports diagnostics
    /// instead of failing, so ill-formed inputs can still be examined.
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self, ObservableError> {
        let labels = (1..=effects.len()).map(|i| i.to_string()).collect();
        Self::with_outcomes(labels, effects)
    }

    pub fn with_outcomes(
        outcomes: Vec<String>,
        effects: Vec<ComplexMatrix>,
    ) -> Result<Self, ObservableError> {
        if effects.is_empty() {
            return Err(ObservableError::NoOutcomes);
        }
        if outcomes.len() != effects.len() {
            return Err(ObservableError::LabelCount {
                labels: outcomes.len(),
                effects: effects.len(),
            });
        }
        let dim = effects[0].rows();
        for (index, e) in effects.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(ObservableError::EffectShape {
                    index,
                    rows: e.rows(),
                    cols: e.cols(),
                    dim,
                });
            }
            if !e.is_finite() {
                return Err(ObservableError::NonFiniteEffect { index });
            }
        }
        Ok(Self { dim, outcomes, effects })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, x: usize) -> &ComplexMatrix {
        &self.effects[x]
    }

    /// Outcome probability tr(ρ A_x).
    pub fn probability(&self, x: usize, rho: &ComplexMatrix) -> f64 {
        self.effects[x].hs_inner(rho).re
    }
}

/// Per-effect and normalization diagnostics from [`validate`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub effect_min_eigenvalues: Vec<f64>,
    pub effect_max_eigenvalues: Vec<f64>,
    pub effect_hermiticity: Vec<f64>,
    pub normalization_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, (&lo, &hi)) in self
            .effect_min_eigenvalues
            .iter()
            .zip(self.effect_max_eigenvalues.iter())
            .enumerate()
        {
            if self.effect_hermiticity[i] > tol::HERMITICITY {
                out.push(format!(
                    "effect {} is not Hermitian (deviation {:.3e})",
                    i + 1,
                    self.effect_hermiticity[i]
                ));
            }
            if lo < -self.tolerance {
                out.push(format!("effect {} has negative eigenvalue {:.3e}", i + 1, lo));
            }
            if hi > 1.0 + self.tolerance {
                out.push(format!("effect {} has eigenvalue {:.6} above one", i + 1, hi));
            }
        }
        if self.normalization_residual > tol::NORMALIZATION {
            out.push(format!(
                "effects sum to identity only within {:.3e}",
                self.normalization_residual
            ));
        }
        out
    }
}

/// Checks 0 ≤ A_x ≤ 1 for every effect and Σ_x A_x = 1, reporting per-effect
/// extremal eigenvalues and the normalization residual. Never aborts on
/// mathematically invalid input.
pub fn validate(obs: &Observable, tolerance: f64) -> ValidationReport {
    let mut min_eigs = Vec::with_capacity(obs.outcome_count());
    let mut max_eigs = Vec::with_capacity(obs.outcome_count());
    let mut herm = Vec::with_capacity(obs.outcome_count());
    let mut sum = ComplexMatrix::zeros(obs.dim(), obs.dim());
    for e in obs.effects() {
        herm.push(e.hermiticity_deviation());
        match eigh(&e.hermitian_part()) {
            Ok(decomp) => {
                min_eigs.push(*decomp.values.first().unwrap_or(&f64::NAN));
                max_eigs.push(*decomp.values.last().unwrap_or(&f64::NAN));
            }
            Err(_) => {
                min_eigs.push(f64::NAN);
                max_eigs.push(f64::NAN);
            }
        }
        sum = &sum + e;
    }
    let normalization_residual = (&sum - &ComplexMatrix::identity(obs.dim())).max_abs();
    let passed = herm.iter().all(|&h| h <= tol::HERMITICITY)
        && min_eigs.iter().all(|&v| v.is_finite() && v >= -tolerance)
        && max_eigs.iter().all(|&v| v.is_finite() && v <= 1.0 + tolerance)
        && normalization_residual <= tol::NORMALIZATION;
    ValidationReport {
        effect_min_eigenvalues: min_eigs,
        effect_max_eigenvalues: max_eigs,
        effect_hermiticity: herm,
        normalization_residual,
        tolerance,
        passed,
    }
}

/// Pairwise commutativity of two observables: true iff every [A_x, B_y]
/// vanishes. Also returns the largest commutator norm encountered.
pub fn commutes(a: &Observable, b: &Observable) -> Result<(bool, f64), ObservableError> {
    if a.dim() != b.dim() {
        return Err(ObservableError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let mut max_norm = 0.0f64;
    for ax in a.effects() {
        for by in b.effects() {
            max_norm = max_norm.max(operator_norm(&commutator(ax, by)?));
        }
    }
    Ok((max_norm <= tol::COMMUTATION, max_norm))
}

/// Dimension of the linear span of the effects, i.e. the number of
/// independent measurement outcomes. Rank of the Hilbert-Schmidt Gram matrix
/// with a relative eigenvalue cutoff.
pub fn span_dim(obs: &Observable) -> usize {
    let n = obs.outcome_count();
    let gram = ComplexMatrix::from_fn(n, n, |i, j| obs.effect(i).hs_inner(obs.effect(j)));
    let decomp = match eigh(&gram.hermitian_part()) {
        Ok(d) => d,
        Err(_) => return 0,
    };
    let top = decomp.values.last().copied().unwrap_or(0.0).max(0.0);
    if top <= 0.0 {
        return 0;
    }
    decomp.values.iter().filter(|&&v| v > tol::RANK_CUTOFF * top).count()
}

/// True iff the effects span all of operator space (span dimension d²).
pub fn is_informationally_complete(obs: &Observable) -> bool {
    span_dim(obs) == obs.dim() * obs.dim()
}

/// True iff every effect is a projection (E² = E within tolerance).
pub fn is_sharp(obs: &Observable) -> bool {
    obs.effects()
        .iter()
        .all(|e| (&(e * e) - e).max_abs() <= tol::COMMUTATION)
}

/// True iff every effect has matrix rank one.
pub fn is_rank_one(obs: &Observable) -> bool {
    obs.effects().iter().all(|e| match eigh(&e.hermitian_part()) {
        Ok(decomp) => {
            let n = decomp.values.len();
            n >= 1
                && decomp.values[n - 1] > tol::EIGENVALUE
                && (n < 2 || decomp.values[n - 2].abs() <= tol::EIGENVALUE)
        }
        Err(_) => false,
    })
}

/// True iff every effect has an eigenvalue 1.
pub fn has_unit_eigenvalues(obs: &Observable) -> bool {
    obs.effects().iter().all(|e| match eigh(&e.hermitian_part()) {
        Ok(decomp) => decomp.values.last().is_some_and(|&v| v >= 1.0 - tol::COMMUTATION),
        Err(_) => false,
    })
}

/// True iff all effects of a single observable commute with each other.
pub fn is_commutative(obs: &Observable) -> bool {
    let n = obs.outcome_count();
    for i in 0..n {
        for j in i + 1..n {
            let c = match commutator(obs.effect(i), obs.effect(j)) {
                Ok(c) => c,
                Err(_) => return false,
            };
            if operator_norm(&c) > tol::COMMUTATION {
                return false;
            }
        }
    }
    true
}

/// Symmetric coarse-graining of a two-outcome observable:
/// A^μ_1 = μ A_1 + (1−μ) A_2, A^μ_2 = (1−μ) A_1 + μ A_2, for μ ∈ (½, 1].
pub fn coarse_grain_pair(obs: &Observable, mu: f64) -> Result<Observable, ObservableError> {
    if obs.outcome_count() != 2 {
        return Err(ObservableError::NotTwoOutcome { outcomes: obs.outcome_count() });
    }
    if !(mu > 0.5 && mu <= 1.0) {
        return Err(ObservableError::SmearingOutOfRange { mu, low: 0.5, high: 1.0 });
    }
    let a1 = obs.effect(0);
    let a2 = obs.effect(1);
    let e1 = &a1.scale_re(mu) + &a2.scale_re(1.0 - mu);
    let e2 = &a1.scale_re(1.0 - mu) + &a2.scale_re(mu);
    Observable::with_outcomes(obs.outcomes().to_vec(), vec![e1, e2])
}

/// Classical post-processing B_y = Σ_{y'} M_{y y'} P_{y'} with a column
/// stochastic matrix M (entries ≥ 0, columns summing to one).
pub fn smear(obs: &Observable, m: &[Vec<f64>]) -> Result<Observable, ObservableError> {
    let n_out = m.len();
    if n_out == 0 {
        return Err(ObservableError::NoOutcomes);
    }
    for row in m {
        if row.len() != obs.outcome_count() {
            return Err(ObservableError::PostProcessingShape {
                cols: row.len(),
                expected: obs.outcome_count(),
            });
        }
    }
    for (y, row) in m.iter().enumerate() {
        for (yp, &v) in row.iter().enumerate() {
            if v < -1e-12 || !v.is_finite() {
                return Err(ObservableError::NotStochastic {
                    reason: format!("entry ({y},{yp}) = {v} is negative"),
                });
            }
        }
    }
    for yp in 0..obs.outcome_count() {
        let col_sum: f64 = m.iter().map(|row| row[yp]).sum();
        if (col_sum - 1.0).abs() > 1e-9 {
            return Err(ObservableError::NotStochastic {
                reason: format!("column {yp} sums to {col_sum}, expected 1"),
            });
        }
    }
    let effects: Vec<ComplexMatrix> = m
        .iter()
        .map(|row| {
            let mut acc = ComplexMatrix::zeros(obs.dim(), obs.dim());
            for (yp, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    acc = &acc + &obs.effect(yp).scale_re(w);
                }
            }
            acc
        })
        .collect();
    Observable::new(effects)
}

/// A joint observable on the product outcome set, with marginals targeting a
/// pair of observables.
#[derive(Debug, Clone)]
pub struct JointObservable {
    dim: usize,
    row_outcomes: Vec<String>,
    col_outcomes: Vec<String>,
    effects: Vec<ComplexMatrix>, // row-major over (x, y)
}

impl JointObservable {
    pub fn new(
        row_outcomes: Vec<String>,
        col_outcomes: Vec<String>,
        effects: Vec<ComplexMatrix>,
    ) -> Result<Self, ObservableError> {
        if row_outcomes.is_empty() || col_outcomes.is_empty() {
            return Err(ObservableError::NoOutcomes);
        }
        if effects.len() != row_outcomes.len() * col_outcomes.len() {
            return Err(ObservableError::LabelCount {
                labels: row_outcomes.len() * col_outcomes.len(),
                effects: effects.len(),
            });
        }
        let dim = effects[0].rows();
        for (index, e) in effects.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(ObservableError::EffectShape {
                    index,
                    rows: e.rows(),
                    cols: e.cols(),
                    dim,
                });
            }
        }
        Ok(Self { dim, row_outcomes, col_outcomes, effects })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row_count(&self) -> usize {
        self.row_outcomes.len()
    }

    pub fn col_count(&self) -> usize {
        self.col_outcomes.len()
    }

    pub fn effect(&self, x: usize, y: usize) -> &ComplexMatrix {
        &self.effects[x * self.col_outcomes.len() + y]
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    /// Σ_y G_{x,y}, the observable recovered from the row index.
    pub fn row_marginal(&self) -> Observable {
        let effects = (0..self.row_count())
            .map(|x| {
                let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
                for y in 0..self.col_count() {
                    acc = &acc + self.effect(x, y);
                }
                acc
            })
            .collect();
        Observable::with_outcomes(self.row_outcomes.clone(), effects)
            .expect("marginal inherits valid shape")
    }

    /// Σ_x G_{x,y}, the observable recovered from the column index.
    pub fn col_marginal(&self) -> Observable {
        let effects = (0..self.col_count())
            .map(|y| {
                let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
                for x in 0..self.row_count() {
                    acc = &acc + self.effect(x, y);
                }
                acc
            })
            .collect();
        Observable::with_outcomes(self.col_outcomes.clone(), effects)
            .expect("marginal inherits valid shape")
    }

    /// Largest deviation of the marginals from the target pair.
    pub fn marginal_residual(&self, a: &Observable, b: &Observable) -> f64 {
        let mut res = 0.0f64;
        let row = self.row_marginal();
        let col = self.col_marginal();
        for (ma, ta) in row.effects().iter().zip(a.effects()) {
            res = res.max((ma - ta).max_abs());
        }
        for (mb, tb) in col.effects().iter().zip(b.effects()) {
            res = res.max((mb - tb).max_abs());
        }
        res
    }
}

/// Joint observable G_{x,y} = A_x B_y of a commuting pair.
pub fn product_joint(a: &Observable, b: &Observable) -> Result<JointObservable, ObservableError> {
    let (commuting, max_norm) = commutes(a, b)?;
    if !commuting {
        return Err(ObservableError::NotCommuting { max_norm });
    }
    let mut effects = Vec::with_capacity(a.outcome_count() * b.outcome_count());
    for ax in a.effects() {
        for by in b.effects() {
            // A_x B_y is Hermitian and positive for a commuting pair; the
            // Hermitian part absorbs rounding.
            effects.push((ax * by).hermitian_part());
        }
    }
    JointObservable::new(a.outcomes().to_vec(), b.outcomes().to_vec(), effects)
}

/// The explicit joint observable of the symmetric coarse-grainings A^μ, B^μ
/// of a two-outcome pair:
///
///   G_{1,1} = (1−μ)·1,   G_{1,2} = (2μ−1)·A_1,
///   G_{2,1} = (2μ−1)·B_1, G_{2,2} = μ·1 − (2μ−1)(A_1 + B_1).
///
/// All four operators are verified positive; the last one can fail for
/// μ > 2/3, which is reported as construction infeasibility.
pub fn two_outcome_joint(
    a: &Observable,
    b: &Observable,
    mu: f64,
) -> Result<JointObservable, ObservableError> {
    if a.dim() != b.dim() {
        return Err(ObservableError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    if a.outcome_count() != 2 {
        return Err(ObservableError::NotTwoOutcome { outcomes: a.outcome_count() });
    }
    if b.outcome_count() != 2 {
        return Err(ObservableError::NotTwoOutcome { outcomes: b.outcome_count() });
    }
    if !(mu > 0.5 && mu <= 1.0) {
        return Err(ObservableError::SmearingOutOfRange { mu, low: 0.5, high: 1.0 });
    }
    let d = a.dim();
    let id = ComplexMatrix::identity(d);
    let a1 = a.effect(0);
    let b1 = b.effect(0);
    let g11 = id.scale_re(1.0 - mu);
    let g12 = a1.scale_re(2.0 * mu - 1.0);
    let g21 = b1.scale_re(2.0 * mu - 1.0);
    let g22 = &id.scale_re(mu) - &(a1 + b1).scale_re(2.0 * mu - 1.0);
    let grid = [[g11, g12], [g21, g22]];
    for (x, row) in grid.iter().enumerate() {
        for (y, g) in row.iter().enumerate() {
            let min = crate::matrix::min_eigenvalue(&g.hermitian_part())?;
            if min < -tol::EIGENVALUE {
                return Err(ObservableError::ConstructionInfeasible { x, y, min_eigenvalue: min });
            }
        }
    }
    let [[g11, g12], [g21, g22]] = grid;
    JointObservable::new(
        a.outcomes().to_vec(),
        b.outcomes().to_vec(),
        vec![g11, g12, g21, g22],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn trivial_pair(d: usize) -> Observable {
        let half = ComplexMatrix::identity(d).scale_re(0.5);
        Observable::new(vec![half.clone(), half]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&trivial_pair(2), tol::EIGENVALUE).passed);
        assert!(validate(&fixtures::three_level_target(), tol::EIGENVALUE).passed);

        let bad = Observable::new(vec![
            ComplexMatrix::diag_real(&[1.2, 0.0]),
            ComplexMatrix::diag_real(&[-0.2, 1.0]),
        ])
        .unwrap();
        let report = validate(&bad, tol::EIGENVALUE);
        assert!(!report.passed);
        assert!(report.failures().iter().any(|f| f.contains("negative eigenvalue")));
    }

    #[test]
    fn commutes_examples() {
        let a = Observable::new(vec![
            ComplexMatrix::diag_real(&[1.0, 0.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 1.0, 1.0]),
        ])
        .unwrap();
        let b = Observable::new(vec![
            ComplexMatrix::diag_real(&[0.5, 0.5, 0.0]),
            ComplexMatrix::diag_real(&[0.5, 0.5, 1.0]),
        ])
        .unwrap();
        let (ok, norm) = commutes(&a, &b).unwrap();
        assert!(ok);
        assert_eq!(norm, 0.0);

        let (ok, norm) =
            commutes(&fixtures::three_level_source(), &fixtures::three_level_target()).unwrap();
        assert!(!ok);
        // Commutator entries are ±√2/8 at positions (1,3)/(3,1).
        assert!((norm - 2.0f64.sqrt() / 8.0).abs() < 1e-12);
    }

    #[test]
    fn commutator_scaling_under_coarse_graining() {
        let (a, b) = fixtures::qubit_sharp_pair(std::f64::consts::FRAC_PI_2);
        let (_, base) = commutes(&a, &b).unwrap();
        for (mu, nu) in [(0.6, 0.8), (0.55, 0.95), (1.0, 0.51)] {
            let am = coarse_grain_pair(&a, mu).unwrap();
            let bn = coarse_grain_pair(&b, nu).unwrap();
            let c = commutator(am.effect(0), bn.effect(0)).unwrap();
            let expect = (2.0 * mu - 1.0) * (2.0 * nu - 1.0) * base;
            assert!((operator_norm(&c) - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn span_dim_examples() {
        assert_eq!(span_dim(&fixtures::five_outcome_extension()), 5);
        assert_eq!(span_dim(&trivial_pair(2)), 1);
        let sharp3 = Observable::new(vec![
            ComplexMatrix::diag_real(&[1.0, 0.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 1.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 0.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(span_dim(&sharp3), 3);
    }

    #[test]
    fn structural_predicates() {
        // The diagonal two-outcome target: both effects have eigenvalue 1,
        // but the second eigenvalue 1/2 spoils sharpness and rank one.
        let b = fixtures::three_level_target();
        assert!(!is_sharp(&b));
        assert!(!is_rank_one(&b));
        assert!(has_unit_eigenvalues(&b));

        let sharp = Observable::new(vec![
            ComplexMatrix::diag_real(&[1.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 1.0]),
        ])
        .unwrap();
        assert!(is_sharp(&sharp));
        assert!(is_rank_one(&sharp));
        assert!(has_unit_eigenvalues(&sharp));

        let trivial = trivial_pair(2);
        assert!(!is_sharp(&trivial));
        assert!(!is_rank_one(&trivial));
        assert!(!has_unit_eigenvalues(&trivial));
    }

    #[test]
    fn coarse_graining_identity_checks() {
        let (a, _) = fixtures::qubit_sharp_pair(std::f64::consts::FRAC_PI_2);
        let same = coarse_grain_pair(&a, 1.0).unwrap();
        for (e, f) in same.effects().iter().zip(a.effects()) {
            assert!((e - f).max_abs() < 1e-15);
        }

        let mu = 2.0 / 3.0;
        let am = coarse_grain_pair(&a, mu).unwrap();
        let direct = &a.effect(0).scale_re(mu) + &a.effect(1).scale_re(1.0 - mu);
        assert!((am.effect(0) - &direct).max_abs() < 1e-15);

        // A^μ_1 = (2μ−1) A_1 + (1−μ) 1.
        let alt = &a.effect(0).scale_re(2.0 * mu - 1.0)
            + &ComplexMatrix::identity(2).scale_re(1.0 - mu);
        assert!((am.effect(0) - &alt).max_abs() < 1e-12);

        assert!(coarse_grain_pair(&a, 0.5).is_err());
        assert!(coarse_grain_pair(&fixtures::five_outcome_extension(), 0.6).is_err());

        // Validity across the admissible range.
        for mu in [0.51, 0.6, 0.75, 0.9, 1.0] {
            let g = coarse_grain_pair(&a, mu).unwrap();
            assert!(validate(&g, tol::EIGENVALUE).passed);
        }
    }

    #[test]
    fn smear_examples() {
        let (a, _) = fixtures::qubit_sharp_pair(std::f64::consts::FRAC_PI_2);
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let same = smear(&a, &id).unwrap();
        for (e, f) in same.effects().iter().zip(a.effects()) {
            assert!((e - f).max_abs() < 1e-15);
        }

        let mu = 0.7;
        let m = vec![vec![mu, 1.0 - mu], vec![1.0 - mu, mu]];
        let smeared = smear(&a, &m).unwrap();
        let coarse = coarse_grain_pair(&a, mu).unwrap();
        for (e, f) in smeared.effects().iter().zip(coarse.effects()) {
            assert!((e - f).max_abs() < 1e-15);
        }

        // Invertible smearing of a sharp observable preserves the span.
        assert_eq!(span_dim(&smeared), span_dim(&a));

        let bad = vec![vec![0.5, 0.7], vec![0.5, 0.5]];
        assert!(matches!(smear(&a, &bad), Err(ObservableError::NotStochastic { .. })));
    }

    #[test]
    fn product_joint_examples() {
        let a = Observable::new(vec![
            ComplexMatrix::diag_real(&[1.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 1.0]),
        ])
        .unwrap();
        let g = product_joint(&a, &a).unwrap();
        // G_{x,y} = δ_{xy} P_x for a repeated sharp measurement.
        assert!(g.effect(0, 1).max_abs() < 1e-15);
        assert!(g.effect(1, 0).max_abs() < 1e-15);
        assert!(g.marginal_residual(&a, &a) < 1e-14);

        let trivial = trivial_pair(2);
        let g = product_joint(&trivial, &trivial).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let quarter = ComplexMatrix::identity(2).scale_re(0.25);
                assert!((g.effect(x, y) - &quarter).max_abs() < 1e-15);
            }
        }

        let (az, ax) = fixtures::qubit_sharp_pair(std::f64::consts::FRAC_PI_2);
        assert!(matches!(
            product_joint(&az, &ax),
            Err(ObservableError::NotCommuting { .. })
        ));
    }

    #[test]
    fn two_outcome_joint_examples() {
        let (a, b) = fixtures::qubit_sharp_pair(std::f64::consts::FRAC_PI_2);
        let mu = 0.6;
        let g = two_outcome_joint(&a, &b, mu).unwrap();
        let am = coarse_grain_pair(&a, mu).unwrap();
        let bm = coarse_grain_pair(&b, mu).unwrap();
        // Marginals are exact closed-form algebra.
        assert!(g.marginal_residual(&am, &bm) < 1e-12);

        // μ → ½⁺: off-diagonal entries vanish and the marginals trivialize.
        let g = two_outcome_joint(&a, &b, 0.5 + 1e-9).unwrap();
        assert!(g.effect(0, 1).max_abs() < 1e-8);
        assert!(g.effect(1, 0).max_abs() < 1e-8);

        // μ = 2/3 with A = B sharp: the last operator sits exactly on the
        // positive boundary and the construction still succeeds.
        let g = two_outcome_joint(&a, &a, 2.0 / 3.0).unwrap();
        let min = crate::matrix::min_eigenvalue(&g.effect(1, 1).hermitian_part()).unwrap();
        assert!(min.abs() < 1e-12);

        // Far beyond 2/3 the fourth operator loses positivity.
        assert!(matches!(
            two_outcome_joint(&a, &b, 0.95),
            Err(ObservableError::ConstructionInfeasible { x: 1, y: 1, .. })
        ));
    }

    #[test]
    fn informational_completeness() {
        assert!(is_informationally_complete(&fixtures::tetrahedral_qubit_povm()));
        let sharp = Observable::new(vec![
            ComplexMatrix::diag_real(&[1.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 1.0]),
        ])
        .unwrap();
        assert!(!is_informationally_complete(&sharp));
        assert!(!is_informationally_complete(&trivial_pair(2)));
    }
}
