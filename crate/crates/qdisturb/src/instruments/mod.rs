//! Measurement instruments in Kraus form, the channel they induce, and the
//! non-disturbance / first-kind / repeatability predicates.
//!
//! Kraus operators are stored in the Schrödinger convention throughout:
//! I_x(ρ) = Σ_α K_{α,x} ρ K_{α,x}†. Sources that specify the Heisenberg
//! action I_x*(·) = Σ_α K_α · K_α† must store the adjoints instead; the file
//! loader does this automatically for inputs tagged "heisenberg".

mod channel;

pub use channel::{
    fixed_point_space, full_rank_fixed_state, schrodinger_fixed_point_space, Channel,
    FixedPointSpace,
};

use crate::matrix::{operator_norm, sqrt_psd, ComplexMatrix, MatrixError};
use crate::observables::{JointObservable, Observable, ObservableError};
use crate::tol;

#[derive(Debug, Clone, thiserror::Error)]
pub enum InstrumentError {
    #[error("instrument needs at least one outcome")]
    NoOutcomes,
    #[error("Kraus operator {alpha} of outcome {outcome} is {rows}x{cols}, expected {dim}x{dim}")]
    KrausShape { outcome: usize, alpha: usize, rows: usize, cols: usize, dim: usize },
    #[error("Kraus completeness residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotTracePreserving { residual: f64, tolerance: f64 },
    #[error("outcome label count {labels} does not match Kraus group count {groups}")]
    LabelCount { labels: usize, groups: usize },
    #[error("dimension mismatch: instrument acts on {instrument}, operand on {operand}")]
    DimensionMismatch { instrument: usize, operand: usize },
    #[error("state {index} is not a density matrix: {reason}")]
    InvalidState { index: usize, reason: String },
    #[error("state count {states} does not match outcome count {outcomes}")]
    StateCount { states: usize, outcomes: usize },
    #[error("{outcomes} column outcomes do not fit an orthonormal encoding in dimension {dim}")]
    EncodingTooLarge { outcomes: usize, dim: usize },
    #[error("encoding basis is not orthonormal (deviation {deviation:.3e})")]
    BasisNotOrthonormal { deviation: f64 },
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// An instrument: one completely positive map per outcome, given by Kraus
/// operators in the Schrödinger picture, with trace-preserving total channel.
#[derive(Debug, Clone)]
pub struct Instrument {
    dim: usize,
    outcomes: Vec<String>,
    kraus: Vec<Vec<ComplexMatrix>>,
}

impl Instrument {
    pub fn new(kraus: Vec<Vec<ComplexMatrix>>) -> Result<Self, InstrumentError> {
        let labels = (1..=kraus.len()).map(|i| i.to_string()).collect();
        Self::with_outcomes(labels, kraus)
    }

    pub fn with_outcomes(
        outcomes: Vec<String>,
        kraus: Vec<Vec<ComplexMatrix>>,
    ) -> Result<Self, InstrumentError> {
        if kraus.is_empty() {
            return Err(InstrumentError::NoOutcomes);
        }
        if outcomes.len() != kraus.len() {
            return Err(InstrumentError::LabelCount { labels: outcomes.len(), groups: kraus.len() });
        }
        let dim = kraus
            .iter()
            .flat_map(|group| group.first())
            .map(ComplexMatrix::rows)
            .next()
            .ok_or(InstrumentError::NoOutcomes)?;
        for (outcome, group) in kraus.iter().enumerate() {
            for (alpha, k) in group.iter().enumerate() {
                if !k.is_square() || k.rows() != dim {
                    return Err(InstrumentError::KrausShape {
                        outcome,
                        alpha,
                        rows: k.rows(),
                        cols: k.cols(),
                        dim,
                    });
                }
            }
        }
        let instrument = Self { dim, outcomes, kraus };
        let residual = instrument.completeness_residual();
        if residual > tol::NORMALIZATION {
            return Err(InstrumentError::NotTracePreserving {
                residual,
                tolerance: tol::NORMALIZATION,
            });
        }
        Ok(instrument)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_count(&self) -> usize {
        self.kraus.len()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn kraus(&self, outcome: usize) -> &[ComplexMatrix] {
        &self.kraus[outcome]
    }

    /// ‖Σ_{x,α} K† K − 1‖_max.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for group in &self.kraus {
            for k in group {
                sum = &sum + &(&k.adjoint() * k);
            }
        }
        (&sum - &ComplexMatrix::identity(self.dim)).max_abs()
    }

    /// Unnormalized post-measurement state I_x(ρ) = Σ_α K ρ K†.
    pub fn apply(&self, outcome: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus[outcome] {
            out = &out + &(&(k * rho) * &k.adjoint());
        }
        out
    }

    /// Heisenberg action of one outcome map, I_x*(X) = Σ_α K† X K.
    pub fn dual_apply_outcome(&self, outcome: usize, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus[outcome] {
            out = &out + &(&(&k.adjoint() * x) * k);
        }
        out
    }

    /// Heisenberg action of the unconditioned channel, Ic*(X).
    pub fn dual_apply_total(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for outcome in 0..self.outcome_count() {
            out = &out + &self.dual_apply_outcome(outcome, x);
        }
        out
    }

    /// Outcome probability tr(I_x(ρ)) = tr(ρ A_x).
    pub fn probability(&self, outcome: usize, rho: &ComplexMatrix) -> f64 {
        self.apply(outcome, rho).trace().re
    }
}

/// The observable measured by an instrument: A_x = Σ_α K_{α,x}† K_{α,x}.
pub fn induced_observable(instrument: &Instrument) -> Observable {
    let effects = (0..instrument.outcome_count())
        .map(|x| {
            instrument
                .dual_apply_outcome(x, &ComplexMatrix::identity(instrument.dim()))
                .hermitian_part()
        })
        .collect();
    Observable::with_outcomes(instrument.outcomes().to_vec(), effects)
        .expect("induced effects inherit the instrument shape")
}

/// The Lüders instrument of an observable: one Kraus operator √A_x per
/// outcome.
pub fn luders(obs: &Observable) -> Result<Instrument, InstrumentError> {
    let kraus = obs
        .effects()
        .iter()
        .map(|e| Ok(vec![sqrt_psd(e, tol::EIGENVALUE)?]))
        .collect::<Result<Vec<_>, MatrixError>>()?;
    Instrument::with_outcomes(obs.outcomes().to_vec(), kraus)
}

fn check_state(index: usize, xi: &ComplexMatrix, dim: usize) -> Result<(), InstrumentError> {
    if !xi.is_square() || xi.rows() != dim {
        return Err(InstrumentError::InvalidState {
            index,
            reason: format!("shape {}x{}, expected {}x{}", xi.rows(), xi.cols(), dim, dim),
        });
    }
    if (xi.trace().re - 1.0).abs() > tol::NORMALIZATION || xi.trace().im.abs() > tol::NORMALIZATION
    {
        return Err(InstrumentError::InvalidState {
            index,
            reason: format!("trace {} instead of 1", xi.trace().re),
        });
    }
    match crate::matrix::min_eigenvalue(&xi.hermitian_part()) {
        Ok(min) if min >= -tol::EIGENVALUE => Ok(()),
        Ok(min) => Err(InstrumentError::InvalidState {
            index,
            reason: format!("min eigenvalue {min:.3e}"),
        }),
        Err(e) => Err(InstrumentError::InvalidState { index, reason: e.to_string() }),
    }
}

/// The measure-and-prepare instrument I_x(ρ) = tr(ρ A_x) ξ_x.
///
/// Kraus family per outcome: √(λ_i μ_j) |v_i⟩⟨w_j| over the nonzero
/// eigenpairs (λ_i, v_i) of ξ_x and (μ_j, w_j) of A_x.
pub fn trash_and_prepare(
    obs: &Observable,
    states: &[ComplexMatrix],
) -> Result<Instrument, InstrumentError> {
    if states.len() != obs.outcome_count() {
        return Err(InstrumentError::StateCount {
            states: states.len(),
            outcomes: obs.outcome_count(),
        });
    }
    let mut kraus = Vec::with_capacity(obs.outcome_count());
    for (x, (effect, xi)) in obs.effects().iter().zip(states.iter()).enumerate() {
        check_state(x, xi, obs.dim())?;
        let effect_eig = crate::matrix::eigh(&effect.hermitian_part())?;
        let state_eig = crate::matrix::eigh(&xi.hermitian_part())?;
        let mut group = Vec::new();
        for (j, &mu_j) in effect_eig.values.iter().enumerate() {
            if mu_j <= tol::EIGENVALUE {
                continue;
            }
            let w = effect_eig.vectors.column(j);
            for (i, &lambda_i) in state_eig.values.iter().enumerate() {
                if lambda_i <= tol::EIGENVALUE {
                    continue;
                }
                let v = state_eig.vectors.column(i);
                let weight = (lambda_i.max(0.0) * mu_j).sqrt();
                group.push(ComplexMatrix::outer(&v, &w).scale_re(weight));
            }
        }
        kraus.push(group);
    }
    Instrument::with_outcomes(obs.outcomes().to_vec(), kraus)
}

/// Sequential implementation that writes the column outcome of a joint
/// observable into an orthonormal register: I_x(ρ) = Σ_y tr(ρ G_{x,y}) |y⟩⟨y|.
///
/// The column outcomes must fit into the space (|Ω_B| ≤ d); `basis` columns
/// supply the register states.
pub fn encode_outcomes(
    joint: &JointObservable,
    basis: &ComplexMatrix,
) -> Result<Instrument, InstrumentError> {
    let d = joint.dim();
    let m = joint.col_count();
    if m > d {
        return Err(InstrumentError::EncodingTooLarge { outcomes: m, dim: d });
    }
    if basis.rows() != d || basis.cols() < m {
        return Err(InstrumentError::BasisNotOrthonormal { deviation: f64::INFINITY });
    }
    let gram = &basis.adjoint() * basis;
    let deviation = (&gram - &ComplexMatrix::identity(basis.cols())).max_abs();
    if deviation > 1e-10 {
        return Err(InstrumentError::BasisNotOrthonormal { deviation });
    }
    let mut kraus = Vec::with_capacity(joint.row_count());
    for x in 0..joint.row_count() {
        let mut group = Vec::new();
        for y in 0..m {
            let target = basis.column(y);
            let g = joint.effect(x, y).hermitian_part();
            let eig = crate::matrix::eigh(&g)?;
            for (j, &w) in eig.values.iter().enumerate() {
                if w <= tol::EIGENVALUE {
                    continue;
                }
                let src = eig.vectors.column(j);
                group.push(ComplexMatrix::outer(&target, &src).scale_re(w.sqrt()));
            }
        }
        kraus.push(group);
    }
    Instrument::new(kraus)
}

/// The unconditioned channel Ic(ρ) = Σ_x I_x(ρ) in Choi and transfer form.
pub fn total_channel(instrument: &Instrument) -> Channel {
    Channel::from_instrument(instrument)
}

/// max_y ‖B_y − Ic*(B_y)‖: how strongly this particular instrument perturbs
/// the statistics of `target`.
pub fn disturbance_of(
    instrument: &Instrument,
    target: &Observable,
) -> Result<f64, InstrumentError> {
    if instrument.dim() != target.dim() {
        return Err(InstrumentError::DimensionMismatch {
            instrument: instrument.dim(),
            operand: target.dim(),
        });
    }
    let mut worst = 0.0f64;
    for by in target.effects() {
        let moved = instrument.dual_apply_total(by);
        worst = worst.max(operator_norm(&(by - &moved)));
    }
    Ok(worst)
}

/// First-kind condition: the instrument leaves its own observable fixed,
/// Ic*(A_x) = A_x for all x.
pub fn is_first_kind(instrument: &Instrument, tolerance: f64) -> bool {
    let own = induced_observable(instrument);
    disturbance_of(instrument, &own).is_ok_and(|d| d <= tolerance)
}

/// Repeatability: I_x*(A_y) = 0 whenever x ≠ y.
pub fn is_repeatable(instrument: &Instrument, tolerance: f64) -> bool {
    let own = induced_observable(instrument);
    for x in 0..instrument.outcome_count() {
        for y in 0..instrument.outcome_count() {
            if x == y {
                continue;
            }
            let moved = instrument.dual_apply_outcome(x, own.effect(y));
            if operator_norm(&moved) > tolerance {
                return false;
            }
        }
    }
    true
}

/// The sequential joint observable G_{x,y} = I_x*(B_y). Its row marginal is
/// exactly the induced observable; the column marginal reproduces `target`
/// precisely when the instrument does not disturb it.
pub fn sequential_joint(
    instrument: &Instrument,
    target: &Observable,
) -> Result<JointObservable, InstrumentError> {
    if instrument.dim() != target.dim() {
        return Err(InstrumentError::DimensionMismatch {
            instrument: instrument.dim(),
            operand: target.dim(),
        });
    }
    let mut effects = Vec::with_capacity(instrument.outcome_count() * target.outcome_count());
    for x in 0..instrument.outcome_count() {
        for by in target.effects() {
            effects.push(instrument.dual_apply_outcome(x, by).hermitian_part());
        }
    }
    Ok(JointObservable::new(
        instrument.outcomes().to_vec(),
        target.outcomes().to_vec(),
        effects,
    )?)
}

#[cfg(test)]
mod tests;
