//! Self-contained dense semidefinite programming.
//!
//! Problems are stated in the linear-matrix-inequality primal form
//!
//!   inf ⟨v, c⟩   subject to   F₀⁽ᵇ⁾ ⪯ Σ_ℓ c_ℓ F_ℓ⁽ᵇ⁾  per block b,
//!                             a_k · c = b_k            (optional equalities)
//!
//! over real variables c with Hermitian coefficient matrices, and solved by a
//! primal-dual path-following interior-point method (Nesterov-Todd scaling,
//! Mehrotra predictor-corrector). The dual
//!
//!   sup Σ_b tr(F₀⁽ᵇ⁾ C⁽ᵇ⁾) + b·y   s.t.   Σ_b tr(F_ℓ⁽ᵇ⁾ C⁽ᵇ⁾) + (Aᵀy)_ℓ = v_ℓ,
//!                                          C⁽ᵇ⁾ ⪰ 0
//!
//! is solved simultaneously, so every optimal value ships with a certificate.

mod solver;

use crate::matrix::{eigh, ComplexMatrix};

#[derive(Debug, Clone, thiserror::Error)]
pub enum SdpError {
    #[error("problem needs at least one scalar variable")]
    NoVariables,
    #[error("objective has {len} entries, expected {n}")]
    ObjectiveLength { len: usize, n: usize },
    #[error("problem has no constraint blocks")]
    NoBlocks,
    #[error("variable index {var} out of range for {n} variables")]
    VariableRange { var: usize, n: usize },
    #[error("block index {block} out of range for {blocks} blocks")]
    BlockRange { block: usize, blocks: usize },
    #[error("block {block}: matrix is {rows}x{cols}, expected {size}x{size}")]
    BlockShape { block: usize, rows: usize, cols: usize, size: usize },
    #[error("block {block}, variable {var}: matrix not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { block: usize, var: usize, deviation: f64 },
    #[error("equality constraint {index} references variable {var} out of range")]
    EqualityRange { index: usize, var: usize },
    #[error("non-finite data in {location}")]
    NonFinite { location: String },
}

/// A block-LMI standard-form problem.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    n: usize,
    objective: Vec<f64>,
    blocks: Vec<BlockSpec>,
    equalities: Vec<Equality>,
}

#[derive(Debug, Clone)]
pub(crate) struct BlockSpec {
    pub f0: ComplexMatrix,
    pub terms: Vec<(usize, ComplexMatrix)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Equality {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl SdpProblem {
    pub fn new(n: usize, objective: Vec<f64>) -> Result<Self, SdpError> {
        if n == 0 {
            return Err(SdpError::NoVariables);
        }
        if objective.len() != n {
            return Err(SdpError::ObjectiveLength { len: objective.len(), n });
        }
        if objective.iter().any(|v| !v.is_finite()) {
            return Err(SdpError::NonFinite { location: "objective".into() });
        }
        Ok(Self { n, objective, blocks: Vec::new(), equalities: Vec::new() })
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_size(&self, block: usize) -> usize {
        self.blocks[block].f0.rows()
    }

    /// Adds an LMI block with constant matrix F₀ and returns its index.
    pub fn add_block(&mut self, f0: ComplexMatrix) -> Result<usize, SdpError> {
        let block = self.blocks.len();
        Self::check_matrix(&f0, f0.rows(), block, usize::MAX)?;
        self.blocks.push(BlockSpec { f0, terms: Vec::new() });
        Ok(block)
    }

    /// Sets the coefficient F_ℓ of a variable inside a block (additive if the
    /// same variable is given twice).
    pub fn add_term(
        &mut self,
        block: usize,
        var: usize,
        f: ComplexMatrix,
    ) -> Result<(), SdpError> {
        if block >= self.blocks.len() {
            return Err(SdpError::BlockRange { block, blocks: self.blocks.len() });
        }
        if var >= self.n {
            return Err(SdpError::VariableRange { var, n: self.n });
        }
        let size = self.blocks[block].f0.rows();
        Self::check_matrix(&f, size, block, var)?;
        self.blocks[block].terms.push((var, f));
        Ok(())
    }

    /// Adds a scalar equality Σ coeffs_ℓ c_ℓ = rhs.
    pub fn add_equality(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> Result<(), SdpError> {
        let index = self.equalities.len();
        for &(var, v) in &coeffs {
            if var >= self.n {
                return Err(SdpError::EqualityRange { index, var });
            }
            if !v.is_finite() {
                return Err(SdpError::NonFinite { location: format!("equality {index}") });
            }
        }
        if !rhs.is_finite() {
            return Err(SdpError::NonFinite { location: format!("equality {index} rhs") });
        }
        self.equalities.push(Equality { coeffs, rhs });
        Ok(())
    }

    pub fn equality_count(&self) -> usize {
        self.equalities.len()
    }

    fn check_matrix(
        m: &ComplexMatrix,
        size: usize,
        block: usize,
        var: usize,
    ) -> Result<(), SdpError> {
        if !m.is_square() || m.rows() != size {
            return Err(SdpError::BlockShape { block, rows: m.rows(), cols: m.cols(), size });
        }
        if !m.is_finite() {
            return Err(SdpError::NonFinite { location: format!("block {block}") });
        }
        let deviation = m.hermiticity_deviation();
        if deviation > crate::tol::HERMITICITY {
            return Err(SdpError::NotHermitian { block, var, deviation });
        }
        Ok(())
    }

    /// Σ_ℓ c_ℓ F_ℓ − F₀ for one block.
    pub fn slack_matrix(&self, block: usize, c: &[f64]) -> ComplexMatrix {
        let spec = &self.blocks[block];
        let mut acc = spec.f0.scale_re(-1.0);
        for (var, f) in &spec.terms {
            if c[*var] != 0.0 {
                acc = &acc + &f.scale_re(c[*var]);
            }
        }
        acc.hermitian_part()
    }

    pub(crate) fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub(crate) fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    fn validate(&self) -> Result<(), SdpError> {
        if self.blocks.is_empty() {
            return Err(SdpError::NoBlocks);
        }
        Ok(())
    }
}

/// Termination condition of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    /// Feasibility residuals and relative duality gap all within tolerance.
    Optimal,
    /// A dual improving ray certifies primal infeasibility.
    Infeasible,
    /// A primal improving ray certifies dual infeasibility (objective
    /// unbounded below).
    Unbounded,
    /// Iteration cap or numerical stagnation before the tolerances were met.
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: crate::tol::SDP_GAP,
            feas_tol: crate::tol::SDP_FEASIBILITY,
            max_iter: crate::tol::SDP_MAX_ITER,
        }
    }
}

/// Primal/dual solution pair with residuals.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Primal variables c.
    pub primal: Vec<f64>,
    pub primal_objective: f64,
    /// Dual block matrices C⁽ᵇ⁾ ⪰ 0, aligned with the problem blocks.
    pub dual_blocks: Vec<ComplexMatrix>,
    /// Multipliers of the equality constraints, aligned with insertion order.
    pub equality_multipliers: Vec<f64>,
    pub dual_objective: f64,
    /// |primal − dual|.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// (primal objective, dual objective, primal residual, dual residual)
    /// per iteration, for diagnostics.
    pub trace: Vec<(f64, f64, f64, f64)>,
}

/// Solves the problem. Malformed problems are rejected with an error;
/// everything else is communicated through [`SdpSolution::status`].
pub fn solve(problem: &SdpProblem, options: &SolveOptions) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    Ok(solver::run(problem, options))
}

/// Residual report from an arithmetic path independent of the solver
/// internals (direct matrix evaluation of every constraint family).
#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// min eigenvalue of Σ c F − F₀ per block (negative = violated).
    pub primal_block_min_eigenvalues: Vec<f64>,
    /// max |a_k · c − b_k| over equality constraints.
    pub equality_residual: f64,
    /// min eigenvalue of each dual block.
    pub dual_block_min_eigenvalues: Vec<f64>,
    /// max_ℓ |Σ_b tr(F_ℓ C⁽ᵇ⁾) + (Aᵀy)_ℓ − v_ℓ|.
    pub dual_equation_residual: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    /// Worst violation across the primal families (PSD slack + equalities).
    pub max_primal_violation: f64,
    /// Worst violation across the dual families (PSD + linear equations).
    pub max_dual_violation: f64,
}

/// Recomputes all residuals of a solution from scratch.
pub fn verify(problem: &SdpProblem, solution: &SdpSolution) -> VerifyReport {
    let c = &solution.primal;
    let mut primal_min = Vec::with_capacity(problem.block_count());
    for b in 0..problem.block_count() {
        let slack = problem.slack_matrix(b, c);
        let min = eigh(&slack).map(|d| d.values.first().copied().unwrap_or(0.0));
        primal_min.push(min.unwrap_or(f64::NEG_INFINITY));
    }
    let mut equality_residual = 0.0f64;
    for eq in problem.equalities() {
        let lhs: f64 = eq.coeffs.iter().map(|&(var, w)| w * c[var]).sum();
        equality_residual = equality_residual.max((lhs - eq.rhs).abs());
    }

    let mut dual_min = Vec::with_capacity(problem.block_count());
    for z in &solution.dual_blocks {
        let min = eigh(&z.hermitian_part()).map(|d| d.values.first().copied().unwrap_or(0.0));
        dual_min.push(min.unwrap_or(f64::NEG_INFINITY));
    }

    let mut dual_eq = vec![0.0f64; problem.n_vars()];
    for (spec, z) in problem.blocks().iter().zip(&solution.dual_blocks) {
        for (var, f) in &spec.terms {
            dual_eq[*var] += f.hs_inner(z).re;
        }
    }
    for (eq, &mult) in problem.equalities().iter().zip(&solution.equality_multipliers) {
        for &(var, w) in &eq.coeffs {
            dual_eq[var] += w * mult;
        }
    }
    let dual_equation_residual = dual_eq
        .iter()
        .zip(problem.objective())
        .map(|(lhs, v)| (lhs - v).abs())
        .fold(0.0f64, f64::max);

    let primal_objective: f64 = problem
        .objective()
        .iter()
        .zip(c.iter())
        .map(|(v, x)| v * x)
        .sum();
    let mut dual_objective: f64 = problem
        .blocks()
        .iter()
        .zip(&solution.dual_blocks)
        .map(|(spec, z)| spec.f0.hs_inner(z).re)
        .sum();
    for (eq, &mult) in problem.equalities().iter().zip(&solution.equality_multipliers) {
        dual_objective += eq.rhs * mult;
    }

    let max_primal_violation = primal_min
        .iter()
        .map(|&m| (-m).max(0.0))
        .fold(equality_residual, f64::max);
    let max_dual_violation = dual_min
        .iter()
        .map(|&m| (-m).max(0.0))
        .fold(dual_equation_residual, f64::max);

    VerifyReport {
        primal_block_min_eigenvalues: primal_min,
        equality_residual,
        dual_block_min_eigenvalues: dual_min,
        dual_equation_residual,
        primal_objective,
        dual_objective,
        gap: (primal_objective - dual_objective).abs(),
        max_primal_violation,
        max_dual_violation,
    }
}
