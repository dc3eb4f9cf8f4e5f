//! Disturbance quantification and the related decision procedures.
//!
//! The central quantity is the least uniform probability deviation an
//! implementation of A can leave on the statistics of B,
//!
//!   D_A(B) = inf { λ ∈ [0,1] : −λ1 ⪯ B_y − Φ*(B_y) ⪯ λ1 ∀y },
//!
//! minimized over all instruments implementing A. With one Hermitian d²×d²
//! Choi variable J_x per outcome, Φ*(Y) = Σ_x Tr_first[(Yᵀ⊗1) J_x], the
//! infimum is a semidefinite program:
//!
//!   (a) Tr_first[J_x] = A_x        (unit condition)
//!   (b) J_x ⪰ 0                    (complete positivity)
//!   (c) −λ1 ⪯ B_y − Φ*(B_y) ⪯ λ1.
//!
//! The solver's dual delivers operators (H_x, K_y) with
//! H_x⊗1 ⪯ Σ_y K_y⊗B_yᵀ and Σ_y tr|K_y| ≤ 1 whose value
//! Σ_x tr(H_x A_x) − Σ_y tr(K_y B_y) is a certified lower bound on D_A(B);
//! strong duality makes the bound tight.

use num_complex::Complex64;

use crate::matrix::{
    eigh, hermitian_basis, kron, operator_norm, trace_norm_hermitian, ComplexMatrix,
    HermitianBasis, MatrixError, Subsystem,
};
use crate::observables::{JointObservable, Observable, ObservableError};
use crate::sdp::{self, SdpError, SdpProblem, SdpSolution, SdpStatus, SolveOptions};
use crate::tol;

#[derive(Debug, Clone, thiserror::Error)]
pub enum DisturbanceError {
    #[error("observables act on different dimensions ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("solver stopped with status {status:?} (primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e})")]
    SolverFailed { status: SdpStatus, primal_residual: f64, dual_residual: f64 },
    #[error("observable is not rank-1")]
    NotRankOne,
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Why a dual certificate was rejected.
#[derive(Debug, Clone, thiserror::Error)]
pub enum CertificateError {
    #[error("certificate has {got} H operators, expected {expected}")]
    HCount { got: usize, expected: usize },
    #[error("certificate has {got} K operators, expected {expected}")]
    KCount { got: usize, expected: usize },
    #[error("certificate operator {name} has wrong shape {rows}x{cols} for dimension {dim}")]
    OperatorShape { name: String, rows: usize, cols: usize, dim: usize },
    #[error("operator domination fails at outcome {outcome}: min eigenvalue {min_eigenvalue:.3e}")]
    Domination { outcome: usize, min_eigenvalue: f64 },
    #[error("trace-norm normalization violated: Σ tr|K_y| = {sum:.9} exceeds 1")]
    Normalization { sum: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone)]
pub struct DisturbanceOptions {
    pub solve: SolveOptions,
    /// Threshold on D below which the pair is declared non-disturbing.
    pub decision_tol: f64,
}

impl Default for DisturbanceOptions {
    fn default() -> Self {
        Self { solve: SolveOptions::default(), decision_tol: tol::DECISION }
    }
}

/// Dual certificate (H_x, K_y), normalized to Σ_y tr|K_y| = 1 when the raw
/// solver output is not already on the constraint surface.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub h: Vec<ComplexMatrix>,
    pub k: Vec<ComplexMatrix>,
}

/// Feasibility and optimality residuals recomputed from the reported
/// solution rather than taken from solver internals.
#[derive(Debug, Clone)]
pub struct DisturbanceResiduals {
    /// min eigenvalue over the reported Choi matrices.
    pub choi_min_eigenvalue: f64,
    /// max_x ‖Tr_first[J_x] − A_x‖.
    pub marginal_residual: f64,
    /// max_y ‖B_y − Φ*(B_y)‖ evaluated from the reported Choi matrices; an
    /// independent upper bound on D.
    pub achieved_disturbance: f64,
    /// min over x of the eigenvalues of Σ_y K_y⊗B_yᵀ − H_x⊗1.
    pub certificate_min_eigenvalue: f64,
    /// Σ_y tr|K_y| after normalization.
    pub certificate_trace_norm_sum: f64,
}

#[derive(Debug, Clone)]
pub struct DisturbanceReport {
    /// D_A(B), clamped to [0, 1].
    pub value: f64,
    pub non_disturbing: bool,
    /// Choi matrices J_x of the optimal instrument's Heisenberg maps.
    pub choi_matrices: Vec<ComplexMatrix>,
    pub certificate: DualCertificate,
    /// Certified lower bound Σ tr(H_x A_x) − Σ tr(K_y B_y).
    pub dual_bound: f64,
    /// |value − dual bound|.
    pub gap: f64,
    pub residuals: DisturbanceResiduals,
    pub iterations: usize,
}

impl DisturbanceReport {
    /// The sequential joint observable G_{x,y} = I_x*(B_y) induced by the
    /// optimal instrument.
    pub fn sequential_joint(
        &self,
        a: &Observable,
        b: &Observable,
    ) -> Result<JointObservable, ObservableError> {
        let d = b.dim();
        let mut effects = Vec::with_capacity(self.choi_matrices.len() * b.outcome_count());
        for j in &self.choi_matrices {
            for by in b.effects() {
                effects.push(heisenberg_apply(j, by, d).hermitian_part());
            }
        }
        JointObservable::new(a.outcomes().to_vec(), b.outcomes().to_vec(), effects)
    }
}

/// Tr_first[(Yᵀ⊗1) J] — the action of the CP map with Choi matrix J.
pub fn heisenberg_apply(choi: &ComplexMatrix, y: &ComplexMatrix, d: usize) -> ComplexMatrix {
    heisenberg_apply_rect(choi, y, d, d)
}

/// Same contraction for a Choi matrix on C^{d_in} ⊗ C^{d_out}.
fn heisenberg_apply_rect(
    choi: &ComplexMatrix,
    y: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d_out, d_out);
    for k in 0..d_out {
        for l in 0..d_out {
            let mut acc = Complex64::new(0.0, 0.0);
            for jp in 0..d_in {
                for j in 0..d_in {
                    let w = y.at(jp, j);
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    acc += w * choi.at(jp * d_out + k, j * d_out + l);
                }
            }
            out.set(k, l, acc);
        }
    }
    out
}

fn check_dims(a: &Observable, b: &Observable) -> Result<usize, DisturbanceError> {
    if a.dim() != b.dim() {
        return Err(DisturbanceError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(a.dim())
}

/// Relative eigenvalue cutoff below which an effect direction counts as
/// outside the support.
const SUPPORT_CUT: f64 = 1e-10;

/// Per-outcome facial data: any admissible Choi matrix is supported on
/// C^d ⊗ supp(A_x), so the variable is compressed to that face. This keeps
/// the program strictly feasible on both sides even for singular effects
/// (for J ⪰ 0, a null vector v of Tr_first[J] forces J(e_j ⊗ v) = 0).
struct OutcomeFace {
    /// d×r isometry onto the support of A_x.
    isometry: ComplexMatrix,
    rank: usize,
    /// Orthonormal Hermitian basis of the compressed (d·r)×(d·r) space.
    basis: HermitianBasis,
    /// First variable index of this outcome's coordinates.
    offset: usize,
}

impl OutcomeFace {
    fn coords(&self) -> usize {
        (self.isometry.rows() * self.rank).pow(2)
    }

    /// Embeds a compressed Choi matrix back into the full d²×d² space,
    /// J = (1⊗U) J̃ (1⊗U)†.
    fn embed(&self, compressed: &ComplexMatrix) -> ComplexMatrix {
        let d = self.isometry.rows();
        let v = kron(&ComplexMatrix::identity(d), &self.isometry);
        (&(&v * compressed) * &v.adjoint()).hermitian_part()
    }
}

struct DisturbanceProgram {
    problem: SdpProblem,
    d: usize,
    n_a: usize,
    n_b: usize,
    faces: Vec<OutcomeFace>,
}

/// Assembles the primal program (a)–(c) over λ and the per-outcome Choi
/// coordinates (facially reduced onto the effect supports).
fn build_disturbance_program(
    a: &Observable,
    b: &Observable,
) -> Result<DisturbanceProgram, DisturbanceError> {
    let d = check_dims(a, b)?;
    let n_a = a.outcome_count();
    let n_b = b.outcome_count();
    let small_basis = hermitian_basis(d)?;

    let mut faces = Vec::with_capacity(n_a);
    let mut offset = 1usize;
    for ax in a.effects() {
        let decomp = eigh(&ax.hermitian_part())?;
        let top = decomp.values.last().copied().unwrap_or(0.0).max(0.0);
        let cut = SUPPORT_CUT * top.max(1.0);
        let support: Vec<usize> = (0..d).filter(|&i| decomp.values[i] > cut).collect();
        let rank = support.len();
        let mut isometry = ComplexMatrix::zeros(d, rank);
        for (col, &idx) in support.iter().enumerate() {
            let v = decomp.vectors.column(idx);
            for row in 0..d {
                isometry.set(row, col, v[row]);
            }
        }
        let basis = hermitian_basis((d * rank).max(1))?;
        let coords = if rank == 0 { 0 } else { (d * rank) * (d * rank) };
        faces.push(OutcomeFace { isometry, rank, basis, offset });
        offset += coords;
    }

    let n = offset;
    let mut objective = vec![0.0; n];
    objective[0] = 1.0;
    let mut problem = SdpProblem::new(n, objective)?;

    // (b): J̃_x ⪰ 0 on the compressed space.
    for face in &faces {
        if face.rank == 0 {
            continue;
        }
        let side = d * face.rank;
        let block = problem.add_block(ComplexMatrix::zeros(side, side))?;
        for (j, e) in face.basis.elements().iter().enumerate() {
            problem.add_term(block, face.offset + j, e.clone())?;
        }
    }

    // Images U · Tr_first[(B_yᵀ⊗1) Ẽ_j] · U† of the compressed basis, one
    // family per (outcome, target effect).
    let image = |face: &OutcomeFace, e: &ComplexMatrix, by: &ComplexMatrix| -> ComplexMatrix {
        let reduced = heisenberg_apply_rect(e, by, d, face.rank);
        (&(&face.isometry * &reduced) * &face.isometry.adjoint()).hermitian_part()
    };

    // (c): λ1 ± (Φ*(B_y) − B_y) ⪰ 0.
    let id = ComplexMatrix::identity(d);
    for by in b.effects() {
        let plus = problem.add_block(by.hermitian_part())?;
        let minus = problem.add_block(by.hermitian_part().scale_re(-1.0))?;
        problem.add_term(plus, 0, id.clone())?;
        problem.add_term(minus, 0, id.clone())?;
        for face in &faces {
            if face.rank == 0 {
                continue;
            }
            for (j, e) in face.basis.elements().iter().enumerate() {
                let img = image(face, e, by);
                problem.add_term(plus, face.offset + j, img.clone())?;
                problem.add_term(minus, face.offset + j, img.scale_re(-1.0))?;
            }
        }
    }

    // (a): Tr_first[J_x] = A_x, coordinate by coordinate in the d×d basis.
    // Coordinates outside the support reduce to 0 = 0 and are pruned by the
    // solver, which pins their multipliers to zero.
    let id_d = ComplexMatrix::identity(d);
    for (face, ax) in faces.iter().zip(a.effects()) {
        let target = small_basis.coordinates(&ax.hermitian_part());
        if face.rank == 0 {
            continue;
        }
        let traced: Vec<Vec<f64>> = face
            .basis
            .elements()
            .iter()
            .map(|e| small_basis.coordinates(&image(face, e, &id_d)))
            .collect();
        for i in 0..small_basis.len() {
            let mut coeffs = Vec::new();
            for (j, row) in traced.iter().enumerate() {
                if row[i].abs() > 1e-14 {
                    coeffs.push((face.offset + j, row[i]));
                }
            }
            problem.add_equality(coeffs, target[i])?;
        }
    }

    Ok(DisturbanceProgram { problem, d, n_a, n_b, faces })
}

fn require_optimal(solution: &SdpSolution) -> Result<(), DisturbanceError> {
    if solution.status != SdpStatus::Optimal {
        return Err(DisturbanceError::SolverFailed {
            status: solution.status,
            primal_residual: solution.primal_residual,
            dual_residual: solution.dual_residual,
        });
    }
    Ok(())
}

/// Computes D_A(B) with the optimal instrument and the dual certificate.
pub fn disturbance_measure(
    a: &Observable,
    b: &Observable,
    options: &DisturbanceOptions,
) -> Result<DisturbanceReport, DisturbanceError> {
    let program = build_disturbance_program(a, b)?;
    let solution = sdp::solve(&program.problem, &options.solve)?;
    require_optimal(&solution)?;
    let d = program.d;

    let mut choi_matrices = Vec::with_capacity(program.n_a);
    for face in &program.faces {
        if face.rank == 0 {
            choi_matrices.push(ComplexMatrix::zeros(d * d, d * d));
            continue;
        }
        let coords: Vec<f64> = (0..face.coords())
            .map(|j| solution.primal[face.offset + j])
            .collect();
        choi_matrices.push(face.embed(&face.basis.reconstruct(&coords)));
    }

    // Dual certificate: K_y from the paired (c)-block duals, H_x from the
    // multipliers of the unit-condition equalities. Blocks are laid out as
    // one PSD block per outcome with support, then the (±) pairs.
    let small_basis = hermitian_basis(d)?;
    let active_faces = program.faces.iter().filter(|f| f.rank > 0).count();
    let mut k_ops = Vec::with_capacity(program.n_b);
    for y in 0..program.n_b {
        let plus = &solution.dual_blocks[active_faces + 2 * y];
        let minus = &solution.dual_blocks[active_faces + 2 * y + 1];
        k_ops.push((minus - plus).hermitian_part());
    }
    let q_small = small_basis.len();
    let mut h_ops = Vec::with_capacity(program.n_a);
    let mut eq_cursor = 0usize;
    for face in &program.faces {
        if face.rank == 0 {
            h_ops.push(ComplexMatrix::zeros(d, d));
            continue;
        }
        let coords: Vec<f64> = (0..q_small)
            .map(|i| solution.equality_multipliers[eq_cursor + i])
            .collect();
        eq_cursor += q_small;
        h_ops.push(small_basis.reconstruct(&coords).hermitian_part());
    }

    // Rescale onto the normalization surface Σ tr|K_y| = 1; the dominance
    // constraint is jointly homogeneous in (H, K), so feasibility survives.
    let mut sum: f64 = 0.0;
    for k in &k_ops {
        sum += trace_norm_hermitian(k)?;
    }
    if sum > 1e-9 {
        let inv = 1.0 / sum;
        for k in k_ops.iter_mut() {
            *k = k.scale_re(inv);
        }
        for h in h_ops.iter_mut() {
            *h = h.scale_re(inv);
        }
    }
    complete_certificate_off_support(d, &program.faces, &mut h_ops, &k_ops, b, &options.solve);
    repair_certificate(d, &mut h_ops, &k_ops, b);
    let certificate = DualCertificate { h: h_ops, k: k_ops };

    let value = solution.primal[0].clamp(0.0, 1.0);
    let dual_bound = certificate_value(a, b, &certificate);
    let residuals = compute_residuals(a, b, &choi_matrices, &certificate)?;

    Ok(DisturbanceReport {
        value,
        non_disturbing: value <= options.decision_tol,
        choi_matrices,
        dual_bound,
        gap: (value - dual_bound).abs(),
        certificate,
        residuals,
        iterations: solution.iterations,
    })
}

/// The multipliers only determine H_x on the support of A_x; off the support
/// the dominance constraint must still hold globally, and pushing H_x down
/// there costs nothing (tr[(1−P)A_x] vanishes), so the smallest shift from a
/// fixed ladder that restores positivity is applied.
fn complete_certificate_off_support(
    d: usize,
    faces: &[OutcomeFace],
    h_ops: &mut [ComplexMatrix],
    k_ops: &[ComplexMatrix],
    b: &Observable,
    solve: &SolveOptions,
) {
    if faces.iter().all(|f| f.rank == d) {
        return;
    }
    let mut dominated = ComplexMatrix::zeros(d * d, d * d);
    for (k, by) in k_ops.iter().zip(b.effects()) {
        dominated = &dominated + &kron(k, &by.transpose());
    }
    let id = ComplexMatrix::identity(d);
    for (face, h) in faces.iter().zip(h_ops.iter_mut()) {
        if face.rank == d {
            continue;
        }
        let projector = (&face.isometry * &face.isometry.adjoint()).hermitian_part();
        let complement = &id - &projector;
        for (step, t) in [0.0, 1.0, 1e2, 1e4, 1e6].iter().enumerate() {
            let candidate = &*h - &complement.scale_re(*t);
            let gap = (&dominated - &kron(&candidate, &id)).hermitian_part();
            let min = match eigh(&gap) {
                Ok(decomp) => decomp.values.first().copied().unwrap_or(0.0),
                Err(_) => f64::NEG_INFINITY,
            };
            if min >= -0.5 * solve.feas_tol || step == 4 {
                *h = candidate;
                break;
            }
        }
    }
}

/// Shifts every H_x down by the residual violation of the dominance
/// constraint, making the certificate exactly feasible. The certified bound
/// only shrinks by (shift)·d, trading a sliver of tightness for a
/// certificate that verifies at any tolerance.
fn repair_certificate(
    d: usize,
    h_ops: &mut [ComplexMatrix],
    k_ops: &[ComplexMatrix],
    b: &Observable,
) {
    let mut dominated = ComplexMatrix::zeros(d * d, d * d);
    for (k, by) in k_ops.iter().zip(b.effects()) {
        dominated = &dominated + &kron(k, &by.transpose());
    }
    let id = ComplexMatrix::identity(d);
    let mut min_eig = f64::INFINITY;
    for h in h_ops.iter() {
        let gap = (&dominated - &kron(h, &id)).hermitian_part();
        match eigh(&gap) {
            Ok(decomp) => min_eig = min_eig.min(decomp.values.first().copied().unwrap_or(0.0)),
            Err(_) => return,
        }
    }
    if min_eig < 0.0 {
        let shift = -min_eig + 1e-13;
        for h in h_ops.iter_mut() {
            *h = &*h - &id.scale_re(shift);
        }
    }
}

fn certificate_value(a: &Observable, b: &Observable, cert: &DualCertificate) -> f64 {
    let mut value = 0.0;
    for (h, ax) in cert.h.iter().zip(a.effects()) {
        value += h.hs_inner(ax).re;
    }
    for (k, by) in cert.k.iter().zip(b.effects()) {
        value -= k.hs_inner(by).re;
    }
    value
}

fn compute_residuals(
    a: &Observable,
    b: &Observable,
    choi: &[ComplexMatrix],
    cert: &DualCertificate,
) -> Result<DisturbanceResiduals, DisturbanceError> {
    let d = a.dim();
    let mut choi_min = f64::INFINITY;
    let mut marginal = 0.0f64;
    for (j, ax) in choi.iter().zip(a.effects()) {
        choi_min = choi_min.min(crate::matrix::min_eigenvalue(j)?);
        let traced = crate::matrix::partial_trace(j, d, d, Subsystem::First)?;
        marginal = marginal.max((&traced - ax).max_abs());
    }
    let mut achieved = 0.0f64;
    for by in b.effects() {
        let mut moved = ComplexMatrix::zeros(d, d);
        for j in choi {
            moved = &moved + &heisenberg_apply(j, by, d);
        }
        achieved = achieved.max(operator_norm(&(by - &moved.hermitian_part())));
    }
    let (cert_min, cert_sum) = certificate_residuals(a, b, cert)?;
    Ok(DisturbanceResiduals {
        choi_min_eigenvalue: choi_min,
        marginal_residual: marginal,
        achieved_disturbance: achieved,
        certificate_min_eigenvalue: cert_min,
        certificate_trace_norm_sum: cert_sum,
    })
}

fn certificate_residuals(
    a: &Observable,
    b: &Observable,
    cert: &DualCertificate,
) -> Result<(f64, f64), MatrixError> {
    let d = a.dim();
    let mut dominated = ComplexMatrix::zeros(d * d, d * d);
    for (k, by) in cert.k.iter().zip(b.effects()) {
        dominated = &dominated + &kron(k, &by.transpose());
    }
    let id = ComplexMatrix::identity(d);
    let mut min_eig = f64::INFINITY;
    for h in &cert.h {
        let gap = (&dominated - &kron(h, &id)).hermitian_part();
        min_eig = min_eig.min(eigh(&gap)?.values.first().copied().unwrap_or(0.0));
    }
    let mut sum = 0.0;
    for k in &cert.k {
        sum += trace_norm_hermitian(k)?;
    }
    Ok((min_eig, sum))
}

/// Checks a dual certificate from scratch and returns its certified lower
/// bound on D_A(B).
///
/// Accepts Σ_y tr|K_y| up to 1: any deficit only weakens the bound, while an
/// excess would invalidate it and is rejected.
pub fn verify_dual_certificate(
    a: &Observable,
    b: &Observable,
    h: &[ComplexMatrix],
    k: &[ComplexMatrix],
    feas_tol: f64,
) -> Result<f64, CertificateError> {
    if h.len() != a.outcome_count() {
        return Err(CertificateError::HCount { got: h.len(), expected: a.outcome_count() });
    }
    if k.len() != b.outcome_count() {
        return Err(CertificateError::KCount { got: k.len(), expected: b.outcome_count() });
    }
    let d = a.dim();
    for (idx, m) in h.iter().enumerate() {
        if !m.is_square() || m.rows() != d {
            return Err(CertificateError::OperatorShape {
                name: format!("H_{}", idx + 1),
                rows: m.rows(),
                cols: m.cols(),
                dim: d,
            });
        }
    }
    for (idx, m) in k.iter().enumerate() {
        if !m.is_square() || m.rows() != d {
            return Err(CertificateError::OperatorShape {
                name: format!("K_{}", idx + 1),
                rows: m.rows(),
                cols: m.cols(),
                dim: d,
            });
        }
    }
    let cert = DualCertificate { h: h.to_vec(), k: k.to_vec() };
    let (min_eig, sum) = certificate_residuals(a, b, &cert)?;
    if min_eig < -feas_tol {
        // Identify the worst outcome for the rejection message.
        let id = ComplexMatrix::identity(d);
        let mut dominated = ComplexMatrix::zeros(d * d, d * d);
        for (kk, by) in cert.k.iter().zip(b.effects()) {
            dominated = &dominated + &kron(kk, &by.transpose());
        }
        let mut worst = (0usize, f64::INFINITY);
        for (x, hh) in cert.h.iter().enumerate() {
            let gap = (&dominated - &kron(hh, &id)).hermitian_part();
            let min = eigh(&gap)?.values.first().copied().unwrap_or(0.0);
            if min < worst.1 {
                worst = (x, min);
            }
        }
        return Err(CertificateError::Domination {
            outcome: worst.0 + 1,
            min_eigenvalue: worst.1,
        });
    }
    if sum > 1.0 + feas_tol {
        return Err(CertificateError::Normalization { sum });
    }
    Ok(certificate_value(a, b, &cert))
}

/// True iff A admits a measurement leaving B's statistics unchanged.
pub fn decide_non_disturbance(
    a: &Observable,
    b: &Observable,
    options: &DisturbanceOptions,
) -> Result<bool, DisturbanceError> {
    Ok(disturbance_measure(a, b, options)?.value <= options.decision_tol)
}

/// D_A(A): zero exactly when A admits a first-kind measurement.
pub fn first_kind_measure(
    a: &Observable,
    options: &DisturbanceOptions,
) -> Result<DisturbanceReport, DisturbanceError> {
    disturbance_measure(a, a, options)
}

/// Joint measurability decided by the max-margin feasibility program:
/// maximize t subject to G_{x,y} ⪰ t·1 with both marginals pinned.
#[derive(Debug, Clone)]
pub struct JointMeasurabilityReport {
    pub feasible: bool,
    /// Optimal smallest-eigenvalue slack; negative margins quantify
    /// infeasibility.
    pub margin: f64,
    pub joint: Option<JointObservable>,
    pub marginal_residual: f64,
}

pub fn joint_measurability(
    a: &Observable,
    b: &Observable,
    options: &DisturbanceOptions,
) -> Result<JointMeasurabilityReport, DisturbanceError> {
    let d = check_dims(a, b)?;
    let basis = hermitian_basis(d)?;
    let q = basis.len();
    let n_a = a.outcome_count();
    let n_b = b.outcome_count();
    let n = 1 + n_a * n_b * q;
    let var = |x: usize, y: usize, i: usize| 1 + (x * n_b + y) * q + i;

    let mut objective = vec![0.0; n];
    objective[0] = -1.0;
    let mut problem = SdpProblem::new(n, objective)?;
    let id = ComplexMatrix::identity(d);
    for x in 0..n_a {
        for y in 0..n_b {
            let block = problem.add_block(ComplexMatrix::zeros(d, d))?;
            problem.add_term(block, 0, id.scale_re(-1.0))?;
            for (i, e) in basis.elements().iter().enumerate() {
                problem.add_term(block, var(x, y, i), e.clone())?;
            }
        }
    }
    // Both marginal families are imposed; the solver prunes the overlap.
    for (x, ax) in a.effects().iter().enumerate() {
        let target = basis.coordinates(&ax.hermitian_part());
        for i in 0..q {
            let coeffs: Vec<(usize, f64)> = (0..n_b).map(|y| (var(x, y, i), 1.0)).collect();
            problem.add_equality(coeffs, target[i])?;
        }
    }
    for (y, by) in b.effects().iter().enumerate() {
        let target = basis.coordinates(&by.hermitian_part());
        for i in 0..q {
            let coeffs: Vec<(usize, f64)> = (0..n_a).map(|x| (var(x, y, i), 1.0)).collect();
            problem.add_equality(coeffs, target[i])?;
        }
    }

    let solution = sdp::solve(&problem, &options.solve)?;
    require_optimal(&solution)?;
    let margin = solution.primal[0];
    let feasible = margin >= -options.solve.feas_tol;
    let mut joint = None;
    let mut marginal_residual = 0.0;
    if feasible {
        let mut effects = Vec::with_capacity(n_a * n_b);
        for x in 0..n_a {
            for y in 0..n_b {
                let coords: Vec<f64> = (0..q).map(|i| solution.primal[var(x, y, i)]).collect();
                effects.push(basis.reconstruct(&coords).hermitian_part());
            }
        }
        let g = JointObservable::new(a.outcomes().to_vec(), b.outcomes().to_vec(), effects)?;
        marginal_residual = g.marginal_residual(a, b);
        joint = Some(g);
    }
    Ok(JointMeasurabilityReport { feasible, margin, joint, marginal_residual })
}

/// Reduced optimization for rank-1 observables: every instrument
/// implementing a rank-1 A is measure-and-prepare, so only the prepared
/// states ξ_x remain as variables and Φ*(B_y) = Σ_x tr(ξ_x B_y) A_x.
pub fn rank1_disturbance(
    a: &Observable,
    b: &Observable,
    options: &DisturbanceOptions,
) -> Result<f64, DisturbanceError> {
    let d = check_dims(a, b)?;
    if !crate::observables::is_rank_one(a) {
        return Err(DisturbanceError::NotRankOne);
    }
    let basis = hermitian_basis(d)?;
    let q = basis.len();
    let n_a = a.outcome_count();
    let n = 1 + n_a * q;
    let var = |x: usize, i: usize| 1 + x * q + i;

    let mut objective = vec![0.0; n];
    objective[0] = 1.0;
    let mut problem = SdpProblem::new(n, objective)?;
    let id = ComplexMatrix::identity(d);

    for x in 0..n_a {
        let block = problem.add_block(ComplexMatrix::zeros(d, d))?;
        for (i, e) in basis.elements().iter().enumerate() {
            problem.add_term(block, var(x, i), e.clone())?;
        }
        // tr ξ_x = 1: only the identity coordinate carries trace.
        problem.add_equality(vec![(var(x, 0), (d as f64).sqrt())], 1.0)?;
    }
    for by in b.effects() {
        let weights: Vec<f64> = basis.elements().iter().map(|e| e.hs_inner(by).re).collect();
        let plus = problem.add_block(by.hermitian_part())?;
        problem.add_term(plus, 0, id.clone())?;
        let minus = problem.add_block(by.hermitian_part().scale_re(-1.0))?;
        problem.add_term(minus, 0, id.clone())?;
        for (x, ax) in a.effects().iter().enumerate() {
            for (i, &w) in weights.iter().enumerate() {
                if w.abs() > 1e-14 {
                    problem.add_term(plus, var(x, i), ax.scale_re(w))?;
                    problem.add_term(minus, var(x, i), ax.scale_re(-w))?;
                }
            }
        }
    }

    let solution = sdp::solve(&problem, &options.solve)?;
    require_optimal(&solution)?;
    Ok(solution.primal[0].clamp(0.0, 1.0))
}
