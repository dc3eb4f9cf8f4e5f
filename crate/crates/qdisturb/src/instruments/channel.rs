//! Channels induced by instruments: Choi matrix, transfer matrix in the
//! orthonormal Hermitian basis, and fixed-point space analysis.

use num_complex::Complex64;

use crate::matrix::{
    eigh, hermitian_basis, ComplexMatrix, HermitianBasis, RealMatrix, Subsystem,
};
use crate::sdp::{self, SdpProblem, SdpStatus, SolveOptions};
use crate::tol;

use super::Instrument;

/// A completely positive trace-preserving map, stored both as its Choi
/// matrix J = Σ_{jk} |j⟩⟨k| ⊗ Φ(|j⟩⟨k|) and as the d²×d² transfer matrix
/// T_{ij} = tr(E_i Φ(E_j)) over the orthonormal Hermitian basis.
#[derive(Debug, Clone)]
pub struct Channel {
    dim: usize,
    choi: ComplexMatrix,
    transfer: RealMatrix,
    basis: HermitianBasis,
}

impl Channel {
    pub fn from_instrument(instrument: &Instrument) -> Self {
        let d = instrument.dim();
        let basis = hermitian_basis(d).expect("d >= 1");

        let apply_total = |y: &ComplexMatrix| -> ComplexMatrix {
            let mut out = ComplexMatrix::zeros(d, d);
            for x in 0..instrument.outcome_count() {
                out = &out + &instrument.apply(x, y);
            }
            out
        };

        let mut choi = ComplexMatrix::zeros(d * d, d * d);
        for j in 0..d {
            for k in 0..d {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit.set(j, k, Complex64::new(1.0, 0.0));
                let image = apply_total(&unit);
                for r in 0..d {
                    for c in 0..d {
                        choi.set(j * d + r, k * d + c, image.at(r, c));
                    }
                }
            }
        }

        let q = d * d;
        let mut transfer = RealMatrix::zeros(q, q);
        for (jcol, e) in basis.elements().iter().enumerate() {
            let image = apply_total(e);
            for (irow, f) in basis.elements().iter().enumerate() {
                transfer.set(irow, jcol, f.hs_inner(&image).re);
            }
        }

        Self { dim: d, choi, transfer, basis }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn transfer(&self) -> &RealMatrix {
        &self.transfer
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    /// Schrödinger action Φ(Y) = Tr_first[(Yᵀ ⊗ 1) J].
    pub fn apply(&self, y: &ComplexMatrix) -> ComplexMatrix {
        let yt = y.transpose();
        let big = &crate::matrix::kron(&yt, &ComplexMatrix::identity(self.dim)) * &self.choi;
        crate::matrix::partial_trace(&big, self.dim, self.dim, Subsystem::First)
            .expect("choi has matching tensor factors")
    }

    /// Heisenberg action Φ*(X) for Hermitian X, through the transposed
    /// transfer matrix.
    pub fn dual_apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix, crate::MatrixError> {
        if !x.is_square() || x.rows() != self.dim {
            return Err(crate::MatrixError::DimensionMismatch {
                left_rows: self.dim,
                left_cols: self.dim,
                right_rows: x.rows(),
                right_cols: x.cols(),
            });
        }
        let coords = self.basis.coordinates(&x.hermitian_part());
        let out_coords: Vec<f64> = (0..coords.len())
            .map(|i| (0..coords.len()).map(|j| self.transfer.at(j, i) * coords[j]).sum())
            .collect();
        Ok(self.basis.reconstruct(&out_coords))
    }

    /// ‖Φ*(1) − 1‖_max; zero for a trace-preserving map.
    pub fn unitality_residual(&self) -> f64 {
        let id = ComplexMatrix::identity(self.dim);
        match self.dual_apply(&id) {
            Ok(out) => (&out - &id).max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Largest deviation between the stored transfer matrix and the one
    /// recomputed from the Choi matrix, tr(E_i Φ(E_j)) = tr((E_jᵀ⊗E_i) J).
    pub fn representation_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, ej) in self.basis.elements().iter().enumerate() {
            for (i, ei) in self.basis.elements().iter().enumerate() {
                let probe = crate::matrix::kron(&ej.transpose(), ei);
                let value = probe.hs_inner(&self.choi).re;
                worst = worst.max((value - self.transfer.at(i, j)).abs());
            }
        }
        worst
    }
}

/// Orthonormal Hermitian basis of a channel fixed-point space.
#[derive(Debug, Clone)]
pub struct FixedPointSpace {
    basis: Vec<ComplexMatrix>,
    /// ‖Φ#(F) − F‖ for each basis element, where Φ# is the picture the
    /// space was computed for.
    residuals: Vec<f64>,
    identity_residual: f64,
}

impl FixedPointSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Projection residual of the identity onto the space.
    pub fn identity_residual(&self) -> f64 {
        self.identity_residual
    }

    /// ‖M − P(M)‖_F where P projects onto the space.
    pub fn membership_residual(&self, m: &ComplexMatrix) -> f64 {
        let mut remainder = m.clone();
        for f in &self.basis {
            let coeff = f.hs_inner(&remainder);
            remainder = &remainder - &f.scale(coeff);
        }
        remainder.frobenius_norm()
    }

    pub fn contains(&self, m: &ComplexMatrix, tolerance: f64) -> bool {
        self.membership_residual(m) <= tolerance
    }
}

/// Fixed points of the Heisenberg-picture channel Φ*: the effects an
/// instrument leaves undisturbed live here. Computed as the kernel of
/// (Tᵀ − 1) over the Hermitian-basis coordinates.
pub fn fixed_point_space(channel: &Channel) -> FixedPointSpace {
    fixed_space_impl(channel, Picture::Heisenberg)
}

/// Fixed points of the Schrödinger-picture channel Φ (invariant operators,
/// containing every invariant state).
pub fn schrodinger_fixed_point_space(channel: &Channel) -> FixedPointSpace {
    fixed_space_impl(channel, Picture::Schrodinger)
}

enum Picture {
    Schrodinger,
    Heisenberg,
}

fn fixed_space_impl(channel: &Channel, picture: Picture) -> FixedPointSpace {
    let q = channel.dim * channel.dim;
    let t = channel.transfer();
    // m = T − 1 (Schrödinger) or Tᵀ − 1 (Heisenberg); kernel vectors of m are
    // the eigenvalue-1 eigenvectors of the respective transfer matrix.
    let m = match picture {
        Picture::Schrodinger => RealMatrix::from_fn(q, q, |i, j| {
            t.at(i, j) - if i == j { 1.0 } else { 0.0 }
        }),
        Picture::Heisenberg => RealMatrix::from_fn(q, q, |i, j| {
            t.at(j, i) - if i == j { 1.0 } else { 0.0 }
        }),
    };
    // Gram matrix mᵀm: kernel vectors of m are its eigenvectors with
    // eigenvalue σ² inside the squared window.
    let gram = ComplexMatrix::from_fn(q, q, |i, j| {
        let mut acc = 0.0;
        for k in 0..q {
            acc += m.at(k, i) * m.at(k, j);
        }
        Complex64::new(acc, 0.0)
    });
    let decomp = eigh(&gram.hermitian_part()).expect("gram matrix is symmetric");
    let noise_floor = 64.0 * f64::EPSILON * decomp.values.last().copied().unwrap_or(1.0).abs();
    let window_sq = (tol::FIXED_POINT_WINDOW * tol::FIXED_POINT_WINDOW).max(noise_floor);

    let mut coord_vectors: Vec<Vec<f64>> = Vec::new();
    for (idx, &lambda) in decomp.values.iter().enumerate() {
        if lambda > window_sq {
            continue;
        }
        let col = decomp.vectors.column(idx);
        coord_vectors.push(col.iter().map(|z| z.re).collect());
    }
    // Re-orthonormalize (modified Gram-Schmidt) for a clean deterministic
    // basis.
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for mut v in coord_vectors {
        for u in &ortho {
            let proj: f64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            for (vi, ui) in v.iter_mut().zip(u.iter()) {
                *vi -= proj * ui;
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            ortho.push(v);
        }
    }

    let act = |x: &ComplexMatrix| -> ComplexMatrix {
        match picture {
            Picture::Schrodinger => channel.apply(x),
            Picture::Heisenberg => channel.dual_apply(x).expect("dimension matches"),
        }
    };

    let mut basis = Vec::new();
    let mut residuals = Vec::new();
    for v in ortho {
        let f = channel.basis.reconstruct(&v).hermitian_part();
        let residual = crate::matrix::operator_norm(&(&act(&f) - &f));
        if residual <= tol::FIXED_POINT_RESIDUAL {
            basis.push(f);
            residuals.push(residual);
        }
    }

    let identity = ComplexMatrix::identity(channel.dim);
    let space = FixedPointSpace { basis, residuals, identity_residual: 0.0 };
    let identity_residual = space.membership_residual(&identity);
    FixedPointSpace { identity_residual, ..space }
}

/// Searches the invariant operators of Φ for a full-rank fixed state by
/// maximizing the smallest eigenvalue over {ρ ∈ fix(Φ) : tr ρ = 1} with a
/// small semidefinite program. Returns the state when its minimum eigenvalue
/// clears the full-rank threshold.
pub fn full_rank_fixed_state(channel: &Channel) -> Option<ComplexMatrix> {
    let space = schrodinger_fixed_point_space(channel);
    if space.dim() == 0 {
        return None;
    }
    let d = channel.dim;
    let n = 1 + space.dim(); // t plus the fixed-space coordinates
    let mut objective = vec![0.0; n];
    objective[0] = -1.0; // maximize t
    let mut problem = SdpProblem::new(n, objective).ok()?;
    let block = problem.add_block(ComplexMatrix::zeros(d, d)).ok()?;
    problem
        .add_term(block, 0, ComplexMatrix::identity(d).scale_re(-1.0))
        .ok()?;
    for (i, f) in space.basis().iter().enumerate() {
        problem.add_term(block, 1 + i, f.clone()).ok()?;
    }
    let trace_row: Vec<(usize, f64)> = space
        .basis()
        .iter()
        .enumerate()
        .map(|(i, f)| (1 + i, f.trace().re))
        .collect();
    problem.add_equality(trace_row, 1.0).ok()?;

    let solution = sdp::solve(&problem, &SolveOptions::default()).ok()?;
    if solution.status != SdpStatus::Optimal {
        return None;
    }
    let t_star = solution.primal[0];
    if t_star <= tol::FULL_RANK_EIGENVALUE {
        return None;
    }
    let mut rho = ComplexMatrix::zeros(d, d);
    for (i, f) in space.basis().iter().enumerate() {
        rho = &rho + &f.scale_re(solution.primal[1 + i]);
    }
    let rho = rho.hermitian_part();
    // Certify the result before handing it out.
    let fixed_residual = (&channel.apply(&rho) - &rho).max_abs();
    let min_eig = crate::matrix::min_eigenvalue(&rho).ok()?;
    if fixed_residual > tol::FIXED_POINT_RESIDUAL || min_eig <= tol::FULL_RANK_EIGENVALUE {
        return None;
    }
    Some(rho.scale_re(1.0 / rho.trace().re))
}
