//! Primal-dual path-following interior-point iteration.
//!
//! Internally every Hermitian block lives in the real coordinates of the
//! orthonormal Hermitian basis (svec), so a k×k complex Hermitian block
//! becomes k² real coordinates and all Gram computations stay real. Per
//! iteration the Nesterov-Todd scaling point W (W C W = S) is formed per
//! block from eigendecompositions, the Schur complement
//! M_{ℓm} = Σ_b tr(F_ℓ W⁻¹ F_m W⁻¹) is assembled and factored once, and a
//! Mehrotra predictor-corrector pair of directions is taken from it.

use num_complex::Complex64;

use crate::matrix::{axpy, dot, eigh, hermitian_basis, Cholesky, ComplexMatrix, Eigh, RealMatrix};

use super::{SdpProblem, SdpSolution, SdpStatus, SolveOptions};

/// Structural-zero cutoff when converting coefficient matrices to svec
/// coordinates; far below every feasibility tolerance in use.
const SVEC_DROP: f64 = 1e-14;
/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.98;

struct SparseBasis {
    /// (row, col, value) triplets per basis element.
    entries: Vec<Vec<(usize, usize, Complex64)>>,
}

impl SparseBasis {
    fn build(k: usize) -> Self {
        let basis = hermitian_basis(k).expect("block size >= 1");
        let entries = basis
            .elements()
            .iter()
            .map(|e| {
                let mut list = Vec::new();
                for i in 0..k {
                    for j in 0..k {
                        let v = e.at(i, j);
                        if v.norm() > 0.0 {
                            list.push((i, j, v));
                        }
                    }
                }
                list
            })
            .collect();
        Self { entries }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    /// Real coordinates tr(E_i X) of a Hermitian matrix.
    fn svec(&self, x: &ComplexMatrix, out: &mut [f64]) {
        for (i, entry) in self.entries.iter().enumerate() {
            let mut acc = 0.0;
            for &(a, b, v) in entry {
                let t = v * x.at(b, a);
                acc += t.re;
            }
            out[i] = acc;
        }
    }

    /// Σ_i x_i E_i.
    fn smat(&self, coords: &[f64], k: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(k, k);
        for (i, entry) in self.entries.iter().enumerate() {
            let c = coords[i];
            if c == 0.0 {
                continue;
            }
            for &(a, b, v) in entry {
                let cur = out.at(a, b);
                out.set(a, b, cur + v * c);
            }
        }
        out
    }

    /// Matrix of the congruence X ↦ G X G in svec coordinates, for Hermitian
    /// G given by its columns: result[i][j] = tr(E_i G E_j G).
    fn congruence_rep(&self, g: &ComplexMatrix) -> RealMatrix {
        let k = g.rows();
        let q = self.len();
        let g_cols: Vec<Vec<Complex64>> = (0..k).map(|j| g.column(j)).collect();
        let mut rep = RealMatrix::zeros(q, q);
        for j in 0..q {
            // G E_j G as a combination of column outer products: the basis
            // element E_j = Σ v |a⟩⟨b| gives Σ v (G e_a)(G e_b)†.
            let mut image = ComplexMatrix::zeros(k, k);
            for &(a, b, v) in &self.entries[j] {
                let ua = &g_cols[a];
                let ub = &g_cols[b];
                for r in 0..k {
                    let left = v * ua[r];
                    for c in 0..k {
                        let cur = image.at(r, c);
                        image.set(r, c, cur + left * ub[c].conj());
                    }
                }
            }
            for i in 0..q {
                let mut acc = 0.0;
                for &(a, b, v) in &self.entries[i] {
                    acc += (v * image.at(b, a)).re;
                }
                rep.set(i, j, acc);
            }
        }
        rep
    }
}

struct BlockData {
    k: usize,
    q: usize,
    basis: SparseBasis,
    f0_svec: Vec<f64>,
    /// Active variable list and their svec'd coefficient columns.
    vars: Vec<usize>,
    cols: Vec<Vec<(usize, f64)>>,
    /// Fast path when every column is a single unit coordinate.
    injection: Option<Vec<(usize, f64)>>, // per svec row: (variable, coefficient)
    dense_cols: Option<RealMatrix>, // vars.len() × q
}

impl BlockData {
    fn build(spec: &super::BlockSpec) -> Self {
        let k = spec.f0.rows();
        let basis = SparseBasis::build(k);
        let q = basis.len();
        let mut f0_svec = vec![0.0; q];
        basis.svec(&spec.f0, &mut f0_svec);

        // Accumulate duplicate variable terms.
        let mut acc: std::collections::BTreeMap<usize, Vec<f64>> = std::collections::BTreeMap::new();
        let mut buf = vec![0.0; q];
        for (var, f) in &spec.terms {
            basis.svec(f, &mut buf);
            let slot = acc.entry(*var).or_insert_with(|| vec![0.0; q]);
            for (s, b) in slot.iter_mut().zip(buf.iter()) {
                *s += *b;
            }
        }
        let mut vars = Vec::new();
        let mut cols = Vec::new();
        for (var, dense) in acc {
            let maxabs = dense.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            let cutoff = SVEC_DROP * maxabs.max(1.0);
            let sparse: Vec<(usize, f64)> = dense
                .iter()
                .enumerate()
                .filter(|(_, &x)| x.abs() > cutoff)
                .map(|(i, &x)| (i, x))
                .collect();
            if sparse.is_empty() {
                continue;
            }
            vars.push(var);
            cols.push(sparse);
        }

        // Injection fast path: every column hits exactly one distinct row.
        let injection = {
            let mut rows_seen = vec![false; q];
            let mut mapping = vec![(usize::MAX, 0.0); q];
            let mut ok = true;
            for (var, col) in vars.iter().zip(cols.iter()) {
                if col.len() != 1 || rows_seen[col[0].0] {
                    ok = false;
                    break;
                }
                rows_seen[col[0].0] = true;
                mapping[col[0].0] = (*var, col[0].1);
            }
            if ok {
                Some(mapping)
            } else {
                None
            }
        };
        let dense_cols = if injection.is_none() {
            let mut m = RealMatrix::zeros(vars.len(), q);
            for (idx, col) in cols.iter().enumerate() {
                for &(r, v) in col {
                    m.set(idx, r, v);
                }
            }
            Some(m)
        } else {
            None
        };

        Self { k, q, basis, f0_svec, vars, cols, injection, dense_cols }
    }

    /// out += Jᵀ x for this block's Jacobian.
    fn accumulate_adjoint(&self, x: &[f64], out: &mut [f64]) {
        for (var, col) in self.vars.iter().zip(self.cols.iter()) {
            let mut acc = 0.0;
            for &(r, v) in col {
                acc += v * x[r];
            }
            out[*var] += acc;
        }
    }

    /// J c in svec coordinates.
    fn apply_jacobian(&self, c: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (var, col) in self.vars.iter().zip(self.cols.iter()) {
            let w = c[*var];
            if w == 0.0 {
                continue;
            }
            for &(r, v) in col {
                out[r] += v * w;
            }
        }
    }
}

struct EqualityData {
    /// Kept (independent) rows, dense over the variables.
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Original indices of the kept rows, for multiplier reporting.
    original: Vec<usize>,
    total: usize,
    inconsistent: bool,
}

impl EqualityData {
    fn build(problem: &SdpProblem) -> Self {
        let n = problem.n_vars();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut original = Vec::new();
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        let mut ortho_rhs: Vec<f64> = Vec::new();
        let mut inconsistent = false;

        for (idx, eq) in problem.equalities().iter().enumerate() {
            let mut dense = vec![0.0; n];
            for &(var, v) in &eq.coeffs {
                dense[var] += v;
            }
            let norm0 = dot(&dense, &dense).sqrt();
            // Redundancy detection against previously kept rows (twice for
            // numerical safety); the solve itself uses the original rows.
            let mut r = dense.clone();
            let mut beta = eq.rhs;
            for _ in 0..2 {
                for (u, &ub) in ortho.iter().zip(ortho_rhs.iter()) {
                    let proj = dot(&r, u);
                    axpy(&mut r, -proj, u);
                    beta -= proj * ub;
                }
            }
            let rnorm = dot(&r, &r).sqrt();
            if rnorm <= 1e-12 * norm0.max(1.0) {
                if beta.abs() > 1e-9 * (1.0 + eq.rhs.abs()) {
                    inconsistent = true;
                }
                continue;
            }
            let inv = 1.0 / rnorm;
            ortho.push(r.iter().map(|x| x * inv).collect());
            ortho_rhs.push(beta * inv);
            rows.push(dense);
            rhs.push(eq.rhs);
            original.push(idx);
        }

        Self { rows, rhs, original, total: problem.equality_count(), inconsistent }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }
}

fn matrix_power(eig: &Eigh, p: f64) -> Option<ComplexMatrix> {
    if eig.values.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let powered: Vec<f64> = eig.values.iter().map(|&v| v.powf(p)).collect();
    Some(eig.recombine(&powered))
}

/// Solves (λ X + X λ)/2 = Y for X given the eigendecomposition of λ ≻ 0.
fn lyapunov_solve(lam: &Eigh, y: &ComplexMatrix) -> ComplexMatrix {
    let qm = &lam.vectors;
    let mid = &(&qm.adjoint() * y) * qm;
    let n = mid.rows();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| {
        mid.at(i, j) * (2.0 / (lam.values[i] + lam.values[j]))
    });
    (&(qm * &scaled) * &qm.adjoint()).hermitian_part()
}

/// Largest α with S + α Δ ≻ 0, given the eigendecomposition of S ≻ 0.
fn max_step(eig_s: &Eigh, delta: &ComplexMatrix) -> f64 {
    if eig_s.values.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    let u = &eig_s.vectors;
    let mid = &(&u.adjoint() * delta) * u;
    let n = mid.rows();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| {
        mid.at(i, j) / (eig_s.values[i] * eig_s.values[j]).sqrt()
    });
    match eigh(&scaled.hermitian_part()) {
        Ok(d) => {
            let min = d.values.first().copied().unwrap_or(0.0);
            if min >= -1e-13 {
                f64::INFINITY
            } else {
                -1.0 / min
            }
        }
        Err(_) => 0.0,
    }
}

fn sandwich(g: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    (&(g * x) * g).hermitian_part()
}

struct Scaling {
    w_inv: ComplexMatrix,
    w_half: ComplexMatrix,
    w_inv_half: ComplexMatrix,
    lambda: ComplexMatrix,
    lambda_eig: Eigh,
    s_eig: Eigh,
    z_eig: Eigh,
    w_tilde: RealMatrix, // svec representation of X ↦ W⁻¹ X W⁻¹
}

fn compute_scaling(block: &BlockData, s: &ComplexMatrix, z: &ComplexMatrix) -> Option<Scaling> {
    let s_eig = eigh(s).ok()?;
    let z_eig = eigh(z).ok()?;
    let s_half = matrix_power(&s_eig, 0.5)?;
    let _ = matrix_power(&z_eig, 0.5)?; // positivity check on Z
    let inner = sandwich(&s_half, z);
    let inner_eig = eigh(&inner).ok()?;
    let inner_inv_half = matrix_power(&inner_eig, -0.5)?;
    let w = sandwich(&s_half, &inner_inv_half);
    let w_eig = eigh(&w).ok()?;
    let w_inv = matrix_power(&w_eig, -1.0)?;
    let w_half = matrix_power(&w_eig, 0.5)?;
    let w_inv_half = matrix_power(&w_eig, -0.5)?;
    let lambda = sandwich(&w_inv_half, s);
    let lambda_eig = eigh(&lambda).ok()?;
    if lambda_eig.values.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let w_tilde = block.basis.congruence_rep(&w_inv);
    Some(Scaling { w_inv, w_half, w_inv_half, lambda, lambda_eig, s_eig, z_eig, w_tilde })
}

#[derive(Clone)]
struct Direction {
    dc: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<ComplexMatrix>,
    dz: Vec<ComplexMatrix>,
}

/// Positive-definite solve hardened for the ill-conditioned end of the
/// central path: Jacobi equilibration, a static diagonal shift under the
/// factorization, and iterative refinement against the unshifted matrix.
struct RefinedSolve {
    scale: Vec<f64>,
    scaled: RealMatrix,
    chol: Cholesky,
}

const STATIC_SHIFT: f64 = 1e-13;

impl RefinedSolve {
    fn new(mat: RealMatrix) -> Self {
        let n = mat.rows();
        let scale: Vec<f64> = (0..n)
            .map(|i| 1.0 / mat.at(i, i).abs().max(1e-120).sqrt())
            .collect();
        let mut scaled = RealMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                scaled.set(i, j, scale[i] * mat.at(i, j) * scale[j]);
            }
        }
        let mut shifted = scaled.clone();
        for i in 0..n {
            let v = shifted.at(i, i) + STATIC_SHIFT;
            shifted.set(i, i, v);
        }
        let chol = Cholesky::factor(&shifted);
        Self { scale, scaled, chol }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let target: Vec<f64> = (0..n).map(|i| b[i] * self.scale[i]).collect();
        let mut x = self.chol.solve(&target);
        // Monitored refinement: keep the iterate with the smallest residual
        // and stop as soon as a pass fails to improve it, so extreme
        // conditioning cannot turn refinement into amplification.
        let residual_of = |x: &[f64]| -> (Vec<f64>, f64) {
            let mx = self.scaled.matvec(x);
            let r: Vec<f64> = target.iter().zip(mx.iter()).map(|(t, m)| t - m).collect();
            let norm = r.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            (r, norm)
        };
        let (mut residual, mut best_norm) = residual_of(&x);
        let mut best = x.clone();
        for _ in 0..3 {
            if best_norm == 0.0 {
                break;
            }
            let correction = self.chol.solve(&residual);
            axpy(&mut x, 1.0, &correction);
            let (r, norm) = residual_of(&x);
            if norm < best_norm {
                best_norm = norm;
                best = x.clone();
                residual = r;
            } else {
                break;
            }
        }
        (0..n).map(|i| best[i] * self.scale[i]).collect()
    }
}

pub(super) fn run(problem: &SdpProblem, options: &SolveOptions) -> SdpSolution {
    let n = problem.n_vars();
    let v = problem.objective().to_vec();
    let blocks: Vec<BlockData> = problem.blocks().iter().map(BlockData::build).collect();
    let eq = EqualityData::build(problem);

    if eq.inconsistent {
        return finished(problem, SdpStatus::Infeasible, &vec![0.0; n], &identity_duals(problem), &eq, &vec![0.0; eq.m()], 0, Vec::new());
    }

    let total_rank: usize = blocks.iter().map(|b| b.k).sum();
    let v_scale = 1.0 + v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));

    // Identity-scaled interior start.
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; eq.m()];
    let mut s_mats: Vec<ComplexMatrix> = problem
        .blocks()
        .iter()
        .map(|spec| {
            let t = 1.0 + spec.f0.frobenius_norm();
            ComplexMatrix::identity(spec.f0.rows()).scale_re(t)
        })
        .collect();
    let mut z_mats: Vec<ComplexMatrix> = problem
        .blocks()
        .iter()
        .map(|spec| ComplexMatrix::identity(spec.f0.rows()).scale_re(v_scale))
        .collect();

    let mut trace = Vec::new();
    let mut stall_count = 0usize;
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0usize;
    let mut polish_attempts = 2usize;
    let mut polish_gram: Option<RefinedSolve> = None;

    for iter in 0..options.max_iter {
        iterations = iter;

        // Residuals.
        let mut rp: Vec<Vec<f64>> = Vec::with_capacity(blocks.len());
        let mut pres: f64 = 0.0;
        let mut svec_buf = Vec::new();
        for (b, block) in blocks.iter().enumerate() {
            svec_buf.resize(block.q, 0.0);
            block.basis.svec(&s_mats[b], &mut svec_buf);
            let mut jc = vec![0.0; block.q];
            block.apply_jacobian(&c, &mut jc);
            let r: Vec<f64> = (0..block.q)
                .map(|i| block.f0_svec[i] + svec_buf[i] - jc[i])
                .collect();
            pres = pres.max(dot(&r, &r).sqrt());
            rp.push(r);
        }
        let mut r_a = vec![0.0; eq.m()];
        for (i, row) in eq.rows.iter().enumerate() {
            r_a[i] = eq.rhs[i] - dot(row, &c);
            pres = pres.max(r_a[i].abs());
        }
        let mut r_d = v.clone();
        let mut zvecs: Vec<Vec<f64>> = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.iter().enumerate() {
            let mut zv = vec![0.0; block.q];
            block.basis.svec(&z_mats[b], &mut zv);
            let mut neg = vec![0.0; n];
            block.accumulate_adjoint(&zv, &mut neg);
            for (rd, ng) in r_d.iter_mut().zip(neg.iter()) {
                *rd -= ng;
            }
            zvecs.push(zv);
        }
        for (row, &yi) in eq.rows.iter().zip(y.iter()) {
            axpy(&mut r_d, -yi, row);
        }
        let dres = r_d.iter().fold(0.0f64, |m, &x| m.max(x.abs()));

        let pobj = dot(&v, &c);
        let mut dobj = dot(&eq.rhs, &y);
        for (block, zv) in blocks.iter().zip(zvecs.iter()) {
            dobj += dot(&block.f0_svec, zv);
        }
        trace.push((pobj, dobj, pres, dres));
        if std::env::var_os("QDISTURB_SDP_TRACE").is_some() {
            eprintln!(
                "sdp iter {iter:3}: pobj {pobj:+.6e} dobj {dobj:+.6e} pres {pres:.3e} dres {dres:.3e}"
            );
        }

        if !pobj.is_finite() || !dobj.is_finite() || !pres.is_finite() || !dres.is_finite() {
            status = SdpStatus::MaxIterations;
            break;
        }

        let relgap = (pobj - dobj).abs() / pobj.abs().max(1.0);
        if pres <= options.feas_tol && dres <= options.feas_tol && relgap <= options.gap_tol {
            status = SdpStatus::Optimal;
            break;
        }

        // Terminal dual polish. Once the primal and the gap have converged
        // but the dual equations carry leftover round-off (the Newton system
        // is numerically exhausted at this μ), project (z, y) back onto the
        // dual-feasibility manifold by the least-norm correction
        // [δz; δy] = [J; E]ᵀ (JᵀJ + EᵀE)⁻¹ r_d. The dual blocks move by
        // O(dres), which is within the feasibility tolerance.
        if polish_attempts > 0
            && pres <= options.feas_tol
            && relgap <= options.gap_tol
            && dres > options.feas_tol
            && dres <= 1e-5
        {
            polish_attempts -= 1;
            let gram = polish_gram.get_or_insert_with(|| {
                let mut g = RealMatrix::zeros(n, n);
                for block in &blocks {
                    for (vi, col_i) in block.vars.iter().zip(block.cols.iter()) {
                        for (vj, col_j) in block.vars.iter().zip(block.cols.iter()) {
                            if vj > vi {
                                continue;
                            }
                            let mut acc = 0.0;
                            let mut ai = col_i.iter().peekable();
                            for &(r_j, v_j) in col_j {
                                while let Some(&&(r_i, _)) = ai.peek() {
                                    if r_i < r_j {
                                        ai.next();
                                    } else {
                                        break;
                                    }
                                }
                                if let Some(&&(r_i, v_i)) = ai.peek() {
                                    if r_i == r_j {
                                        acc += v_i * v_j;
                                    }
                                }
                            }
                            let cur = g.at(*vi, *vj);
                            g.set(*vi, *vj, cur + acc);
                        }
                    }
                }
                for row in &eq.rows {
                    for i in 0..n {
                        if row[i] == 0.0 {
                            continue;
                        }
                        for j in 0..=i {
                            let cur = g.at(i, j);
                            g.set(i, j, cur + row[i] * row[j]);
                        }
                    }
                }
                for i in 0..n {
                    for j in i + 1..n {
                        let v = g.at(j, i);
                        g.set(i, j, v);
                    }
                }
                RefinedSolve::new(g)
            });
            let w = gram.solve(&r_d);
            for (b, block) in blocks.iter().enumerate() {
                let mut delta = vec![0.0; block.q];
                block.apply_jacobian(&w, &mut delta);
                let delta_mat = block.basis.smat(&delta, block.k);
                z_mats[b] = (&z_mats[b] + &delta_mat).hermitian_part();
            }
            for (i, row) in eq.rows.iter().enumerate() {
                y[i] += dot(row, &w);
            }
            continue;
        }

        // Certificate-based infeasibility checks once the iterates blow up.
        let z_mass: f64 = z_mats.iter().map(|z| z.trace().re.abs()).sum::<f64>()
            + y.iter().map(|x| x.abs()).sum::<f64>();
        if z_mass > 1e8 * v_scale {
            let inv = 1.0 / z_mass;
            let mut ray_res = vec![0.0; n];
            for (block, zv) in blocks.iter().zip(zvecs.iter()) {
                let scaled: Vec<f64> = zv.iter().map(|x| x * inv).collect();
                block.accumulate_adjoint(&scaled, &mut ray_res);
            }
            for (row, &yi) in eq.rows.iter().zip(y.iter()) {
                axpy(&mut ray_res, yi * inv, row);
            }
            let res = ray_res.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            let mut val = dot(&eq.rhs, &y) * inv;
            for (block, zv) in blocks.iter().zip(zvecs.iter()) {
                val += dot(&block.f0_svec, zv) * inv;
            }
            if res <= 1e-7 && val > 1e-7 {
                status = SdpStatus::Infeasible;
                break;
            }
        }
        let c_mass = c.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if c_mass > 1e8 {
            let inv = 1.0 / c_mass;
            let chat: Vec<f64> = c.iter().map(|x| x * inv).collect();
            let mut cone_ok = true;
            for block in &blocks {
                let mut jc = vec![0.0; block.q];
                block.apply_jacobian(&chat, &mut jc);
                let m = block.basis.smat(&jc, block.k);
                match eigh(&m.hermitian_part()) {
                    Ok(d) if d.values.first().copied().unwrap_or(0.0) >= -1e-7 => {}
                    _ => {
                        cone_ok = false;
                        break;
                    }
                }
            }
            let eq_ok = eq.rows.iter().all(|row| dot(row, &chat).abs() <= 1e-7);
            if cone_ok && eq_ok && dot(&v, &chat) < -1e-7 {
                status = SdpStatus::Unbounded;
                break;
            }
        }

        // NT scaling per block.
        let mut scalings = Vec::with_capacity(blocks.len());
        let mut scaling_failed = false;
        for (b, block) in blocks.iter().enumerate() {
            match compute_scaling(block, &s_mats[b], &z_mats[b]) {
                Some(sc) => scalings.push(sc),
                None => {
                    scaling_failed = true;
                    break;
                }
            }
        }
        if scaling_failed {
            status = SdpStatus::MaxIterations;
            break;
        }

        let mu: f64 = blocks
            .iter()
            .enumerate()
            .map(|(b, _)| s_mats[b].hs_inner(&z_mats[b]).re)
            .sum::<f64>()
            / total_rank as f64;

        // Schur complement and its factorization, shared by both directions.
        let mut schur = RealMatrix::zeros(n, n);
        for (block, sc) in blocks.iter().zip(scalings.iter()) {
            accumulate_schur(block, sc, &mut schur);
        }
        // Mirror the lower triangle.
        for i in 0..n {
            for j in i + 1..n {
                let v = schur.at(j, i);
                schur.set(i, j, v);
            }
        }
        // Augmented elimination: the cone part alone may be singular along
        // directions only the equalities pin (e.g. a uniform shift soaked up
        // by a slack variable). Adding ρ EᵀE and ρ Eᵀr_A to the reduced
        // system leaves the saddle solution unchanged while making the
        // reduced matrix definite whenever the full system is.
        let mut rho = 0.0;
        if eq.m() > 0 {
            let mut max_diag = 0.0f64;
            for i in 0..n {
                max_diag = max_diag.max(schur.at(i, i));
            }
            rho = 1.0 + max_diag;
            for row in &eq.rows {
                for i in 0..n {
                    if row[i] == 0.0 {
                        continue;
                    }
                    let w = rho * row[i];
                    axpy(schur.row_mut(i), w, row);
                }
            }
        }
        let chol = RefinedSolve::new(schur);
        // Equality Schur complement E M⁻¹ Eᵀ.
        let eq_solves: Vec<Vec<f64>> = eq.rows.iter().map(|row| chol.solve(row)).collect();
        let eq_chol = if eq.m() > 0 {
            let mut em = RealMatrix::zeros(eq.m(), eq.m());
            for i in 0..eq.m() {
                for j in 0..eq.m() {
                    em.set(i, j, dot(&eq.rows[i], &eq_solves[j]));
                }
            }
            Some(RefinedSolve::new(em))
        } else {
            None
        };

        // Solves the Newton system for given residual targets; the scaled
        // complementarity right-hand side enters through d_mats.
        let core_direction = |rp_in: &[Vec<f64>],
                              ra_in: &[f64],
                              rd_in: &[f64],
                              d_mats: &[ComplexMatrix]|
         -> Direction {
            let mut u = vec![0.0; n];
            let mut x_mats = Vec::with_capacity(blocks.len());
            let mut buf = Vec::new();
            for (b, block) in blocks.iter().enumerate() {
                let sc = &scalings[b];
                let rp_mat = block.basis.smat(&rp_in[b], block.k);
                let x = &sandwich(&sc.w_inv, &rp_mat) + &sandwich(&sc.w_inv_half, &d_mats[b]);
                buf.resize(block.q, 0.0);
                block.basis.svec(&x, &mut buf);
                block.accumulate_adjoint(&buf, &mut u);
                x_mats.push(x);
            }
            let mut rhs1: Vec<f64> = u.iter().zip(rd_in.iter()).map(|(a, b)| a - b).collect();
            for (row, &ra) in eq.rows.iter().zip(ra_in.iter()) {
                axpy(&mut rhs1, rho * ra, row);
            }
            let t1 = chol.solve(&rhs1);
            let dy = if let Some(eq_chol) = &eq_chol {
                let rhs_y: Vec<f64> = (0..eq.m())
                    .map(|i| ra_in[i] - dot(&eq.rows[i], &t1))
                    .collect();
                eq_chol.solve(&rhs_y)
            } else {
                Vec::new()
            };
            let mut dc = t1;
            for (x_j, &dy_j) in eq_solves.iter().zip(dy.iter()) {
                axpy(&mut dc, dy_j, x_j);
            }
            let mut ds = Vec::with_capacity(blocks.len());
            let mut dz = Vec::with_capacity(blocks.len());
            for (b, block) in blocks.iter().enumerate() {
                let sc = &scalings[b];
                let mut jdc = vec![0.0; block.q];
                block.apply_jacobian(&dc, &mut jdc);
                let jdc_mat = block.basis.smat(&jdc, block.k);
                let ds_vec: Vec<f64> =
                    jdc.iter().zip(rp_in[b].iter()).map(|(a, b)| a - b).collect();
                ds.push(block.basis.smat(&ds_vec, block.k).hermitian_part());
                dz.push((&x_mats[b] - &sandwich(&sc.w_inv, &jdc_mat)).hermitian_part());
            }
            Direction { dc, dy, ds, dz }
        };

        // One refinement pass against the dual and equality equations: the
        // ill-conditioned scaling sandwiches near convergence lose enough
        // digits in the dual direction to cap the reachable dual residual,
        // and a correction solve through the same factorization restores it.
        let direction_error = |dir: &Direction| -> (Vec<f64>, Vec<f64>, f64) {
            let mut lhs_d = vec![0.0; n];
            let mut buf = Vec::new();
            for (b, block) in blocks.iter().enumerate() {
                buf.resize(block.q, 0.0);
                block.basis.svec(&dir.dz[b], &mut buf);
                block.accumulate_adjoint(&buf, &mut lhs_d);
            }
            for (row, &dyi) in eq.rows.iter().zip(dir.dy.iter()) {
                axpy(&mut lhs_d, dyi, row);
            }
            let rho_d: Vec<f64> = r_d.iter().zip(lhs_d.iter()).map(|(r, l)| r - l).collect();
            let rho_a: Vec<f64> = (0..eq.m())
                .map(|i| r_a[i] - dot(&eq.rows[i], &dir.dc))
                .collect();
            let err = rho_d
                .iter()
                .chain(rho_a.iter())
                .fold(0.0f64, |m, &x| m.max(x.abs()));
            (rho_d, rho_a, err)
        };

        let solve_direction = |d_mats: &[ComplexMatrix]| -> Direction {
            let mut dir = core_direction(&rp, &r_a, &r_d, d_mats);
            let zero_rp: Vec<Vec<f64>> =
                blocks.iter().map(|block| vec![0.0; block.q]).collect();
            let zero_d: Vec<ComplexMatrix> =
                blocks.iter().map(|block| ComplexMatrix::zeros(block.k, block.k)).collect();
            let (mut rho_d, mut rho_a, mut err) = direction_error(&dir);
            for _ in 0..3 {
                if err <= 1e-14 {
                    break;
                }
                let fix = core_direction(&zero_rp, &rho_a, &rho_d, &zero_d);
                let mut candidate = dir.clone();
                axpy(&mut candidate.dc, 1.0, &fix.dc);
                axpy(&mut candidate.dy, 1.0, &fix.dy);
                for (b, m) in candidate.ds.iter_mut().enumerate() {
                    *m = (&*m + &fix.ds[b]).hermitian_part();
                }
                for (b, m) in candidate.dz.iter_mut().enumerate() {
                    *m = (&*m + &fix.dz[b]).hermitian_part();
                }
                let (next_rho_d, next_rho_a, next_err) = direction_error(&candidate);
                if next_err < err {
                    dir = candidate;
                    rho_d = next_rho_d;
                    rho_a = next_rho_a;
                    err = next_err;
                } else {
                    break;
                }
            }
            dir
        };

        // Predictor: σ = 0, second-order term absent; D = −λ.
        let d_pred: Vec<ComplexMatrix> = scalings.iter().map(|sc| sc.lambda.scale_re(-1.0)).collect();
        let pred = solve_direction(&d_pred);

        let alpha_p_aff = blocks
            .iter()
            .enumerate()
            .map(|(b, _)| max_step(&scalings[b].s_eig, &pred.ds[b]))
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let alpha_d_aff = blocks
            .iter()
            .enumerate()
            .map(|(b, _)| max_step(&scalings[b].z_eig, &pred.dz[b]))
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let mut gap_aff = 0.0;
        for b in 0..blocks.len() {
            let s_new = &s_mats[b] + &pred.ds[b].scale_re(alpha_p_aff);
            let z_new = &z_mats[b] + &pred.dz[b].scale_re(alpha_d_aff);
            gap_aff += s_new.hs_inner(&z_new).re;
        }
        let mu_aff = (gap_aff / total_rank as f64).max(0.0);
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-12, 1.0);

        // Corrector: D = L_λ⁻¹(σμ 1 − λ² − H(ΔS̃ᵃ ΔZ̃ᵃ)).
        let d_corr: Vec<ComplexMatrix> = blocks
            .iter()
            .enumerate()
            .map(|(b, block)| {
                let sc = &scalings[b];
                let ds_tilde = sandwich(&sc.w_inv_half, &pred.ds[b]);
                let dz_tilde = sandwich(&sc.w_half, &pred.dz[b]);
                let cross = &ds_tilde * &dz_tilde;
                let second = cross.hermitian_part();
                let lambda_sq = &sc.lambda * &sc.lambda;
                let mut rhs = ComplexMatrix::identity(block.k).scale_re(sigma * mu);
                rhs = &rhs - &lambda_sq.hermitian_part();
                rhs = &rhs - &second;
                lyapunov_solve(&sc.lambda_eig, &rhs)
            })
            .collect();
        let dir = solve_direction(&d_corr);

        let alpha_p = blocks
            .iter()
            .enumerate()
            .map(|(b, _)| max_step(&scalings[b].s_eig, &dir.ds[b]))
            .fold(f64::INFINITY, f64::min)
            .min(1.0 / STEP_FRACTION)
            * STEP_FRACTION;
        let alpha_d = blocks
            .iter()
            .enumerate()
            .map(|(b, _)| max_step(&scalings[b].z_eig, &dir.dz[b]))
            .fold(f64::INFINITY, f64::min)
            .min(1.0 / STEP_FRACTION)
            * STEP_FRACTION;

        if alpha_p.max(alpha_d) < 1e-6 {
            stall_count += 1;
            if stall_count >= 3 {
                status = SdpStatus::MaxIterations;
                break;
            }
        } else {
            stall_count = 0;
        }

        axpy(&mut c, alpha_p, &dir.dc);
        for (b, s) in s_mats.iter_mut().enumerate() {
            *s = (&*s + &dir.ds[b].scale_re(alpha_p)).hermitian_part();
        }
        axpy(&mut y, alpha_d, &dir.dy);
        for (b, z) in z_mats.iter_mut().enumerate() {
            *z = (&*z + &dir.dz[b].scale_re(alpha_d)).hermitian_part();
        }
    }

    finished(problem, status, &c, &z_mats, &eq, &y, iterations, trace)
}

fn identity_duals(problem: &SdpProblem) -> Vec<ComplexMatrix> {
    problem
        .blocks()
        .iter()
        .map(|spec| ComplexMatrix::identity(spec.f0.rows()))
        .collect()
}

fn accumulate_schur(block: &BlockData, sc: &Scaling, schur: &mut RealMatrix) {
    if let Some(mapping) = &block.injection {
        for (ri, &(vi, ci)) in mapping.iter().enumerate() {
            if vi == usize::MAX {
                continue;
            }
            for (rj, &(vj, cj)) in mapping.iter().enumerate() {
                if vj == usize::MAX || vj > vi {
                    continue;
                }
                let cur = schur.at(vi, vj);
                schur.set(vi, vj, cur + ci * cj * sc.w_tilde.at(ri, rj));
            }
        }
        return;
    }
    let dense = block.dense_cols.as_ref().expect("dense path");
    let active = block.vars.len();
    let q = block.q;
    // UT[idx] = W̃ · col(idx)
    let mut ut = RealMatrix::zeros(active, q);
    for idx in 0..active {
        let col = dense.row(idx);
        let dst = ut.row_mut(idx);
        for r in 0..q {
            dst[r] = dot(sc.w_tilde.row(r), col);
        }
    }
    for i_idx in 0..active {
        let vi = block.vars[i_idx];
        let col_i = dense.row(i_idx);
        for j_idx in 0..active {
            let vj = block.vars[j_idx];
            if vj > vi {
                continue;
            }
            let cur = schur.at(vi, vj);
            schur.set(vi, vj, cur + dot(col_i, ut.row(j_idx)));
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finished(
    problem: &SdpProblem,
    status: SdpStatus,
    c: &[f64],
    z_mats: &[ComplexMatrix],
    eq: &EqualityData,
    y: &[f64],
    iterations: usize,
    trace: Vec<(f64, f64, f64, f64)>,
) -> SdpSolution {
    let primal_objective = dot(problem.objective(), c);
    let mut dual_objective = 0.0;
    for (spec, z) in problem.blocks().iter().zip(z_mats.iter()) {
        dual_objective += spec.f0.hs_inner(z).re;
    }
    for (i, &orig) in eq.original.iter().enumerate() {
        dual_objective += problem.equalities()[orig].rhs * y[i];
    }

    // Residuals recomputed on the final iterate.
    let mut primal_residual = 0.0f64;
    for b in 0..problem.block_count() {
        let slack = problem.slack_matrix(b, c);
        if let Ok(d) = eigh(&slack) {
            primal_residual = primal_residual.max((-d.values.first().copied().unwrap_or(0.0)).max(0.0));
        }
    }
    for eq_row in problem.equalities() {
        let lhs: f64 = eq_row.coeffs.iter().map(|&(var, w)| w * c[var]).sum();
        primal_residual = primal_residual.max((lhs - eq_row.rhs).abs());
    }
    let mut dual_eq = vec![0.0f64; problem.n_vars()];
    for (spec, z) in problem.blocks().iter().zip(z_mats.iter()) {
        for (var, f) in &spec.terms {
            dual_eq[*var] += f.hs_inner(z).re;
        }
    }
    let mut multipliers = vec![0.0; eq.total];
    for (i, &orig) in eq.original.iter().enumerate() {
        multipliers[orig] = y[i];
    }
    for (eq_row, &mult) in problem.equalities().iter().zip(multipliers.iter()) {
        for &(var, w) in &eq_row.coeffs {
            dual_eq[var] += w * mult;
        }
    }
    let dual_residual = dual_eq
        .iter()
        .zip(problem.objective())
        .map(|(lhs, v)| (lhs - v).abs())
        .fold(0.0f64, f64::max);

    SdpSolution {
        status,
        primal: c.to_vec(),
        primal_objective,
        dual_blocks: z_mats.iter().map(|z| z.hermitian_part()).collect(),
        equality_multipliers: multipliers,
        dual_objective,
        gap: (primal_objective - dual_objective).abs(),
        primal_residual,
        dual_residual,
        iterations,
        trace,
    }
}
