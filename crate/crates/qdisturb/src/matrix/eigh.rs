//! Dense complex Hermitian eigendecomposition.
//!
//! Householder reduction to a real symmetric tridiagonal matrix (with a
//! diagonal phase transformation absorbing the complex subdiagonal) followed
//! by the implicit-shift QL iteration, derived from the Algol procedures
//! tred2/tql2 (Bowdler, Martin, Reinsch, Wilkinson) and their EISPACK
//! descendants. Eigenvalues are returned ascending; each eigenvector column
//! has its first significantly nonzero component rotated to the positive
//! real axis so identical inputs give identical outputs.

use num_complex::Complex64;

use super::{ComplexMatrix, MatrixError};

/// Result of [`eigh`]: `M = vectors · diag(values) · vectors†`.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the corresponding eigenvectors.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// Rebuilds `vectors · diag(f(values)) · vectors†` for modified spectra.
    pub fn recombine(&self, values: &[f64]) -> ComplexMatrix {
        let n = self.vectors.rows();
        debug_assert_eq!(values.len(), n);
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            if values[k] == 0.0 {
                continue;
            }
            let col = self.vectors.column(k);
            for i in 0..n {
                let vik = col[i] * values[k];
                for j in 0..n {
                    let z = vik * col[j].conj();
                    let cur = out.at(i, j);
                    out.set(i, j, cur + z);
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects non-square input and Hermiticity deviations above the crate
/// tolerance; the tolerated asymmetry is symmetrized away before factoring.
pub fn eigh(m: &ComplexMatrix) -> Result<Eigh, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if !m.is_finite() {
        return Err(MatrixError::NonFinite);
    }
    let deviation = m.hermiticity_deviation();
    if deviation > crate::tol::HERMITICITY {
        return Err(MatrixError::NotHermitian { deviation, tolerance: crate::tol::HERMITICITY });
    }
    eigh_unchecked(&m.hermitian_part())
}

/// Same as [`eigh`] but assumes the input is already exactly Hermitian.
pub(crate) fn eigh_unchecked(m: &ComplexMatrix) -> Result<Eigh, MatrixError> {
    let n = m.rows();
    if n == 0 {
        return Ok(Eigh { values: Vec::new(), vectors: ComplexMatrix::zeros(0, 0) });
    }
    let mut a = m.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut diag = vec![0.0f64; n];
    let mut sub = vec![0.0f64; n];

    tridiagonalize(&mut a, &mut q, &mut diag, &mut sub);
    ql_implicit(&mut diag, &mut sub, &mut q)?;
    sort_and_fix_phases(&mut diag, &mut q);

    Ok(Eigh { values: diag, vectors: q })
}

/// Householder reduction A → Q† A Q tridiagonal, with complex subdiagonal
/// phases pushed into Q so that `diag`/`sub` are real and `sub` nonnegative.
fn tridiagonalize(a: &mut ComplexMatrix, q: &mut ComplexMatrix, diag: &mut [f64], sub: &mut [f64]) {
    let n = a.rows();
    let mut esub = vec![Complex64::new(0.0, 0.0); n];

    for k in 0..n.saturating_sub(2) {
        // Column below the subdiagonal entry.
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += a.at(i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm <= f64::MIN_POSITIVE {
            esub[k] = a.at(k + 1, k);
            continue;
        }
        let x0 = a.at(k + 1, k);
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;

        // Householder vector v = x − α e₁, supported on rows k+1..n.
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in k + 1..n {
            v[i] = a.at(i, k);
        }
        v[k + 1] -= alpha;
        let vnorm_sq: f64 = v.iter().map(Complex64::norm_sqr).sum();
        if vnorm_sq <= f64::MIN_POSITIVE {
            esub[k] = a.at(k + 1, k);
            continue;
        }
        let tau = 2.0 / vnorm_sq;

        // Hermitian rank-2 update A ← A − v w† − w v† with
        // p = τAv, w = p − (τ v†p / 2) v.
        let mut p = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                acc += a.at(i, j) * v[j];
            }
            p[i] = acc * tau;
        }
        let vp: Complex64 = v.iter().zip(p.iter()).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = vp * (tau / 2.0);
        let w: Vec<Complex64> = p.iter().zip(v.iter()).map(|(pi, vi)| pi - kappa * vi).collect();
        for i in 0..n {
            for j in 0..n {
                let delta = v[i] * w[j].conj() + w[i] * v[j].conj();
                let cur = a.at(i, j);
                a.set(i, j, cur - delta);
            }
        }
        // The transformed column is (α, 0, …, 0) by construction.
        a.set(k + 1, k, alpha);
        a.set(k, k + 1, alpha.conj());
        for i in k + 2..n {
            a.set(i, k, Complex64::new(0.0, 0.0));
            a.set(k, i, Complex64::new(0.0, 0.0));
        }
        esub[k] = alpha;

        // Q ← Q (I − τ v v†).
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                acc += q.at(i, j) * v[j];
            }
            acc *= tau;
            for j in k + 1..n {
                let cur = q.at(i, j);
                q.set(i, j, cur - acc * v[j].conj());
            }
        }
    }
    if n >= 2 {
        esub[n - 2] = a.at(n - 1, n - 2);
    }

    // Diagonal phase matrix making the subdiagonal real and nonnegative.
    let mut phase = Complex64::new(1.0, 0.0);
    for i in 0..n {
        if i > 0 {
            let e = esub[i - 1];
            let mag = e.norm();
            let step = if mag > 0.0 { e / mag } else { Complex64::new(1.0, 0.0) };
            phase *= step;
            sub[i - 1] = mag;
            for r in 0..n {
                let cur = q.at(r, i);
                q.set(r, i, cur * phase);
            }
        }
        diag[i] = a.at(i, i).re;
    }
    if n >= 1 {
        sub[n - 1] = 0.0;
    }
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal matrix,
/// accumulating the (real) rotations into the complex column basis.
fn ql_implicit(d: &mut [f64], e: &mut [f64], v: &mut ComplexMatrix) -> Result<(), MatrixError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let eps = 2.0f64.powi(-52);
    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(MatrixError::NoConvergence);
                }

                // Wilkinson-style shift.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for i in l + 2..n {
                    d[i] -= h;
                }
                f += h;

                // Implicit QL sweep.
                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let gg = c * e[i];
                    let hh = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * gg;
                    d[i + 1] = hh + s * (c * gg + s * d[i]);

                    for k in 0..v.rows() {
                        let hv = v.at(k, i + 1);
                        let vi = v.at(k, i);
                        v.set(k, i + 1, vi * s + hv * c);
                        v.set(k, i, vi * c - hv * s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_and_fix_phases(d: &mut [f64], v: &mut ComplexMatrix) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));

    let sorted_values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut sorted = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Rotate the first significant component onto the positive real axis.
        let col = v.column(old_col);
        let maxabs = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = col.iter().find(|z| z.norm() > 1e-12 * maxabs.max(1e-300));
        let factor = match pivot {
            Some(z) if z.norm() > 0.0 => z.conj() / z.norm(),
            _ => Complex64::new(1.0, 0.0),
        };
        for i in 0..n {
            sorted.set(i, new_col, col[i] * factor);
        }
    }
    d.copy_from_slice(&sorted_values);
    *v = sorted;
}
