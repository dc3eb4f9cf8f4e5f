//! Orthonormal Hermitian operator basis (generalized Gell-Mann family).

use num_complex::Complex64;

use super::{ComplexMatrix, MatrixError};

/// An ordered orthonormal basis of Hermitian d×d matrices under the
/// Hilbert-Schmidt inner product, with the scaled identity first.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis elements, d².
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    /// Real coordinates tr(E_i M) of a Hermitian matrix.
    pub fn coordinates(&self, m: &ComplexMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| e.hs_inner(m).re).collect()
    }

    /// Σ_i c_i E_i.
    pub fn reconstruct(&self, coords: &[f64]) -> ComplexMatrix {
        debug_assert_eq!(coords.len(), self.elements.len());
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (c, e) in coords.iter().zip(self.elements.iter()) {
            if *c == 0.0 {
                continue;
            }
            out = &out + &e.scale_re(*c);
        }
        out
    }
}

/// Generalized Gell-Mann basis: E_0 = 1/√d, then the symmetric, antisymmetric
/// and diagonal traceless families, each scaled to unit Hilbert-Schmidt norm.
pub fn hermitian_basis(d: usize) -> Result<HermitianBasis, MatrixError> {
    if d == 0 {
        return Err(MatrixError::ZeroDimension);
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut elements = Vec::with_capacity(d * d);
    elements.push(ComplexMatrix::identity(d).scale_re(1.0 / (d as f64).sqrt()));

    // (|j⟩⟨k| + |k⟩⟨j|)/√2 for j < k.
    for j in 0..d {
        for k in j + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m.set(j, k, Complex64::new(inv_sqrt2, 0.0));
            m.set(k, j, Complex64::new(inv_sqrt2, 0.0));
            elements.push(m);
        }
    }
    // (−i|j⟩⟨k| + i|k⟩⟨j|)/√2 for j < k.
    for j in 0..d {
        for k in j + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m.set(j, k, Complex64::new(0.0, -inv_sqrt2));
            m.set(k, j, Complex64::new(0.0, inv_sqrt2));
            elements.push(m);
        }
    }
    // Diagonal family: (Σ_{m<l} |m⟩⟨m| − l |l⟩⟨l|) / √(l(l+1)).
    for l in 1..d {
        let scale = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            m.set(j, j, Complex64::new(scale, 0.0));
        }
        m.set(l, l, Complex64::new(-(l as f64) * scale, 0.0));
        elements.push(m);
    }

    debug_assert_eq!(elements.len(), d * d);
    Ok(HermitianBasis { dim: d, elements })
}
