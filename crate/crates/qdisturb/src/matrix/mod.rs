//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are stored row-major over `Complex64`. Everything here is a pure
//! function of its inputs; values are immutable after construction.

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

mod basis;
mod eigh;
mod real;

pub use basis::{hermitian_basis, HermitianBasis};
pub use eigh::{eigh, Eigh};
pub use real::RealMatrix;

pub(crate) use real::{axpy, dot, Cholesky};

/// Errors produced by the linear-algebra layer.
#[derive(Debug, Clone, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {deviation:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("row {row} has length {len}, expected {expected}")]
    RaggedRows { row: usize, len: usize, expected: usize },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("tensor factors {first}x{second} do not match matrix size {size}")]
    BadTensorFactors { first: usize, second: usize, size: usize },
    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
}

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, MatrixError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(MatrixError::RaggedRows { row: i, len: row.len(), expected: ncols });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: nrows, cols: ncols, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Rank-one matrix |u⟩⟨v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Complex64::conj).collect(),
        }
    }

    /// Conjugate transpose M†.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Hilbert-Schmidt inner product tr(self† other).
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.at(i, j) + self.at(j, i).conj()) * 0.5
        })
    }

    /// Largest entrywise deviation from Hermiticity, max |M_{ij} − conj(M_{ji})|.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian_within(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tol
    }

    fn require_hermitian(&self, tol: f64) -> Result<(), MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(MatrixError::NotHermitian { deviation, tolerance: tol });
        }
        Ok(())
    }

    /// Matrix-vector product M·v.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.at(i, j);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! check_same_shape {
    ($a:expr, $b:expr) => {
        assert_eq!(
            ($a.rows, $a.cols),
            ($b.rows, $b.cols),
            "matrix shape mismatch: {}x{} vs {}x{}",
            $a.rows,
            $a.cols,
            $b.rows,
            $b.cols
        );
    };
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        check_same_shape!(self, rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        check_same_shape!(self, rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row.iter()) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Kronecker product, (A⊗B)_{(i,k),(j,l)} = A_{ij} B_{kl}.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.at(i, j);
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.at(k, l));
                }
            }
        }
    }
    out
}

/// Partial trace over one tensor factor of a matrix on C^{d_first} ⊗ C^{d_second}.
pub fn partial_trace(
    m: &ComplexMatrix,
    d_first: usize,
    d_second: usize,
    subsystem: Subsystem,
) -> Result<ComplexMatrix, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if d_first * d_second != m.rows() {
        return Err(MatrixError::BadTensorFactors {
            first: d_first,
            second: d_second,
            size: m.rows(),
        });
    }
    match subsystem {
        Subsystem::First => {
            let mut out = ComplexMatrix::zeros(d_second, d_second);
            for k in 0..d_second {
                for l in 0..d_second {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..d_first {
                        acc += m.at(j * d_second + k, j * d_second + l);
                    }
                    out.set(k, l, acc);
                }
            }
            Ok(out)
        }
        Subsystem::Second => {
            let mut out = ComplexMatrix::zeros(d_first, d_first);
            for i in 0..d_first {
                for j in 0..d_first {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..d_second {
                        acc += m.at(i * d_second + k, j * d_second + k);
                    }
                    out.set(i, j, acc);
                }
            }
            Ok(out)
        }
    }
}

/// AB − BA.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(MatrixError::DimensionMismatch {
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    Ok(&(a * b) - &(b * a))
}

/// Largest singular value of M.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    // σ_max(M)² is the top eigenvalue of the Hermitian Gram matrix; use the
    // smaller of M†M and MM†.
    let gram = if m.rows() >= m.cols() {
        &m.adjoint() * m
    } else {
        m * &m.adjoint()
    };
    let decomp = eigh::eigh_unchecked(&gram.hermitian_part()).expect("Gram eigendecomposition");
    decomp.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// True iff the minimum eigenvalue of a Hermitian matrix is ≥ −tol.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool, MatrixError> {
    Ok(min_eigenvalue(m)? >= -tol)
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64, MatrixError> {
    m.require_hermitian(crate::tol::HERMITICITY)?;
    let decomp = eigh(m)?;
    Ok(decomp.values.first().copied().unwrap_or(0.0))
}

/// Positive-semidefinite square root. Eigenvalues in [−tol, 0) are clamped
/// to zero; anything below −tol is rejected.
pub fn sqrt_psd(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, MatrixError> {
    m.require_hermitian(crate::tol::HERMITICITY)?;
    let decomp = eigh(m)?;
    if let Some(&min) = decomp.values.first() {
        if min < -tol {
            return Err(MatrixError::NotPositiveSemidefinite { min_eigenvalue: min });
        }
    }
    let roots: Vec<f64> = decomp.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    Ok(decomp.recombine(&roots))
}

/// Trace norm Σ|λ_i| of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> Result<f64, MatrixError> {
    m.require_hermitian(crate::tol::HERMITICITY)?;
    let decomp = eigh(m)?;
    Ok(decomp.values.iter().map(|v| v.abs()).sum())
}
