//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here works on small Hermitian matrices (a few hundred rows at
//! most). Eigendecompositions come from nalgebra's Hermitian tridiagonal QL
//! iteration; the wrappers below add ordering, residual checks and the
//! cone operations the solvers need.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Default numerical tolerance for rank decisions and PSD checks.
pub const DEFAULT_TOL: f64 = 1e-10;

const EIGH_MAX_SWEEPS: usize = 1000;

/// A square complex matrix that is Hermitian by construction.
///
/// The constructors mirror the upper triangle onto the lower one and drop
/// the imaginary part of the diagonal, so `m[(i, j)] == m[(j, i)].conj()`
/// holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Builds from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(f(i, i).re, 0.0);
            for j in (i + 1)..dim {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        HermitianMatrix(m)
    }

    /// Accepts `m` if it is square, finite, and Hermitian to `1e-12·‖m‖`,
    /// then symmetrizes it.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("matrix has non-finite entries".into()));
        }
        let scale = m.norm().max(1.0);
        let skew = (&m - m.adjoint()).norm();
        if skew > 1e-12 * scale {
            return Err(Error::Invalid(format!(
                "matrix is not Hermitian (skew part {skew:e})"
            )));
        }
        Ok(Self::symmetrize(&m))
    }

    /// Hermitian part `(m + m*)/2` of an arbitrary square matrix.
    pub fn symmetrize(m: &ComplexMatrix) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Rank-one matrix `v v*`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    /// Entrywise (Schur) product.
    pub fn schur(&self, other: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), other.dim(), "schur product dimension mismatch");
        HermitianMatrix(self.0.component_mul(&other.0))
    }

    pub fn conj(&self) -> HermitianMatrix {
        HermitianMatrix(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, c: f64) -> HermitianMatrix {
        HermitianMatrix(&self.0 * C64::new(c, 0.0))
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &other.0)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &other.0 * C64::new(c, 0.0))
    }

    /// Real inner product `Re tr(self* other)`.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Congruence `a · self · a*` with an arbitrary (not necessarily square) `a`.
    pub fn congruence(&self, a: &ComplexMatrix) -> HermitianMatrix {
        HermitianMatrix::symmetrize(&(a * &self.0 * a.adjoint()))
    }

    /// Quadratic form `v* self v`.
    pub fn quadratic_form(&self, v: &[C64]) -> f64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += v[i].conj() * self.0[(i, j)] * v[j];
            }
        }
        acc.re
    }
}

/// Ascending eigenvalues with matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k).iter().copied().collect()
    }

    /// `V f(Λ) V*` for a real spectral function `f`.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let c = C64::new(f(lam), 0.0);
            for i in 0..n {
                scaled[(i, k)] *= c;
            }
        }
        HermitianMatrix::symmetrize(&(scaled * self.vectors.adjoint()))
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(m: &HermitianMatrix) -> Result<Eigh> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Dimension("eigh of an empty matrix".into()));
    }
    let norm = m.frobenius_norm();
    if norm == 0.0 {
        return Ok(Eigh {
            values: vec![0.0; n],
            vectors: ComplexMatrix::identity(n, n),
        });
    }
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, EIGH_MAX_SWEEPS * n)
        .ok_or(Error::EigenNonConvergence {
            residual: f64::NAN,
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let lambda = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        n,
        values.iter().map(|&v| C64::new(v, 0.0)),
    ));
    let residual = (m.as_matrix() * &vectors - &vectors * lambda).norm();
    if residual > 1e-12 * (n as f64) * norm.max(1e-300) * 100.0 {
        return Err(Error::EigenNonConvergence { residual });
    }
    Ok(Eigh { values, vectors })
}

/// Smallest eigenvalue together with a unit eigenvector.
pub fn min_eig(m: &HermitianMatrix) -> Result<(f64, Vec<C64>)> {
    let e = eigh(m)?;
    Ok((e.min(), e.vector(0)))
}

/// Frobenius-nearest positive semidefinite matrix (eigenvalue clipping).
pub fn psd_project(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eigh(m)?;
    if e.min() >= 0.0 {
        return Ok(m.clone());
    }
    Ok(e.reassemble(|l| l.max(0.0)))
}

/// Gram factor `L` with `L L* ≈ m`, dropping eigenvalues below the rank cutoff.
///
/// The cutoff is `rank_tol · min(1, λ_max)`: relative for small matrices,
/// absolute once `λ_max ≥ 1`, so that `‖L L* − m‖_F ≤ rank_tol·√dim` always.
/// Each column is phase-normalized so its largest-modulus entry is real and
/// positive.
pub fn psd_factor(m: &HermitianMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    let e = eigh(m)?;
    if e.min() < -rank_tol {
        return Err(Error::NotPsd {
            eigenvalue: e.min(),
        });
    }
    let lmax = e.max().max(0.0);
    let cutoff = rank_tol * lmax.min(1.0);
    let keep: Vec<usize> = (0..e.values.len())
        .rev()
        .filter(|&k| e.values[k] > cutoff && e.values[k] > 0.0)
        .collect();
    let n = m.dim();
    let mut l = ComplexMatrix::zeros(n, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        let root = e.values[k].sqrt();
        let v = e.vectors.column(k);
        let pivot = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            l[(i, col)] = v[i] * phase * root;
        }
    }
    Ok(l)
}

/// Largest generalized eigenvalue of the pencil `(a, b)`, i.e.
/// `sup_x (x*ax)/(x*bx)`, for Hermitian `a` and positive definite `b`.
pub fn pencil_max(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "pencil of {}x{} and {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let eb = eigh(b)?;
    if eb.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig: eb.min() });
    }
    let w = eb.reassemble(|l| 1.0 / l.sqrt());
    let whitened = a.congruence(w.as_matrix());
    Ok(eigh(&whitened)?.max())
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let gram = if m.nrows() >= m.ncols() {
        HermitianMatrix::symmetrize(&(m.adjoint() * m))
    } else {
        HermitianMatrix::symmetrize(&(m * m.adjoint()))
    };
    Ok(eigh(&gram)?.max().max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn inv_sqrt(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eigh(m)?;
    if e.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig: e.min() });
    }
    Ok(e.reassemble(|l| 1.0 / l.sqrt()))
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eigh(m)?;
    Ok(e.reassemble(|l| l.max(0.0).sqrt()))
}

/// Hermitian inverse of a positive definite matrix.
pub fn inv_pd(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eigh(m)?;
    if e.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig: e.min() });
    }
    Ok(e.reassemble(|l| 1.0 / l))
}
