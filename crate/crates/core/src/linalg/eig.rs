use faer::{Par, Side};
use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::operator::HERMITIAN_TOLERANCE;
use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// U diag(f(λ)) U†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let u = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| u[(i, k)] * u[(j, k)].conj() * fv[k]).sum()
        })
    }
}

/// Checked Hermitian eigendecomposition of a square matrix.
pub fn hermitian_eig_matrix(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { deviation });
    }
    let evd = h
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values: Vec<f64> = (0..h.rows()).map(|k| evd.S()[k].re).collect();
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_faer(evd.U()),
    })
}

/// Smallest eigenvalue of a Hermitian matrix, skipping eigenvectors.
pub(crate) fn min_eigenvalue_matrix(h: &ComplexMatrix) -> Result<f64> {
    let values = h
        .to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub(crate) fn cholesky_lower(h: &ComplexMatrix) -> Option<ComplexMatrix> {
    let llt = h.to_faer().llt(Side::Lower).ok()?;
    Some(ComplexMatrix::from_faer(llt.L()))
}

/// Inverse of a lower-triangular matrix.
pub(crate) fn invert_lower(l: &ComplexMatrix) -> ComplexMatrix {
    let src = l.to_faer();
    let mut dst = faer::Mat::<Complex64>::zeros(l.rows(), l.cols());
    faer::linalg::triangular_inverse::invert_lower_triangular(dst.as_mut(), src.as_ref(), Par::Seq);
    ComplexMatrix::from_faer(dst.as_ref())
}
