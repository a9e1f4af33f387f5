use num_complex::Complex64;

use super::eig::{hermitian_eig_matrix, HermitianEigen};
use super::matrix::{ComplexMatrix, ZERO};
use super::tensor::{self, FactorSubset};
use crate::error::{Error, Result};

/// Relative tolerance used when validating Hermiticity of inputs.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

/// A Hermitian operator on a tensor-product space.
///
/// The matrix side equals the product of `dims`. Constructors symmetrize
/// their result as (X + X†)/2 after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        check_dims(&dims, &matrix)?;
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            dims,
            matrix: matrix.hermitian_part(),
        })
    }

    /// Single-factor operator.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(vec![matrix.rows()], matrix)
    }

    /// Symmetrizes without the tolerance check; used on outputs whose
    /// Hermiticity is guaranteed by construction.
    pub(crate) fn from_parts(dims: Vec<usize>, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.rows());
        Self {
            dims,
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            matrix: ComplexMatrix::identity(n),
        }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            matrix: ComplexMatrix::zeros(n, n),
        }
    }

    /// Rank-one projector onto `ket`, normalized to unit length.
    pub fn projector(ket: &[Complex64]) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot project onto a zero vector".into()));
        }
        let v: Vec<Complex64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self::from_parts(vec![v.len()], ComplexMatrix::outer(&v, &v)))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            dims: vec![values.len()],
            matrix: ComplexMatrix::from_real_diagonal(values),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Relabels the tensor factors; the product must not change.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, &self.matrix)?;
        self.dims = dims;
        Ok(self)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// tr(self · other), real for Hermitian pairs.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "inner product of {}- and {}-dimensional operators",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.matrix.trace_product(&other.matrix).re)
    }

    /// tr(X²).
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "operator dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    pub fn partial_trace(&self, traced: &FactorSubset) -> Result<Self> {
        partial_trace(self, traced)
    }

    pub fn partial_transpose(&self, subset: &FactorSubset) -> Result<Self> {
        partial_transpose(self, subset)
    }

    pub fn eig(&self) -> Result<HermitianEigen> {
        hermitian_eig(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(self)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eig()?.values.last().expect("non-empty operator"))
    }

    /// Conjugation U X U†.
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Result<Self> {
        if unitary.rows() != self.dim() || !unitary.is_square() {
            return Err(Error::Dimension("conjugating unitary has the wrong side".into()));
        }
        let m = unitary.matmul(&self.matrix).matmul(&unitary.adjoint());
        Ok(Self::from_parts(self.dims.clone(), m))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.matrix.is_real(tol)
    }
}

fn check_dims(dims: &[usize], matrix: &ComplexMatrix) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension(format!("invalid tensor dims {dims:?}")));
    }
    let n: usize = dims.iter().product();
    if !matrix.is_square() || matrix.rows() != n {
        return Err(Error::Dimension(format!(
            "{}x{} matrix does not match dims {dims:?}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    Ok(())
}

/// Kronecker product; dims are concatenated.
pub fn kron(x: &HermitianOperator, y: &HermitianOperator) -> HermitianOperator {
    let mut dims = x.dims.clone();
    dims.extend_from_slice(&y.dims);
    HermitianOperator {
        dims,
        matrix: x.matrix.kron(&y.matrix),
    }
}

/// Traces out the factors in `traced`; kept factors stay in order.
///
/// Tracing every factor yields a 1×1 operator holding the full trace.
pub fn partial_trace(x: &HermitianOperator, traced: &FactorSubset) -> Result<HermitianOperator> {
    traced.validate(x.dims.len())?;
    let kept = traced.complement(x.dims.len());
    let kept_offsets = tensor::subset_offsets(&x.dims, &kept);
    let traced_offsets = tensor::subset_offsets(&x.dims, traced);
    let n = kept_offsets.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (c, &co) in kept_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_offsets {
                acc += x.matrix[(ro + t, co + t)];
            }
            out[(r, c)] = acc;
        }
    }
    let dims = if kept.is_empty() {
        vec![1]
    } else {
        kept.indices().iter().map(|&k| x.dims[k]).collect()
    };
    Ok(HermitianOperator::from_parts(dims, out))
}

/// Transposes the row/column digits of the factors in `subset`.
pub fn partial_transpose(
    x: &HermitianOperator,
    subset: &FactorSubset,
) -> Result<HermitianOperator> {
    subset.validate(x.dims.len())?;
    let (on, off) = tensor::split_offsets(&x.dims, subset);
    let n = x.dim();
    let out = ComplexMatrix::from_fn(n, n, |r, c| {
        let (r2, c2) = tensor::partial_transpose_map(&on, &off, r, c);
        x.matrix[(r2, c2)]
    });
    Ok(HermitianOperator {
        dims: x.dims.clone(),
        matrix: out,
    })
}

pub fn hermitian_eig(h: &HermitianOperator) -> Result<HermitianEigen> {
    hermitian_eig_matrix(&h.matrix)
}

pub fn min_eigenvalue(h: &HermitianOperator) -> Result<f64> {
    Ok(hermitian_eig(h)?.values[0])
}

/// The swap operator V|i,j⟩ = |j,i⟩ on C^d ⊗ C^d.
pub fn flip_operator(d: usize) -> HermitianOperator {
    let matrix = permutation_operator(&[1, 0], d).expect("valid transposition");
    HermitianOperator {
        dims: vec![d, d],
        matrix,
    }
}

/// Unitary permuting `perm.len()` factors of dimension `d`: factor `k`
/// moves to slot `perm[k]`, so P(σ)P(τ) = P(σ∘τ).
pub fn permutation_operator(perm: &[usize], d: usize) -> Result<ComplexMatrix> {
    tensor::validate_permutation(perm)?;
    let image = tensor::permuted_indices(perm, d);
    let n = image.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, &j) in image.iter().enumerate() {
        m[(j, i)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}
