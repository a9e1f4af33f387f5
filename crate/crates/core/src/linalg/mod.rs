//! Dense complex linear algebra with tensor-product structure.

mod eig;
mod matrix;
mod operator;
pub mod random;
mod tensor;

pub use eig::{hermitian_eig_matrix, HermitianEigen};
pub(crate) use eig::{cholesky_lower, invert_lower, min_eigenvalue_matrix};
pub use matrix::ComplexMatrix;
pub(crate) use matrix::ZERO;
pub use operator::{
    flip_operator, hermitian_eig, kron, min_eigenvalue, partial_trace, partial_transpose,
    permutation_operator, HermitianOperator, HERMITIAN_TOLERANCE,
};
pub use tensor::FactorSubset;
pub(crate) use tensor::{partial_transpose_map, permuted_indices, split_offsets, strides};
