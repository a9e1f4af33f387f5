//! Index arithmetic for operators on tensor-product spaces.
//!
//! A basis index over factors `dims = [d_0, .., d_{k-1}]` is the mixed-radix
//! number with `d_0` as the most significant digit, matching the Kronecker
//! convention of [`ComplexMatrix::kron`](super::ComplexMatrix::kron).

use crate::error::{Error, Result};

/// A set of tensor-factor positions, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorSubset {
    indices: Vec<usize>,
}

impl FactorSubset {
    /// Builds a subset; duplicate positions are rejected.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        let given = indices.clone();
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubset {
                indices: given,
                factors: 0,
            });
        }
        Ok(Self { indices })
    }

    pub fn single(index: usize) -> Self {
        Self {
            indices: vec![index],
        }
    }

    pub fn all(factors: usize) -> Self {
        Self {
            indices: (0..factors).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Checks every position against a factor count.
    pub fn validate(&self, factors: usize) -> Result<()> {
        if self.indices.iter().any(|&i| i >= factors) {
            return Err(Error::InvalidSubset {
                indices: self.indices.clone(),
                factors,
            });
        }
        Ok(())
    }

    /// Positions not in the subset.
    pub fn complement(&self, factors: usize) -> Self {
        Self {
            indices: (0..factors).filter(|i| !self.contains(*i)).collect(),
        }
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

/// Splits every full basis index into the offset carried by `subset`
/// factors and the offset carried by the rest, so `i = on[i] + off[i]`.
pub(crate) fn split_offsets(dims: &[usize], subset: &FactorSubset) -> (Vec<usize>, Vec<usize>) {
    let total: usize = dims.iter().product();
    let strides = strides(dims);
    let mut on = vec![0; total];
    let mut off = vec![0; total];
    for i in 0..total {
        let d = digits(i, dims);
        for (k, &digit) in d.iter().enumerate() {
            if subset.contains(k) {
                on[i] += digit * strides[k];
            } else {
                off[i] += digit * strides[k];
            }
        }
    }
    (on, off)
}

/// Full-space offsets of every basis index of the sub-tensor over `subset`,
/// enumerated in the subset's own (ordered) basis.
pub(crate) fn subset_offsets(dims: &[usize], subset: &FactorSubset) -> Vec<usize> {
    let strides = strides(dims);
    let sub_dims: Vec<usize> = subset.indices().iter().map(|&k| dims[k]).collect();
    let count: usize = sub_dims.iter().product();
    (0..count)
        .map(|j| {
            digits(j, &sub_dims)
                .iter()
                .zip(subset.indices())
                .map(|(&digit, &k)| digit * strides[k])
                .sum()
        })
        .collect()
}

/// Image of `(row, col)` under the partial transpose over `subset`:
/// the subset digits of row and column are exchanged.
pub(crate) fn partial_transpose_map(
    on: &[usize],
    off: &[usize],
    row: usize,
    col: usize,
) -> (usize, usize) {
    (on[col] + off[row], on[row] + off[col])
}

/// Basis permutation for `perm` acting on `n` factors of dimension `d`:
/// factor `k` moves to slot `perm[k]`. Returns the image of every index.
pub(crate) fn permuted_indices(perm: &[usize], d: usize) -> Vec<usize> {
    let n = perm.len();
    let dims = vec![d; n];
    let strides = strides(&dims);
    let total = d.pow(n as u32);
    (0..total)
        .map(|i| {
            let dg = digits(i, &dims);
            dg.iter()
                .enumerate()
                .map(|(k, &digit)| digit * strides[perm[k]])
                .sum()
        })
        .collect()
}

pub(crate) fn validate_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::Validation(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}
