use nalgebra::DMatrix;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{dense_svd, OrthonormalBasis};

/// The maintained rank-k factorization `(Σ_k, U_k, V_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentModel {
    sigma: Vec<f64>,
    u: OrthonormalBasis,
    v: OrthonormalBasis,
}

impl LatentModel {
    /// Validates shapes, ordering and orthonormality of the factors.
    pub fn new(sigma: Vec<f64>, u: OrthonormalBasis, v: OrthonormalBasis) -> Result<Self> {
        let k = sigma.len();
        if u.ncols() != k || v.ncols() != k {
            return Err(dim_err(format!(
                "model with {k} values but U has {} and V has {} columns",
                u.ncols(),
                v.ncols()
            )));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument(
                "singular values must be finite and nonnegative".into(),
            ));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "singular values must be sorted descending".into(),
            ));
        }
        Ok(Self { sigma, u, v })
    }

    pub(crate) fn from_parts(sigma: Vec<f64>, u: DMatrix<f64>, v: DMatrix<f64>) -> Self {
        debug_assert_eq!(sigma.len(), u.ncols());
        debug_assert_eq!(sigma.len(), v.ncols());
        Self {
            sigma,
            u: OrthonormalBasis::new_unchecked(u),
            v: OrthonormalBasis::new_unchecked(v),
        }
    }

    /// The `k` dominant triplets of a dense matrix.
    pub fn from_dense(a: &DMatrix<f64>, k: usize) -> Result<Self> {
        if k == 0 || k > a.nrows().min(a.ncols()) {
            return Err(Error::InvalidArgument(format!(
                "k = {k} outside 1..={}",
                a.nrows().min(a.ncols())
            )));
        }
        let svd = dense_svd(a)?;
        Ok(Self::from_parts(
            svd.values[..k].to_vec(),
            svd.left.columns(0, k).into_owned(),
            svd.right.columns(0, k).into_owned(),
        ))
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// Number of terms (rows of `U_k`).
    pub fn nterms(&self) -> usize {
        self.u.nrows()
    }

    /// Number of documents (rows of `V_k`).
    pub fn ndocs(&self) -> usize {
        self.v.nrows()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn u(&self) -> &OrthonormalBasis {
        &self.u
    }

    pub fn v(&self) -> &OrthonormalBasis {
        &self.v
    }

    /// `U_k Σ_k V_kᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.matrix().clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.matrix().transpose()
    }
}
