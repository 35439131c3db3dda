//! Query scoring and ranking against a latent model.

use nalgebra::DVector;

use crate::error::{dim_err, Error, Result};
use crate::linalg::SparseVector;
use crate::model::LatentModel;

/// Splitting exponent `α` and whether document rows are normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringParams {
    pub alpha: f64,
    pub normalize: bool,
}

impl Default for ScoringParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            normalize: true,
        }
    }
}

/// Relevance scores
/// `r = diag(γ) (V_k Σ_k^{1−α}) Σ_k^α U_kᵀ q`.
///
/// With `normalize` set, `γ_j` is the reciprocal norm of row `j` of
/// `V_k Σ_k^{1−α}`; a zero row scores 0. Otherwise `γ_j = 1`.
pub fn score(model: &LatentModel, q: &SparseVector, params: &ScoringParams) -> Result<DVector<f64>> {
    if q.dim() != model.nterms() {
        return Err(dim_err(format!(
            "query has {} terms, model has {}",
            q.dim(),
            model.nterms()
        )));
    }
    if !(0.0..=1.0).contains(&params.alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {} outside [0, 1]",
            params.alpha
        )));
    }
    let projected = q.t_mul_dense(model.u().matrix())?;
    let sigma = model.sigma();
    let query_side = DVector::from_fn(sigma.len(), |i, _| sigma[i].powf(params.alpha) * projected[i]);
    let doc_exp: Vec<f64> = sigma.iter().map(|s| s.powf(1.0 - params.alpha)).collect();

    let v = model.v().matrix();
    let mut r = DVector::zeros(v.nrows());
    for j in 0..v.nrows() {
        let mut dot = 0.0;
        let mut norm2 = 0.0;
        for i in 0..sigma.len() {
            let w = v[(j, i)] * doc_exp[i];
            dot += w * query_side[i];
            norm2 += w * w;
        }
        r[j] = if !params.normalize {
            dot
        } else if norm2 > 0.0 {
            dot / norm2.sqrt()
        } else {
            0.0
        };
    }
    Ok(r)
}

/// Indices of the `top` highest scores, ties broken by ascending index.
pub fn rank(r: &DVector<f64>, top: usize) -> Vec<usize> {
    // -0.0 and 0.0 must tie
    let key = |i: usize| if r[i] == 0.0 { 0.0 } else { r[i] };
    let mut idx: Vec<usize> = (0..r.len()).collect();
    idx.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    idx.truncate(top.min(r.len()));
    idx
}
