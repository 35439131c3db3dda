//! Seeded random instances: sparse term-document blocks, latent models and
//! weight-correction batches.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{thin_qr, OrthonormalBasis, SparseMatrix};
use crate::model::LatentModel;

/// Deterministic generator for random instances.
pub struct InstanceRng {
    rng: ChaCha8Rng,
}

impl InstanceRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }

    /// Dense matrix with entries uniform in `[-1, 1)`.
    pub fn dense(&mut self, m: usize, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |_, _| self.rng.random_range(-1.0..1.0))
    }

    /// Nonnegative sparse matrix; each entry is nonzero with probability
    /// `density`, with value uniform in `(0, 1]`.
    pub fn sparse(&mut self, m: usize, n: usize, density: f64) -> SparseMatrix {
        let mut triplets = Vec::new();
        for j in 0..n {
            for i in 0..m {
                if self.rng.random::<f64>() < density {
                    triplets.push((i, j, 1.0 - self.rng.random::<f64>()));
                }
            }
        }
        SparseMatrix::from_triplets(m, n, &triplets).expect("generated indices are in range")
    }

    /// Sparse matrix with exactly `nnz_per_col` nonzeros per column, suited to
    /// large shapes where per-entry sampling is too slow.
    pub fn sparse_columns(&mut self, m: usize, n: usize, nnz_per_col: usize) -> SparseMatrix {
        let nnz = nnz_per_col.min(m);
        let mut triplets = Vec::with_capacity(n * nnz);
        for j in 0..n {
            let rows = rand::seq::index::sample(&mut self.rng, m, nnz);
            for i in rows.iter() {
                triplets.push((i, j, 1.0 - self.rng.random::<f64>()));
            }
        }
        SparseMatrix::from_triplets(m, n, &triplets).expect("generated indices are in range")
    }

    pub fn basis(&mut self, m: usize, k: usize) -> OrthonormalBasis {
        thin_qr(&self.dense(m, k)).expect("m >= k").0
    }

    /// Random model with orthonormal factors and values spread over `[1, 10]`.
    pub fn model(&mut self, m: usize, n: usize, k: usize) -> LatentModel {
        let mut sigma: Vec<f64> = (0..k).map(|_| self.rng.random_range(1.0..10.0)).collect();
        sigma.sort_by(|a, b| b.total_cmp(a));
        let u = self.basis(m, k);
        let v = self.basis(n, k);
        LatentModel::new(sigma, u, v).expect("valid random model")
    }

    /// `m × p` selection matrix picking `p` distinct random rows.
    pub fn selection(&mut self, m: usize, p: usize) -> SparseMatrix {
        let rows = rand::seq::index::sample(&mut self.rng, m, p);
        let triplets: Vec<_> = rows.iter().enumerate().map(|(j, i)| (i, j, 1.0)).collect();
        SparseMatrix::from_triplets(m, p, &triplets).expect("distinct rows in range")
    }

    /// Sparse signed corrections `p × n`.
    pub fn corrections(&mut self, p: usize, n: usize, density: f64) -> SparseMatrix {
        let mut triplets = Vec::new();
        for j in 0..n {
            for i in 0..p {
                if self.rng.random::<f64>() < density {
                    triplets.push((i, j, self.rng.random_range(-1.0..1.0)));
                }
            }
        }
        SparseMatrix::from_triplets(p, n, &triplets).expect("generated indices are in range")
    }
}
