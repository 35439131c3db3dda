//! Shared instances for the update benchmarks.

use lsi_update::synthetic::InstanceRng;
use lsi_update::{LatentModel, SparseMatrix};

/// Shape of a documents-update benchmark case.
#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub nnz_per_col: usize,
}

impl Case {
    pub fn label(&self) -> String {
        format!("m={},k={},p={}", self.m, self.k, self.p)
    }

    /// A random rank-k model and a sparse block of `p` new documents.
    pub fn build(&self, seed: u64) -> (LatentModel, SparseMatrix) {
        let mut g = InstanceRng::new(seed);
        let model = g.model(self.m, self.n, self.k);
        let d = g.sparse_columns(self.m, self.p, self.nnz_per_col);
        (model, d)
    }
}
