//! Incremental updating of truncated singular value decompositions for
//! latent semantic indexing.
//!
//! The crate maintains a rank-k factorization `(Σ_k, U_k, V_k)` of a
//! term-document matrix and updates it when documents or terms are appended or
//! term weights are corrected; see [`update`] for the schemes. Around that
//! core sit a Golub–Kahan–Lanczos bidiagonalization and partial SVD solver
//! ([`gkl`]), Rayleigh–Ritz extraction ([`svrr`]), query scoring ([`lsi`]),
//! file readers and term weighting ([`ingest`]) and precision metrics
//! ([`eval`]).

pub mod error;
pub mod eval;
pub mod gkl;
pub mod ingest;
pub mod linalg;
pub mod lsi;
pub mod model;
pub mod svrr;
pub mod synthetic;
pub mod update;

pub use error::{Error, Result};
pub use gkl::{
    gkl_bidiag, gkl_partial_svd, DeflatedOperator, GklFactorization, LinearOperator, PartialSvd,
    Reorthogonalization, SolverOptions,
};
pub use linalg::{DenseMatrix, OrthonormalBasis, SparseMatrix, SparseVector};
pub use lsi::{rank, score, ScoringParams};
pub use model::LatentModel;
pub use svrr::{sv_rr, RitzFactor};
pub use update::{update, UpdateBatch, UpdatePolicy, UpdateStats};
