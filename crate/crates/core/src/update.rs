//! Updating the rank-k factorization after adding documents, adding terms or
//! correcting term weights.
//!
//! Every scheme is a Rayleigh–Ritz extraction on the rank-k substituted
//! matrix (`[A_k, D]`, `[A_k; T]` or `A_k + CW`) with search bases made of the
//! current singular vectors plus an augmentation `Z` of the out-of-subspace
//! part `M = (I − U_k U_kᵀ)D` (or its analogue):
//!
//! * Zha–Simon (`ZS`): `Z` from the thin QR of `M`, which makes the update exact;
//! * singular vectors (`SV`): `Z = X_l`, the top-l left singular vectors of `M`;
//! * Golub–Kahan–Lanczos (`GKL`): `Z = P_l`, the left GKL vectors of `M`;
//! * O'Brien (`OB`): no augmentation.
//!
//! The projected matrix is assembled from blocks; the updated term-document
//! matrix is never formed.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::error::{dim_err, Error, Result};
use crate::gkl::{default_start, gkl_bidiag, gkl_partial_svd, DeflatedOperator, SolverOptions};
use crate::linalg::{thin_qr, OrthonormalBasis, SparseMatrix};
use crate::model::LatentModel;
use crate::svrr::ritz_from_projected;

/// One batch of changes to the term-document matrix.
#[derive(Debug, Clone)]
pub enum UpdateBatch {
    /// `m × p` block of new documents.
    AddDocuments(SparseMatrix),
    /// `p × n` block of new terms.
    AddTerms(SparseMatrix),
    /// `A + C W` with an `m × p` selection matrix `C` and `p × n` corrections `W`.
    CorrectWeights {
        selection: SparseMatrix,
        corrections: SparseMatrix,
    },
}

impl UpdateBatch {
    /// Batch size `p`.
    pub fn size(&self) -> usize {
        match self {
            UpdateBatch::AddDocuments(d) => d.ncols(),
            UpdateBatch::AddTerms(t) => t.nrows(),
            UpdateBatch::CorrectWeights { selection, .. } => selection.ncols(),
        }
    }
}

/// Which augmentation the update uses.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdatePolicy {
    ZhaSimon,
    /// `l` approximate singular triplets of the deflated block. For weight
    /// corrections `l` applies to the term side and `l2` (default `l`) to the
    /// document side.
    SingularVectors {
        l: usize,
        l2: Option<usize>,
        solver: SolverOptions,
    },
    /// `l` GKL steps on the deflated block; `l2` as for `SingularVectors`.
    Gkl { l: usize, l2: Option<usize> },
    /// No augmentation (`l = 0`).
    OBrien,
}

impl UpdatePolicy {
    pub fn sv(l: usize) -> Self {
        UpdatePolicy::SingularVectors {
            l,
            l2: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn gkl(l: usize) -> Self {
        UpdatePolicy::Gkl { l, l2: None }
    }

    /// Short label used in reports: `zs`, `sv:l=2`, `gkl:l=3`, `ob`.
    pub fn label(&self) -> String {
        let pair = |l: usize, l2: Option<usize>| match l2 {
            Some(l2) if l2 != l => format!("l1={l},l2={l2}"),
            _ => format!("l={l}"),
        };
        match self {
            UpdatePolicy::ZhaSimon => "zs".into(),
            UpdatePolicy::SingularVectors { l, l2, .. } => format!("sv:{}", pair(*l, *l2)),
            UpdatePolicy::Gkl { l, l2 } => format!("gkl:{}", pair(*l, *l2)),
            UpdatePolicy::OBrien => "ob".into(),
        }
    }
}

/// Bookkeeping returned by [`update`].
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStats {
    pub elapsed: Duration,
    /// Shape of the projected matrix `H`.
    pub h_rows: usize,
    pub h_cols: usize,
    /// Number of augmentation vectors actually used (term side for weight
    /// corrections).
    pub effective_l: usize,
    /// Document-side count for weight corrections.
    pub effective_l2: Option<usize>,
    /// Total GKL steps taken by the partial SVD solver(s).
    pub solver_iterations: usize,
}

/// Orthonormal augmentation `Z` together with `Zᵀ M`.
struct Augmentation {
    basis: DMatrix<f64>,
    /// `l × p`.
    coeffs: DMatrix<f64>,
    iterations: usize,
}

impl Augmentation {
    fn none(rows: usize, p: usize) -> Self {
        Self {
            basis: DMatrix::zeros(rows, 0),
            coeffs: DMatrix::zeros(0, p),
            iterations: 0,
        }
    }

    fn len(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Debug, Clone, Copy)]
enum Method<'a> {
    Qr,
    Sv(usize, &'a SolverOptions),
    Gkl(usize),
    Nothing,
}

/// Builds the augmentation for `op = (I − B Bᵀ) S` (or `Sᵀ`).
fn augment(op: &DeflatedOperator<'_>, method: Method<'_>) -> Result<Augmentation> {
    use crate::gkl::LinearOperator;
    let rows = op.nrows();
    let p = op.ncols();
    match method {
        Method::Nothing => Ok(Augmentation::none(rows, p)),
        Method::Qr if rows >= p => {
            let (q, r) = thin_qr(&op.to_dense())?;
            Ok(Augmentation {
                basis: q.into_matrix(),
                coeffs: r,
                iterations: 0,
            })
        }
        Method::Qr => {
            // wide block: Q is square and R has p columns
            let qr = op.to_dense().qr();
            Ok(Augmentation {
                basis: qr.q(),
                coeffs: qr.r(),
                iterations: 0,
            })
        }
        Method::Sv(0, _) | Method::Gkl(0) => Ok(Augmentation::none(rows, p)),
        Method::Sv(l, opts) => {
            let l = l.min(rows.min(p));
            let s = gkl_partial_svd(op, l, opts)?;
            let mut coeffs = s.right.transpose();
            for (i, v) in s.values.iter().enumerate() {
                coeffs.row_mut(i).scale_mut(*v);
            }
            Ok(Augmentation {
                basis: s.left,
                coeffs,
                iterations: s.iterations,
            })
        }
        Method::Gkl(l) => {
            let l = l.min(rows.min(p));
            let f = gkl_bidiag(op, l, &default_start(p))?;
            Ok(Augmentation {
                coeffs: f.projected_block(),
                basis: f.left().clone(),
                iterations: f.effective_l(),
            })
        }
    }
}

fn check_l(l: usize, p: usize) -> Result<()> {
    if l > p {
        return Err(Error::InvalidArgument(format!(
            "reduction size l = {l} exceeds batch size p = {p}"
        )));
    }
    Ok(())
}

/// `diag(σ)`.
fn sigma_block(model: &LatentModel) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(model.sigma()))
}

/// `[B, Z] F` computed as `B F_top + Z F_bottom`.
fn lift(b: &DMatrix<f64>, z: &DMatrix<f64>, f: &DMatrix<f64>) -> DMatrix<f64> {
    let k = b.ncols();
    let mut out = b * f.rows(0, k);
    if z.ncols() > 0 {
        out += z * f.rows(k, z.ncols());
    }
    out
}

/// `blockdiag(B, I_p) G = [B G_top; G_bottom]`.
fn stack_identity(b: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let k = b.ncols();
    let p = g.nrows() - k;
    let mut out = DMatrix::zeros(b.nrows() + p, g.ncols());
    out.rows_mut(0, b.nrows()).copy_from(&(b * g.rows(0, k)));
    out.rows_mut(b.nrows(), p).copy_from(&g.rows(k, p));
    out
}

#[derive(Debug, Clone, Copy)]
struct Trace {
    h_rows: usize,
    h_cols: usize,
    l: usize,
    l2: Option<usize>,
    iterations: usize,
}

fn add_documents(
    model: &LatentModel,
    d: &SparseMatrix,
    method: Method<'_>,
) -> Result<(LatentModel, Trace)> {
    if d.nrows() != model.nterms() {
        return Err(dim_err(format!(
            "documents have {} rows, model has {} terms",
            d.nrows(),
            model.nterms()
        )));
    }
    let k = model.k();
    let p = d.ncols();
    let u = model.u();
    let op = DeflatedOperator::new(u, d)?;
    let aug = augment(&op, method)?;
    let l = aug.len();

    // H = [Σ_k, U_kᵀD; 0, ZᵀM]
    let utd = d.t_mul_dense(u.matrix())?.transpose();
    let mut h = DMatrix::zeros(k + l, k + p);
    h.view_mut((0, 0), (k, k)).copy_from(&sigma_block(model));
    h.view_mut((0, k), (k, p)).copy_from(&utd);
    h.view_mut((k, k), (l, p)).copy_from(&aug.coeffs);

    let ritz = ritz_from_projected(&h, k)?;
    let new_u = lift(u.matrix(), &aug.basis, &ritz.left);
    let new_v = stack_identity(model.v().matrix(), &ritz.right);
    Ok((
        LatentModel::from_parts(ritz.theta, new_u, new_v),
        Trace {
            h_rows: k + l,
            h_cols: k + p,
            l,
            l2: None,
            iterations: aug.iterations,
        },
    ))
}

fn add_terms(
    model: &LatentModel,
    t: &SparseMatrix,
    method: Method<'_>,
) -> Result<(LatentModel, Trace)> {
    if t.ncols() != model.ndocs() {
        return Err(dim_err(format!(
            "terms have {} columns, model has {} documents",
            t.ncols(),
            model.ndocs()
        )));
    }
    let k = model.k();
    let p = t.nrows();
    let v = model.v();
    let op = DeflatedOperator::transposed(v, t)?;
    let aug = augment(&op, method)?;
    let l = aug.len();

    // H = [Σ_k, 0; T V_k, (ZᵀM)ᵀ]
    let tv = t.mul_dense(v.matrix())?;
    let mut h = DMatrix::zeros(k + p, k + l);
    h.view_mut((0, 0), (k, k)).copy_from(&sigma_block(model));
    h.view_mut((k, 0), (p, k)).copy_from(&tv);
    h.view_mut((k, k), (p, l)).copy_from(&aug.coeffs.transpose());

    let ritz = ritz_from_projected(&h, k)?;
    let new_u = stack_identity(model.u().matrix(), &ritz.left);
    let new_v = lift(v.matrix(), &aug.basis, &ritz.right);
    Ok((
        LatentModel::from_parts(ritz.theta, new_u, new_v),
        Trace {
            h_rows: k + p,
            h_cols: k + l,
            l,
            l2: None,
            iterations: aug.iterations,
        },
    ))
}

/// Checks that every column of `c` is a distinct standard basis vector.
pub fn validate_selection(c: &SparseMatrix) -> Result<()> {
    let mut seen = vec![false; c.nrows()];
    for j in 0..c.ncols() {
        let (rows, vals) = c.column(j);
        if rows.len() != 1 || vals[0] != 1.0 {
            return Err(Error::NotSelection(format!(
                "column {j} is not a standard basis vector"
            )));
        }
        if std::mem::replace(&mut seen[rows[0]], true) {
            return Err(Error::NotSelection(format!(
                "row {} selected more than once",
                rows[0]
            )));
        }
    }
    Ok(())
}

fn correct_weights(
    model: &LatentModel,
    c: &SparseMatrix,
    w: &SparseMatrix,
    left: Method<'_>,
    right: Method<'_>,
) -> Result<(LatentModel, Trace)> {
    if c.nrows() != model.nterms() || w.ncols() != model.ndocs() || c.ncols() != w.nrows() {
        return Err(dim_err(format!(
            "C is {}x{}, W is {}x{}, model is {}x{}",
            c.nrows(),
            c.ncols(),
            w.nrows(),
            w.ncols(),
            model.nterms(),
            model.ndocs()
        )));
    }
    validate_selection(c)?;
    let k = model.k();
    let p = c.ncols();
    let u = model.u();
    let v = model.v();
    let op_c = DeflatedOperator::new(u, c)?;
    let op_w = DeflatedOperator::transposed(v, w)?;
    let aug_c = augment(&op_c, left)?;
    let aug_w = augment(&op_w, right)?;
    let l1 = aug_c.len();
    let l2 = aug_w.len();

    // H = blockdiag(Σ_k, 0) + [U_kᵀC; Z₁ᵀM₁] [W V_k, (Z₂ᵀM₂)ᵀ]
    let mut lhs = DMatrix::zeros(k + l1, p);
    lhs.rows_mut(0, k).copy_from(&c.t_mul_dense(u.matrix())?.transpose());
    lhs.rows_mut(k, l1).copy_from(&aug_c.coeffs);
    let mut rhs = DMatrix::zeros(p, k + l2);
    rhs.columns_mut(0, k).copy_from(&w.mul_dense(v.matrix())?);
    rhs.columns_mut(k, l2).copy_from(&aug_w.coeffs.transpose());
    let mut h = lhs * rhs;
    for (i, s) in model.sigma().iter().enumerate() {
        h[(i, i)] += s;
    }

    let ritz = ritz_from_projected(&h, k)?;
    let new_u = lift(u.matrix(), &aug_c.basis, &ritz.left);
    let new_v = lift(v.matrix(), &aug_w.basis, &ritz.right);
    Ok((
        LatentModel::from_parts(ritz.theta, new_u, new_v),
        Trace {
            h_rows: k + l1,
            h_cols: k + l2,
            l: l1,
            l2: Some(l2),
            iterations: aug_c.iterations + aug_w.iterations,
        },
    ))
}

/// Zha–Simon update after appending documents `D`.
pub fn update_add_docs_zs(model: &LatentModel, d: &SparseMatrix) -> Result<LatentModel> {
    add_documents(model, d, Method::Qr).map(|r| r.0)
}

/// Zha–Simon update after appending terms `T`.
pub fn update_add_terms_zs(model: &LatentModel, t: &SparseMatrix) -> Result<LatentModel> {
    add_terms(model, t, Method::Qr).map(|r| r.0)
}

/// Zha–Simon update for `A + C W`.
pub fn update_correct_weights_zs(
    model: &LatentModel,
    c: &SparseMatrix,
    w: &SparseMatrix,
) -> Result<LatentModel> {
    correct_weights(model, c, w, Method::Qr, Method::Qr).map(|r| r.0)
}

/// Documents update augmented with `l` approximate singular vectors of
/// `(I − U_k U_kᵀ) D`.
pub fn update_add_docs_sv(
    model: &LatentModel,
    d: &SparseMatrix,
    l: usize,
    solver: &SolverOptions,
) -> Result<LatentModel> {
    check_l(l, d.ncols())?;
    add_documents(model, d, Method::Sv(l, solver)).map(|r| r.0)
}

pub fn update_add_terms_sv(
    model: &LatentModel,
    t: &SparseMatrix,
    l: usize,
    solver: &SolverOptions,
) -> Result<LatentModel> {
    check_l(l, t.nrows())?;
    add_terms(model, t, Method::Sv(l, solver)).map(|r| r.0)
}

pub fn update_correct_weights_sv(
    model: &LatentModel,
    c: &SparseMatrix,
    w: &SparseMatrix,
    l1: usize,
    l2: usize,
    solver: &SolverOptions,
) -> Result<LatentModel> {
    check_l(l1, c.ncols())?;
    check_l(l2, c.ncols())?;
    correct_weights(model, c, w, Method::Sv(l1, solver), Method::Sv(l2, solver)).map(|r| r.0)
}

/// Documents update augmented with `l` left GKL vectors of
/// `(I − U_k U_kᵀ) D`.
pub fn update_add_docs_gkl(model: &LatentModel, d: &SparseMatrix, l: usize) -> Result<LatentModel> {
    check_l(l, d.ncols())?;
    add_documents(model, d, Method::Gkl(l)).map(|r| r.0)
}

pub fn update_add_terms_gkl(model: &LatentModel, t: &SparseMatrix, l: usize) -> Result<LatentModel> {
    check_l(l, t.nrows())?;
    add_terms(model, t, Method::Gkl(l)).map(|r| r.0)
}

pub fn update_correct_weights_gkl(
    model: &LatentModel,
    c: &SparseMatrix,
    w: &SparseMatrix,
    l1: usize,
    l2: usize,
) -> Result<LatentModel> {
    check_l(l1, c.ncols())?;
    check_l(l2, c.ncols())?;
    correct_weights(model, c, w, Method::Gkl(l1), Method::Gkl(l2)).map(|r| r.0)
}

/// Applies `batch` to `model` under `policy`.
pub fn update(
    model: &LatentModel,
    batch: &UpdateBatch,
    policy: &UpdatePolicy,
) -> Result<(LatentModel, UpdateStats)> {
    let p = batch.size();
    if p == 0 {
        return Err(Error::InvalidArgument("empty update batch".into()));
    }
    let (left, right) = match policy {
        UpdatePolicy::ZhaSimon => (Method::Qr, Method::Qr),
        UpdatePolicy::OBrien => (Method::Nothing, Method::Nothing),
        UpdatePolicy::SingularVectors { l, l2, solver } => {
            let l2 = l2.unwrap_or(*l);
            check_l(*l, p)?;
            check_l(l2, p)?;
            (Method::Sv(*l, solver), Method::Sv(l2, solver))
        }
        UpdatePolicy::Gkl { l, l2 } => {
            let l2 = l2.unwrap_or(*l);
            check_l(*l, p)?;
            check_l(l2, p)?;
            (Method::Gkl(*l), Method::Gkl(l2))
        }
    };
    let start = Instant::now();
    let (out, trace) = match batch {
        UpdateBatch::AddDocuments(d) => add_documents(model, d, left)?,
        UpdateBatch::AddTerms(t) => add_terms(model, t, left)?,
        UpdateBatch::CorrectWeights {
            selection,
            corrections,
        } => correct_weights(model, selection, corrections, left, right)?,
    };
    let elapsed = start.elapsed();
    Ok((
        out,
        UpdateStats {
            elapsed,
            h_rows: trace.h_rows,
            h_cols: trace.h_cols,
            effective_l: trace.l,
            effective_l2: trace.l2,
            solver_iterations: trace.iterations,
        },
    ))
}

/// The rank-k substituted matrix that the updates target, formed densely.
/// Intended for tests and small-scale checks.
pub fn substituted_matrix(model: &LatentModel, batch: &UpdateBatch) -> DMatrix<f64> {
    let ak = model.reconstruct();
    match batch {
        UpdateBatch::AddDocuments(d) => {
            let mut out = DMatrix::zeros(ak.nrows(), ak.ncols() + d.ncols());
            out.columns_mut(0, ak.ncols()).copy_from(&ak);
            out.columns_mut(ak.ncols(), d.ncols()).copy_from(&d.to_dense());
            out
        }
        UpdateBatch::AddTerms(t) => {
            let mut out = DMatrix::zeros(ak.nrows() + t.nrows(), ak.ncols());
            out.rows_mut(0, ak.nrows()).copy_from(&ak);
            out.rows_mut(ak.nrows(), t.nrows()).copy_from(&t.to_dense());
            out
        }
        UpdateBatch::CorrectWeights {
            selection,
            corrections,
        } => ak + selection.to_dense() * corrections.to_dense(),
    }
}

/// Orthonormal `[B, Z]` for callers that want to run SV-RR directly.
pub fn augmented_basis(b: &OrthonormalBasis, z: &DMatrix<f64>) -> Result<OrthonormalBasis> {
    let mut m = DMatrix::zeros(b.nrows(), b.ncols() + z.ncols());
    m.columns_mut(0, b.ncols()).copy_from(b.matrix());
    m.columns_mut(b.ncols(), z.ncols()).copy_from(z);
    OrthonormalBasis::new(m)
}
