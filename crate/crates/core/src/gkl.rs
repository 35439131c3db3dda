//! Golub–Kahan–Lanczos bidiagonalization and a partial SVD solver built on it.
//!
//! Operators are accessed only through products with `M` and `Mᵀ`, so the
//! deflated blocks `(I − U_k U_kᵀ) D` used by the updating schemes are never
//! formed.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{dense_svd, project_out_vec, singular_values, OrthonormalBasis, Passes, SparseMatrix};

/// Relative threshold on `α_i`, `β_i` below which the recurrence stops.
pub const BREAKDOWN_TOL: f64 = 1e-13;

/// Matrix-free access to a real `rows × cols` operator.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `M x`.
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `Mᵀ y`.
    fn apply_transpose(&self, y: &DVector<f64>) -> DVector<f64>;
    /// Cheap upper estimate of `‖M‖`, used to scale the breakdown test.
    fn norm_hint(&self) -> f64 {
        0.0
    }
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }
    fn apply_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        self.tr_mul(y)
    }
    fn norm_hint(&self) -> f64 {
        self.norm()
    }
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.spmv(x).expect("operator dimension checked by caller")
    }
    fn apply_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        self.spmv_t(y).expect("operator dimension checked by caller")
    }
    fn norm_hint(&self) -> f64 {
        self.frobenius_norm()
    }
}

/// `(I − B Bᵀ) S` or `(I − B Bᵀ) Sᵀ` for an orthonormal `B` and sparse `S`.
#[derive(Debug, Clone, Copy)]
pub struct DeflatedOperator<'a> {
    basis: &'a OrthonormalBasis,
    core: &'a SparseMatrix,
    transpose_core: bool,
}

impl<'a> DeflatedOperator<'a> {
    /// `(I − B Bᵀ) S`; `S` must have as many rows as `B`.
    pub fn new(basis: &'a OrthonormalBasis, core: &'a SparseMatrix) -> Result<Self> {
        if basis.nrows() != core.nrows() {
            return Err(dim_err(format!(
                "deflation basis has {} rows, core has {}",
                basis.nrows(),
                core.nrows()
            )));
        }
        Ok(Self {
            basis,
            core,
            transpose_core: false,
        })
    }

    /// `(I − B Bᵀ) Sᵀ`; `S` must have as many columns as `B` has rows.
    pub fn transposed(basis: &'a OrthonormalBasis, core: &'a SparseMatrix) -> Result<Self> {
        if basis.nrows() != core.ncols() {
            return Err(dim_err(format!(
                "deflation basis has {} rows, transposed core has {}",
                basis.nrows(),
                core.ncols()
            )));
        }
        Ok(Self {
            basis,
            core,
            transpose_core: true,
        })
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        self.basis
    }

    /// Dense `(I − B Bᵀ) S`, for tests and the exact (QR-based) schemes.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let s = if self.transpose_core {
            self.core.to_dense().transpose()
        } else {
            self.core.to_dense()
        };
        crate::linalg::project_out_with(self.basis, &s, Passes::Two)
            .expect("shapes validated at construction")
    }
}

impl LinearOperator for DeflatedOperator<'_> {
    fn nrows(&self) -> usize {
        self.basis.nrows()
    }
    fn ncols(&self) -> usize {
        if self.transpose_core {
            self.core.nrows()
        } else {
            self.core.ncols()
        }
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = if self.transpose_core {
            self.core.spmv_t(x)
        } else {
            self.core.spmv(x)
        }
        .expect("operator dimension checked by caller");
        project_out_vec(self.basis, &mut y, Passes::Two);
        y
    }
    fn apply_transpose(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut w = y.clone();
        project_out_vec(self.basis, &mut w, Passes::Two);
        if self.transpose_core {
            self.core.spmv(&w)
        } else {
            self.core.spmv_t(&w)
        }
        .expect("operator dimension checked by caller")
    }
    fn norm_hint(&self) -> f64 {
        self.core.frobenius_norm()
    }
}

/// Which Lanczos vectors are reorthogonalized against their predecessors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reorthogonalization {
    /// Left vectors when `rows < cols`, right vectors otherwise.
    #[default]
    OneSided,
    /// Both sides; used for long runs such as the initial factorization.
    Full,
}

/// Why the recurrence stopped before the requested number of steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Breakdown {
    /// `α_step ≤ ε`; `p_step` was not produced.
    Alpha { step: usize },
    /// `β_step ≤ ε`; `q_{step+1}` was not produced.
    Beta { step: usize },
}

/// `P_l`, `Q_{l+1}` and the upper bidiagonal `B̲_l` of a GKL run.
#[derive(Debug, Clone)]
pub struct GklFactorization {
    left: DMatrix<f64>,
    right: DMatrix<f64>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    breakdown: Option<Breakdown>,
}

impl GklFactorization {
    /// Left GKL vectors `P_l` (`rows × l′`).
    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    /// Right GKL vectors `Q_{l′+1}` (`cols × (l′+1)`), or `cols × l′` after a
    /// β breakdown.
    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn effective_l(&self) -> usize {
        self.alphas.len()
    }

    pub fn breakdown(&self) -> Option<Breakdown> {
        self.breakdown
    }

    /// `B̲_l`, sized `l′ × ncols(Q)`.
    pub fn bidiagonal(&self) -> DMatrix<f64> {
        bidiagonal(&self.alphas, &self.betas, self.right.ncols())
    }

    /// `B̲_l Q_{l+1}ᵀ`, which equals `P_lᵀ M`.
    pub fn projected_block(&self) -> DMatrix<f64> {
        self.bidiagonal() * self.right.transpose()
    }

    /// `(‖M Q_l − P_l B_l‖, ‖Mᵀ P_l − Q_{l+1} B̲_lᵀ‖)` in Frobenius norm.
    pub fn identity_residuals<O: LinearOperator + ?Sized>(&self, op: &O) -> (f64, f64) {
        let l = self.effective_l();
        let b = self.bidiagonal();
        let mut r1 = 0.0;
        for i in 0..l {
            let mq = op.apply(&self.right.column(i).into_owned());
            let pb = &self.left * b.column(i);
            r1 += (mq - pb).norm_squared();
        }
        let mut r2 = 0.0;
        for i in 0..l {
            let mtp = op.apply_transpose(&self.left.column(i).into_owned());
            let qb = &self.right * b.row(i).transpose();
            r2 += (mtp - qb).norm_squared();
        }
        (r1.sqrt(), r2.sqrt())
    }
}

fn bidiagonal(alphas: &[f64], betas: &[f64], cols: usize) -> DMatrix<f64> {
    let l = alphas.len();
    let mut b = DMatrix::zeros(l, cols);
    for i in 0..l {
        b[(i, i)] = alphas[i];
        if i + 1 < cols {
            b[(i, i + 1)] = betas[i];
        }
    }
    b
}

fn reorthogonalize(w: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // two sweeps of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(w);
            w.axpy(-c, b, 1.0);
        }
    }
}

/// Incremental GKL recurrence, extended one step at a time.
pub struct Bidiagonalization<'a, O: LinearOperator + ?Sized> {
    op: &'a O,
    reorth_left: bool,
    reorth_right: bool,
    scale: f64,
    p: Vec<DVector<f64>>,
    q: Vec<DVector<f64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    breakdown: Option<Breakdown>,
    restart: bool,
    restarts: usize,
}

/// Unit vector orthogonal to `basis`, built from the coordinate direction
/// least covered by it.
fn fresh_direction(dim: usize, basis: &[DVector<f64>]) -> Option<DVector<f64>> {
    if basis.len() >= dim {
        return None;
    }
    let mut covered = vec![0.0; dim];
    for b in basis {
        for (c, x) in covered.iter_mut().zip(b.iter()) {
            *c += x * x;
        }
    }
    let j = (0..dim).min_by(|&a, &b| covered[a].total_cmp(&covered[b]))?;
    let mut w = DVector::zeros(dim);
    w[j] = 1.0;
    reorthogonalize(&mut w, basis);
    let norm = w.norm();
    (norm > 1e-8).then(|| w / norm)
}

impl<'a, O: LinearOperator + ?Sized> Bidiagonalization<'a, O> {
    pub fn new(op: &'a O, q1: &DVector<f64>, reorth: Reorthogonalization) -> Result<Self> {
        if q1.len() != op.ncols() {
            return Err(dim_err(format!(
                "start vector has {} entries, operator has {} columns",
                q1.len(),
                op.ncols()
            )));
        }
        if !q1.iter().all(|v| v.is_finite()) || (q1.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("start vector must have unit norm".into()));
        }
        let left_side = op.nrows() < op.ncols();
        let (reorth_left, reorth_right) = match reorth {
            Reorthogonalization::OneSided => (left_side, !left_side),
            Reorthogonalization::Full => (true, true),
        };
        Ok(Self {
            op,
            reorth_left,
            reorth_right,
            scale: op.norm_hint(),
            p: Vec::new(),
            q: vec![q1.clone()],
            alphas: Vec::new(),
            betas: Vec::new(),
            breakdown: None,
            restart: false,
            restarts: 0,
        })
    }

    /// On breakdown, continue with a fresh direction orthogonal to the current
    /// basis (recording a zero in `B̲`) instead of stopping, as long as one
    /// exists. Both sides are reorthogonalized after the first restart.
    pub fn with_restarts(mut self) -> Self {
        self.restart = true;
        self
    }

    /// Number of restarts taken so far.
    pub fn restarts(&self) -> usize {
        self.restarts
    }

    pub fn steps(&self) -> usize {
        self.alphas.len()
    }

    pub fn breakdown(&self) -> Option<Breakdown> {
        self.breakdown
    }

    fn threshold(&self) -> f64 {
        BREAKDOWN_TOL * self.scale
    }

    /// Performs one step. Returns `false` once the recurrence has broken down.
    pub fn step(&mut self) -> bool {
        if self.breakdown.is_some() {
            return false;
        }
        let i = self.alphas.len();
        let mut p = self.op.apply(&self.q[i]);
        if i > 0 {
            p.axpy(-self.betas[i - 1], &self.p[i - 1], 1.0);
        }
        if self.reorth_left {
            reorthogonalize(&mut p, &self.p);
        }
        let alpha = p.norm();
        self.scale = self.scale.max(alpha);
        let (alpha, p) = if alpha > self.threshold() {
            (alpha, p / alpha)
        } else {
            match self.restart_direction(true) {
                Some(fresh) => (0.0, fresh),
                None => {
                    self.breakdown = Some(Breakdown::Alpha { step: i + 1 });
                    return false;
                }
            }
        };
        let mut q = self.op.apply_transpose(&p);
        q.axpy(-alpha, &self.q[i], 1.0);
        if self.reorth_right {
            reorthogonalize(&mut q, &self.q);
        }
        self.alphas.push(alpha);
        self.p.push(p);
        let beta = q.norm();
        self.scale = self.scale.max(beta);
        if beta <= self.threshold() {
            self.betas.push(0.0);
            match self.restart_direction(false) {
                Some(fresh) => {
                    self.q.push(fresh);
                    return true;
                }
                None => {
                    self.breakdown = Some(Breakdown::Beta { step: i + 1 });
                    return false;
                }
            }
        }
        q /= beta;
        self.betas.push(beta);
        self.q.push(q);
        true
    }

    fn restart_direction(&mut self, left: bool) -> Option<DVector<f64>> {
        // nothing to restart from until the operator has shown a nonzero direction
        if !self.restart || !self.alphas.iter().any(|&a| a > 0.0) {
            return None;
        }
        let fresh = if left {
            fresh_direction(self.op.nrows(), &self.p)
        } else {
            fresh_direction(self.op.ncols(), &self.q)
        }?;
        self.restarts += 1;
        self.reorth_left = true;
        self.reorth_right = true;
        Some(fresh)
    }

    /// Current `B̲`.
    pub fn bidiagonal(&self) -> DMatrix<f64> {
        bidiagonal(&self.alphas, &self.betas, self.q.len().min(self.alphas.len() + 1))
    }

    fn right_columns(&self) -> usize {
        // after an alpha breakdown the last q has no matching p but is still valid
        self.q.len().min(self.alphas.len() + 1)
    }

    pub fn factorization(&self) -> GklFactorization {
        let m = self.op.nrows();
        let n = self.op.ncols();
        let qc = self.right_columns();
        let left = if self.p.is_empty() {
            DMatrix::zeros(m, 0)
        } else {
            DMatrix::from_columns(&self.p)
        };
        let right = if qc == 0 {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&self.q[..qc])
        };
        GklFactorization {
            left,
            right,
            alphas: self.alphas.clone(),
            betas: self.betas.clone(),
            breakdown: self.breakdown,
        }
    }
}

/// Unit vector of all ones, the default GKL start vector.
pub fn default_start(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / (n as f64).sqrt())
}

fn check_steps<O: LinearOperator + ?Sized>(op: &O, l: usize) -> Result<()> {
    let max = op.nrows().min(op.ncols());
    if l == 0 || l > max {
        return Err(Error::InvalidArgument(format!(
            "number of GKL steps {l} outside 1..={max}"
        )));
    }
    Ok(())
}

/// `l` steps of GKL bidiagonalization with one-sided reorthogonalization.
pub fn gkl_bidiag<O: LinearOperator + ?Sized>(
    op: &O,
    l: usize,
    q1: &DVector<f64>,
) -> Result<GklFactorization> {
    gkl_bidiag_with(op, l, q1, Reorthogonalization::OneSided)
}

pub fn gkl_bidiag_with<O: LinearOperator + ?Sized>(
    op: &O,
    l: usize,
    q1: &DVector<f64>,
    reorth: Reorthogonalization,
) -> Result<GklFactorization> {
    check_steps(op, l)?;
    let mut run = Bidiagonalization::new(op, q1, reorth)?;
    while run.steps() < l && run.step() {}
    Ok(run.factorization())
}

/// Stopping rule and start vector for [`gkl_partial_svd`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stop once the sum of the requested values changes by less than this.
    pub tol: f64,
    /// Cap on GKL steps; `None` means the operator's column count.
    pub max_iter: Option<usize>,
    /// Start vector; `None` means [`default_start`].
    pub start: Option<DVector<f64>>,
    pub reorth: Reorthogonalization,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-1,
            max_iter: None,
            start: None,
            reorth: Reorthogonalization::OneSided,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Approximate dominant singular triplets `(S_l, X_l, Y_l)`.
#[derive(Debug, Clone)]
pub struct PartialSvd {
    /// Ritz values, descending. Fewer than requested when the Krylov space is
    /// exhausted first.
    pub values: Vec<f64>,
    /// Left Ritz vectors `X_l`.
    pub left: DMatrix<f64>,
    /// Right Ritz vectors `Y_l`.
    pub right: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖M Y_l − X_l S_l‖_F` at return.
    pub residual: f64,
}

impl PartialSvd {
    /// The values padded with zeros to length `l`.
    pub fn padded_values(&self, l: usize) -> Vec<f64> {
        let mut v = self.values.clone();
        v.resize(l.max(v.len()), 0.0);
        v
    }
}

/// Partial SVD by GKL with Rayleigh–Ritz extraction on the Krylov bases.
///
/// After each step the SVD of `B̲` gives Ritz values; the solver stops when the
/// sum of the top `l` of them changes by less than `tol`, when `max_iter`
/// steps have been taken, or when the search space is exhausted (in which
/// case the captured values are exact). An invariant subspace found early
/// does not end the run: the recurrence restarts from a fresh orthogonal
/// direction, so repeated singular values are all found.
pub fn gkl_partial_svd<O: LinearOperator + ?Sized>(
    op: &O,
    l: usize,
    opts: &SolverOptions,
) -> Result<PartialSvd> {
    check_steps(op, l)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument("solver tolerance must be positive".into()));
    }
    let max_iter = opts.max_iter.unwrap_or(op.ncols());
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let max_iter = max_iter.min(op.nrows().min(op.ncols()));
    let start = opts.start.clone().unwrap_or_else(|| default_start(op.ncols()));
    let mut run = Bidiagonalization::new(op, &start, opts.reorth)?.with_restarts();

    let mut previous: Option<f64> = None;
    let mut converged = false;
    while run.steps() < max_iter {
        if !run.step() {
            converged = true;
            break;
        }
        let values = singular_values(&run.bidiagonal())?;
        if values.len() >= l {
            let sum: f64 = values[..l].iter().sum();
            if previous.is_some_and(|prev| (sum - prev).abs() < opts.tol) {
                converged = true;
                break;
            }
            previous = Some(sum);
        }
    }
    if run.breakdown().is_some() {
        converged = true;
    }

    let fact = run.factorization();
    let j = fact.effective_l();
    let r = l.min(j);
    let m = op.nrows();
    let n = op.ncols();
    if r == 0 {
        return Ok(PartialSvd {
            values: Vec::new(),
            left: DMatrix::zeros(m, 0),
            right: DMatrix::zeros(n, 0),
            iterations: run.steps(),
            converged,
            residual: 0.0,
        });
    }
    let svd = dense_svd(&fact.bidiagonal())?;
    // zero Ritz values only arise from restart directions and carry no information
    let floor = BREAKDOWN_TOL * svd.values[0].max(op.norm_hint());
    let r = svd.values[..r].iter().take_while(|&&v| v > floor).count();
    let left = fact.left() * svd.left.columns(0, r);
    let right = fact.right() * svd.right.columns(0, r);
    let values = svd.values[..r].to_vec();

    let mut residual = 0.0;
    for i in 0..r {
        let my = op.apply(&right.column(i).into_owned());
        residual += (my - left.column(i) * values[i]).norm_squared();
    }
    Ok(PartialSvd {
        values,
        left,
        right,
        iterations: run.steps(),
        converged,
        residual: residual.sqrt(),
    })
}
