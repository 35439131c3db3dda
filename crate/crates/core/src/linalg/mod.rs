//! Dense and sparse kernels shared by the updating schemes.
//!
//! Dense matrices are `nalgebra::DMatrix<f64>` (column-major). QR and SVD are
//! backed by nalgebra's Householder QR and Golub–Kahan SVD, with sign
//! conventions fixed here so that outputs are deterministic.

mod sparse;

pub use sparse::{SparseMatrix, SparseVector};

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, Error, Result};

pub type DenseMatrix = DMatrix<f64>;

/// Default bound on `max |QᵀQ − I|` accepted by [`OrthonormalBasis::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// A dense matrix whose columns are orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    q: DMatrix<f64>,
}

impl OrthonormalBasis {
    /// Validates orthonormality against [`ORTHONORMAL_TOL`].
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(q, ORTHONORMAL_TOL)
    }

    pub fn with_tolerance(q: DMatrix<f64>, tol: f64) -> Result<Self> {
        ensure_finite(&q, "basis")?;
        let dev = orthonormality_error(&q);
        if dev > tol {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { q })
    }

    /// Wraps `q` without checking. Callers guarantee orthonormality.
    pub(crate) fn new_unchecked(q: DMatrix<f64>) -> Self {
        Self { q }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            q: DMatrix::identity(n, n),
        }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            q: DMatrix::zeros(n, 0),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.q
    }

    pub fn nrows(&self) -> usize {
        self.q.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.q.ncols()
    }

    /// `max |QᵀQ − I|` of the stored columns.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.q)
    }
}

/// `max |QᵀQ − I|`.
pub fn orthonormality_error(q: &DMatrix<f64>) -> f64 {
    if q.ncols() == 0 {
        return 0.0;
    }
    let g = q.tr_mul(q);
    let mut dev = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - target).abs());
        }
    }
    dev
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Thin QR factorization `M = Q R` of an `m × p` matrix with `m ≥ p`.
///
/// `R` is `p × p` upper triangular with a nonnegative diagonal. Rank-deficient
/// input is accepted: the corresponding diagonal entries of `R` vanish and `Q`
/// is still orthonormal.
pub fn thin_qr(m: &DMatrix<f64>) -> Result<(OrthonormalBasis, DMatrix<f64>)> {
    let (rows, cols) = m.shape();
    if cols == 0 || rows < cols {
        return Err(dim_err(format!(
            "thin QR needs m >= p >= 1, got {rows}x{cols}"
        )));
    }
    ensure_finite(m, "QR input")?;
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            r.row_mut(j).neg_mut();
            q.column_mut(j).neg_mut();
        }
    }
    Ok((OrthonormalBasis::new_unchecked(q), r))
}

/// Singular value decomposition with values sorted in descending order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub values: Vec<f64>,
    /// Left singular vectors, `a × min(a, b)`.
    pub left: DMatrix<f64>,
    /// Right singular vectors, `b × min(a, b)`.
    pub right: DMatrix<f64>,
}

/// Full thin SVD of a dense matrix.
///
/// Singular values are sorted descending (stable for ties) and each left
/// vector is signed so that its largest-magnitude entry is nonnegative.
pub fn dense_svd(m: &DMatrix<f64>) -> Result<SvdFactors> {
    ensure_finite(m, "SVD input")?;
    let (a, b) = m.shape();
    let r = a.min(b);
    if r == 0 {
        return Ok(SvdFactors {
            values: Vec::new(),
            left: DMatrix::zeros(a, 0),
            right: DMatrix::zeros(b, 0),
        });
    }
    let svd = nalgebra::SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or(Error::NoConvergence)?;
    let u = svd.u.ok_or(Error::NoConvergence)?;
    let vt = svd.v_t.ok_or(Error::NoConvergence)?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));

    let mut left = DMatrix::zeros(a, r);
    let mut right = DMatrix::zeros(b, r);
    let mut values = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        let mut uc = u.column(src).into_owned();
        let mut vc = vt.row(src).transpose();
        if largest_entry(&uc) < 0.0 {
            uc.neg_mut();
            vc.neg_mut();
        }
        left.set_column(dst, &uc);
        right.set_column(dst, &vc);
        values.push(sv[src].max(0.0));
    }
    Ok(SvdFactors {
        values,
        left,
        right,
    })
}

/// Singular values only, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    ensure_finite(m, "SVD input")?;
    if m.nrows().min(m.ncols()) == 0 {
        return Ok(Vec::new());
    }
    let svd = nalgebra::SVD::try_new(m.clone(), false, false, f64::EPSILON, 0)
        .ok_or(Error::NoConvergence)?;
    let mut v: Vec<f64> = svd.singular_values.iter().map(|s| s.max(0.0)).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    Ok(v)
}

fn largest_entry(v: &DVector<f64>) -> f64 {
    let mut best = 0.0f64;
    for &x in v.iter() {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    best
}

/// Number of projection sweeps applied by [`project_out_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Passes {
    One,
    Two,
}

/// `X − U(UᵀX)`, a single sweep.
pub fn project_out(u: &OrthonormalBasis, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    project_out_with(u, x, Passes::One)
}

pub fn project_out_with(
    u: &OrthonormalBasis,
    x: &DMatrix<f64>,
    passes: Passes,
) -> Result<DMatrix<f64>> {
    if u.nrows() != x.nrows() {
        return Err(dim_err(format!(
            "project_out: basis has {} rows, block has {}",
            u.nrows(),
            x.nrows()
        )));
    }
    let q = u.matrix();
    let mut out = x.clone();
    if q.ncols() == 0 {
        return Ok(out);
    }
    let sweeps = if passes == Passes::Two { 2 } else { 1 };
    for _ in 0..sweeps {
        let c = q.tr_mul(&out);
        out -= q * c;
    }
    Ok(out)
}

/// Vector form of [`project_out_with`].
pub fn project_out_vec(u: &OrthonormalBasis, x: &mut DVector<f64>, passes: Passes) {
    let q = u.matrix();
    if q.ncols() == 0 {
        return;
    }
    let sweeps = if passes == Passes::Two { 2 } else { 1 };
    for _ in 0..sweeps {
        let c = q.tr_mul(x);
        x.gemv(-1.0, q, &c, 1.0);
    }
}

/// Spectral norm via dense SVD. Intended for tests and diagnostics.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_basis(m: usize, k: usize, seed: u64) -> OrthonormalBasis {
        thin_qr(&random(m, k, seed)).unwrap().0
    }

    #[test]
    fn qr_identity() {
        let (q, r) = thin_qr(&DMatrix::identity(3, 3)).unwrap();
        assert!((q.matrix() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
        assert!((r - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn qr_three_four() {
        let m = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let (q, r) = thin_qr(&m).unwrap();
        assert!((q.matrix()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((q.matrix()[(1, 0)] - 0.8).abs() < 1e-15);
        assert!((r[(0, 0)] - 5.0).abs() < 1e-14);
        assert!(q.orthonormality_error() < 1e-15);
        assert!((q.matrix() * &r - m).amax() < 1e-14);
    }

    #[test]
    fn qr_dependent_columns() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let (q, r) = thin_qr(&m).unwrap();
        assert!(r[(1, 1)].abs() <= 1e-12);
        assert!(q.orthonormality_error() < 1e-14);
        assert!((q.matrix() * &r - &m).amax() < 1e-12);
    }

    #[test]
    fn qr_errors() {
        assert!(thin_qr(&DMatrix::zeros(2, 3)).is_err());
        assert!(thin_qr(&DMatrix::zeros(2, 0)).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(thin_qr(&m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn svd_diagonal_sorted() {
        let s = dense_svd(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).unwrap();
        assert_eq!(s.values.len(), 2);
        assert!((s.values[0] - 2.0).abs() < 1e-15 && (s.values[1] - 1.0).abs() < 1e-15);
        // sign convention: largest-magnitude entry of each left vector is positive
        assert!(s.left[(1, 0)] > 0.0 && s.left[(0, 1)] > 0.0);
    }

    #[test]
    fn svd_permutation() {
        let s = dense_svd(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-15 && (s.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn svd_reconstruction_random() {
        for seed in 0..5 {
            let m = random(5, 3, seed);
            let s = dense_svd(&m).unwrap();
            let recon = &s.left * DMatrix::from_diagonal(&DVector::from_vec(s.values.clone()))
                * s.right.transpose();
            let norm = m.norm();
            assert!((recon - &m).amax() <= 1e-12 * norm);
            assert!(orthonormality_error(&s.left) < 1e-13);
            assert!(orthonormality_error(&s.right) < 1e-13);
            assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_rejects_nan() {
        let mut m = DMatrix::identity(2, 2);
        m[(1, 1)] = f64::INFINITY;
        assert!(dense_svd(&m).is_err());
    }

    #[test]
    fn project_coordinate() {
        let u = OrthonormalBasis::new(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]);
        let r = project_out(&u, &x).unwrap();
        assert_eq!(r, DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0]));
    }

    #[test]
    fn project_annihilates_span() {
        let u = random_basis(6, 3, 9);
        let x = u.matrix() * random(3, 4, 10);
        let r = project_out(&u, &x).unwrap();
        assert!(r.amax() < 1e-14);
    }

    #[test]
    fn project_orthogonality_random() {
        for seed in 0..10 {
            let u = random_basis(20, 5, seed);
            let x = random(20, 4, seed + 100);
            let r = project_out(&u, &x).unwrap();
            assert!(u.matrix().tr_mul(&r).amax() <= 1e-12 * x.norm());
        }
    }

    #[test]
    fn project_dimension_mismatch() {
        let u = random_basis(5, 2, 1);
        assert!(project_out(&u, &DMatrix::zeros(4, 1)).is_err());
    }

    #[test]
    fn basis_validation() {
        assert!(OrthonormalBasis::new(DMatrix::from_element(2, 1, 1.0)).is_err());
        assert!(OrthonormalBasis::new(DMatrix::identity(3, 2)).is_ok());
    }

    proptest! {
        #[test]
        fn qr_orthonormal_nearly_dependent(m in 3usize..30, p in 1usize..6, seed in any::<u64>(), eps in 1e-12f64..1e-3) {
            prop_assume!(m >= p);
            let mut a = random(m, p, seed);
            if p > 1 {
                let c0 = a.column(0).into_owned();
                let noise = random(m, 1, seed ^ 0xabc);
                a.set_column(p - 1, &(c0 + noise.column(0) * eps));
            }
            let (q, r) = thin_qr(&a).unwrap();
            prop_assert!(q.orthonormality_error() <= 1e-10);
            prop_assert!((q.matrix() * &r - &a).amax() <= 1e-12 * a.norm());
            for j in 0..p {
                prop_assert!(r[(j, j)] >= 0.0);
                for i in j + 1..p {
                    prop_assert!(r[(i, j)] == 0.0);
                }
            }
        }

        #[test]
        fn svd_transpose_invariance(m in 1usize..9, n in 1usize..9, seed in any::<u64>()) {
            let a = random(m, n, seed);
            let s1 = singular_values(&a).unwrap();
            let s2 = singular_values(&a.transpose()).unwrap();
            for (x, y) in s1.iter().zip(&s2) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + s1[0]));
            }
        }

        #[test]
        fn project_idempotent(m in 2usize..25, k in 1usize..5, s in 1usize..4, seed in any::<u64>()) {
            prop_assume!(k <= m);
            let u = random_basis(m, k, seed);
            let x = random(m, s, seed.wrapping_add(1));
            let once = project_out(&u, &x).unwrap();
            let twice = project_out(&u, &once).unwrap();
            prop_assert!((once - twice).amax() <= 1e-12 * (1.0 + x.norm()));
        }
    }
}
