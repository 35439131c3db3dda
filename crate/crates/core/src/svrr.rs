//! Singular value Rayleigh–Ritz extraction.
//!
//! Given orthonormal search bases `U`, `V` for the left and right singular
//! subspaces of `A`, the Ritz triplets are the dominant singular triplets of
//! the projected matrix `H = UᵀAV`, lifted back as `(Θ_k, U F_k, V G_k)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, Error, Result};
use crate::gkl::LinearOperator;
use crate::linalg::{dense_svd, OrthonormalBasis};
use crate::model::LatentModel;

/// Dominant singular triplets `(Θ_k, F_k, G_k)` of a projected matrix.
#[derive(Debug, Clone)]
pub struct RitzFactor {
    pub theta: Vec<f64>,
    /// `s₁ × k` left coefficients.
    pub left: DMatrix<f64>,
    /// `s₂ × k` right coefficients.
    pub right: DMatrix<f64>,
}

/// The `k` dominant singular triplets of an explicitly formed `H`.
pub fn ritz_from_projected(h: &DMatrix<f64>, k: usize) -> Result<RitzFactor> {
    let (s1, s2) = h.shape();
    if k > s1.min(s2) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds projected dimension {s1}x{s2}"
        )));
    }
    let svd = dense_svd(h)?;
    Ok(RitzFactor {
        theta: svd.values[..k].to_vec(),
        left: svd.left.columns(0, k).into_owned(),
        right: svd.right.columns(0, k).into_owned(),
    })
}

/// `H = Uᵀ A V`, formed column by column through operator products.
pub fn project<O: LinearOperator + ?Sized>(
    a: &O,
    u: &OrthonormalBasis,
    v: &OrthonormalBasis,
) -> Result<DMatrix<f64>> {
    if u.nrows() != a.nrows() || v.nrows() != a.ncols() {
        return Err(dim_err(format!(
            "operator is {}x{}, bases have {} and {} rows",
            a.nrows(),
            a.ncols(),
            u.nrows(),
            v.nrows()
        )));
    }
    let mut h = DMatrix::zeros(u.ncols(), v.ncols());
    for j in 0..v.ncols() {
        let av = a.apply(&v.matrix().column(j).into_owned());
        h.set_column(j, &u.matrix().tr_mul(&av));
    }
    Ok(h)
}

/// SV-RR(A, U, V): Ritz approximations to the `k` dominant triplets of `A`
/// from the search spaces spanned by `U` and `V`.
pub fn sv_rr<O: LinearOperator + ?Sized>(
    a: &O,
    u: &OrthonormalBasis,
    v: &OrthonormalBasis,
    k: usize,
) -> Result<(RitzFactor, LatentModel)> {
    let h = project(a, u, v)?;
    let ritz = ritz_from_projected(&h, k)?;
    let model = LatentModel::from_parts(
        ritz.theta.clone(),
        u.matrix() * &ritz.left,
        v.matrix() * &ritz.right,
    );
    Ok((ritz, model))
}

/// `2 uᵀAv / (‖u‖² + ‖v‖²)`, the Rayleigh quotient of the augmented matrix
/// `[0 A; Aᵀ 0]` at `(u, v)`.
pub fn rayleigh_quotient<O: LinearOperator + ?Sized>(
    a: &O,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    if u.len() != a.nrows() || v.len() != a.ncols() {
        return Err(dim_err("rayleigh_quotient: vector lengths do not match operator"));
    }
    let denom = u.norm_squared() + v.norm_squared();
    if denom == 0.0 {
        return Err(Error::InvalidArgument("u and v are both zero".into()));
    }
    Ok(2.0 * u.dot(&a.apply(v)) / denom)
}

/// `[0 A; Aᵀ 0]`.
pub fn augmented_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut b = DMatrix::zeros(m + n, m + n);
    b.view_mut((0, m), (m, n)).copy_from(a);
    b.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
    b
}

/// `blockdiag(U, V)`, the search basis for the augmented problem.
pub fn block_diagonal_basis(u: &OrthonormalBasis, v: &OrthonormalBasis) -> DMatrix<f64> {
    let (m, s1) = u.matrix().shape();
    let (n, s2) = v.matrix().shape();
    let mut z = DMatrix::zeros(m + n, s1 + s2);
    z.view_mut((0, 0), (m, s1)).copy_from(u.matrix());
    z.view_mut((m, s1), (n, s2)).copy_from(v.matrix());
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{singular_values, thin_qr};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn basis(m: usize, s: usize, rng: &mut ChaCha8Rng) -> OrthonormalBasis {
        thin_qr(&random(m, s, rng)).unwrap().0
    }

    #[test]
    fn full_bases_recover_exact_triplets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(7, 5, &mut rng);
        let (ritz, model) = sv_rr(
            &a,
            &OrthonormalBasis::identity(7),
            &OrthonormalBasis::identity(5),
            3,
        )
        .unwrap();
        let exact = singular_values(&a).unwrap();
        for i in 0..3 {
            assert!((ritz.theta[i] - exact[i]).abs() < 1e-12);
        }
        let resid = &a * model.v().matrix() - model.u().matrix() * DMatrix::from_diagonal(&DVector::from_vec(model.sigma().to_vec()));
        assert!(resid.amax() < 1e-12);
    }

    #[test]
    fn exact_top_pair_gives_sigma_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random(6, 4, &mut rng);
        let svd = dense_svd(&a).unwrap();
        let u = OrthonormalBasis::new(svd.left.columns(0, 1).into_owned()).unwrap();
        let v = OrthonormalBasis::new(svd.right.columns(0, 1).into_owned()).unwrap();
        let (ritz, _) = sv_rr(&a, &u, &v, 1).unwrap();
        assert!((ritz.theta[0] - svd.values[0]).abs() < 1e-10);
    }

    #[test]
    fn random_bases_bound_from_below() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random(10, 8, &mut rng);
            let exact = singular_values(&a).unwrap();
            let u = basis(10, 4, &mut rng);
            let v = basis(8, 3, &mut rng);
            let (ritz, _) = sv_rr(&a, &u, &v, 3).unwrap();
            for i in 0..3 {
                assert!(ritz.theta[i] <= exact[i] + 1e-10);
            }
        }
    }

    #[test]
    fn k_too_large_and_shape_errors() {
        let a = DMatrix::<f64>::identity(4, 4);
        let u = OrthonormalBasis::identity(4);
        let v2 = OrthonormalBasis::new(DMatrix::identity(4, 2)).unwrap();
        assert!(sv_rr(&a, &u, &v2, 3).is_err());
        assert!(sv_rr(&a, &OrthonormalBasis::identity(3), &v2, 1).is_err());
    }

    #[test]
    fn rayleigh_quotient_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(5, 4, &mut rng);
        let svd = dense_svd(&a).unwrap();
        let u1 = svd.left.column(0).into_owned();
        let v1 = svd.right.column(0).into_owned();
        assert!((rayleigh_quotient(&a, &u1, &v1).unwrap() - svd.values[0]).abs() < 1e-12);
        let flipped = rayleigh_quotient(&a, &(-&u1), &v1).unwrap();
        assert!((flipped + svd.values[0]).abs() < 1e-12);

        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let u = DVector::from_vec(vec![0.0, 1.0]);
        let v = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(rayleigh_quotient(&d, &u, &v).unwrap(), 0.0);
        assert!(rayleigh_quotient(&d, &DVector::zeros(2), &DVector::zeros(2)).is_err());
    }

    #[test]
    fn largest_ritz_value_dominates_sampled_bilinear_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random(9, 7, &mut rng);
            let u = basis(9, 3, &mut rng);
            let v = basis(7, 3, &mut rng);
            let (ritz, _) = sv_rr(&a, &u, &v, 1).unwrap();
            let mut best = f64::NEG_INFINITY;
            for _ in 0..4000 {
                let cu = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
                let cv = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
                let x = u.matrix() * cu.normalize();
                let y = v.matrix() * cv.normalize();
                let val = x.dot(&(&a * y));
                assert!(val <= ritz.theta[0] + 1e-12);
                best = best.max(val);
            }
            // sampling slack: 4000 samples get within a few percent of the max
            assert!(best >= 0.9 * ritz.theta[0]);
        }
    }

    #[test]
    fn nested_bases_never_decrease_ritz_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let a = random(12, 10, &mut rng);
            let full_u = basis(12, 8, &mut rng);
            let v = basis(10, 6, &mut rng);
            let mut prev = vec![0.0; 3];
            for s in 3..=8 {
                let u = OrthonormalBasis::new(full_u.matrix().columns(0, s).into_owned()).unwrap();
                let (ritz, _) = sv_rr(&a, &u, &v, 3).unwrap();
                for i in 0..3 {
                    assert!(ritz.theta[i] >= prev[i] - 1e-12);
                }
                prev = ritz.theta.clone();
            }
        }
    }

    #[test]
    fn top_pair_is_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(8, 6, &mut rng);
        let u = basis(8, 4, &mut rng);
        let v = basis(6, 3, &mut rng);
        let (ritz, model) = sv_rr(&a, &u, &v, 1).unwrap();
        assert!(ritz.theta[0] > 0.0);
        // pre-normalization coefficients scaled by theta stay balanced
        let h = project(&a, &u, &v).unwrap();
        let f = &h * ritz.right.column(0);
        let g = h.tr_mul(&ritz.left.column(0).into_owned());
        assert!((f.norm() - g.norm()).abs() < 1e-10);
        let d = model.u().matrix().column(0).norm() - model.v().matrix().column(0).norm();
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn augmented_rayleigh_ritz_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (m, n, s1, s2) in [(6, 5, 3, 2), (8, 9, 4, 5), (10, 7, 6, 4)] {
            let a = random(m, n, &mut rng);
            let u = basis(m, s1, &mut rng);
            let v = basis(n, s2, &mut rng);
            let z = block_diagonal_basis(&u, &v);
            let b = augmented_matrix(&a);
            let projected = z.transpose() * b * &z;
            let mut eig: Vec<f64> = projected.symmetric_eigen().eigenvalues.iter().copied().collect();
            eig.sort_by(|x, y| y.total_cmp(x));
            let theta = singular_values(&project(&a, &u, &v).unwrap()).unwrap();
            let mut expected: Vec<f64> = theta.iter().copied().chain(theta.iter().map(|t| -t)).collect();
            expected.resize(s1 + s2, 0.0);
            expected.sort_by(|x, y| y.total_cmp(x));
            for (x, y) in eig.iter().zip(&expected) {
                assert!((x - y).abs() < 1e-10, "{eig:?} vs {expected:?}");
            }
        }
    }
}
