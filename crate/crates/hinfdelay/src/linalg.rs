//! Thin wrappers around the dense linear-algebra kernels used throughout the
//! crate: complex LU solves with a singularity guard, singular values,
//! nonsymmetric eigenvalues and log-scaled determinants.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub(crate) type C64 = Complex<f64>;

/// Relative pivot-ratio threshold below which an LU factorization is treated
/// as numerically singular.
const LU_SINGULARITY_TOL: f64 = 1e-14;

fn lu_is_singular<T: nalgebra::ComplexField<RealField = f64>>(
    lu: &nalgebra::LU<T, nalgebra::Dyn, nalgebra::Dyn>,
) -> bool {
    let u = lu.u();
    let k = u.nrows().min(u.ncols());
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    for i in 0..k {
        let p = u[(i, i)].clone().modulus();
        min = min.min(p);
        max = max.max(p);
    }
    min <= LU_SINGULARITY_TOL * max.max(f64::MIN_POSITIVE)
}

/// Solves A X = B for complex A via LU with partial pivoting.
///
/// Returns `None` when the factorization reveals numerical singularity.
pub(crate) fn solve_complex(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let lu = a.clone().lu();
    if lu_is_singular(&lu) {
        return None;
    }
    lu.solve(b)
}

/// Solves A X = B for real A via LU with partial pivoting.
pub(crate) fn solve_real(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let lu = a.clone().lu();
    if lu_is_singular(&lu) {
        return None;
    }
    lu.solve(b)
}

/// Singular values of a complex rectangular matrix, descending.
pub(crate) fn singular_values(a: &DMatrix<C64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(a.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Singular values of a real rectangular matrix, descending.
pub(crate) fn singular_values_real(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(a.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// All eigenvalues of a real dense nonsymmetric matrix (QR algorithm).
pub(crate) fn eigenvalues(a: DMatrix<f64>) -> Result<Vec<C64>> {
    let dim = a.nrows();
    let schur = nalgebra::Schur::try_new(a, f64::EPSILON, 0).ok_or_else(|| {
        Error::EigenFailure(format!("QR iteration stalled on {dim}x{dim} matrix"))
    })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of a complex Hermitian matrix, descending. Test probe for
/// cross-checking singular values against eigenvalues of A*A.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn hermitian_eigenvalues(a: &DMatrix<C64>) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure("Hermitian eigensolver did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(vals)
}

/// Log-scaled determinant of a complex matrix: returns (ln |det|, arg det).
///
/// LU based with sign/log tracking so determinants of matrices up to a few
/// hundred rows neither overflow nor underflow.
pub(crate) fn log_det(a: &DMatrix<C64>) -> (f64, f64) {
    let n = a.nrows();
    let lu = a.clone().lu();
    let perm_det: f64 = lu.p().determinant();
    let u = lu.u();
    let mut log_mod = 0.0;
    let mut arg = if perm_det < 0.0 {
        std::f64::consts::PI
    } else {
        0.0
    };
    for i in 0..n {
        let d = u[(i, i)];
        log_mod += d.norm().ln();
        arg += d.arg();
    }
    (log_mod, arg)
}

/// Log-scaled determinant of a real matrix: (ln |det|, arg ∈ {0, π}).
pub(crate) fn log_det_real(a: &DMatrix<f64>) -> (f64, f64) {
    let n = a.nrows();
    let lu = a.clone().lu();
    let mut sign: f64 = lu.p().determinant();
    let u = lu.u();
    let mut log_mod = 0.0;
    for i in 0..n {
        let d = u[(i, i)];
        log_mod += d.abs().ln();
        if d < 0.0 {
            sign = -sign;
        }
    }
    (
        log_mod,
        if sign < 0.0 {
            std::f64::consts::PI
        } else {
            0.0
        },
    )
}

/// Minimum-norm least-squares solution of the (possibly overdetermined)
/// real system A x ≈ b, via QR with an SVD fallback for rank-deficient A.
pub(crate) fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let qr = a.clone().qr();
    let rhs = qr.q().transpose() * b;
    if let Some(x) = qr.r().solve_upper_triangular(&rhs) {
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure("SVD did not converge in least squares".into()))?;
    svd.solve(b, 1e-12 * a.amax().max(1.0))
        .map(|x| x.column(0).into_owned())
        .map_err(|msg| Error::EigenFailure(msg.into()))
}

/// Deterministic pseudo-random unit vector, used to start inverse iteration.
pub(crate) fn seeded_unit_vector(dim: usize, seed: u64) -> DVector<C64> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        // splitmix64
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v = DVector::from_fn(dim, |_, _| C64::new(next(), next()));
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_det_matches_direct_product() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 1.0, -2.0]);
        let (lm, arg) = log_det_real(&a);
        let det = lm.exp() * arg.cos();
        assert!((det - (-3.0)).abs() < 1e-12);

        let ac = a.map(|x| C64::new(x, 0.5));
        let (lm, arg) = log_det(&ac);
        let det = C64::new(lm.exp(), 0.0) * C64::new(0.0, arg).exp();
        // direct 2x2 determinant
        let direct = ac[(0, 0)] * ac[(1, 1)] - ac[(0, 1)] * ac[(1, 0)];
        assert!((det - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn least_squares_solves_overdetermined_system() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0, 1.0, 2.0]);
        let x = least_squares(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_lu_is_detected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = DMatrix::identity(2, 2);
        assert!(solve_real(&a, &b).is_none());
    }
}
