//! Dense complex linear algebra: determinants, eigenvalues, singular values.
//!
//! Thin wrappers around nalgebra's LU, Schur, and SVD for `Complex64`
//! matrices, with the error handling and orderings the rest of the crate
//! relies on.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;
// Float supplies sqrt/powf under no_std; std's inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Dense column-major complex matrix.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Convergence thresholds tried in order. Discretized integral operators
/// carry large eigenvalue clusters at the roundoff floor, where the QR
/// iteration cannot always push subdiagonals below the tightest threshold;
/// accepting 1e-12 instead perturbs the results by about `1e-12 * |M|`,
/// far below every tolerance in the crate.
const EIG_EPS_LADDER: [f64; 3] = [1e-14, 1e-12, 1e-10];
const EIG_MAX_ITER: usize = 10_000;

/// Determinant via LU with partial pivoting.
pub fn complex_determinant(m: &ComplexMatrix) -> Complex64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    m.clone().lu().determinant()
}

/// Trace of a square matrix.
pub fn complex_trace(m: &ComplexMatrix) -> Complex64 {
    assert!(m.is_square(), "trace of a non-square matrix");
    m.trace()
}

/// All eigenvalues (with algebraic multiplicity) via the complex Schur form.
///
/// The order is whatever the QR iteration produces; callers that need a
/// canonical order must sort. Fails only if the iteration does not converge.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    let dim = m.nrows();
    if dim == 0 {
        return Ok(Vec::new());
    }
    for eps in EIG_EPS_LADDER {
        if let Some(eigs) = nalgebra::linalg::Schur::try_new(m.clone(), eps, EIG_MAX_ITER)
            .and_then(|schur| schur.eigenvalues())
        {
            return Ok(eigs.iter().copied().collect());
        }
    }
    Err(Error::EigenvaluesFailed { dim })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let dim = m.nrows().max(m.ncols());
    if dim == 0 {
        return Ok(Vec::new());
    }
    for eps in EIG_EPS_LADDER {
        if let Some(svd) = m.clone().try_svd(false, false, eps, EIG_MAX_ITER) {
            return Ok(svd.singular_values.iter().copied().collect());
        }
    }
    Err(Error::SingularValuesFailed { dim })
}

/// Schatten p-norm `(sum_j s_j^p)^(1/p)` of a matrix, from its singular
/// values.
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64> {
    assert!(p >= 1.0, "Schatten norm needs p >= 1");
    let sv = singular_values(m)?;
    let sum: f64 = sv.iter().map(|s| s.powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Frobenius norm, computed entrywise (no SVD).
pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, n, |_, _| {
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    /// Cofactor-expansion determinant; exponential cost, oracle only.
    fn cofactor_det(m: &ComplexMatrix) -> C {
        let n = m.nrows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut det = C::new(0.0, 0.0);
        let mut sign = 1.0;
        for col in 0..n {
            let minor = ComplexMatrix::from_fn(n - 1, n - 1, |i, j| {
                m[(i + 1, if j < col { j } else { j + 1 })]
            });
            det += m[(0, col)] * cofactor_det(&minor) * sign;
            sign = -sign;
        }
        det
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        for n in 1..=5 {
            let m = random_matrix(n, 7 + n as u64);
            let lu = complex_determinant(&m);
            let co = cofactor_det(&m);
            assert_relative_eq!(lu.re, co.re, max_relative = 1e-10, epsilon = 1e-12);
            assert_relative_eq!(lu.im, co.im, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn determinant_of_triangular_is_diagonal_product() {
        let m = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                C::new(2.0, 1.0),
                C::new(5.0, -3.0),
                C::new(0.1, 0.0),
                C::new(0.0, 0.0),
                C::new(-1.0, 0.5),
                C::new(7.0, 7.0),
                C::new(0.0, 0.0),
                C::new(0.0, 0.0),
                C::new(0.0, 4.0),
            ],
        );
        let expect = C::new(2.0, 1.0) * C::new(-1.0, 0.5) * C::new(0.0, 4.0);
        let det = complex_determinant(&m);
        assert_relative_eq!(det.re, expect.re, max_relative = 1e-14, epsilon = 1e-14);
        assert_relative_eq!(det.im, expect.im, max_relative = 1e-14, epsilon = 1e-14);
    }

    #[test]
    fn companion_matrix_eigenvalues() {
        // companion of z^2 + 1: eigenvalues +-i
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[C::new(0.0, 0.0), C::new(-1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)],
        );
        let mut eigs = eigenvalues(&m).unwrap();
        eigs.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert_abs_diff_eq!(eigs[0].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[0].im, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1].im, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn jordan_block_has_repeated_eigenvalue() {
        let lambda = C::new(0.3, -0.8);
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[lambda, C::new(1.0, 0.0), C::new(0.0, 0.0), lambda],
        );
        let eigs = eigenvalues(&m).unwrap();
        for e in eigs {
            assert_abs_diff_eq!(e.re, lambda.re, epsilon = 1e-7);
            assert_abs_diff_eq!(e.im, lambda.im, epsilon = 1e-7);
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace_and_multiply_to_determinant() {
        for n in [2usize, 4, 6, 9] {
            let m = random_matrix(n, 100 + n as u64);
            let eigs = eigenvalues(&m).unwrap();
            assert_eq!(eigs.len(), n);
            let sum: C = eigs.iter().sum();
            let prod: C = eigs.iter().product();
            let tr = complex_trace(&m);
            let det = complex_determinant(&m);
            assert_abs_diff_eq!(sum.re, tr.re, epsilon = 1e-8);
            assert_abs_diff_eq!(sum.im, tr.im, epsilon = 1e-8);
            assert_abs_diff_eq!(prod.re, det.re, epsilon = 1e-8);
            assert_abs_diff_eq!(prod.im, det.im, epsilon = 1e-8);
        }
    }

    #[test]
    fn singular_values_of_scaled_axes() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[C::new(3.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, -4.0)],
        );
        let sv = singular_values(&m).unwrap();
        assert_relative_eq!(sv[0], 4.0, max_relative = 1e-12);
        assert_relative_eq!(sv[1], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn singular_values_descending_and_frobenius_consistent() {
        for n in [3usize, 5, 8] {
            let m = random_matrix(n, 500 + n as u64);
            let sv = singular_values(&m).unwrap();
            assert_eq!(sv.len(), n);
            for w in sv.windows(2) {
                assert!(w[0] >= w[1] - 1e-14);
            }
            assert!(sv.iter().all(|&s| s >= 0.0));
            let frob2: f64 = sv.iter().map(|s| s * s).sum();
            assert_relative_eq!(frob2, frobenius_norm(&m).powi(2), max_relative = 1e-10);
        }
    }

    #[test]
    fn singular_values_invariant_under_adjoint() {
        let m = random_matrix(6, 777);
        let sv = singular_values(&m).unwrap();
        let sv_adj = singular_values(&m.adjoint()).unwrap();
        for (a, b) in sv.iter().zip(&sv_adj) {
            assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn schatten_two_is_frobenius() {
        let m = random_matrix(5, 31);
        let s2 = schatten_norm(&m, 2.0).unwrap();
        assert_relative_eq!(s2, frobenius_norm(&m), max_relative = 1e-10);
    }

    #[test]
    fn empty_matrix_is_harmless() {
        let m = ComplexMatrix::zeros(0, 0);
        assert_eq!(eigenvalues(&m).unwrap().len(), 0);
        assert_eq!(singular_values(&m).unwrap().len(), 0);
    }
}
