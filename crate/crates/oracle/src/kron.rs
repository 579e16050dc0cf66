use nalgebra::{DMatrix, DVector};

use crate::{
    ensure_shape, ensure_square, residual_lyapunov, OracleError, OracleMethod, OracleResult,
};

/// Largest state dimension the n²×n² dense solve accepts by default.
pub const DEFAULT_ORACLE_CAP: usize = 32;

// Pivots smaller than this fraction of the largest one are treated as zero.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// Solve `A P + P Aᵀ + Q = 0` by Gaussian elimination on the vectorized system.
///
/// With column-stacking `vec`, `vec(A P) = (I ⊗ A) vec(P)` and
/// `vec(P Aᵀ) = (A ⊗ I) vec(P)`, so the operator is `I ⊗ A + A ⊗ I`.
/// For n = 2 and `vec(P) = (p11, p21, p12, p22)`:
///
/// ```text
/// I⊗A + A⊗I = | 2a11  a12   a12   0    |
///             | a21   a11+a22 0   a12  |
///             | a21   0   a11+a22 a12  |
///             | 0     a21   a21   2a22 |
/// ```
///
/// whose first row reproduces `(AP + PAᵀ)₁₁ = 2 a11 p11 + a12 (p21 + p12)`.
pub fn solve_lyapunov_dense(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> Result<OracleResult, OracleError> {
    solve_lyapunov_dense_with_cap(a, q, DEFAULT_ORACLE_CAP)
}

pub fn solve_lyapunov_dense_with_cap(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    cap: usize,
) -> Result<OracleResult, OracleError> {
    let n = ensure_square("A", a)?;
    ensure_shape("Q", q, n, n)?;
    if n > cap {
        return Err(OracleError::CapExceeded { n, cap });
    }

    let eye = DMatrix::<f64>::identity(n, n);
    let op = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|v| -v));

    let lu = op.lu();
    let diag = lu.u().diagonal();
    let max_pivot = diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min_pivot = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let pivot_ratio = if max_pivot > 0.0 {
        min_pivot / max_pivot
    } else {
        0.0
    };
    if pivot_ratio < SINGULAR_PIVOT_RATIO {
        return Err(OracleError::Singular { pivot_ratio });
    }
    let sol = lu
        .solve(&rhs)
        .ok_or(OracleError::Singular { pivot_ratio })?;

    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    let p = (&p + p.transpose()) * 0.5;
    let residual = residual_lyapunov(a, q, &p);
    Ok(OracleResult {
        matrix: p,
        method: OracleMethod::Kron,
        residual,
        steps: n * n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_case() {
        let a = DMatrix::from_element(1, 1, -1.0);
        let q = DMatrix::from_element(1, 1, 1.0);
        let r = solve_lyapunov_dense(&a, &q).unwrap();
        assert_relative_eq!(r.matrix[(0, 0)], 0.5, epsilon = 1e-15);
        assert_eq!(r.method, OracleMethod::Kron);
    }

    #[test]
    fn two_by_two_vec_identity() {
        // (AP + PAᵀ) must equal the operator applied to vec(P).
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let p = DMatrix::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        let eye = DMatrix::<f64>::identity(2, 2);
        let op = eye.kronecker(&a) + a.kronecker(&eye);
        let lhs = &a * &p + &p * a.transpose();
        let vecp = DVector::from_column_slice(p.as_slice());
        let applied = op * vecp;
        assert_eq!(applied.as_slice(), lhs.as_slice());
    }

    #[test]
    fn imaginary_pair_is_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let q = DMatrix::identity(2, 2);
        assert!(matches!(
            solve_lyapunov_dense(&a, &q),
            Err(OracleError::Singular { .. })
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let a = DMatrix::<f64>::identity(3, 3) * -1.0;
        let q = DMatrix::identity(3, 3);
        assert!(matches!(
            solve_lyapunov_dense_with_cap(&a, &q, 2),
            Err(OracleError::CapExceeded { n: 3, cap: 2 })
        ));
    }
}
