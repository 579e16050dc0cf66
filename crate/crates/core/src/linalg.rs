//! Small dense helpers shared by the spectral modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn complexify_vec(v: &DVector<f64>) -> CVector {
    v.map(|x| Complex64::new(x, 0.0))
}

/// `{M}_H = (M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn imag_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt()
}

/// `‖M − M*‖_F`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// `diag(−1, +1, −1, …)`, i.e. `J_kk = (−1)^k` for 1-based `k`.
pub fn alternating_signs(n: usize) -> DVector<f64> {
    DVector::from_fn(n, |k, _| if k % 2 == 0 { -1.0 } else { 1.0 })
}

/// `M·J` without forming `J`.
pub fn scale_columns_alternating(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        if j % 2 == 0 {
            col.neg_mut();
        }
    }
    out
}

/// `J·M` without forming `J`.
pub fn scale_rows_alternating(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        if i % 2 == 0 {
            row.neg_mut();
        }
    }
    out
}

/// Ratio of extreme singular values of a real matrix (∞ when rank deficient).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    ratio_of_extremes(sv.iter().copied())
}

pub fn condition_number_complex(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    ratio_of_extremes(sv.iter().copied())
}

fn ratio_of_extremes(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0_f64), |(lo, hi), s| {
        (lo.min(s), hi.max(s))
    });
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Inverse of a complex matrix, refusing when the condition estimate exceeds `limit`.
pub fn inverse_conditioned(m: &CMatrix, limit: f64) -> std::result::Result<CMatrix, f64> {
    let cond = condition_number_complex(m);
    if !(cond < limit) {
        return Err(cond);
    }
    m.clone().try_inverse().ok_or(cond)
}

pub fn inverse_real_conditioned(
    m: &DMatrix<f64>,
    limit: f64,
) -> std::result::Result<DMatrix<f64>, f64> {
    let cond = condition_number(m);
    if !(cond < limit) {
        return Err(cond);
    }
    m.clone().try_inverse().ok_or(cond)
}

/// Largest absolute entry of `M` at positions with odd `μ + ν` (1-based), relative to `‖M‖_max`.
///
/// Zero for matrices with the zero-plaid pattern.
pub fn plaid_zero_violation(m: &CMatrix) -> f64 {
    let scale = m
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if (i + j) % 2 == 1 {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst / scale
}

/// Relative deviation from the alternating Hankel rule
/// `M_{μν} = (−1)^{ν−k} M_{kk}` on every even anti-diagonal `μ + ν = 2k`.
pub fn plaid_hankel_violation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let scale = m
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 == 0 {
                // 0-based anti-diagonal i + j meets the diagonal at (k, k)
                let k = (i + j) / 2;
                let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((m[(i, j)] - m[(k, k)] * sign).norm());
            }
        }
    }
    worst / scale
}

/// Smallest eigenvalue of a Hermitian matrix via its real symmetric embedding.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    let h = hermitian_part(m);
    let n = h.nrows();
    // [Re −Im; Im Re] has the spectrum of h, each value twice.
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            big[(i, j)] = z.re;
            big[(i + n, j + n)] = z.re;
            big[(i, j + n)] = -z.im;
            big[(i + n, j)] = z.im;
        }
    }
    big.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn ensure_square(name: &'static str, m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            name,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "`{name}` has non-finite entries"
        )))
    }
}
