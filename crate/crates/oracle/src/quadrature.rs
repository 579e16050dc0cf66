use nalgebra::DMatrix;

use crate::{
    ensure_square, matrix_exp_reference, symmetry_defect, OracleError, OracleMethod, OracleResult,
};

/// `∫₀ᵗ e^{Aτ} B Bᵀ e^{Aᵀτ} dτ` by composite Simpson.
///
/// The interval count is chosen from `t·‖A‖₁` so that each panel spans a
/// small fraction of the fastest time scale.
pub fn gramian_quadrature(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    t: f64,
) -> Result<OracleResult, OracleError> {
    let rate = a
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let intervals = ((80.0 * t.abs() * rate).ceil() as usize).clamp(1000, 400_000);
    gramian_quadrature_with(a, b, t, intervals)
}

/// Same as [`gramian_quadrature`] with an explicit number of panels (rounded up to even).
pub fn gramian_quadrature_with(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    t: f64,
    intervals: usize,
) -> Result<OracleResult, OracleError> {
    let n = ensure_square("A", a)?;
    if b.nrows() != n {
        return Err(OracleError::DimensionMismatch(format!(
            "`B` has {} rows, expected {n}",
            b.nrows()
        )));
    }
    let intervals = (intervals.max(2) + 1) & !1;
    if t == 0.0 {
        return Ok(OracleResult {
            matrix: DMatrix::zeros(n, n),
            method: OracleMethod::Quadrature,
            residual: 0.0,
            steps: 0,
        });
    }

    let h = t / intervals as f64;
    let step = matrix_exp_reference(a, h);
    // e^{Aτ}B propagated panel by panel.
    let mut eb = b.clone();
    let mut acc = &eb * eb.transpose();
    for k in 1..=intervals {
        eb = &step * &eb;
        let w = if k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += (&eb * eb.transpose()) * w;
    }
    let p = acc * (h / 3.0);
    let p = (&p + p.transpose()) * 0.5;
    let residual = symmetry_defect(&p);
    Ok(OracleResult {
        matrix: p,
        method: OracleMethod::Quadrature,
        residual,
        steps: intervals,
    })
}
