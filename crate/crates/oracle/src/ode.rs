use nalgebra::DMatrix;

use crate::{
    ensure_shape, ensure_square, symmetry_defect, OracleError, OracleMethod, OracleResult,
};

fn rhs(a: &DMatrix<f64>, q: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    // A P + P Aᵀ computed as M + Mᵀ keeps the increment exactly symmetric.
    let m = a * p;
    &m + m.transpose() + q
}

/// Classical fourth-order Runge–Kutta for `dP/dt = A P + P Aᵀ + Q` from `P(0) = P₀`.
///
/// A zero horizon returns `P₀` unchanged; `steps` is clamped to at least one.
pub fn integrate_lyapunov(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    p0: &DMatrix<f64>,
    t: f64,
    steps: usize,
) -> Result<OracleResult, OracleError> {
    let n = ensure_square("A", a)?;
    ensure_shape("Q", q, n, n)?;
    ensure_shape("P0", p0, n, n)?;
    let steps = steps.max(1);

    let mut p = p0.clone();
    if t != 0.0 {
        let h = t / steps as f64;
        for _ in 0..steps {
            let k1 = rhs(a, q, &p);
            let k2 = rhs(a, q, &(&p + &k1 * (0.5 * h)));
            let k3 = rhs(a, q, &(&p + &k2 * (0.5 * h)));
            let k4 = rhs(a, q, &(&p + &k3 * h));
            p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
    }

    let residual = symmetry_defect(&p);
    Ok(OracleResult {
        matrix: p,
        method: OracleMethod::Rk4,
        residual,
        steps,
    })
}
