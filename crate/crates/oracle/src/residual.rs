use nalgebra::{DMatrix, DVector};

pub fn lyapunov_residual_matrix(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> DMatrix<f64> {
    a * p + p * a.transpose() + q
}

/// `‖A P + P Aᵀ + Q‖_F / (2‖A‖_F‖P‖_F + ‖Q‖_F)`.
pub fn residual_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let r = lyapunov_residual_matrix(a, q, p).norm();
    let scale = 2.0 * a.norm() * p.norm() + q.norm();
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

pub fn riccati_residual_matrix(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    pinv: &DMatrix<f64>,
) -> DMatrix<f64> {
    let pb = pinv * b;
    pinv * a + a.transpose() * pinv + &pb * pb.transpose()
}

/// `‖P⁻¹A + AᵀP⁻¹ + P⁻¹bbᵀP⁻¹‖_F / (2‖A‖_F‖P⁻¹‖_F + ‖P⁻¹b‖²)`.
pub fn residual_riccati(a: &DMatrix<f64>, b: &DVector<f64>, pinv: &DMatrix<f64>) -> f64 {
    let r = riccati_residual_matrix(a, b, pinv).norm();
    let pb = pinv * b;
    let scale = 2.0 * a.norm() * pinv.norm() + pb.norm_squared();
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// `‖P − Pᵀ‖_F / max(1, ‖P‖_F)`.
pub fn symmetry_defect(p: &DMatrix<f64>) -> f64 {
    (p - p.transpose()).norm() / p.norm().max(1.0)
}
