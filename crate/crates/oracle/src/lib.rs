//! Brute-force reference solvers.
//!
//! Everything in this crate is deliberately naive: a dense Kronecker solve for
//! the algebraic Lyapunov equation, classical Runge–Kutta for the differential
//! one, Simpson quadrature of the Gramian integral and a Padé matrix
//! exponential. None of it knows about eigenvalues, companion forms or
//! spectral decompositions, so it can be used to check those independently.
//!
//! All matrices are real. The Lyapunov conventions are
//!
//! ```text
//! algebraic:     A P + P Aᵀ + Q = 0
//! differential:  dP/dt = A P + P Aᵀ + Q,   P(0) = P₀
//! ```

mod expm;
mod kron;
mod ode;
mod quadrature;
mod residual;

pub use expm::matrix_exp_reference;
pub use kron::{solve_lyapunov_dense, solve_lyapunov_dense_with_cap, DEFAULT_ORACLE_CAP};
pub use ode::integrate_lyapunov;
pub use quadrature::{gramian_quadrature, gramian_quadrature_with};
pub use residual::{
    lyapunov_residual_matrix, residual_lyapunov, residual_riccati, riccati_residual_matrix,
    symmetry_defect,
};

use nalgebra::DMatrix;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("matrix `{name}` must be square, got {rows}x{cols}")]
    NotSquare {
        name: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(
        "Lyapunov operator is singular (pivot ratio {pivot_ratio:.3e}); some λ_i + λ_j is zero"
    )]
    Singular { pivot_ratio: f64 },
    #[error("dimension {n} exceeds the dense oracle cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
}

/// How an [`OracleResult`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Kron,
    Rk4,
    Quadrature,
    PadeExp,
}

impl OracleMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleMethod::Kron => "kron",
            OracleMethod::Rk4 => "rk4",
            OracleMethod::Quadrature => "quadrature",
            OracleMethod::PadeExp => "pade-exp",
        }
    }
}

/// A reference solution together with the residual it was certified with.
///
/// For [`OracleMethod::Kron`] the residual is the scaled algebraic Lyapunov
/// residual. The time-marching and quadrature methods have no algebraic
/// equation to check at the end point, so they store the relative symmetry
/// defect of the result instead.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub matrix: DMatrix<f64>,
    pub method: OracleMethod,
    pub residual: f64,
    /// Time steps, quadrature intervals or unknowns, depending on `method`.
    pub steps: usize,
}

impl OracleResult {
    /// Recompute the stored residual from `matrix`.
    ///
    /// `a` and `q` are only consulted for the Kronecker method.
    pub fn recompute_residual(&self, a: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
        match self.method {
            OracleMethod::Kron => residual_lyapunov(a, q, &self.matrix),
            _ => symmetry_defect(&self.matrix),
        }
    }
}

pub(crate) fn ensure_square(name: &'static str, m: &DMatrix<f64>) -> Result<usize, OracleError> {
    if m.nrows() != m.ncols() {
        return Err(OracleError::NotSquare {
            name,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_shape(
    name: &str,
    m: &DMatrix<f64>,
    rows: usize,
    cols: usize,
) -> Result<(), OracleError> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(OracleError::DimensionMismatch(format!(
            "`{name}` is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}
