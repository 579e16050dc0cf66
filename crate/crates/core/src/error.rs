use num_complex::Complex64;

use crate::spectrum::SolvabilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error, Clone)]
pub enum Error {
    #[error("matrix `{name}` must be square, got {rows}x{cols}")]
    NotSquare {
        name: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root finder did not converge after {sweeps} sweeps (worst relative residual {worst_residual:.3e})")]
    RootsNotConverged { sweeps: usize, worst_residual: f64 },

    #[error("Lyapunov solvability violated: λ_i + λ_j ≈ 0 for pairs {:?}", .0.violating_pairs)]
    Solvability(SolvabilityReport),

    #[error(
        "eigenvalue {eigenvalue} has multiplicity {multiplicity}; use the multiple-eigenvalue path"
    )]
    MultipleEigenvalue {
        eigenvalue: Complex64,
        multiplicity: usize,
    },

    #[error("|N'({eigenvalue})| = {derivative:.3e} is numerically zero; the eigenvalue is nearly multiple, use the Jordan-chain path")]
    NearMultipleEigenvalue {
        eigenvalue: Complex64,
        derivative: f64,
    },

    #[error("eigenvalue separation {separation:.3e} is below the cluster tolerance")]
    EigenvaluesNotSeparated { separation: f64 },

    #[error("eigenvalue {0} is numerically zero")]
    DegenerateEigenvalue(Complex64),

    #[error("spectrum is inconsistent with the characteristic polynomial: |N(λ)| relative residual {residual:.3e} at λ = {eigenvalue}")]
    InconsistentSpectrum {
        eigenvalue: Complex64,
        residual: f64,
    },

    #[error(
        "system is not controllable (controllability matrix condition estimate {condition:.3e})"
    )]
    Uncontrollable { condition: f64 },

    #[error("Jordan chain matrix is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditionedChains { condition: f64 },

    #[error("eigenvalue {eigenvalue} moves by a relative {condition:.3e} per unit relative change in the polynomial coefficients")]
    IllConditionedRoots {
        eigenvalue: Complex64,
        condition: f64,
    },

    #[error(
        "degenerate Jordan chain for eigenvalue {eigenvalue}: Hankel anti-diagonal e_nᵀy is zero"
    )]
    DegenerateChain { eigenvalue: Complex64 },

    #[error(
        "normalization matrix G⁻¹(t) is singular at t = {t} (condition estimate {condition:.3e})"
    )]
    NormalizationSingular { t: f64, condition: f64 },

    #[error("a stable spectrum is required (largest real part {max_real_part})")]
    StabilityRequired { max_real_part: f64 },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    /// True for failures caused by numerical conditioning rather than bad input.
    pub fn is_conditioning(&self) -> bool {
        matches!(
            self,
            Error::RootsNotConverged { .. }
                | Error::NearMultipleEigenvalue { .. }
                | Error::EigenvaluesNotSeparated { .. }
                | Error::Uncontrollable { .. }
                | Error::IllConditionedChains { .. }
                | Error::IllConditionedRoots { .. }
                | Error::DegenerateChain { .. }
                | Error::NormalizationSingular { .. }
        )
    }
}
