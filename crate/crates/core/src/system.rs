use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, ensure_square};

/// `ẋ = A x + B u` with real `A` (n×n) and `B` (n×m).
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl LtiSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = ensure_square("A", &a)?;
        if n == 0 {
            return Err(Error::InvalidInput(
                "state dimension must be at least 1".into(),
            ));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "`B` is {}x{}, expected {n} rows and at least one column",
                b.nrows(),
                b.ncols()
            )));
        }
        ensure_finite("A", &a)?;
        ensure_finite("B", &b)?;
        Ok(LtiSystem { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn is_single_input(&self) -> bool {
        self.m() == 1
    }

    /// `𝒞 = (B, AB, …, A^{n−1}B)`, n×(nm).
    pub fn controllability_matrix(&self) -> DMatrix<f64> {
        let (n, m) = (self.n(), self.m());
        let mut c = DMatrix::zeros(n, n * m);
        let mut block = self.b.clone();
        for k in 0..n {
            c.view_mut((0, k * m), (n, m)).copy_from(&block);
            block = &self.a * block;
        }
        c
    }

    /// `B Bᵀ`.
    pub fn input_gram(&self) -> DMatrix<f64> {
        &self.b * self.b.transpose()
    }
}

/// Numerical tolerances used throughout the pipeline. All are relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Root residual `|N(λ)| ≤ root · max|a_i| · max(1,|λ|)^n`.
    pub root: f64,
    /// Roots closer than `cluster · (1 + ρ)` are merged.
    pub cluster: f64,
    /// `|λ_i + λ_j| ≤ solve · (1 + ρ)` violates solvability.
    pub solve: f64,
    /// Condition estimates above this are refused.
    pub condition_limit: f64,
    /// Relative residual accepted when checking a supplied spectrum against its polynomial.
    pub consistency: f64,
    pub max_sweeps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root: 1e-12,
            cluster: 1e-8,
            solve: 1e-10,
            condition_limit: 1e12,
            consistency: 1e-8,
            max_sweeps: 200,
        }
    }
}
