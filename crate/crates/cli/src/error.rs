use gramspec::{Error, SolvabilityReport};
use gramspec_oracle::OracleError;
use num_complex::Complex64;

use crate::document::DocumentError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVABILITY: i32 = 2;
pub const EXIT_CONDITIONING: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid document at {0}")]
    Document(#[from] DocumentError),

    #[error("{0}")]
    Io(String),

    #[error("Lyapunov equation is not uniquely solvable: λ_i + λ_j ≈ 0 for {}", describe_pairs(.report, .eigenvalues))]
    Solvability {
        report: SolvabilityReport,
        eigenvalues: Vec<Complex64>,
    },

    #[error("ill-conditioned: {0}")]
    Conditioning(Error),

    #[error("{0}")]
    Compute(Error),

    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
}

fn describe_pairs(report: &SolvabilityReport, eigenvalues: &[Complex64]) -> String {
    report
        .violating_pairs
        .iter()
        .map(|&(i, j)| match (eigenvalues.get(i), eigenvalues.get(j)) {
            (Some(&a), Some(&b)) => format!("pair ({i}, {j}) [{} + {}]", fmt_c(a), fmt_c(b)),
            _ => format!("pair ({i}, {j})"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solvability(report) => CliError::Solvability {
                report,
                eigenvalues: Vec::new(),
            },
            e if e.is_conditioning() => CliError::Conditioning(e),
            e => CliError::Compute(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Document(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Solvability { .. } => EXIT_SOLVABILITY,
            CliError::Conditioning(_) => EXIT_CONDITIONING,
            CliError::Compute(Error::Verification(_)) => EXIT_CONDITIONING,
            CliError::Compute(_) => EXIT_USAGE,
            CliError::Oracle(OracleError::Singular { .. }) => EXIT_CONDITIONING,
            CliError::Oracle(_) => EXIT_USAGE,
        }
    }
}
