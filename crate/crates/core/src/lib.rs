//! Spectral decompositions of controllability Gramians and their inverses.
//!
//! The Gramian `P` of a continuous LTI system `ẋ = A x + B u` solves
//!
//! ```text
//! A P + P Aᵀ + B Bᵀ = 0
//! ```
//!
//! and its inverse solves the matching algebraic Riccati equation. This crate
//! writes both as sums of components indexed by the eigenvalues of `A`
//! (or by pairs of eigenvalues), using closed forms that live naturally in the
//! controllability canonical (companion) form. Finite-horizon Gramians,
//! non-zero initial conditions, repeated eigenvalues and minimum-energy
//! control partitions are covered as well.
//!
//! Pipeline for a single-input system:
//!
//! ```no_run
//! use gramspec::{char_poly, find_roots, cluster, build_companion, EigenStructure, Tolerances};
//! # fn main() -> gramspec::Result<()> {
//! let a = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]);
//! let tol = Tolerances::default();
//! let poly = char_poly(&a)?;
//! let spec = cluster(&find_roots(&poly, &tol)?, tol.cluster);
//! let cr = build_companion(&poly);
//! let es = EigenStructure::new(&cr, &spec, &tol)?;
//! let parts = gramspec::infinite_subgramians(&es)?;
//! println!("{}", parts.symmetrized.sum());
//! # Ok(()) }
//! ```

pub mod companion;
pub mod components;
pub mod energy;
pub mod error;
pub mod gramian;
pub mod inverse;
pub mod linalg;
mod precise;
pub mod random;
pub mod spectrum;
pub mod system;

pub use companion::{
    build_companion, chain_c_vector, hankel_lower, hankel_upper, jordan_basis_for,
    jordan_chains_companion, left_eigenvector, residue_companion, residues_general,
    right_eigenvector, to_companion, ChainBlock, CompanionRealization, EigenStructure, JordanBasis,
    JordanChainSet, SimilarityTransform,
};
pub use components::{
    ComponentIndex, Coordinates, Decomposition, ExpTerm, FiniteComponent,
    FiniteGramianDecomposition, Flavor, InverseComponentSet, SpectralComponentSet,
};
pub use energy::{
    energy_partition, min_energy, modal_overlap_integrals, optimal_control, EnergyPartition,
    OptimalControlSignal, OverlapReport,
};
pub use error::{Error, Result};
pub use gramian::{
    finite_pair_subgramians, finite_subgramians, gramian_sum, homogeneous_decomposition,
    infinite_pair_subgramians, infinite_subgramians, lift_matrix, lift_to_original,
    multiple_eig_companion, multiple_eig_gramian, HomogeneousParts, InitialCondition,
};
pub use inverse::{
    chain_projectors, companion_eigenstructure, finite_inverse, finite_inverse_defect,
    inverse_eigenpart_counted, inverse_eigenparts, inverse_multiple_eig, inverse_pair_parts,
    orthogonality_certificate, riccati_general, NormalizationState, OrthogonalityReport,
};
pub use spectrum::{
    char_poly, check_solvability, cluster, eval_with_derivative, find_roots, EigenvalueList,
    Polynomial, SolvabilityReport, Spectrum, SpectrumEntry,
};
pub use system::{LtiSystem, Tolerances};
