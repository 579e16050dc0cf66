//! A validated document turned into spectra, transforms and decompositions.
//!
//! Everything is reported in "working" coordinates: the original state
//! coordinates for `matrices` documents, companion coordinates otherwise.

use gramspec::linalg::{complexify, hermitian_part, CMatrix};
use gramspec::{
    build_companion, chain_projectors, char_poly, check_solvability, cluster, find_roots,
    finite_inverse, finite_pair_subgramians, finite_subgramians, homogeneous_decomposition,
    infinite_pair_subgramians, infinite_subgramians, inverse_eigenparts, inverse_multiple_eig,
    inverse_pair_parts, jordan_basis_for, jordan_chains_companion, lift_matrix,
    multiple_eig_companion, multiple_eig_gramian, residues_general, to_companion,
    CompanionRealization, ComponentIndex, Coordinates, Decomposition, EigenStructure, Error,
    FiniteGramianDecomposition, InitialCondition, JordanChainSet, LtiSystem, NormalizationState,
    Polynomial, SimilarityTransform, SpectralComponentSet, Spectrum, SpectrumEntry, Tolerances,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::document::{Source, SystemDocument};
use crate::error::CliError;

/// Polynomial, spectrum and companion form; enough for `roots`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub source: &'static str,
    pub poly: Polynomial,
    pub spec: Spectrum,
    pub cr: CompanionRealization,
    /// `(A, B)` as given, for `matrices` documents.
    pub system: Option<LtiSystem>,
}

impl SpectralData {
    pub fn resolve(doc: &SystemDocument, tol: &Tolerances) -> Result<Self, CliError> {
        let source = doc.source();
        let kind = source.kind();
        let (poly, spec, system) = match source {
            Source::Matrices { a, b } => {
                let sys = LtiSystem::new(a, b)?;
                let poly = char_poly(&sys.a)?;
                let spec = cluster(&find_roots(&poly, tol)?, tol.cluster);
                (poly, spec, Some(sys))
            }
            Source::CharPoly(c) => {
                let poly = Polynomial::new(c)?;
                let spec = cluster(&find_roots(&poly, tol)?, tol.cluster);
                (poly, spec, None)
            }
            Source::Eigenvalues(list) => {
                let spec = Spectrum::new(
                    list.iter()
                        .map(|&(value, multiplicity)| SpectrumEntry {
                            value,
                            multiplicity,
                        })
                        .collect(),
                )?;
                (spec.polynomial()?, spec, None)
            }
        };
        let cr = build_companion(&poly);
        Ok(SpectralData {
            source: kind,
            poly,
            spec,
            cr,
            system,
        })
    }

    pub fn n(&self) -> usize {
        self.poly.degree()
    }

    /// Worst relative root condition number and the eigenvalue it belongs to.
    pub fn worst_root_condition(&self) -> (Complex64, f64) {
        self.spec
            .values()
            .into_iter()
            .zip(self.spec.root_condition(&self.poly))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((Complex64::new(0.0, 0.0), 0.0))
    }

    /// Simple roots whose condition number exceeds the limit cannot be turned
    /// into trustworthy components: `f64` coefficients already misplace them.
    pub fn root_conditioning_error(&self, tol: &Tolerances) -> Option<CliError> {
        let (eigenvalue, condition) = self.worst_root_condition();
        (condition > tol.condition_limit).then(|| {
            CliError::Conditioning(Error::IllConditionedRoots {
                eigenvalue,
                condition,
            })
        })
    }

    pub fn solvability_error(&self, tol: &Tolerances) -> Option<CliError> {
        let report = check_solvability(&self.spec, tol.solve);
        (!report.ok).then(|| CliError::Solvability {
            report,
            eigenvalues: self.spec.values(),
        })
    }
}

#[derive(Debug, Clone)]
pub enum Path {
    Simple(EigenStructure),
    Multiple(JordanChainSet),
}

#[derive(Debug, Clone)]
pub struct Model {
    pub data: SpectralData,
    pub tol: Tolerances,
    pub coordinates: Coordinates,
    /// State matrices in working coordinates.
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub transform: Option<SimilarityTransform>,
    /// `T⁻¹` when the system has a single input.
    pub t_inv: Option<DMatrix<f64>>,
    pub path: Path,
    /// `P₀` in working and companion coordinates.
    pub p0: Option<DMatrix<f64>>,
    pub p0_companion: Option<DMatrix<f64>>,
}

impl Model {
    /// Refuses unsolvable spectra before any decomposition is attempted.
    pub fn build(
        data: SpectralData,
        tol: Tolerances,
        p0: Option<DMatrix<f64>>,
    ) -> Result<Self, CliError> {
        if let Some(e) = data.solvability_error(&tol) {
            return Err(e);
        }
        let (coordinates, a, b, transform, t_inv) = match &data.system {
            Some(sys) if sys.is_single_input() => {
                let (st, _) = to_companion(sys, &tol)?;
                let t_inv = st.t_inverse(&tol)?;
                (
                    Coordinates::Original,
                    sys.a.clone(),
                    sys.b.clone(),
                    Some(st),
                    Some(t_inv),
                )
            }
            Some(sys) => {
                let st = SimilarityTransform::new(sys, &data.poly, &tol)?;
                (
                    Coordinates::Original,
                    sys.a.clone(),
                    sys.b.clone(),
                    Some(st),
                    None,
                )
            }
            None => {
                let b = DMatrix::from_column_slice(data.n(), 1, data.cr.b.as_slice());
                (Coordinates::Companion, data.cr.a.clone(), b, None, None)
            }
        };
        let path = if data.spec.is_simple() {
            if let Some(e) = data.root_conditioning_error(&tol) {
                return Err(e);
            }
            Path::Simple(EigenStructure::new(&data.cr, &data.spec, &tol)?)
        } else {
            Path::Multiple(jordan_chains_companion(&data.spec, &data.poly, &tol)?)
        };
        let p0_companion = match (&p0, &t_inv) {
            (None, _) => None,
            (Some(p), None) if transform.is_none() => Some(p.clone()),
            (Some(p), Some(ti)) => {
                let pc = ti * p * ti.transpose();
                Some((&pc + pc.transpose()) * 0.5)
            }
            (Some(_), None) => {
                return Err(CliError::Usage(
                    "an initial condition needs a single-input system".into(),
                ))
            }
        };
        Ok(Model {
            data,
            tol,
            coordinates,
            a,
            b,
            transform,
            t_inv,
            path,
            p0,
            p0_companion,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn is_simple(&self) -> bool {
        matches!(self.path, Path::Simple(_))
    }

    pub fn eigenstructure(&self) -> Option<&EigenStructure> {
        match &self.path {
            Path::Simple(es) => Some(es),
            Path::Multiple(_) => None,
        }
    }

    pub fn input_gram(&self) -> DMatrix<f64> {
        &self.b * self.b.transpose()
    }

    pub fn b_vector(&self) -> Option<DVector<f64>> {
        (self.m() == 1).then(|| self.b.column(0).into_owned())
    }

    fn require_single_input(&self, what: &str) -> Result<(), CliError> {
        if self.m() != 1 {
            return Err(CliError::Usage(format!(
                "{what} needs a single-input system, this one has {} inputs",
                self.m()
            )));
        }
        Ok(())
    }

    fn require_simple(&self, what: &str) -> Result<&EigenStructure, CliError> {
        self.eigenstructure().ok_or_else(|| {
            CliError::Usage(format!(
                "{what} needs simple eigenvalues; this spectrum has repeated ones"
            ))
        })
    }

    /// Gramian-type congruence `X ↦ Σ_γ T_γ X T_γᵀ`.
    fn lift_set(&self, set: &SpectralComponentSet) -> SpectralComponentSet {
        match &self.transform {
            None => set.clone(),
            Some(st) => set.map(Coordinates::Original, |x| lift_matrix(st, x)),
        }
    }

    /// Inverse-type congruence `X ↦ T⁻ᵀ X T⁻¹`.
    fn lift_inverse_set(&self, set: &SpectralComponentSet) -> SpectralComponentSet {
        match &self.t_inv {
            None => set.clone(),
            Some(ti) => {
                let tc = complexify(ti);
                set.map(Coordinates::Original, |x| tc.transpose() * x * &tc)
            }
        }
    }

    fn lifted(&self, raw: &SpectralComponentSet) -> Decomposition {
        Decomposition::from_raw(self.lift_set(raw))
    }

    /// Spectral projectors in working coordinates, one per spectrum entry.
    pub fn projectors(&self) -> Result<Vec<CMatrix>, CliError> {
        match (&self.path, self.coordinates) {
            (Path::Simple(es), Coordinates::Companion) => Ok(es.residues.clone()),
            (Path::Multiple(ch), Coordinates::Companion) => Ok(chain_projectors(ch)),
            (Path::Simple(_), Coordinates::Original) => {
                Ok(residues_general(&self.a, &self.data.spec, &self.tol)?)
            }
            (Path::Multiple(_), Coordinates::Original) => {
                let basis = jordan_basis_for(&self.a, &self.b, &self.data.spec, &self.tol)?;
                Ok((0..basis.blocks.len())
                    .map(|i| basis.right(i) * basis.left(i))
                    .collect())
            }
        }
    }

    /// `Σ_i P̃_i` (finite horizon without `P₀`, or infinite) summed in
    /// double-double; `None` on the repeated-eigenvalue path.
    pub fn gramian_sum_precise(&self, t: Option<f64>) -> Result<Option<DMatrix<f64>>, CliError> {
        let Some(es) = self.eigenstructure() else {
            return Ok(None);
        };
        if t.is_some() && self.p0.is_some() {
            return Ok(None);
        }
        let sum = gramspec::gramian_sum(es, t)?;
        Ok(Some(match &self.transform {
            None => sum,
            Some(st) => {
                let lifted = lift_matrix(st, &complexify(&sum)).map(|z| z.re);
                (&lifted + lifted.transpose()) * 0.5
            }
        }))
    }

    pub fn gramian(&self) -> Result<Decomposition, CliError> {
        let raw = match &self.path {
            Path::Simple(es) => infinite_subgramians(es)?.raw,
            Path::Multiple(ch) => multiple_eig_companion(ch)?.raw,
        };
        Ok(self.lifted(&raw))
    }

    pub fn gramian_pairs(&self) -> Result<Decomposition, CliError> {
        let es = self.require_simple("pair decomposition")?;
        Ok(self.lifted(&infinite_pair_subgramians(es)?.raw))
    }

    fn companion_b(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.data.n(), 1, self.data.cr.b.as_slice())
    }

    fn with_initial(
        &self,
        base: FiniteGramianDecomposition,
        pick: impl Fn(gramspec::HomogeneousParts) -> FiniteGramianDecomposition,
        t: f64,
    ) -> Result<FiniteGramianDecomposition, CliError> {
        match (&self.p0_companion, &self.path) {
            (None, _) => Ok(base),
            (Some(p0), Path::Simple(es)) => {
                let h = homogeneous_decomposition(es, &InitialCondition::new(p0.clone())?, t)?;
                Ok(base.plus(&pick(h))?)
            }
            (Some(_), Path::Multiple(_)) => Err(CliError::Usage(
                "an initial condition needs simple eigenvalues".into(),
            )),
        }
    }

    /// Finite-horizon eigen components at `t`, including the response to `P₀`.
    pub fn finite(&self, t: f64) -> Result<(Decomposition, FiniteGramianDecomposition), CliError> {
        let fin = match &self.path {
            Path::Simple(es) => self.with_initial(finite_subgramians(es, t)?, |h| h.eigen, t)?,
            Path::Multiple(_) => {
                let bc = self.companion_b();
                let mut f = multiple_eig_gramian(
                    &self.data.cr.a,
                    &bc,
                    &self.data.spec,
                    Some(t),
                    &self.tol,
                )?;
                f.coordinates = Coordinates::Companion;
                self.with_initial(f, |h| h.eigen, t)?
            }
        };
        Ok((self.lifted(&fin.at_horizon()), fin))
    }

    pub fn finite_pairs(
        &self,
        t: f64,
    ) -> Result<(Decomposition, FiniteGramianDecomposition), CliError> {
        let es = self.require_simple("pair decomposition")?;
        let fin = self.with_initial(finite_pair_subgramians(es, t)?, |h| h.pairs, t)?;
        Ok((self.lifted(&fin.at_horizon()), fin))
    }

    pub fn inverse(&self) -> Result<Decomposition, CliError> {
        self.require_single_input("the inverse decomposition")?;
        let raw = match &self.path {
            Path::Simple(es) => inverse_eigenparts(es)?.raw,
            Path::Multiple(ch) => inverse_multiple_eig(ch)?.raw,
        };
        Ok(Decomposition::from_raw(self.lift_inverse_set(&raw)))
    }

    pub fn inverse_pairs(&self) -> Result<Decomposition, CliError> {
        self.require_single_input("the inverse decomposition")?;
        let es = self.require_simple("pair decomposition")?;
        Ok(Decomposition::from_raw(
            self.lift_inverse_set(&inverse_pair_parts(es)?.raw),
        ))
    }

    pub fn finite_inverse(&self, t: f64) -> Result<(NormalizationState, Decomposition), CliError> {
        self.require_single_input("the inverse decomposition")?;
        let es = self.require_simple("the finite-horizon inverse")?;
        let p0 = self.initial_condition_companion()?;
        let (state, dec) = finite_inverse(es, &p0, t, &self.tol)?;
        Ok((
            state,
            Decomposition::from_raw(self.lift_inverse_set(&dec.raw)),
        ))
    }

    pub fn initial_condition_companion(&self) -> Result<InitialCondition, CliError> {
        Ok(match &self.p0_companion {
            Some(p) => InitialCondition::new(p.clone())?,
            None => InitialCondition::zero(self.data.n()),
        })
    }

    /// Target in companion coordinates.
    pub fn to_companion_vector(&self, x0: &DVector<f64>) -> Result<DVector<f64>, CliError> {
        match (&self.transform, &self.t_inv) {
            (None, _) => Ok(x0.clone()),
            (Some(_), Some(ti)) => Ok(ti * x0),
            (Some(_), None) => Err(CliError::Usage(
                "energy analysis needs a single-input system".into(),
            )),
        }
    }
}

/// Identities every component satisfies in terms of the exact Gramian `P`
/// and the spectral projectors `Π_i`.
pub enum Expect<'a> {
    /// `P̂_i = Π_i P`.
    Gramian(&'a DMatrix<f64>),
    /// `P̂_ij = Π_i P Π_j*`.
    GramianPair(&'a DMatrix<f64>),
    /// `P̂_j^{−1} = P^{−1} Π_j`.
    Inverse(&'a DMatrix<f64>),
    /// `P̂_ij^{−1} = Π_i* P^{−1} Π_j`.
    InversePair(&'a DMatrix<f64>),
}

/// `‖X − expected‖_F / ‖reference‖_F` for each component, Hermitian part taken
/// when the set is symmetrized.
pub fn component_residuals(
    set: &SpectralComponentSet,
    projectors: &[CMatrix],
    expect: &Expect,
) -> Vec<Option<f64>> {
    let (reference, scale) = match expect {
        Expect::Gramian(p)
        | Expect::GramianPair(p)
        | Expect::Inverse(p)
        | Expect::InversePair(p) => (complexify(p), p.norm().max(f64::MIN_POSITIVE)),
    };
    set.components
        .iter()
        .map(|(idx, m)| {
            let want = match (expect, *idx) {
                (Expect::Gramian(_), ComponentIndex::Eigen(i)) => &projectors[i] * &reference,
                (Expect::GramianPair(_), ComponentIndex::Pair(i, j)) => {
                    &projectors[i] * &reference * projectors[j].adjoint()
                }
                (Expect::Inverse(_), ComponentIndex::Eigen(j)) => &reference * &projectors[j],
                (Expect::InversePair(_), ComponentIndex::Pair(i, j)) => {
                    projectors[i].adjoint() * &reference * &projectors[j]
                }
                _ => return None,
            };
            let want = match set.flavor {
                gramspec::Flavor::Raw => want,
                gramspec::Flavor::Symmetrized => hermitian_part(&want),
            };
            Some((m - want).norm() / scale)
        })
        .collect()
}
