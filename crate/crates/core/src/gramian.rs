//! Eigenvalue-indexed decompositions of the controllability Gramian.
//!
//! Sign convention: the eigenparts are
//!
//! ```text
//! P̂_i = x_i x_iᵀ 𝒥 / (−N'(λ_i) N(−λ_i))
//! ```
//!
//! For `N(s) = s + 1` this gives `P = 1/2`, the solution of `−2P + 1 = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::companion::{jordan_basis_for, EigenStructure, JordanChainSet, SimilarityTransform};
use crate::components::{
    ComponentIndex, Coordinates, Decomposition, ExpTerm, FiniteComponent,
    FiniteGramianDecomposition, Flavor, SpectralComponentSet,
};
use crate::error::{Error, Result};
use crate::linalg::{
    complexify, ensure_square, inverse_conditioned, scale_columns_alternating, CMatrix,
};
use crate::spectrum::{check_solvability, Spectrum};
use crate::system::Tolerances;

/// Symmetric initial condition `P(0) = P₀` of the differential Lyapunov equation.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub p0: DMatrix<f64>,
}

impl InitialCondition {
    /// Rejects non-square or asymmetric (beyond `1e−12` relative) matrices.
    pub fn new(p0: DMatrix<f64>) -> Result<Self> {
        ensure_square("P0", &p0)?;
        let defect = (&p0 - p0.transpose()).norm() / p0.norm().max(1.0);
        if defect > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "initial condition is not symmetric (relative defect {defect:.3e})"
            )));
        }
        Ok(InitialCondition { p0 })
    }

    pub fn zero(n: usize) -> Self {
        InitialCondition {
            p0: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        InitialCondition {
            p0: DMatrix::identity(n, n),
        }
    }
}

fn eigen_set(
    es: &EigenStructure,
    components: Vec<(ComponentIndex, CMatrix)>,
) -> SpectralComponentSet {
    SpectralComponentSet {
        flavor: Flavor::Raw,
        coordinates: Coordinates::Companion,
        eigenvalues: es.eigenvalues.clone(),
        components,
    }
}

fn raw_eigenpart(es: &EigenStructure, i: usize) -> CMatrix {
    let x = &es.x[i];
    let denom = -es.dn[i] * es.n_neg[i];
    scale_columns_alternating(&(x * x.transpose())) / denom
}

/// `P̂_i^C` and `P̃_i^C = {P̂_i^C}_H`, one per eigenvalue.
pub fn infinite_subgramians(es: &EigenStructure) -> Result<Decomposition> {
    let comps = (0..es.eigenvalues.len())
        .map(|i| (ComponentIndex::Eigen(i), raw_eigenpart(es, i)))
        .collect();
    Ok(Decomposition::from_raw(eigen_set(es, comps)))
}

fn raw_pair(es: &EigenStructure, i: usize, j: usize) -> CMatrix {
    let mu = es.eigenvalues[i] + es.eigenvalues[j].conj();
    let scale = -(mu * es.dn[i] * es.dn[j].conj()).inv();
    (&es.x[i] * es.x[j].adjoint()) * scale
}

/// `P_{ij}^C = {−x_i x_j* / ((λ_i + λ_j*) N'(λ_i) N'(λ_j*))}_H`.
pub fn infinite_pair_subgramians(es: &EigenStructure) -> Result<Decomposition> {
    let k = es.eigenvalues.len();
    let mut comps = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            comps.push((ComponentIndex::Pair(i, j), raw_pair(es, i, j)));
        }
    }
    Ok(Decomposition::from_raw(eigen_set(es, comps)))
}

fn finite_set(
    es: &EigenStructure,
    t: f64,
    components: Vec<FiniteComponent>,
) -> FiniteGramianDecomposition {
    FiniteGramianDecomposition {
        flavor: Flavor::Raw,
        coordinates: Coordinates::Companion,
        eigenvalues: es.eigenvalues.clone(),
        horizon: t,
        components,
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "horizon must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

/// `P̂_i^C(t) = P̂_i^C (I − e^{(λ_i I + A_Cᵀ)t})` with `e^{A_Cᵀt} = Σ_j R_jᵀ e^{λ_j t}`.
///
/// Raw flavor; call [`FiniteGramianDecomposition::symmetrized`] for `P̃_i^C(t)`.
pub fn finite_subgramians(es: &EigenStructure, t: f64) -> Result<FiniteGramianDecomposition> {
    check_horizon(t)?;
    let k = es.eigenvalues.len();
    let comps = (0..k)
        .map(|i| {
            let p = raw_eigenpart(es, i);
            let terms = (0..k)
                .map(|j| ExpTerm {
                    coefficient: -(&p * es.residues[j].transpose()),
                    rate: es.eigenvalues[i] + es.eigenvalues[j],
                    degree: 0,
                })
                .collect();
            FiniteComponent {
                index: ComponentIndex::Eigen(i),
                static_part: p,
                terms,
            }
        })
        .collect();
    Ok(finite_set(es, t, comps))
}

/// `P_{ij}^C(t) = (e^{(λ_i+λ_j*)t} − 1)/(λ_i+λ_j*) · x_i x_j* / (N'(λ_i) N'(λ_j*))`, raw flavor.
pub fn finite_pair_subgramians(es: &EigenStructure, t: f64) -> Result<FiniteGramianDecomposition> {
    check_horizon(t)?;
    let k = es.eigenvalues.len();
    let mut comps = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let s = raw_pair(es, i, j);
            comps.push(FiniteComponent {
                index: ComponentIndex::Pair(i, j),
                terms: vec![ExpTerm {
                    coefficient: -s.clone(),
                    rate: es.eigenvalues[i] + es.eigenvalues[j].conj(),
                    degree: 0,
                }],
                static_part: s,
            });
        }
    }
    Ok(finite_set(es, t, comps))
}

/// `Σ_i P̃_i^C(t)` accumulated in double-double precision; `None` is the infinite horizon.
///
/// At short horizons the individual terms of the finite expansion exceed the
/// Gramian by up to eleven orders of magnitude for `n = 8`, so summing the
/// `f64` components loses most digits. This evaluates the same closed form
/// from the eigenvalues alone and rounds once.
pub fn gramian_sum(es: &EigenStructure, t: Option<f64>) -> Result<DMatrix<f64>> {
    if let Some(t) = t {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "horizon must be finite and non-negative, got {t}"
            )));
        }
    }
    Ok(crate::precise::pair_gramian_sum(&es.eigenvalues, es.n(), t))
}

/// Response of the differential Lyapunov equation to `P(0) = P₀`.
#[derive(Debug, Clone)]
pub struct HomogeneousParts {
    /// `R_i P₀ e^{(λ_i I + A_Cᵀ)t}`.
    pub eigen: FiniteGramianDecomposition,
    /// `R_i P₀ R_j* e^{(λ_i + λ_j*)t}`.
    pub pairs: FiniteGramianDecomposition,
}

/// Both homogeneous decompositions, raw flavor. At `t = 0` each sums to `P₀`.
pub fn homogeneous_decomposition(
    es: &EigenStructure,
    p0: &InitialCondition,
    t: f64,
) -> Result<HomogeneousParts> {
    check_horizon(t)?;
    let n = es.n();
    if p0.p0.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial condition is {}x{0}, system has n = {n}",
            p0.p0.nrows()
        )));
    }
    let k = es.eigenvalues.len();
    let p0c = complexify(&p0.p0);
    let zero = CMatrix::zeros(n, n);
    let mut eigen = Vec::with_capacity(k);
    let mut pairs = Vec::with_capacity(k * k);
    for i in 0..k {
        let rp = &es.residues[i] * &p0c;
        let terms = (0..k)
            .map(|j| ExpTerm {
                coefficient: &rp * es.residues[j].transpose(),
                rate: es.eigenvalues[i] + es.eigenvalues[j],
                degree: 0,
            })
            .collect();
        eigen.push(FiniteComponent {
            index: ComponentIndex::Eigen(i),
            static_part: zero.clone(),
            terms,
        });
        for j in 0..k {
            pairs.push(FiniteComponent {
                index: ComponentIndex::Pair(i, j),
                static_part: zero.clone(),
                terms: vec![ExpTerm {
                    coefficient: &rp * es.residues[j].adjoint(),
                    rate: es.eigenvalues[i] + es.eigenvalues[j].conj(),
                    degree: 0,
                }],
            });
        }
    }
    Ok(HomogeneousParts {
        eigen: finite_set(es, t, eigen),
        pairs: finite_set(es, t, pairs),
    })
}

/// `X ↦ 𝒞 (ℋ_u X ℋ_u ⊗ I_m) 𝒞ᵀ = Σ_γ T_γ X T_γᵀ`.
pub fn lift_matrix(st: &SimilarityTransform, x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    st.per_input.iter().fold(CMatrix::zeros(n, n), |acc, t| {
        let tc = complexify(t);
        acc + &tc * x * tc.transpose()
    })
}

/// Maps companion-coordinate components to the original state coordinates.
pub fn lift_to_original(
    set: &SpectralComponentSet,
    st: &SimilarityTransform,
) -> Result<SpectralComponentSet> {
    if set.coordinates != Coordinates::Companion {
        return Err(Error::InvalidInput(
            "components are already in original coordinates".into(),
        ));
    }
    if set.n() != st.t.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "components are {0}x{0}, transform is for n = {1}",
            set.n(),
            st.t.nrows()
        )));
    }
    Ok(set.map(Coordinates::Original, |x| lift_matrix(st, x)))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Gramian of `(A, B)` for an arbitrary Jordan structure.
///
/// With `e^{At} = Σ_i e^{λ_i t} Σ_k Â_k^{(i)} t^{k−1}/(k−1)!` and
/// `W_i = (−λ_i I − Aᵀ)^{−1}`, the static part of component `i` is
/// `Σ_k Â_k^{(i)} B Bᵀ W_i^k`. When a horizon is given the finite Gramian
/// subtracts, for every `k`, `l ≤ k`, block `j` and `q`,
///
/// ```text
/// Â_k^{(i)} B Bᵀ W_i^l (Â_q^{(j)})ᵀ · t^{k−l+q−1} / ((k−l)! (q−1)!) · e^{(λ_i+λ_j)t}
/// ```
///
/// `Â_k^{(i)} = Σ_l x_l y_{k−1+l}ᵀ` comes from the Jordan chains.
pub fn multiple_eig_gramian(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    spec: &Spectrum,
    t: Option<f64>,
    tol: &Tolerances,
) -> Result<FiniteGramianDecomposition> {
    let n = ensure_square("A", a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "`B` has {} rows, expected {n}",
            b.nrows()
        )));
    }
    if let Some(t) = t {
        check_horizon(t)?;
    }
    let report = check_solvability(spec, tol.solve);
    if !report.ok {
        return Err(Error::Solvability(report));
    }
    let basis = jordan_basis_for(a, b, spec, tol)?;
    let q = complexify(&(b * b.transpose()));
    let at = complexify(&a.transpose());
    let eye = CMatrix::identity(n, n);

    // Â_k^{(i)} for k = 1..n_i, per block
    let ahat: Vec<Vec<CMatrix>> = (0..basis.blocks.len())
        .map(|bi| {
            let (_, mult, _) = basis.blocks[bi];
            let right = basis.right(bi);
            let left = basis.left(bi);
            (1..=mult)
                .map(|k| {
                    let mut acc = CMatrix::zeros(n, n);
                    for l in 1..=mult + 1 - k {
                        acc += right.column(l - 1) * left.row(k + l - 2);
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let mut comps = Vec::with_capacity(basis.blocks.len());
    for (bi, &(lambda, mult, _)) in basis.blocks.iter().enumerate() {
        let w = inverse_conditioned(&(-(&eye * lambda) - &at), tol.condition_limit)
            .map_err(|condition| Error::IllConditionedChains { condition })?;
        let mut wpow = vec![eye.clone()];
        for l in 1..=mult {
            let next = &wpow[l - 1] * &w;
            wpow.push(next);
        }
        let mut static_part = CMatrix::zeros(n, n);
        for k in 1..=mult {
            static_part += &ahat[bi][k - 1] * &q * &wpow[k];
        }
        let mut terms = Vec::new();
        if t.is_some() {
            for k in 1..=mult {
                for l in 1..=k {
                    let left = &ahat[bi][k - 1] * &q * &wpow[l];
                    for (bj, &(lj, mj, _)) in basis.blocks.iter().enumerate() {
                        for qq in 1..=mj {
                            let degree = (k - l + qq - 1) as u32;
                            let weight = binomial(degree, (k - l) as u32);
                            terms.push(ExpTerm {
                                coefficient: -(&left * ahat[bj][qq - 1].transpose())
                                    * Complex64::new(weight, 0.0),
                                rate: lambda + lj,
                                degree,
                            });
                        }
                    }
                }
            }
        }
        comps.push(FiniteComponent {
            index: ComponentIndex::Eigen(bi),
            static_part,
            terms,
        });
    }
    Ok(FiniteGramianDecomposition {
        flavor: Flavor::Raw,
        coordinates: Coordinates::Original,
        eigenvalues: basis.blocks.iter().map(|b| b.0).collect(),
        horizon: t.unwrap_or(f64::INFINITY),
        components: comps,
    })
}

/// Solves `L x = b` for lower triangular `L`, column by column.
pub(crate) fn lower_triangular_inverse(l: &CMatrix) -> CMatrix {
    let m = l.nrows();
    let mut inv = CMatrix::zeros(m, m);
    for col in 0..m {
        for r in col..m {
            let mut s = if r == col {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for k in col..r {
                s -= l[(r, k)] * inv[(k, col)];
            }
            inv[(r, col)] = s / l[(r, r)];
        }
    }
    inv
}

/// Companion-coordinate eigenparts for multiple eigenvalues: `P̂_i^C = M_i ℋ_i 𝒯_i^{−1} M_iᵀ 𝒥`.
pub fn multiple_eig_companion(chains: &JordanChainSet) -> Result<Decomposition> {
    let comps = chains
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let tinv = lower_triangular_inverse(&b.toeplitz);
            let p = &b.right * &b.hankel * tinv * b.right.transpose();
            (ComponentIndex::Eigen(i), scale_columns_alternating(&p))
        })
        .collect();
    Ok(Decomposition::from_raw(SpectralComponentSet {
        flavor: Flavor::Raw,
        coordinates: Coordinates::Companion,
        eigenvalues: chains.blocks.iter().map(|b| b.eigenvalue).collect(),
        components: comps,
    }))
}
