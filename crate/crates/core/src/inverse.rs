//! Eigenvalue-indexed decompositions of the inverse Gramian.
//!
//! The raw eigenparts `P̂_j^{−C} = N(−λ_j)/(−N'(λ_j)) · 𝒥 y_j y_jᵀ` are rank one
//! and satisfy `P̂_i^C P̂_j^{−C} = δ_ij R_i`, so their sum inverts the Gramian
//! without any matrix inversion.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::companion::{
    build_companion, jordan_chains_companion, to_companion, EigenStructure, JordanChainSet,
    SimilarityTransform,
};
use crate::components::{ComponentIndex, Coordinates, Decomposition, Flavor, SpectralComponentSet};
use crate::error::{Error, Result};
use crate::gramian::{lower_triangular_inverse, InitialCondition};
use crate::linalg::{complexify, condition_number_complex, scale_rows_alternating, CMatrix};
use crate::spectrum::{cluster, find_roots, Polynomial};
use crate::system::{LtiSystem, Tolerances};

fn raw_inverse_eigenpart(es: &EigenStructure, j: usize) -> CMatrix {
    let y = &es.y[j];
    let scale = es.n_neg[j] / (-es.dn[j]);
    scale_rows_alternating(&(y * y.transpose())) * scale
}

/// `P̂_j^{−C}` and `P̃_j^{−C} = {P̂_j^{−C}}_H`.
pub fn inverse_eigenparts(es: &EigenStructure) -> Result<Decomposition> {
    let comps = (0..es.eigenvalues.len())
        .map(|j| (ComponentIndex::Eigen(j), raw_inverse_eigenpart(es, j)))
        .collect();
    Ok(Decomposition::from_raw(SpectralComponentSet {
        flavor: Flavor::Raw,
        coordinates: Coordinates::Companion,
        eigenvalues: es.eigenvalues.clone(),
        components: comps,
    }))
}

/// `P̂_{ij}^{−C} = N(−λ_i*) N(−λ_j) / (−N'(λ_i*) N'(λ_j)) · ȳ_i y_jᵀ / (λ_i* + λ_j)`.
///
/// Equals `R_i* P̂_j^{−C}`, so `Σ_i P̂_{ij}^{−C} = P̂_j^{−C}`.
pub fn inverse_pair_parts(es: &EigenStructure) -> Result<Decomposition> {
    let k = es.eigenvalues.len();
    let mut comps = Vec::with_capacity(k * k);
    for i in 0..k {
        let li = es.eigenvalues[i].conj();
        // real coefficients: N'(λ*) = N'(λ)*, N(−λ*) = N(−λ)*
        let dni = es.dn[i].conj();
        let nni = es.n_neg[i].conj();
        let yi = es.y[i].conjugate();
        for j in 0..k {
            let lj = es.eigenvalues[j];
            let scale = nni * es.n_neg[j] / (-dni * es.dn[j]) / (li + lj);
            comps.push((
                ComponentIndex::Pair(i, j),
                (&yi * es.y[j].transpose()) * scale,
            ));
        }
    }
    Ok(Decomposition::from_raw(SpectralComponentSet {
        flavor: Flavor::Raw,
        coordinates: Coordinates::Companion,
        eigenvalues: es.eigenvalues.clone(),
        components: comps,
    }))
}

/// Worst deviation of `P̂_i P̂_j^{−1}` from `δ_ij Π_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    /// Largest entry-wise deviation, relative to `max(1, max |Π_i|)`.
    pub max_violation: f64,
    /// Largest entry of any off-diagonal product, same scaling.
    pub max_off_diagonal: f64,
    pub worst_pair: (usize, usize),
}

/// Checks `P̂_i^C P̂_j^{−C} = δ_ij Π_i` for raw components, where `Π_i` is the
/// residue `R_i` (simple spectrum) or the spectral projector `M_i M_i^{(−1)}`.
pub fn orthogonality_certificate(
    gram: &SpectralComponentSet,
    inv: &SpectralComponentSet,
    projectors: &[CMatrix],
) -> Result<OrthogonalityReport> {
    let k = projectors.len();
    if gram.len() != k || inv.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} Gramian parts, {} inverse parts, {k} projectors",
            gram.len(),
            inv.len()
        )));
    }
    let scale = projectors
        .iter()
        .flat_map(|p| p.iter().map(|z| z.norm()))
        .fold(1.0, f64::max);
    let mut report = OrthogonalityReport {
        max_violation: 0.0,
        max_off_diagonal: 0.0,
        worst_pair: (0, 0),
    };
    for i in 0..k {
        for j in 0..k {
            let mut prod = gram.eigen(i) * inv.eigen(j);
            if i == j {
                prod -= &projectors[i];
            }
            let v = prod.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
            if i != j {
                report.max_off_diagonal = report.max_off_diagonal.max(v);
            }
            if v > report.max_violation {
                report.max_violation = v;
                report.worst_pair = (i, j);
            }
        }
    }
    Ok(report)
}

/// Inverse of the upper Hankel `ℋ` by back-substitution on its anti-triangular shape.
fn anti_triangular_inverse(h: &CMatrix) -> CMatrix {
    let m = h.nrows();
    // Reversing the rows of ℋ gives a lower triangular F, and ℋ⁻¹ = F⁻¹ with reversed columns.
    let f = CMatrix::from_fn(m, m, |r, s| h[(m - 1 - r, s)]);
    let finv = lower_triangular_inverse(&f);
    CMatrix::from_fn(m, m, |r, s| finv[(r, m - 1 - s)])
}

/// `P̂_j^{−C} = 𝒥 (M_j^{(−1)})ᵀ 𝒯_j ℋ_j^{−1} M_j^{(−1)}` for multiple eigenvalues.
pub fn inverse_multiple_eig(chains: &JordanChainSet) -> Result<Decomposition> {
    let comps = chains
        .blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let hinv = anti_triangular_inverse(&b.hankel);
            let p = b.left.transpose() * &b.toeplitz * hinv * &b.left;
            (ComponentIndex::Eigen(j), scale_rows_alternating(&p))
        })
        .collect();
    Ok(Decomposition::from_raw(SpectralComponentSet {
        flavor: Flavor::Raw,
        coordinates: Coordinates::Companion,
        eigenvalues: chains.blocks.iter().map(|b| b.eigenvalue).collect(),
        components: comps,
    }))
}

/// Spectral projectors `M_i M_i^{(−1)}` of a chain set.
pub fn chain_projectors(chains: &JordanChainSet) -> Vec<CMatrix> {
    chains.blocks.iter().map(|b| &b.right * &b.left).collect()
}

/// Inverse Gramian of a single-input system in its own coordinates.
///
/// Companion components `X` are mapped by `(𝒞ᵀ)^{−1} ℋ_u^{−1} X ℋ_u^{−1} 𝒞^{−1} = T^{−ᵀ} X T^{−1}`.
/// Repeated eigenvalues are routed through the Jordan-chain formulas.
pub fn riccati_general(
    sys: &LtiSystem,
    tol: &Tolerances,
) -> Result<(SimilarityTransform, Decomposition)> {
    let (st, cr) = to_companion(sys, tol)?;
    let spec = cluster(&find_roots(&cr.poly, tol)?, tol.cluster);
    let companion = if spec.is_simple() {
        inverse_eigenparts(&EigenStructure::new(&cr, &spec, tol)?)?
    } else {
        inverse_multiple_eig(&jordan_chains_companion(&spec, &cr.poly, tol)?)?
    };
    let tinv = complexify(&st.t_inverse(tol)?);
    let lifted = companion.map(Coordinates::Original, |x| tinv.transpose() * x * &tinv);
    Ok((st, lifted))
}

/// `G^{−1}(t)` and its inverse at one time instant.
#[derive(Debug, Clone)]
pub struct NormalizationState {
    pub t: f64,
    pub g_inverse: CMatrix,
    pub g: CMatrix,
    pub condition: f64,
}

/// Inverse of the finite Gramian with initial condition `P₀`.
///
/// ```text
/// G^{−1}(t) = I − Σ_i 𝒥 R_iᵀ 𝒥 e^{(λ_i I + A_Cᵀ)t} + Σ_i P̂_i^{−C} P₀ e^{(λ_i I + A_Cᵀ)t}
/// P_C^{−1}(t) = G(t) Σ_j P̂_j^{−C}
/// ```
///
/// The returned components are `G(t) P̂_j^{−C}`.
pub fn finite_inverse(
    es: &EigenStructure,
    p0: &InitialCondition,
    t: f64,
    tol: &Tolerances,
) -> Result<(NormalizationState, Decomposition)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "horizon must be finite and non-negative, got {t}"
        )));
    }
    let n = es.n();
    if p0.p0.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial condition is {0}x{0}, system has n = {n}",
            p0.p0.nrows()
        )));
    }
    let inv = inverse_eigenparts(es)?;
    let k = es.eigenvalues.len();
    let eat = es
        .residues
        .iter()
        .zip(&es.eigenvalues)
        .fold(CMatrix::zeros(n, n), |acc, (r, &l)| {
            acc + r.transpose() * (l * t).exp()
        });
    let p0c = complexify(&p0.p0);
    let mut g_inverse = CMatrix::identity(n, n);
    for i in 0..k {
        let e_i = &eat * (es.eigenvalues[i] * t).exp();
        let jrj = scale_rows_alternating(&crate::linalg::scale_columns_alternating(
            &es.residues[i].transpose(),
        ));
        g_inverse -= jrj * &e_i;
        g_inverse += inv.raw.eigen(i) * &p0c * &e_i;
    }
    let condition = condition_number_complex(&g_inverse);
    if !(condition < tol.condition_limit) {
        return Err(Error::NormalizationSingular { t, condition });
    }
    let g = g_inverse
        .clone()
        .try_inverse()
        .ok_or(Error::NormalizationSingular { t, condition })?;
    let scaled = inv.raw.map(Coordinates::Companion, |x| &g * x);
    Ok((
        NormalizationState {
            t,
            g_inverse,
            g,
            condition,
        },
        Decomposition::from_raw(scaled),
    ))
}

/// `‖P^{−1}(t) P(t) − I‖_F` for the closed forms used by [`finite_inverse`],
/// evaluated in double-double.
///
/// Past a few time constants of an unstable spectrum `P(t)` has a condition
/// number beyond `1/eps`, and rounding either factor to `f64` already leaves a
/// defect of order `eps · cond`. This checks the identity itself.
pub fn finite_inverse_defect(es: &EigenStructure, p0: &InitialCondition, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "horizon must be finite and non-negative, got {t}"
        )));
    }
    if p0.p0.nrows() != es.n() {
        return Err(Error::DimensionMismatch(format!(
            "initial condition is {0}x{0}, system has n = {1}",
            p0.p0.nrows(),
            es.n()
        )));
    }
    crate::precise::finite_inverse_defect(&es.eigenvalues, &p0.p0, t).ok_or(
        Error::NormalizationSingular {
            t,
            condition: f64::INFINITY,
        },
    )
}

/// Builds one symmetrized inverse eigenpart element by element and counts
/// the scalar operations spent.
///
/// Work is `O(n)` for the left eigenvector and the polynomial values plus
/// `O(n²)` for the entries, so the count grows like `n²`.
pub fn inverse_eigenpart_counted(p: &Polynomial, lambda: Complex64) -> (CMatrix, usize) {
    let n = p.degree();
    let mut ops = 0usize;

    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = Complex64::new(0.0, 0.0);
    for i in (0..n).rev() {
        acc = acc * lambda + p.coeff(i + 1);
        y[i] = -acc;
        ops += 2;
    }
    let mut dn = Complex64::new(0.0, 0.0);
    let mut v = Complex64::new(0.0, 0.0);
    let mut vneg = Complex64::new(0.0, 0.0);
    for &a in p.coeffs().iter().rev() {
        dn = dn * lambda + v;
        v = v * lambda + a;
        vneg = vneg * (-lambda) + a;
        ops += 6;
    }
    let scale = vneg / (-dn);
    ops += 1;

    let mut m = nalgebra::DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for r in 0..n {
        let sr = if r % 2 == 0 { -scale } else { scale };
        for c in 0..n {
            m[(r, c)] = sr * y[r] * y[c];
            ops += 2;
        }
    }
    // {·}_H entry by entry
    let mut h = m.clone();
    for r in 0..n {
        for c in 0..n {
            h[(r, c)] = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            ops += 2;
        }
    }
    (h, ops)
}

/// `(Σ_j P̂_j^{−C}) · P` for a real Gramian `P`, minus the identity; used in tests and reports.
pub fn inverse_product_defect(inv_sum: &CMatrix, p: &DMatrix<f64>) -> f64 {
    let n = p.nrows();
    (inv_sum * complexify(p) - CMatrix::identity(n, n)).norm()
}

/// Companion realization plus validated eigenstructure for a polynomial with simple roots.
pub fn companion_eigenstructure(p: &Polynomial, tol: &Tolerances) -> Result<EigenStructure> {
    let spec = cluster(&find_roots(p, tol)?, tol.cluster);
    EigenStructure::new(&build_companion(p), &spec, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramian::{
        finite_subgramians, homogeneous_decomposition, infinite_subgramians, multiple_eig_companion,
    };
    use crate::linalg::{min_hermitian_eigenvalue, plaid_zero_violation};
    use crate::spectrum::{Spectrum, SpectrumEntry};
    use gramspec_oracle::{residual_riccati, solve_lyapunov_dense};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rows(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, v)
    }

    fn assert_close(got: &CMatrix, want: &DMatrix<f64>, tol: f64) {
        let err = (got - complexify(want)).norm() / want.norm().max(f64::MIN_POSITIVE);
        assert!(
            err <= tol,
            "relative error {err:.3e}\n got {got}\nwant {want}"
        );
    }

    fn cubic_123() -> EigenStructure {
        let p = Polynomial::new(vec![-6.0, 11.0, -6.0, 1.0]).unwrap();
        EigenStructure::new(
            &build_companion(&p),
            &Spectrum::from_real(&[1.0, 2.0, 3.0]).unwrap(),
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn cubic_inverse_eigenparts() {
        let es = cubic_123();
        let inv = inverse_eigenparts(&es).unwrap();
        let p1 = rows(3, &[-36.0, 0.0, -6.0, 0.0, 25.0, 0.0, -6.0, 0.0, -1.0]) * 12.0;
        assert_close(inv.symmetrized.eigen(0), &p1, 1e-12);
        let total = rows(3, &[11.0, 0.0, 1.0, 0.0, 10.0, 0.0, 1.0, 0.0, 1.0]) * -12.0;
        assert_close(&inv.symmetrized.sum(), &total, 1e-12);
        for (_, m) in &inv.symmetrized.components {
            assert!(plaid_zero_violation(m) < 1e-10);
        }
        let cr = build_companion(&es.poly);
        let b = nalgebra::DVector::from_column_slice(cr.b.as_slice());
        assert!(residual_riccati(&cr.a, &b, &total) < 1e-9);
    }

    #[test]
    fn cubic_inverse_pairs() {
        let es = cubic_123();
        let pairs = inverse_pair_parts(&es).unwrap();
        let p11 = rows(3, &[36.0, -30.0, 6.0, -30.0, 25.0, -5.0, 6.0, -5.0, 1.0]) * -72.0;
        assert_close(pairs.symmetrized.pair(0, 0), &p11, 1e-12);
        let inv = inverse_eigenparts(&es).unwrap();
        let row0 = pairs.symmetrized.pair(0, 0)
            + pairs.symmetrized.pair(0, 1)
            + pairs.symmetrized.pair(0, 2);
        assert!((row0 - inv.symmetrized.eigen(0)).norm() < 1e-10 * inv.symmetrized.eigen(0).norm());
        let cols = pairs.raw.column_sums().unwrap();
        for j in 0..3 {
            assert!((cols.eigen(j) - inv.raw.eigen(j)).norm() < 1e-9 * inv.raw.eigen(j).norm());
            for i in 0..3 {
                let via_residue = es.residues[i].adjoint() * inv.raw.eigen(j);
                assert!(
                    (pairs.raw.pair(i, j) - &via_residue).norm()
                        < 1e-8 * via_residue.norm().max(1.0)
                );
            }
        }
    }

    #[test]
    fn scalar_inverse() {
        let p = Polynomial::new(vec![1.0, 1.0]).unwrap();
        let es = companion_eigenstructure(&p, &Tolerances::default()).unwrap();
        let inv = inverse_eigenparts(&es).unwrap();
        assert!((inv.raw.eigen(0)[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        let pairs = inverse_pair_parts(&es).unwrap();
        assert!((pairs.raw.pair(0, 0)[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        let gram = infinite_subgramians(&es).unwrap();
        let rep = orthogonality_certificate(&gram.raw, &inv.raw, &es.residues).unwrap();
        assert!(rep.max_violation < 1e-15);
    }

    #[test]
    fn cubic_orthogonality() {
        let es = cubic_123();
        let gram = infinite_subgramians(&es).unwrap();
        let inv = inverse_eigenparts(&es).unwrap();
        let rep = orthogonality_certificate(&gram.raw, &inv.raw, &es.residues).unwrap();
        assert!(rep.max_violation < 1e-10, "{rep:?}");
        for (_, m) in &inv.raw.components {
            let sv = m.clone().singular_values();
            let mut sv: Vec<f64> = sv.iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            assert!(sv[1] <= 1e-9 * sv[0]);
        }
    }

    #[test]
    fn finite_inverse_products() {
        let tol = Tolerances::default();
        let es = cubic_123();
        let gram = finite_subgramians(&es, 0.5).unwrap();
        let (state, inv) = finite_inverse(&es, &InitialCondition::zero(3), 0.5, &tol).unwrap();
        let prod = inv.raw.sum() * gram.sum_at(0.5);
        assert!(
            (prod - CMatrix::identity(3, 3)).norm() < 1e-6,
            "cond {}",
            state.condition
        );

        let (_, at_zero) = finite_inverse(&es, &InitialCondition::identity(3), 0.0, &tol).unwrap();
        assert!((at_zero.raw.sum() - CMatrix::identity(3, 3)).norm() < 1e-7);

        let p0 =
            InitialCondition::new(rows(3, &[2.0, 0.1, 0.0, 0.1, 1.0, 0.2, 0.0, 0.2, 3.0])).unwrap();
        let h = homogeneous_decomposition(&es, &p0, 0.3).unwrap();
        let total = gram.sum_at(0.3) + h.eigen.sum_at(0.3);
        let (_, inv) = finite_inverse(&es, &p0, 0.3, &tol).unwrap();
        assert!((inv.raw.sum() * total - CMatrix::identity(3, 3)).norm() < 1e-6);

        let err = finite_inverse(&es, &InitialCondition::zero(3), 0.0, &tol).unwrap_err();
        assert!(matches!(err, Error::NormalizationSingular { .. }));
    }

    #[test]
    fn precise_finite_inverse_holds_past_f64_range() {
        let es = cubic_123();
        let tol = Tolerances::default();
        assert!(finite_inverse(&es, &InitialCondition::zero(3), 5.0, &tol).is_err());
        for t in [0.1, 1.0, 5.0] {
            let d = finite_inverse_defect(&es, &InitialCondition::zero(3), t).unwrap();
            assert!(d < 1e-12, "t = {t}: {d:.3e}");
        }
        let p0 =
            InitialCondition::new(rows(3, &[2.0, 0.1, 0.0, 0.1, 1.0, 0.2, 0.0, 0.2, 3.0])).unwrap();
        assert!(finite_inverse_defect(&es, &p0, 0.0).unwrap() < 1e-25);
        assert!(finite_inverse_defect(&es, &p0, 2.0).unwrap() < 1e-12);
        assert!(finite_inverse_defect(&es, &InitialCondition::zero(3), 0.0).is_err());
    }

    #[test]
    fn finite_inverse_approaches_algebraic() {
        let tol = Tolerances::default();
        let p = Polynomial::from_roots(&[c(-1.0, 0.0), c(-2.0, 0.0), c(-3.0, 0.0)]).unwrap();
        let es = companion_eigenstructure(&p, &tol).unwrap();
        let (_, fin) = finite_inverse(&es, &InitialCondition::zero(3), 30.0, &tol).unwrap();
        let alg = inverse_eigenparts(&es).unwrap().raw.sum();
        assert!((fin.raw.sum() - &alg).norm() < 1e-6 * alg.norm());
    }

    #[test]
    fn double_triple_inverse() {
        let tol = Tolerances::default();
        let p = Polynomial::new(vec![-8.0, 28.0, -38.0, 25.0, -8.0, 1.0]).unwrap();
        let spec = Spectrum::new(vec![
            SpectrumEntry {
                value: c(1.0, 0.0),
                multiplicity: 2,
            },
            SpectrumEntry {
                value: c(2.0, 0.0),
                multiplicity: 3,
            },
        ])
        .unwrap();
        let chains = jordan_chains_companion(&spec, &p, &tol).unwrap();
        let inv = inverse_multiple_eig(&chains).unwrap();
        let p1 = rows(
            5,
            &[
                192.0, 0.0, 528.0, 0.0, 32.0, //
                0.0, -1520.0, 0.0, -596.0, 0.0, //
                528.0, 0.0, 1404.0, 0.0, 84.0, //
                0.0, -596.0, 0.0, -231.0, 0.0, //
                32.0, 0.0, 84.0, 0.0, 5.0,
            ],
        ) * 108.0;
        assert_close(inv.symmetrized.eigen(0), &p1, 1e-10);
        let cr = build_companion(&p);
        let pc = solve_lyapunov_dense(&cr.a, &cr.input_gram())
            .unwrap()
            .matrix;
        assert!(inverse_product_defect(&inv.symmetrized.sum(), &pc) < 1e-8);
        let gram = multiple_eig_companion(&chains).unwrap();
        let rep =
            orthogonality_certificate(&gram.raw, &inv.raw, &chain_projectors(&chains)).unwrap();
        assert!(rep.max_violation < 1e-7, "{rep:?}");
    }

    #[test]
    fn multiple_path_reduces_to_simple_inverse() {
        let tol = Tolerances::default();
        let es = cubic_123();
        let spec = Spectrum::from_real(&[1.0, 2.0, 3.0]).unwrap();
        let chains = jordan_chains_companion(&spec, &es.poly, &tol).unwrap();
        let multi = inverse_multiple_eig(&chains).unwrap();
        let simple = inverse_eigenparts(&es).unwrap();
        for j in 0..3 {
            assert!(
                (multi.raw.eigen(j) - simple.raw.eigen(j)).norm()
                    < 1e-8 * simple.raw.eigen(j).norm()
            );
        }
    }

    #[test]
    fn anti_triangular_inverse_is_exact() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(4.0, 0.0),
                c(-2.5, 0.0),
                c(1.0, 0.0),
                c(-2.5, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ],
        );
        let inv = anti_triangular_inverse(&h);
        assert!((&h * inv - CMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn general_riccati() {
        let tol = Tolerances::default();
        let a = rows(
            4,
            &[
                -1.0, 0.5, 0.0, 0.3, 0.2, -2.0, 1.0, 0.0, 0.0, -0.3, -3.0, 0.4, 0.1, 0.0, 0.2, -1.5,
            ],
        );
        let b = DMatrix::from_column_slice(4, 1, &[1.0, 0.3, -0.7, 0.2]);
        let sys = LtiSystem::new(a.clone(), b.clone()).unwrap();
        let (_, inv) = riccati_general(&sys, &tol).unwrap();
        let pinv = inv.symmetrized.real_sum();
        let bv = nalgebra::DVector::from_column_slice(b.as_slice());
        assert!(residual_riccati(&a, &bv, &pinv) < 1e-7);
        let p = solve_lyapunov_dense(&a, &(&b * b.transpose()))
            .unwrap()
            .matrix;
        let cond = crate::linalg::condition_number(&p);
        let want = p.try_inverse().unwrap();
        assert!(
            (&pinv - &want).norm() < 1e3 * cond * f64::EPSILON * want.norm(),
            "cond {cond:.3e}"
        );
    }

    #[test]
    fn diagonal_inverse_pairs_are_psd_for_stable_spectrum() {
        let tol = Tolerances::default();
        let roots = [c(-1.0, 2.0), c(-1.0, -2.0), c(-0.5, 0.0), c(-3.0, 0.0)];
        let p = Polynomial::from_roots(&roots).unwrap();
        let es = companion_eigenstructure(&p, &tol).unwrap();
        let pairs = inverse_pair_parts(&es).unwrap();
        for i in 0..4 {
            let m = pairs.symmetrized.pair(i, i);
            assert!(min_hermitian_eigenvalue(m) >= -1e-10 * m.norm());
        }
    }

    #[test]
    fn counted_builder_matches_and_scales_quadratically() {
        let tol = Tolerances::default();
        let es = cubic_123();
        let (m, _) = inverse_eigenpart_counted(&es.poly, es.eigenvalues[0]);
        let inv = inverse_eigenparts(&es).unwrap();
        assert!((m - inv.symmetrized.eigen(0)).norm() < 1e-12 * inv.symmetrized.eigen(0).norm());
        let mut ratios = Vec::new();
        for n in [4usize, 8, 16, 32] {
            let roots: Vec<Complex64> = (0..n).map(|k| c(-1.0 - 0.1 * k as f64, 0.0)).collect();
            let p = Polynomial::from_roots(&roots).unwrap();
            let (_, ops) = inverse_eigenpart_counted(&p, roots[0]);
            assert!(ops <= 4 * n * n + 8 * n + 8, "n = {n}, ops = {ops}");
            ratios.push(ops as f64 / (n * n) as f64);
        }
        let _ = tol;
        assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");
    }
}
