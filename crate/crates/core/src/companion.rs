//! Controllability canonical form and its closed-form eigenvectors and Jordan chains.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    complexify, condition_number, inverse_conditioned, inverse_real_conditioned, CMatrix, CVector,
    ONE, ZERO,
};
use crate::spectrum::{char_poly, check_solvability, eval_with_derivative, Polynomial, Spectrum};
use crate::system::{LtiSystem, Tolerances};

/// `(A_C, b_C)` for a monic polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionRealization {
    pub poly: Polynomial,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl CompanionRealization {
    pub fn n(&self) -> usize {
        self.poly.degree()
    }

    pub fn as_system(&self) -> LtiSystem {
        let n = self.n();
        LtiSystem {
            a: self.a.clone(),
            b: DMatrix::from_column_slice(n, 1, self.b.as_slice()),
        }
    }

    /// `b_C b_Cᵀ = e_n e_nᵀ`.
    pub fn input_gram(&self) -> DMatrix<f64> {
        &self.b * self.b.transpose()
    }
}

/// Superdiagonal of ones, last row `(−a_0, …, −a_{n−1})`, `b_C = e_n`.
pub fn build_companion(p: &Polynomial) -> CompanionRealization {
    let n = p.degree();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -p.coeff(j);
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    CompanionRealization {
        poly: p.clone(),
        a,
        b,
    }
}

/// `(ℋ_u)_{ij} = a_{i+j+1}` (0-based) when `i + j + 1 ≤ n`, zero below the anti-diagonal.
pub fn hankel_upper(p: &Polynomial) -> DMatrix<f64> {
    let n = p.degree();
    DMatrix::from_fn(n, n, |i, j| {
        if i + j + 1 <= n {
            p.coeff(i + j + 1)
        } else {
            0.0
        }
    })
}

/// `(ℋ_l)_{ij} = a_{i+j−n+1}` (0-based) when `i + j ≥ n − 1`, zero above the anti-diagonal.
pub fn hankel_lower(p: &Polynomial) -> DMatrix<f64> {
    let n = p.degree();
    DMatrix::from_fn(n, n, |i, j| {
        if i + j + 1 >= n {
            p.coeff(i + j + 1 - n)
        } else {
            0.0
        }
    })
}

/// Links an LTI system to its companion realization.
///
/// For input column γ, `T_γ = 𝒞_γ ℋ_u` with `𝒞_γ = (b_γ, A b_γ, …)`, so that
/// `A T_γ = T_γ A_C` and `b_γ = T_γ b_C`. For single-input systems `t` is the
/// (invertible) similarity matrix `T = 𝒞 ℋ_u`.
#[derive(Debug, Clone)]
pub struct SimilarityTransform {
    pub t: DMatrix<f64>,
    pub per_input: Vec<DMatrix<f64>>,
    pub hankel_upper: DMatrix<f64>,
    pub controllability: DMatrix<f64>,
    /// Ratio of the largest to the n-th singular value of `𝒞`.
    pub condition: f64,
}

impl SimilarityTransform {
    /// Builds the transform for any input count; refuses rank-deficient `𝒞`.
    pub fn new(sys: &LtiSystem, poly: &Polynomial, tol: &Tolerances) -> Result<Self> {
        let (n, m) = (sys.n(), sys.m());
        if poly.degree() != n {
            return Err(Error::DimensionMismatch(format!(
                "polynomial degree {} does not match state dimension {n}",
                poly.degree()
            )));
        }
        let controllability = sys.controllability_matrix();
        let sv = controllability.clone().singular_values();
        let mut sv: Vec<f64> = sv.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let condition = if sv[n - 1] > 0.0 {
            sv[0] / sv[n - 1]
        } else {
            f64::INFINITY
        };
        if !(condition < tol.condition_limit) {
            return Err(Error::Uncontrollable { condition });
        }
        let hu = hankel_upper(poly);
        let per_input: Vec<DMatrix<f64>> = (0..m)
            .map(|g| {
                let mut cg = DMatrix::zeros(n, n);
                for k in 0..n {
                    cg.set_column(k, &controllability.column(k * m + g));
                }
                cg * &hu
            })
            .collect();
        Ok(SimilarityTransform {
            t: per_input[0].clone(),
            per_input,
            hankel_upper: hu,
            controllability,
            condition,
        })
    }

    /// `T⁻¹` for single-input systems.
    pub fn t_inverse(&self, tol: &Tolerances) -> Result<DMatrix<f64>> {
        inverse_real_conditioned(&self.t, tol.condition_limit)
            .map_err(|condition| Error::Uncontrollable { condition })
    }
}

/// Transforms a single-input system to companion form and checks the result.
pub fn to_companion(
    sys: &LtiSystem,
    tol: &Tolerances,
) -> Result<(SimilarityTransform, CompanionRealization)> {
    if !sys.is_single_input() {
        return Err(Error::InvalidInput(format!(
            "companion transform needs a single input, system has {}",
            sys.m()
        )));
    }
    let poly = char_poly(&sys.a)?;
    let st = SimilarityTransform::new(sys, &poly, tol)?;
    let cr = build_companion(&poly);
    let t = &st.t;
    let scale = sys.a.norm() * t.norm() + f64::MIN_POSITIVE;
    let r_a = (&sys.a * t - t * &cr.a).norm() / scale;
    let r_b = (sys.b.column(0) - t * &cr.b).norm() / (sys.b.norm() + f64::MIN_POSITIVE);
    if r_a > 1e-8 || r_b > 1e-8 {
        return Err(Error::Verification(format!(
            "companion transform residuals A·T−T·A_C = {r_a:.3e}, b−T·b_C = {r_b:.3e}"
        )));
    }
    Ok((st, cr))
}

/// Vandermonde vector `(1, λ, …, λ^{n−1})`.
pub fn right_eigenvector(lambda: Complex64, n: usize) -> CVector {
    let mut x = CVector::zeros(n);
    let mut pow = ONE;
    for i in 0..n {
        x[i] = pow;
        pow *= lambda;
    }
    x
}

/// `y = ℋ_l x / λ^n`, normalised so that `y_n = −1` and `xᵀy = −N'(λ)`.
///
/// Evaluated in the equivalent synthetic-division form
/// `y_i = −Σ_{k>i} a_k λ^{k−i−1}`, which equals `ℋ_l x / λ^n` whenever `N(λ) = 0`
/// and avoids negative powers of `λ`.
pub fn left_eigenvector(lambda: Complex64, p: &Polynomial, tol: f64) -> Result<CVector> {
    if lambda.norm() <= tol {
        return Err(Error::DegenerateEigenvalue(lambda));
    }
    Ok(synthetic_left(lambda, p))
}

fn synthetic_left(lambda: Complex64, p: &Polynomial) -> CVector {
    let n = p.degree();
    let mut y = CVector::zeros(n);
    let mut acc = ZERO;
    for i in (0..n).rev() {
        acc = acc * lambda + p.coeff(i + 1);
        y[i] = -acc;
    }
    y
}

/// `Σ k |a_k| |λ|^{k−1}`, the size of the terms that cancel in `N'(λ)`.
fn derivative_scale(p: &Polynomial, lambda: Complex64) -> f64 {
    let r = lambda.norm();
    p.coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| k as f64 * a.abs() * r.powi(k as i32 - 1))
        .sum()
}

/// `R_i = x_i y_iᵀ / (−N'(λ_i))`.
pub fn residue_companion(lambda: Complex64, p: &Polynomial, tol: &Tolerances) -> Result<CMatrix> {
    let (_, d) = eval_with_derivative(p, lambda);
    if d.norm() <= tol.cluster * derivative_scale(p, lambda) {
        return Err(Error::NearMultipleEigenvalue {
            eigenvalue: lambda,
            derivative: d.norm(),
        });
    }
    let x = right_eigenvector(lambda, p.degree());
    let y = left_eigenvector(lambda, p, tol.solve)?;
    Ok((&x * y.transpose()) / (-d))
}

/// Lagrange form `R_i = Π_{j≠i} (A − λ_j I) / (λ_i − λ_j)` for a simple spectrum.
pub fn residues_general(
    a: &DMatrix<f64>,
    spec: &Spectrum,
    tol: &Tolerances,
) -> Result<Vec<CMatrix>> {
    let n = a.nrows();
    if spec.degree() != n {
        return Err(Error::DimensionMismatch(format!(
            "spectrum has {} eigenvalues, matrix is {n}x{n}",
            spec.degree()
        )));
    }
    if let Some(e) = spec.entries().iter().find(|e| e.multiplicity > 1) {
        return Err(Error::MultipleEigenvalue {
            eigenvalue: e.value,
            multiplicity: e.multiplicity,
        });
    }
    let separation = spec.min_separation();
    if separation <= tol.cluster * (1.0 + spec.spectral_radius()) {
        return Err(Error::EigenvaluesNotSeparated { separation });
    }
    let ac = complexify(a);
    let eye = CMatrix::identity(n, n);
    let lams = spec.values();
    Ok(lams
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            let mut r = eye.clone();
            for (j, &lj) in lams.iter().enumerate() {
                if j != i {
                    r = r * ((&ac - &eye * lj) / (li - lj));
                }
            }
            r
        })
        .collect())
}

/// Eigenvectors, residues and polynomial values for a simple spectrum in companion coordinates.
#[derive(Debug, Clone)]
pub struct EigenStructure {
    pub poly: Polynomial,
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors `x_i`.
    pub x: Vec<CVector>,
    /// Left eigenvectors `y_i` with `y_n = −1`.
    pub y: Vec<CVector>,
    /// `N'(λ_i)`.
    pub dn: Vec<Complex64>,
    /// `N(−λ_i)`.
    pub n_neg: Vec<Complex64>,
    pub residues: Vec<CMatrix>,
}

impl EigenStructure {
    /// Validates the spectrum against the polynomial and builds every per-eigenvalue quantity.
    ///
    /// Refuses multiple or nearly multiple eigenvalues, spectra violating
    /// `λ_i + λ_j ≠ 0`, and eigenvalues that are not roots of the polynomial.
    pub fn new(cr: &CompanionRealization, spec: &Spectrum, tol: &Tolerances) -> Result<Self> {
        Self::from_poly(&cr.poly, spec, tol)
    }

    pub fn from_poly(p: &Polynomial, spec: &Spectrum, tol: &Tolerances) -> Result<Self> {
        let n = p.degree();
        if spec.degree() != n {
            return Err(Error::DimensionMismatch(format!(
                "spectrum has {} eigenvalues, polynomial has degree {n}",
                spec.degree()
            )));
        }
        if let Some(e) = spec.entries().iter().find(|e| e.multiplicity > 1) {
            return Err(Error::MultipleEigenvalue {
                eigenvalue: e.value,
                multiplicity: e.multiplicity,
            });
        }
        let report = check_solvability(spec, tol.solve);
        if !report.ok {
            return Err(Error::Solvability(report));
        }
        for e in spec.entries() {
            let residual = p.relative_residual(e.value);
            if residual > tol.consistency {
                return Err(Error::InconsistentSpectrum {
                    eigenvalue: e.value,
                    residual,
                });
            }
        }
        let separation = spec.min_separation();
        if separation <= tol.cluster * (1.0 + spec.spectral_radius()) {
            return Err(Error::EigenvaluesNotSeparated { separation });
        }

        let eigenvalues = spec.values();
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut dn = Vec::with_capacity(n);
        let mut n_neg = Vec::with_capacity(n);
        let mut residues = Vec::with_capacity(n);
        let zero_tol = tol.solve * (1.0 + spec.spectral_radius());
        // N'(λ_i) and N(−λ_i) come from products over the roots. Horner on the
        // coefficients loses several digits to cancellation once n grows past 4 or 5.
        // y_i stays on the coefficients so that y_iᵀA_C − λ_i y_iᵀ is just N(λ_i).
        for (i, &lam) in eigenvalues.iter().enumerate() {
            if lam.norm() <= zero_tol {
                return Err(Error::DegenerateEigenvalue(lam));
            }
            let others: Vec<Complex64> = eigenvalues
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &l)| l)
                .collect();
            let d: Complex64 = others.iter().map(|&l| lam - l).product();
            // each factor carries its own relative error, so only the closest one matters
            let worst = others
                .iter()
                .map(|&l| (lam - l).norm() / (lam.norm() + l.norm()))
                .fold(f64::INFINITY, f64::min);
            if worst <= tol.cluster {
                return Err(Error::NearMultipleEigenvalue {
                    eigenvalue: lam,
                    derivative: d.norm(),
                });
            }
            let xi = right_eigenvector(lam, n);
            let yi = synthetic_left(lam, p);
            residues.push((&xi * yi.transpose()) / (-d));
            x.push(xi);
            y.push(yi);
            dn.push(d);
            n_neg.push(eigenvalues.iter().map(|&l| -lam - l).product());
        }
        Ok(EigenStructure {
            poly: p.clone(),
            eigenvalues,
            x,
            y,
            dn,
            n_neg,
            residues,
        })
    }

    pub fn n(&self) -> usize {
        self.poly.degree()
    }

    /// `e^{A_C t} = Σ_i R_i e^{λ_i t}`.
    pub fn exp(&self, t: f64) -> CMatrix {
        let n = self.n();
        self.residues
            .iter()
            .zip(&self.eigenvalues)
            .fold(CMatrix::zeros(n, n), |acc, (r, &l)| acc + r * (l * t).exp())
    }

    /// Index of the eigenvalue closest to `conj(λ_i)`.
    pub fn conjugate_index(&self, i: usize) -> usize {
        let target = self.eigenvalues[i].conj();
        (0..self.eigenvalues.len())
            .min_by(|&a, &b| {
                (self.eigenvalues[a] - target)
                    .norm()
                    .total_cmp(&(self.eigenvalues[b] - target).norm())
            })
            .unwrap()
    }
}

/// Right and left Jordan chains for one distinct eigenvalue.
#[derive(Debug, Clone)]
pub struct ChainBlock {
    pub eigenvalue: Complex64,
    pub multiplicity: usize,
    /// First column of this block inside `M`.
    pub offset: usize,
    /// `M_i`, n×n_i, columns `x_1 … x_{n_i}`.
    pub right: CMatrix,
    /// `M_i^{(−1)}`, n_i×n, rows `y_1ᵀ … y_{n_i}ᵀ`.
    pub left: CMatrix,
    /// Lower triangular Toeplitz, `(𝒯_i)_{rs} = cᵀ x_{r−s+1}`.
    pub toeplitz: CMatrix,
    /// Upper Hankel, `(ℋ_i)_{rs} = e_nᵀ y_{r+s−1}` for `r + s − 1 ≤ n_i`.
    pub hankel: CMatrix,
}

impl ChainBlock {
    /// `x_k`, 1-based.
    pub fn x(&self, k: usize) -> CVector {
        self.right.column(k - 1).into_owned()
    }

    /// `y_k`, 1-based, as a column.
    pub fn y(&self, k: usize) -> CVector {
        self.left.row(k - 1).transpose()
    }
}

/// Jordan chains of the companion matrix for a clustered spectrum.
#[derive(Debug, Clone)]
pub struct JordanChainSet {
    pub poly: Polynomial,
    pub blocks: Vec<ChainBlock>,
    /// `M = (M_1, …, M_k)`.
    pub m: CMatrix,
    /// `M⁻¹`, stacked left chains.
    pub m_inv: CMatrix,
    /// `cᵀ = aᵀ((−1)^n I + 𝒥)`.
    pub c: DVector<f64>,
    pub condition: f64,
}

impl JordanChainSet {
    /// `max_i ‖(A_C − λ_i I) x_1‖` and `‖(A_C − λ_i I) x_{k+1} − x_k‖`, relative to `‖x‖`.
    pub fn chain_residual(&self, a: &DMatrix<f64>) -> f64 {
        let ac = complexify(a);
        let n = ac.nrows();
        let mut worst = 0.0_f64;
        for b in &self.blocks {
            let shifted = &ac - CMatrix::identity(n, n) * b.eigenvalue;
            for k in 1..=b.multiplicity {
                let xk = b.x(k);
                let mut r = &shifted * &xk;
                if k > 1 {
                    r -= b.x(k - 1);
                }
                worst = worst.max(r.norm() / xk.norm());
            }
        }
        worst
    }

    /// `max ‖M_i^{(−1)} M_j − δ_ij I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, bi) in self.blocks.iter().enumerate() {
            for (j, bj) in self.blocks.iter().enumerate() {
                let mut prod = &bi.left * &bj.right;
                if i == j {
                    prod -= CMatrix::identity(bi.multiplicity, bi.multiplicity);
                }
                worst = worst.max(prod.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

/// `c_μ = a_{μ−1}((−1)^n + (−1)^μ)` for 1-based `μ`.
pub fn chain_c_vector(p: &Polynomial) -> DVector<f64> {
    let n = p.degree();
    let sn = if n % 2 == 0 { 1.0 } else { -1.0 };
    DVector::from_fn(n, |i, _| {
        let smu = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        p.coeff(i) * (sn + smu)
    })
}

/// Chain `x_1 = (1, λ, …)`, `(A_C − λI) x_{k+1} = x_k` with `x_{k+1}[1] = λ^{−k}`.
fn companion_chain(lambda: Complex64, n: usize, len: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, len);
    m.set_column(0, &right_eigenvector(lambda, n));
    for k in 1..len {
        let mut col = CVector::zeros(n);
        col[0] = lambda.powi(-(k as i32));
        for mu in 0..n - 1 {
            col[mu + 1] = lambda * col[mu] + m[(mu, k - 1)];
        }
        m.set_column(k, &col);
    }
    m
}

/// Builds `M`, inverts it once, and assembles `𝒯_i`, `ℋ_i` for every block.
pub fn jordan_chains_companion(
    spec: &Spectrum,
    p: &Polynomial,
    tol: &Tolerances,
) -> Result<JordanChainSet> {
    let n = p.degree();
    if spec.degree() != n {
        return Err(Error::DimensionMismatch(format!(
            "spectrum has total multiplicity {}, polynomial has degree {n}",
            spec.degree()
        )));
    }
    let report = check_solvability(spec, tol.solve);
    if !report.ok {
        return Err(Error::Solvability(report));
    }
    for e in spec.entries() {
        let residual = p.relative_residual(e.value);
        if residual > tol.consistency {
            return Err(Error::InconsistentSpectrum {
                eigenvalue: e.value,
                residual,
            });
        }
    }

    let mut m = CMatrix::zeros(n, n);
    let mut offset = 0;
    let mut ranges = Vec::new();
    for e in spec.entries() {
        let chain = companion_chain(e.value, n, e.multiplicity);
        m.view_mut((0, offset), (n, e.multiplicity))
            .copy_from(&chain);
        ranges.push((e.value, e.multiplicity, offset));
        offset += e.multiplicity;
    }
    let m_inv = inverse_conditioned(&m, tol.condition_limit)
        .map_err(|condition| Error::IllConditionedChains { condition })?;
    let condition = crate::linalg::condition_number_complex(&m);
    let c = chain_c_vector(p);
    let cc = c.map(|v| Complex64::new(v, 0.0));

    let mut blocks = Vec::with_capacity(ranges.len());
    for (lambda, mult, off) in ranges {
        let right = m.columns(off, mult).into_owned();
        let left = m_inv.rows(off, mult).into_owned();
        let cx: Vec<Complex64> = (0..mult).map(|k| cc.dot(&right.column(k))).collect();
        let ey: Vec<Complex64> = (0..mult).map(|k| left[(k, n - 1)]).collect();
        let toeplitz = CMatrix::from_fn(mult, mult, |r, s| if r >= s { cx[r - s] } else { ZERO });
        let hankel = CMatrix::from_fn(
            mult,
            mult,
            |r, s| if r + s < mult { ey[r + s] } else { ZERO },
        );
        let scale = left.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if ey[mult - 1].norm() <= 64.0 * f64::EPSILON * scale {
            return Err(Error::DegenerateChain { eigenvalue: lambda });
        }
        blocks.push(ChainBlock {
            eigenvalue: lambda,
            multiplicity: mult,
            offset: off,
            right,
            left,
            toeplitz,
            hankel,
        });
    }
    Ok(JordanChainSet {
        poly: p.clone(),
        blocks,
        m,
        m_inv,
        c,
        condition,
    })
}

/// Jordan chains of a general `A`, obtained through a cyclic vector.
#[derive(Debug, Clone)]
pub struct JordanBasis {
    /// `(λ_i, n_i, offset)` per block.
    pub blocks: Vec<(Complex64, usize, usize)>,
    pub m: CMatrix,
    pub m_inv: CMatrix,
}

impl JordanBasis {
    pub fn right(&self, block: usize) -> CMatrix {
        let (_, mult, off) = self.blocks[block];
        self.m.columns(off, mult).into_owned()
    }

    pub fn left(&self, block: usize) -> CMatrix {
        let (_, mult, off) = self.blocks[block];
        self.m_inv.rows(off, mult).into_owned()
    }
}

impl From<&JordanChainSet> for JordanBasis {
    fn from(j: &JordanChainSet) -> Self {
        JordanBasis {
            blocks: j
                .blocks
                .iter()
                .map(|b| (b.eigenvalue, b.multiplicity, b.offset))
                .collect(),
            m: j.m.clone(),
            m_inv: j.m_inv.clone(),
        }
    }
}

fn krylov(a: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut k = DMatrix::zeros(n, n);
    let mut col = v.clone();
    for j in 0..n {
        k.set_column(j, &col);
        col = a * col;
    }
    k
}

/// Chains of `A` mapped from the companion chains by `T = 𝒦(v) ℋ_u`.
///
/// The cyclic vector `v` is the best-conditioned of the columns of `B` and
/// their sum. Derogatory `A` (no cyclic vector) is refused.
pub fn jordan_basis_for(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    spec: &Spectrum,
    tol: &Tolerances,
) -> Result<JordanBasis> {
    let p = spec.polynomial()?;
    let mut candidates: Vec<DVector<f64>> = b.column_iter().map(|c| c.into_owned()).collect();
    if b.ncols() > 1 {
        candidates.push(b.column_sum());
    }
    let (v, cond) = candidates
        .into_iter()
        .map(|v| {
            let c = condition_number(&krylov(a, &v));
            (v, c)
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .ok_or_else(|| Error::InvalidInput("`B` has no columns".into()))?;
    if !(cond < tol.condition_limit) {
        return Err(Error::IllConditionedChains { condition: cond });
    }
    let t = krylov(a, &v) * hankel_upper(&p);
    let t_inv = inverse_real_conditioned(&t, tol.condition_limit)
        .map_err(|condition| Error::IllConditionedChains { condition })?;
    let chains = jordan_chains_companion(spec, &p, tol)?;
    let basis = JordanBasis::from(&chains);
    Ok(JordanBasis {
        blocks: basis.blocks,
        m: complexify(&t) * basis.m,
        m_inv: basis.m_inv * complexify(&t_inv),
    })
}
