//! Containers for eigen- and pair-indexed matrix components.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, hermitian_part, imag_norm, real_part, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentIndex {
    Eigen(usize),
    Pair(usize, usize),
}

impl ComponentIndex {
    /// 1-based label such as `3` or `1,2`.
    pub fn label(&self) -> String {
        match self {
            ComponentIndex::Eigen(i) => format!("{}", i + 1),
            ComponentIndex::Pair(i, j) => format!("{},{}", i + 1, j + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Raw,
    Symmetrized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    Companion,
    Original,
}

/// Complex n×n matrices keyed by eigenvalue index or index pair.
#[derive(Debug, Clone)]
pub struct SpectralComponentSet {
    pub flavor: Flavor,
    pub coordinates: Coordinates,
    /// Distinct eigenvalues the indices refer to.
    pub eigenvalues: Vec<Complex64>,
    pub components: Vec<(ComponentIndex, CMatrix)>,
}

impl SpectralComponentSet {
    pub fn n(&self) -> usize {
        self.components.first().map(|(_, m)| m.nrows()).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn get(&self, index: ComponentIndex) -> Option<&CMatrix> {
        self.components
            .iter()
            .find(|(i, _)| *i == index)
            .map(|(_, m)| m)
    }

    pub fn eigen(&self, i: usize) -> &CMatrix {
        self.get(ComponentIndex::Eigen(i))
            .expect("eigen-indexed component")
    }

    pub fn pair(&self, i: usize, j: usize) -> &CMatrix {
        self.get(ComponentIndex::Pair(i, j))
            .expect("pair-indexed component")
    }

    pub fn is_pair_indexed(&self) -> bool {
        matches!(self.components.first(), Some((ComponentIndex::Pair(..), _)))
    }

    pub fn sum(&self) -> CMatrix {
        let n = self.n();
        self.components
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, (_, m)| acc + m)
    }

    /// Real part of the sum; the imaginary part is reported by [`imag_norm`].
    pub fn real_sum(&self) -> DMatrix<f64> {
        real_part(&self.sum())
    }

    pub fn symmetrized(&self) -> Self {
        self.map(self.coordinates, hermitian_part)
            .with_flavor(Flavor::Symmetrized)
    }

    fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    /// Applies `f` to every component.
    pub fn map(&self, coordinates: Coordinates, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        SpectralComponentSet {
            flavor: self.flavor,
            coordinates,
            eigenvalues: self.eigenvalues.clone(),
            components: self.components.iter().map(|(i, m)| (*i, f(m))).collect(),
        }
    }

    /// `max_i ‖M_i − M_i*‖ / ‖M_i‖`.
    pub fn max_hermitian_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|(_, m)| hermitian_defect(m) / m.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    fn fold_pairs(&self, key: impl Fn(usize, usize) -> usize) -> Result<Self> {
        if !self.is_pair_indexed() {
            return Err(Error::InvalidInput(
                "row/column sums need a pair-indexed set".into(),
            ));
        }
        let n = self.n();
        let k = self.eigenvalues.len();
        let mut acc = vec![CMatrix::zeros(n, n); k];
        for (idx, m) in &self.components {
            if let ComponentIndex::Pair(i, j) = *idx {
                acc[key(i, j)] += m;
            }
        }
        Ok(SpectralComponentSet {
            flavor: self.flavor,
            coordinates: self.coordinates,
            eigenvalues: self.eigenvalues.clone(),
            components: acc
                .into_iter()
                .enumerate()
                .map(|(i, m)| (ComponentIndex::Eigen(i), m))
                .collect(),
        })
    }

    /// `Σ_j P_{ij}` as an eigen-indexed set.
    pub fn row_sums(&self) -> Result<Self> {
        self.fold_pairs(|i, _| i)
    }

    /// `Σ_i P_{ij}` as an eigen-indexed set.
    pub fn column_sums(&self) -> Result<Self> {
        self.fold_pairs(|_, j| j)
    }

    fn conjugate_of(&self, i: usize, tol: f64) -> usize {
        let target = self.eigenvalues[i].conj();
        (0..self.eigenvalues.len())
            .filter(|&j| (self.eigenvalues[j] - target).norm() <= tol)
            .min_by(|&a, &b| {
                (self.eigenvalues[a] - target)
                    .norm()
                    .total_cmp(&(self.eigenvalues[b] - target).norm())
            })
            .unwrap_or(i)
    }

    /// Groups each index with its conjugate counterpart and sums them.
    ///
    /// Returns `(indices, real part of the sum, ‖imaginary part‖)` per group.
    pub fn merge_conjugates(&self, tol: f64) -> Vec<(Vec<ComponentIndex>, DMatrix<f64>, f64)> {
        let mut seen = vec![false; self.components.len()];
        let mut out = Vec::new();
        for a in 0..self.components.len() {
            if seen[a] {
                continue;
            }
            seen[a] = true;
            let idx = self.components[a].0;
            let partner = match idx {
                ComponentIndex::Eigen(i) => ComponentIndex::Eigen(self.conjugate_of(i, tol)),
                ComponentIndex::Pair(i, j) => {
                    ComponentIndex::Pair(self.conjugate_of(i, tol), self.conjugate_of(j, tol))
                }
            };
            let mut group = vec![idx];
            let mut total = self.components[a].1.clone();
            if partner != idx {
                if let Some(b) = self.components.iter().position(|(k, _)| *k == partner) {
                    if !seen[b] {
                        seen[b] = true;
                        group.push(partner);
                        total += &self.components[b].1;
                    }
                }
            }
            let im = imag_norm(&total);
            out.push((group, real_part(&total), im));
        }
        out
    }
}

/// Raw components together with their Hermitian parts.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub raw: SpectralComponentSet,
    pub symmetrized: SpectralComponentSet,
}

impl Decomposition {
    pub fn from_raw(raw: SpectralComponentSet) -> Self {
        let symmetrized = raw.symmetrized();
        Decomposition { raw, symmetrized }
    }

    pub fn flavor(&self, flavor: Flavor) -> &SpectralComponentSet {
        match flavor {
            Flavor::Raw => &self.raw,
            Flavor::Symmetrized => &self.symmetrized,
        }
    }

    pub fn map(&self, coordinates: Coordinates, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Decomposition::from_raw(self.raw.map(coordinates, f))
    }
}

/// Components of the inverse Gramian; same layout as the Gramian decomposition.
pub type InverseComponentSet = Decomposition;

/// `coefficient · t^degree / degree! · e^{rate·t}`.
#[derive(Debug, Clone)]
pub struct ExpTerm {
    pub coefficient: CMatrix,
    pub rate: Complex64,
    pub degree: u32,
}

impl ExpTerm {
    fn factor(&self, t: f64) -> Complex64 {
        let mut poly = 1.0;
        for k in 1..=self.degree {
            poly *= t / k as f64;
        }
        (self.rate * t).exp() * poly
    }

    // d/dt of t^d/d! e^{rt} = (t^{d−1}/(d−1)! + r t^d/d!) e^{rt}
    fn derivative_factor(&self, t: f64) -> Complex64 {
        let lower = if self.degree == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            ExpTerm {
                coefficient: CMatrix::zeros(0, 0),
                rate: self.rate,
                degree: self.degree - 1,
            }
            .factor(t)
        };
        lower + self.rate * self.factor(t)
    }
}

/// One time-dependent component `S + Σ_k C_k t^{d_k}/d_k! e^{r_k t}`.
#[derive(Debug, Clone)]
pub struct FiniteComponent {
    pub index: ComponentIndex,
    pub static_part: CMatrix,
    pub terms: Vec<ExpTerm>,
}

impl FiniteComponent {
    pub fn evaluate(&self, t: f64) -> CMatrix {
        self.terms
            .iter()
            .fold(self.static_part.clone(), |acc, term| {
                acc + &term.coefficient * term.factor(t)
            })
    }

    pub fn derivative(&self, t: f64) -> CMatrix {
        let n = self.static_part.nrows();
        self.terms.iter().fold(CMatrix::zeros(n, n), |acc, term| {
            acc + &term.coefficient * term.derivative_factor(t)
        })
    }

    fn hermitized(&self) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for term in &self.terms {
            terms.push(ExpTerm {
                coefficient: term.coefficient.scale(0.5),
                rate: term.rate,
                degree: term.degree,
            });
            terms.push(ExpTerm {
                coefficient: term.coefficient.adjoint().scale(0.5),
                rate: term.rate.conj(),
                degree: term.degree,
            });
        }
        FiniteComponent {
            index: self.index,
            static_part: hermitian_part(&self.static_part),
            terms,
        }
    }
}

/// Finite-horizon decomposition: a static part plus exponential-polynomial terms per index.
#[derive(Debug, Clone)]
pub struct FiniteGramianDecomposition {
    pub flavor: Flavor,
    pub coordinates: Coordinates,
    pub eigenvalues: Vec<Complex64>,
    /// Default evaluation time.
    pub horizon: f64,
    pub components: Vec<FiniteComponent>,
}

impl FiniteGramianDecomposition {
    pub fn n(&self) -> usize {
        self.components
            .first()
            .map(|c| c.static_part.nrows())
            .unwrap_or(0)
    }

    pub fn evaluate(&self, t: f64) -> SpectralComponentSet {
        SpectralComponentSet {
            flavor: self.flavor,
            coordinates: self.coordinates,
            eigenvalues: self.eigenvalues.clone(),
            components: self
                .components
                .iter()
                .map(|c| (c.index, c.evaluate(t)))
                .collect(),
        }
    }

    pub fn at_horizon(&self) -> SpectralComponentSet {
        self.evaluate(self.horizon)
    }

    pub fn sum_at(&self, t: f64) -> CMatrix {
        let n = self.n();
        self.components
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, c| acc + c.evaluate(t))
    }

    /// Exact time derivative of the sum.
    pub fn derivative_sum_at(&self, t: f64) -> CMatrix {
        let n = self.n();
        self.components
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, c| acc + c.derivative(t))
    }

    /// The `t`-independent parts (the infinite-horizon limit for stable spectra).
    pub fn static_set(&self) -> SpectralComponentSet {
        SpectralComponentSet {
            flavor: self.flavor,
            coordinates: self.coordinates,
            eigenvalues: self.eigenvalues.clone(),
            components: self
                .components
                .iter()
                .map(|c| (c.index, c.static_part.clone()))
                .collect(),
        }
    }

    /// Hermitian parts, with every term split into itself and its conjugate.
    pub fn symmetrized(&self) -> Self {
        FiniteGramianDecomposition {
            flavor: Flavor::Symmetrized,
            coordinates: self.coordinates,
            eigenvalues: self.eigenvalues.clone(),
            horizon: self.horizon,
            components: self
                .components
                .iter()
                .map(FiniteComponent::hermitized)
                .collect(),
        }
    }

    /// Applies a linear map to static parts and coefficients.
    pub fn map(&self, coordinates: Coordinates, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        FiniteGramianDecomposition {
            flavor: self.flavor,
            coordinates,
            eigenvalues: self.eigenvalues.clone(),
            horizon: self.horizon,
            components: self
                .components
                .iter()
                .map(|c| FiniteComponent {
                    index: c.index,
                    static_part: f(&c.static_part),
                    terms: c
                        .terms
                        .iter()
                        .map(|t| ExpTerm {
                            coefficient: f(&t.coefficient),
                            rate: t.rate,
                            degree: t.degree,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Componentwise sum; indices missing from one side are carried over.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() && !other.components.is_empty() && !self.components.is_empty() {
            return Err(Error::DimensionMismatch(
                "decompositions have different sizes".into(),
            ));
        }
        let mut components = self.components.clone();
        for oc in &other.components {
            if let Some(c) = components.iter_mut().find(|c| c.index == oc.index) {
                c.static_part += &oc.static_part;
                c.terms.extend(oc.terms.iter().cloned());
            } else {
                components.push(oc.clone());
            }
        }
        Ok(FiniteGramianDecomposition {
            flavor: self.flavor,
            coordinates: self.coordinates,
            eigenvalues: self.eigenvalues.clone(),
            horizon: self.horizon,
            components,
        })
    }

    /// Sums all coefficients sharing a rate (within `tol`) and a polynomial degree.
    ///
    /// For the finite Gramian this is the expansion of `P(t)` over the pair
    /// spectrum `e^{(λ_i+λ_j)t}`.
    pub fn rate_groups(&self, tol: f64) -> Vec<(Complex64, u32, CMatrix)> {
        let mut groups: Vec<(Complex64, u32, CMatrix)> = Vec::new();
        for c in &self.components {
            for term in &c.terms {
                match groups
                    .iter_mut()
                    .find(|g| g.1 == term.degree && (g.0 - term.rate).norm() <= tol)
                {
                    Some(g) => g.2 += &term.coefficient,
                    None => groups.push((term.rate, term.degree, term.coefficient.clone())),
                }
            }
        }
        groups
    }

    /// Pair indices whose exponents `λ_i + λ_j*` coincide within `tol`.
    ///
    /// Pair components are only unique when all these exponents are distinct;
    /// sums are unaffected.
    pub fn rate_collisions(&self, tol: f64) -> Vec<(ComponentIndex, ComponentIndex)> {
        let rates: Vec<(ComponentIndex, Complex64)> = self
            .components
            .iter()
            .filter_map(|c| match c.index {
                ComponentIndex::Pair(i, j) => {
                    Some((c.index, self.eigenvalues[i] + self.eigenvalues[j].conj()))
                }
                ComponentIndex::Eigen(_) => None,
            })
            .collect();
        let mut out = Vec::new();
        for a in 0..rates.len() {
            for b in a + 1..rates.len() {
                if (rates[a].1 - rates[b].1).norm() <= tol {
                    out.push((rates[a].0, rates[b].0));
                }
            }
        }
        out
    }
}
