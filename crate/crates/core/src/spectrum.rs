//! Characteristic polynomials, roots, clustering and the Lyapunov solvability test.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, ensure_square};
use crate::system::Tolerances;

/// Monic real polynomial `N(s) = Σ a_i s^i`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Requires degree ≥ 1 and a leading coefficient of exactly 1.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidPolynomial(format!(
                "need degree at least 1, got {} coefficient(s)",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolynomial(
                "coefficients must be finite".into(),
            ));
        }
        let lead = *coeffs.last().unwrap();
        if lead != 1.0 {
            return Err(Error::InvalidPolynomial(format!(
                "polynomial must be monic, leading coefficient is {lead}"
            )));
        }
        Ok(Polynomial { coeffs })
    }

    /// Expands `Π (s − r_k)`. The roots must be closed under conjugation.
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::InvalidPolynomial("no roots given".into()));
        }
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        let scale = c.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let worst_imag = c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if worst_imag > 1e-9 * scale {
            return Err(Error::InvalidPolynomial(format!(
                "roots are not closed under conjugation (imaginary coefficient {worst_imag:.3e})"
            )));
        }
        let mut coeffs: Vec<f64> = c.iter().map(|z| z.re).collect();
        *coeffs.last_mut().unwrap() = 1.0;
        Polynomial::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `a_i`; `a_n = 1`.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    /// `max_i |a_i|` including the leading one.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        eval_with_derivative(self, s).0
    }

    /// `|N(λ)| / (max|a_i| · max(1,|λ|)^n)`.
    pub fn relative_residual(&self, s: Complex64) -> f64 {
        let scale = self.max_coeff() * s.norm().max(1.0).powi(self.degree() as i32);
        self.eval(s).norm() / scale
    }

    /// Coefficients of the `order`-th derivative (not monic).
    pub fn derivative_coeffs(&self, order: usize) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        for _ in 0..order {
            if c.len() <= 1 {
                return vec![0.0];
            }
            c = c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, v)| v * i as f64)
                .collect();
        }
        c
    }
}

fn horner(coeffs: &[f64], s: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        d = d * s + v;
        v = v * s + a;
    }
    (v, d)
}

/// `(N(s), N'(s))` by Horner's scheme.
pub fn eval_with_derivative(p: &Polynomial, s: Complex64) -> (Complex64, Complex64) {
    horner(&p.coeffs, s)
}

fn is_upper_hessenberg(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (j + 2..n).all(|i| m[(i, j)] == 0.0))
}

/// `det(sI − A)`.
///
/// `A` is brought to upper Hessenberg form by Householder reflections (skipped
/// when `A` or `Aᵀ` already is one) and the determinant is expanded with
/// La Budde's recurrence on the leading principal submatrices.
pub fn char_poly(a: &DMatrix<f64>) -> Result<Polynomial> {
    let n = ensure_square("A", a)?;
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    ensure_finite("A", a)?;
    let h = if is_upper_hessenberg(a) {
        a.clone()
    } else if is_upper_hessenberg(&a.transpose()) {
        a.transpose()
    } else {
        let mut h = a.clone().hessenberg().h();
        for j in 0..n {
            for i in j + 2..n {
                h[(i, j)] = 0.0;
            }
        }
        h
    };

    // p[i] = det(sI − H[..i, ..i]), ascending coefficients
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    p.push(vec![1.0]);
    for i in 1..=n {
        let prev = &p[i - 1];
        let mut cur = vec![0.0; i + 1];
        for (k, &c) in prev.iter().enumerate() {
            cur[k + 1] += c;
            cur[k] -= h[(i - 1, i - 1)] * c;
        }
        let mut sub = 1.0;
        for m in 1..i {
            sub *= h[(i - m, i - m - 1)];
            let w = h[(i - m - 1, i - 1)] * sub;
            if w != 0.0 {
                for (k, &c) in p[i - m - 1].iter().enumerate() {
                    cur[k] -= w * c;
                }
            }
        }
        p.push(cur);
    }
    let mut coeffs = p.pop().expect("n >= 1");
    coeffs[n] = 1.0;
    Polynomial::new(coeffs)
}

/// Roots of a polynomial, one entry per root counted with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueList {
    pub values: Vec<Complex64>,
}

impl EigenvalueList {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn cmp_re_im(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn initial_guesses(p: &Polynomial) -> Vec<Complex64> {
    let n = p.degree();
    let radius = 1.0 + p.coeffs[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect()
}

// One Gauss–Seidel pass; returns false if an update went non-finite.
fn aberth_sweep(p: &Polynomial, z: &mut [Complex64], frozen: &mut [bool]) -> bool {
    let n = z.len();
    for k in 0..n {
        if frozen[k] {
            continue;
        }
        let (v, d) = eval_with_derivative(p, z[k]);
        if v.norm() == 0.0 {
            frozen[k] = true;
            continue;
        }
        let w = v / d;
        let s: Complex64 = (0..n)
            .filter(|&j| j != k)
            .map(|j| (z[k] - z[j]).inv())
            .sum();
        let corr = w / (1.0 - w * s);
        if !corr.re.is_finite() || !corr.im.is_finite() {
            return false;
        }
        z[k] -= corr;
        if corr.norm() <= 4.0 * f64::EPSILON * z[k].norm() {
            frozen[k] = true;
        }
    }
    true
}

fn durand_kerner_sweep(p: &Polynomial, z: &mut [Complex64]) {
    let n = z.len();
    for k in 0..n {
        let v = p.eval(z[k]);
        let denom: Complex64 = (0..n).filter(|&j| j != k).map(|j| z[k] - z[j]).product();
        let corr = v / denom;
        if corr.re.is_finite() && corr.im.is_finite() {
            z[k] -= corr;
        }
    }
}

fn worst_residual(p: &Polynomial, z: &[Complex64]) -> f64 {
    z.iter()
        .map(|&r| p.relative_residual(r))
        .fold(0.0, f64::max)
}

/// All `n` roots of a monic polynomial by Aberth–Ehrlich iteration.
///
/// Falls back to Durand–Kerner when Aberth breaks down or stalls above the
/// residual bound. Clusters of roots whose inclusion disks overlap are
/// replaced by the root of the `(m−1)`-th derivative near their centroid,
/// roots whose disk touches the real axis are made real, and complex roots
/// are paired with their conjugates. The result is sorted by `(Re, Im)`.
pub fn find_roots(p: &Polynomial, tol: &Tolerances) -> Result<EigenvalueList> {
    let n = p.degree();
    if n == 1 {
        return Ok(EigenvalueList {
            values: vec![Complex64::new(-p.coeffs[0], 0.0)],
        });
    }

    let mut z = initial_guesses(p);
    let mut frozen = vec![false; n];
    let mut healthy = true;
    for _ in 0..tol.max_sweeps {
        if !aberth_sweep(p, &mut z, &mut frozen) {
            healthy = false;
            break;
        }
        if frozen.iter().all(|&f| f) {
            break;
        }
    }
    if !healthy {
        z = initial_guesses(p);
    }
    if !healthy || worst_residual(p, &z) > tol.root {
        for _ in 0..tol.max_sweeps {
            durand_kerner_sweep(p, &mut z);
            if worst_residual(p, &z) <= tol.root {
                break;
            }
        }
    }
    let worst = worst_residual(p, &z);
    if !(worst <= tol.root) {
        return Err(Error::RootsNotConverged {
            sweeps: tol.max_sweeps,
            worst_residual: worst,
        });
    }

    polish_clusters(p, &mut z, tol);
    pair_conjugates(&mut z);
    z.sort_by(cmp_re_im);
    Ok(EigenvalueList { values: z })
}

// Inclusion radii r_k = n |p(z_k)| / |Π_{j≠k} (z_k − z_j)|, with |p(z_k)| padded by
// the Horner rounding bound so that a root evaluating to exactly zero still gets a disk.
fn inclusion_radii(p: &Polynomial, z: &[Complex64]) -> Vec<f64> {
    let n = z.len();
    let gamma = 4.0 * n as f64 * f64::EPSILON;
    (0..n)
        .map(|k| {
            let denom: Complex64 = (0..n).filter(|&j| j != k).map(|j| z[k] - z[j]).product();
            let abs_poly = p
                .coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, a| acc * z[k].norm() + a.abs());
            let value = p.eval(z[k]).norm() + gamma * abs_poly;
            let r = n as f64 * value / denom.norm();
            if r.is_finite() {
                r
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

fn components(n: usize, linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if linked(i, j) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

fn polish_clusters(p: &Polynomial, z: &mut [Complex64], tol: &Tolerances) {
    let radii = inclusion_radii(p, z);
    let groups = components(z.len(), |i, j| (z[i] - z[j]).norm() <= radii[i] + radii[j]);
    for g in groups {
        let reach = g.iter().map(|&k| radii[k]).fold(0.0, f64::max);
        if g.len() == 1 {
            let k = g[0];
            if z[k].im.abs() <= radii[k] {
                z[k].im = 0.0;
            }
            continue;
        }
        let m = g.len();
        let centroid = g.iter().map(|&k| z[k]).sum::<Complex64>() / m as f64;
        let spread = g
            .iter()
            .map(|&k| (z[k] - centroid).norm())
            .fold(0.0, f64::max);
        let dcoeffs = p.derivative_coeffs(m - 1);
        let mut w = centroid;
        for _ in 0..60 {
            let (v, d) = horner(&dcoeffs, w);
            let step = v / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            w -= step;
            if step.norm() <= 4.0 * f64::EPSILON * w.norm().max(1.0) {
                break;
            }
        }
        if w.im.abs() <= reach.max(spread) {
            w.im = 0.0;
        }
        let inside = (w - centroid).norm() <= reach.max(spread) * 2.0;
        if inside && p.relative_residual(w) <= tol.root {
            for &k in &g {
                z[k] = w;
            }
        }
    }
}

fn pair_conjugates(z: &mut [Complex64]) {
    let upper: Vec<usize> = (0..z.len()).filter(|&k| z[k].im > 0.0).collect();
    let mut lower: Vec<usize> = (0..z.len()).filter(|&k| z[k].im < 0.0).collect();
    for k in upper {
        let target = z[k].conj();
        let best = lower.iter().enumerate().min_by(|a, b| {
            (z[*a.1] - target)
                .norm()
                .total_cmp(&(z[*b.1] - target).norm())
        });
        if let Some((pos, &j)) = best {
            let avg = (z[k] + z[j].conj()) * 0.5;
            z[k] = avg;
            z[j] = avg.conj();
            lower.swap_remove(pos);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Distinct eigenvalues with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    /// Keeps the given order.
    pub fn new(entries: Vec<SpectrumEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("spectrum is empty".into()));
        }
        for e in &entries {
            if e.multiplicity == 0 {
                return Err(Error::InvalidInput(format!(
                    "eigenvalue {} has multiplicity 0",
                    e.value
                )));
            }
            if !e.value.re.is_finite() || !e.value.im.is_finite() {
                return Err(Error::InvalidInput("eigenvalues must be finite".into()));
            }
        }
        Ok(Spectrum { entries })
    }

    pub fn simple(values: &[Complex64]) -> Result<Self> {
        Spectrum::new(
            values
                .iter()
                .map(|&value| SpectrumEntry {
                    value,
                    multiplicity: 1,
                })
                .collect(),
        )
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = values.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        Spectrum::simple(&v)
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    /// Number of distinct eigenvalues.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total multiplicity.
    pub fn degree(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.entries.iter().all(|e| e.multiplicity == 1)
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// Every eigenvalue repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat(e.value).take(e.multiplicity))
            .collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.value.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_real_part(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.value.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.max_real_part() < 0.0
    }

    /// Smallest distance between distinct entries (∞ for a single entry).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.entries.len() {
            for j in i + 1..self.entries.len() {
                best = best.min((self.entries[i].value - self.entries[j].value).norm());
            }
        }
        best
    }

    /// Index of the entry closest to `conj(λ_i)` within `tol`, if any.
    pub fn conjugate_partner(&self, i: usize, tol: f64) -> Option<usize> {
        let target = self.entries[i].value.conj();
        self.entries
            .iter()
            .enumerate()
            .map(|(j, e)| (j, (e.value - target).norm()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j)
    }

    pub fn polynomial(&self) -> Result<Polynomial> {
        Polynomial::from_roots(&self.expanded())
    }

    /// Relative condition number of each simple root with respect to the
    /// monic coefficients of `p`: `Σ_k |a_k||λ|^k / (|λ| |N'(λ)|)`.
    ///
    /// `N'(λ_i)` is taken as `Π_{j≠i}(λ_i − λ_j)`. Repeated entries give ∞.
    pub fn root_condition(&self, p: &Polynomial) -> Vec<f64> {
        let all = self.expanded();
        self.entries
            .iter()
            .map(|e| {
                if e.multiplicity > 1 {
                    return f64::INFINITY;
                }
                let lam = e.value;
                let r = lam.norm();
                let mut skipped = false;
                let mut d = Complex64::new(1.0, 0.0);
                for &l in &all {
                    if !skipped && l == lam {
                        skipped = true;
                    } else {
                        d *= lam - l;
                    }
                }
                let scale: f64 = p
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a.abs() * r.powi(k as i32))
                    .sum();
                scale / (r * d.norm()).max(f64::MIN_POSITIVE)
            })
            .collect()
    }
}

/// Single-linkage grouping of roots closer than `tol · (1 + ρ)`.
///
/// Each group becomes one entry at its centroid; entries are sorted by `(Re, Im)`.
pub fn cluster(roots: &EigenvalueList, tol: f64) -> Spectrum {
    let z = &roots.values;
    let rho = z.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let thresh = tol * (1.0 + rho);
    let groups = components(z.len(), |i, j| (z[i] - z[j]).norm() <= thresh);
    let mut entries: Vec<SpectrumEntry> = groups
        .iter()
        .map(|g| {
            let mut c = g.iter().map(|&k| z[k]).sum::<Complex64>() / g.len() as f64;
            if g.iter().all(|&k| z[k].im == 0.0) {
                c.im = 0.0;
            }
            SpectrumEntry {
                value: c,
                multiplicity: g.len(),
            }
        })
        .collect();
    entries.sort_by(|a, b| cmp_re_im(&a.value, &b.value));
    Spectrum { entries }
}

/// Outcome of the `λ_i + λ_j ≠ 0` test. Pair indices are 0-based entry indices with `i ≤ j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvabilityReport {
    pub ok: bool,
    pub violating_pairs: Vec<(usize, usize)>,
    pub min_pair_magnitude: f64,
}

/// Checks `|λ_i + λ_j| > tol · (1 + ρ)` for all `i ≤ j`.
pub fn check_solvability(spec: &Spectrum, tol: f64) -> SolvabilityReport {
    let thresh = tol * (1.0 + spec.spectral_radius());
    let e = spec.entries();
    let mut violating_pairs = Vec::new();
    let mut min_pair_magnitude = f64::INFINITY;
    for i in 0..e.len() {
        for j in i..e.len() {
            let mag = (e[i].value + e[j].value).norm();
            min_pair_magnitude = min_pair_magnitude.min(mag);
            if mag <= thresh {
                violating_pairs.push((i, j));
            }
        }
    }
    SolvabilityReport {
        ok: violating_pairs.is_empty(),
        violating_pairs,
        min_pair_magnitude,
    }
}
