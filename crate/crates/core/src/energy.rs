//! Minimum-energy control and its modal partitions (single-input companion form).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::companion::EigenStructure;
use crate::components::Decomposition;
use crate::error::{Error, Result};
use crate::gramian::infinite_pair_subgramians;
use crate::inverse::{inverse_eigenparts, inverse_pair_parts};
use crate::linalg::{complexify_vec, CMatrix};

/// Step used by the trapezoid quadrature.
pub const QUADRATURE_STEP: f64 = 1e-3;
/// Minimum number of quadrature points.
pub const QUADRATURE_MIN_POINTS: usize = 40_000;

fn quad_form(x: &DVector<f64>, m: &CMatrix) -> Complex64 {
    let xc = complexify_vec(x);
    (xc.transpose() * m * &xc)[(0, 0)]
}

fn check_len(x0: &DVector<f64>, n: usize) -> Result<()> {
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "x0 has length {}, system has n = {n}",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("x0 contains non-finite entries".into()));
    }
    Ok(())
}

/// `x₀ᵀ (Σ_j P̃_j^{−C}) x₀`.
///
/// Only a minimum energy when the system is stable; otherwise it is just the quadratic form.
pub fn min_energy(x0: &DVector<f64>, inv: &Decomposition) -> Result<f64> {
    check_len(x0, inv.symmetrized.n())?;
    Ok(quad_form(x0, &inv.symmetrized.sum()).re)
}

/// Linear and quadratic splits of `x₀ᵀ P^{−1} x₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyPartition {
    pub total: f64,
    /// `E_i = x₀ᵀ P̃_i^{−C} x₀`, one per eigenvalue.
    pub linear: Vec<f64>,
    /// `Ê_ij = x₀ᵀ P_ij^{−C} x₀`.
    pub quadratic: DMatrix<f64>,
    pub target: DVector<f64>,
    pub eigenvalues: Vec<Complex64>,
    /// False for unstable spectra, where the forms carry no energy meaning.
    pub interpretation_valid: bool,
    /// Largest imaginary residue dropped from any `E_i` or `Ê_ij`.
    pub max_imag: f64,
    /// `Σ_ij ‖P_ij^{−C}‖ ‖x₀‖² / |E_min|`; round-off in the sums grows with this ratio.
    pub cancellation: f64,
}

impl EnergyPartition {
    pub fn linear_sum(&self) -> f64 {
        self.linear.iter().sum()
    }

    pub fn quadratic_sum(&self) -> f64 {
        self.quadratic.sum()
    }

    /// Worst relative mismatch between `total` and either partition sum.
    pub fn closure_defect(&self) -> f64 {
        let scale = self.total.abs().max(f64::MIN_POSITIVE);
        ((self.linear_sum() - self.total).abs()).max((self.quadratic_sum() - self.total).abs())
            / scale
    }
}

/// Computes `E_min`, `E_i` and `Ê_ij` for target `x₀`.
pub fn energy_partition(x0: &DVector<f64>, es: &EigenStructure) -> Result<EnergyPartition> {
    check_len(x0, es.n())?;
    let inv = inverse_eigenparts(es)?;
    let pairs = inverse_pair_parts(es)?;
    let k = es.eigenvalues.len();
    let mut max_imag = 0.0f64;
    let mut linear = Vec::with_capacity(k);
    for i in 0..k {
        let v = quad_form(x0, inv.symmetrized.eigen(i));
        max_imag = max_imag.max(v.im.abs());
        linear.push(v.re);
    }
    let mut quadratic = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let v = quad_form(x0, pairs.symmetrized.pair(i, j));
            max_imag = max_imag.max(v.im.abs());
            quadratic[(i, j)] = v.re;
        }
    }
    let total = quad_form(x0, &inv.symmetrized.sum()).re;
    let magnitude: f64 = pairs
        .raw
        .components
        .iter()
        .map(|(_, m)| m.norm())
        .sum::<f64>()
        * x0.norm_squared();
    Ok(EnergyPartition {
        total,
        cancellation: magnitude / total.abs().max(f64::MIN_POSITIVE),
        linear,
        quadratic,
        target: x0.clone(),
        eigenvalues: es.eigenvalues.clone(),
        interpretation_valid: es.eigenvalues.iter().all(|l| l.re < 0.0),
        max_imag,
    })
}

/// `û(t) = b_Cᵀ e^{−A_Cᵀ t} P_C^{−1} x₀` for `t ≤ 0`, split as `û_i(t) = c_i e^{−λ_i* t}`
/// with `c_i = x_i* P_C^{−1} x₀ / N'(λ_i)*`.
#[derive(Debug, Clone)]
pub struct OptimalControlSignal {
    pub eigenvalues: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
    /// `P_C^{−1} x₀`.
    pub costate: DVector<f64>,
    /// Quadrature runs over `(−horizon, 0)`.
    pub horizon: f64,
}

impl OptimalControlSignal {
    /// Modal components `û_i(t)`.
    pub fn modes(&self, t: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .zip(&self.coefficients)
            .map(|(l, c)| c * (-l.conj() * t).exp())
            .collect()
    }

    /// `û(t) = Σ_i û_i(t)`.
    pub fn control(&self, t: f64) -> f64 {
        self.modes(t).iter().sum::<Complex64>().re
    }

    /// `(t, û, û_i)` on a uniform grid from `t0` to `t1` inclusive.
    pub fn sample(&self, t0: f64, t1: f64, steps: usize) -> Vec<(f64, f64, Vec<Complex64>)> {
        let steps = steps.max(1);
        (0..=steps)
            .map(|s| {
                let t = t0 + (t1 - t0) * s as f64 / steps as f64;
                let modes = self.modes(t);
                let u = modes.iter().sum::<Complex64>().re;
                (t, u, modes)
            })
            .collect()
    }

    /// Number of trapezoid points used over the horizon.
    pub fn quadrature_points(&self) -> usize {
        ((self.horizon / QUADRATURE_STEP).ceil() as usize).max(QUADRATURE_MIN_POINTS)
    }

    /// Trapezoid rule for `∫ f(û_1..û_k) dt` over `(−horizon, 0)`.
    pub fn integrate<F: FnMut(&[Complex64]) -> f64>(&self, mut f: F) -> f64 {
        let points = self.quadrature_points();
        let h = self.horizon / (points - 1) as f64;
        let mut acc = 0.0;
        for p in 0..points {
            let t = -self.horizon + h * p as f64;
            let w = if p == 0 || p == points - 1 { 0.5 } else { 1.0 };
            acc += w * f(&self.modes(t));
        }
        acc * h
    }

    /// `∫ û² dt` by quadrature.
    pub fn energy_by_quadrature(&self) -> f64 {
        self.integrate(|m| m.iter().sum::<Complex64>().re.powi(2))
    }
}

fn require_stable(es: &EigenStructure) -> Result<f64> {
    let max_re = es
        .eigenvalues
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(Error::StabilityRequired {
            max_real_part: max_re,
        });
    }
    Ok(es
        .eigenvalues
        .iter()
        .map(|l| l.re.abs())
        .fold(f64::INFINITY, f64::min))
}

/// Builds the optimal control signal for target `x₀`. Requires a stable spectrum.
pub fn optimal_control(x0: &DVector<f64>, es: &EigenStructure) -> Result<OptimalControlSignal> {
    check_len(x0, es.n())?;
    let min_decay = require_stable(es)?;
    let inv = inverse_eigenparts(es)?.symmetrized.real_sum();
    let z = &inv * x0;
    let zc = complexify_vec(&z);
    let coefficients =
        es.x.iter()
            .zip(&es.dn)
            .map(|(x, dn)| (x.adjoint() * &zc)[(0, 0)] / dn.conj())
            .collect();
    Ok(OptimalControlSignal {
        eigenvalues: es.eigenvalues.clone(),
        coefficients,
        costate: z,
        horizon: 40.0 / min_decay,
    })
}

/// Closed-form modal overlaps and their quadrature counterparts.
#[derive(Debug, Clone)]
pub struct OverlapReport {
    /// `x₀ᵀ P_C^{−1} P_ij^C P_C^{−1} x₀`.
    pub closed_form: DMatrix<f64>,
    /// `½ ∫ (û_i* û_j + û_j* û_i) dt`.
    pub quadrature: DMatrix<f64>,
    /// Largest entry-wise difference, relative to `max(1, E_min)`.
    pub max_deviation: f64,
    pub horizon: f64,
    pub points: usize,
}

/// Overlaps between modal control components.
pub fn modal_overlap_integrals(x0: &DVector<f64>, es: &EigenStructure) -> Result<OverlapReport> {
    let signal = optimal_control(x0, es)?;
    let pairs = infinite_pair_subgramians(es)?;
    let k = es.eigenvalues.len();
    let closed_form = DMatrix::from_fn(k, k, |i, j| {
        quad_form(&signal.costate, pairs.symmetrized.pair(i, j)).re
    });

    let points = signal.quadrature_points();
    let h = signal.horizon / (points - 1) as f64;
    let mut quadrature = DMatrix::zeros(k, k);
    for p in 0..points {
        let t = -signal.horizon + h * p as f64;
        let w = if p == 0 || p == points - 1 {
            0.5 * h
        } else {
            h
        };
        let m = signal.modes(t);
        for i in 0..k {
            for j in 0..k {
                quadrature[(i, j)] += w * (m[i].conj() * m[j]).re;
            }
        }
    }
    let scale = closed_form.sum().abs().max(1.0);
    let max_deviation = (&closed_form - &quadrature).abs().max() / scale;
    Ok(OverlapReport {
        closed_form,
        quadrature,
        max_deviation,
        horizon: signal.horizon,
        points,
    })
}
