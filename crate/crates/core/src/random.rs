//! Seeded generators for randomized checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectrum::{Spectrum, SpectrumEntry};
use crate::system::LtiSystem;
use crate::Result;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rectangle of the complex plane eigenvalues are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBox {
    pub re: (f64, f64),
    /// Upper bound on `|Im λ|`.
    pub im: f64,
    pub min_separation: f64,
}

impl Default for SpectrumBox {
    fn default() -> Self {
        Self {
            re: (-5.0, -0.1),
            im: 3.0,
            min_separation: 0.1,
        }
    }
}

fn far_enough(z: Complex64, taken: &[Complex64], sep: f64) -> bool {
    taken.iter().all(|w| (z - w).norm() >= sep)
}

/// Conjugate-closed simple spectrum of size `n` with pairwise separation at least
/// `b.min_separation`, conjugates included. Roots come out sorted by `(Re, Im)`.
pub fn simple_spectrum<R: Rng>(rng: &mut R, n: usize, b: &SpectrumBox) -> Vec<Complex64> {
    let mut roots: Vec<Complex64> = Vec::with_capacity(n);
    while roots.len() < n {
        let re = rng.gen_range(b.re.0..=b.re.1);
        if n - roots.len() >= 2 && rng.gen_bool(0.5) {
            let im = rng.gen_range(b.min_separation / 2.0..=b.im);
            let z = Complex64::new(re, im);
            if far_enough(z, &roots, b.min_separation)
                && far_enough(z.conj(), &roots, b.min_separation)
            {
                roots.push(z);
                roots.push(z.conj());
            }
        } else {
            let z = Complex64::new(re, 0.0);
            if far_enough(z, &roots, b.min_separation) {
                roots.push(z);
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Spectrum of total degree `n` with multiplicities up to `max_mult`.
///
/// Complex values come in conjugate pairs sharing a multiplicity. Distinct
/// values are at least `b.min_separation` apart.
pub fn jordan_spectrum<R: Rng>(
    rng: &mut R,
    n: usize,
    max_mult: usize,
    b: &SpectrumBox,
) -> Spectrum {
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    let mut taken: Vec<Complex64> = Vec::new();
    let mut degree = 0;
    while degree < n {
        let left = n - degree;
        let re = rng.gen_range(b.re.0..=b.re.1);
        let complex = left >= 2 && rng.gen_bool(0.3);
        let cap = if complex {
            (left / 2).min(max_mult)
        } else {
            left.min(max_mult)
        };
        let mult = rng.gen_range(1..=cap.max(1));
        if complex {
            let z = Complex64::new(re, rng.gen_range(b.min_separation / 2.0..=b.im));
            if far_enough(z, &taken, b.min_separation)
                && far_enough(z.conj(), &taken, b.min_separation)
            {
                taken.extend([z, z.conj()]);
                entries.push(SpectrumEntry {
                    value: z,
                    multiplicity: mult,
                });
                entries.push(SpectrumEntry {
                    value: z.conj(),
                    multiplicity: mult,
                });
                degree += 2 * mult;
            }
        } else {
            let z = Complex64::new(re, 0.0);
            if far_enough(z, &taken, b.min_separation) {
                taken.push(z);
                entries.push(SpectrumEntry {
                    value: z,
                    multiplicity: mult,
                });
                degree += mult;
            }
        }
    }
    entries.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Spectrum::new(entries).expect("generated spectrum is conjugate closed")
}

/// Monic polynomial coefficients `a_0..a_{n−1}` uniform in `[−bound, bound]`, then `1`.
pub fn monic_coeffs<R: Rng>(rng: &mut R, n: usize, bound: f64) -> Vec<f64> {
    let mut a: Vec<f64> = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
    a.push(1.0);
    a
}

/// Random stable system with entries of `A` and `B` uniform in `[−1, 1]`.
///
/// `A` is shifted left until its spectral abscissa is at most `−margin`.
/// Draws are repeated until the controllability matrix has condition below `max_condition`.
pub fn stable_system<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    margin: f64,
    max_condition: f64,
) -> Result<LtiSystem> {
    loop {
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        let b = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..=1.0));
        let abscissa = a
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if abscissa > -margin {
            a -= DMatrix::identity(n, n) * (abscissa + margin);
        }
        let sys = LtiSystem::new(a, b)?;
        let sv = sys.controllability_matrix().singular_values();
        let smax = sv.max();
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if smin > 0.0 && smax / smin < max_condition {
            return Ok(sys);
        }
    }
}

/// Random target state with entries uniform in `[−1, 1]`.
pub fn target<R: Rng>(rng: &mut R, n: usize) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0))
}
