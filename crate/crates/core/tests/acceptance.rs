//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use gramspec::linalg::{
    complexify, min_hermitian_eigenvalue, plaid_hankel_violation, plaid_zero_violation, real_part,
    CMatrix,
};
use gramspec::random::{
    jordan_spectrum, seeded, simple_spectrum, stable_system, target, SpectrumBox,
};
use gramspec::*;
use gramspec_oracle::{integrate_lyapunov, residual_riccati, solve_lyapunov_dense};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

type Outcome = std::result::Result<String, String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn rows(n: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v)
}

fn rel(got: &CMatrix, want: &DMatrix<f64>) -> f64 {
    (got - complexify(want)).norm() / want.norm().max(f64::MIN_POSITIVE)
}

fn rel_real(got: &DMatrix<f64>, want: &DMatrix<f64>) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

/// Tracks the worst relative error of a group of checks against one tolerance.
struct Worst {
    tol: f64,
    value: f64,
    what: String,
}

impl Worst {
    fn new(tol: f64) -> Self {
        Worst {
            tol,
            value: 0.0,
            what: String::new(),
        }
    }

    fn see(&mut self, what: impl Into<String>, err: f64) {
        if !(err <= self.value) {
            self.value = err;
            self.what = what.into();
        }
    }

    fn ok(&self) -> bool {
        self.value <= self.tol
    }

    fn describe(&self) -> String {
        format!(
            "worst {:.2e} ({}) vs {:.0e}",
            self.value, self.what, self.tol
        )
    }
}

fn verdict(checks: &[&Worst], extra: Vec<String>) -> Outcome {
    let mut parts: Vec<String> = checks.iter().map(|w| w.describe()).collect();
    parts.extend(extra);
    let text = parts.join("; ");
    if checks.iter().all(|w| w.ok()) {
        Ok(text)
    } else {
        Err(text)
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn cubic() -> EigenStructure {
    let p = Polynomial::new(vec![-6.0, 11.0, -6.0, 1.0]).unwrap();
    EigenStructure::new(
        &build_companion(&p),
        &Spectrum::from_real(&[1.0, 2.0, 3.0]).unwrap(),
        &tol(),
    )
    .unwrap()
}

fn quintic() -> Polynomial {
    Polynomial::new(vec![-8.0, 28.0, -38.0, 25.0, -8.0, 1.0]).unwrap()
}

fn quintic_spec() -> Spectrum {
    Spectrum::new(vec![
        SpectrumEntry {
            value: c(1.0),
            multiplicity: 2,
        },
        SpectrumEntry {
            value: c(2.0),
            multiplicity: 3,
        },
    ])
    .unwrap()
}

/// The nine pair sub-Gramians of the cubic with roots 1, 2, 3, indexed 0-based.
fn cubic_pairs() -> Vec<((usize, usize), DMatrix<f64>)> {
    let p11 = DMatrix::from_element(3, 3, 1.0) * (-1.0 / 8.0);
    let p12 = rows(3, &[2.0, 3.0, 5.0, 3.0, 4.0, 6.0, 5.0, 6.0, 8.0]) / 12.0;
    let p22 = rows(3, &[1.0, 2.0, 4.0, 2.0, 4.0, 8.0, 4.0, 8.0, 16.0]) * (-1.0 / 4.0);
    let p23 = rows(3, &[2.0, 5.0, 13.0, 5.0, 12.0, 30.0, 13.0, 30.0, 72.0]) / 20.0;
    let p33 = rows(3, &[1.0, 3.0, 9.0, 3.0, 9.0, 27.0, 9.0, 27.0, 81.0]) * (-1.0 / 24.0);
    // printed with a transposed entry in row 2; the symmetric form is the one the formula gives
    let p13 = rows(3, &[1.0, 2.0, 5.0, 2.0, 3.0, 6.0, 5.0, 6.0, 9.0]) * (-1.0 / 16.0);
    vec![
        ((0, 0), p11),
        ((0, 1), p12.clone()),
        ((1, 0), p12),
        ((1, 1), p22),
        ((1, 2), p23.clone()),
        ((2, 1), p23),
        ((2, 2), p33),
        ((0, 2), p13.clone()),
        ((2, 0), p13),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let es = cubic();
    let eig = infinite_subgramians(&es).map_err(|e| e.to_string())?;
    let pairs = infinite_pair_subgramians(&es).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let mut w = Worst::new(1e-10);
    let wants = [
        rows(3, &[1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0]) * (-1.0 / 48.0),
        rows(3, &[1.0, 0.0, 4.0, 0.0, -4.0, 0.0, 4.0, 0.0, 16.0]) / 60.0,
        rows(3, &[1.0, 0.0, 9.0, 0.0, -9.0, 0.0, 9.0, 0.0, 81.0]) * (-1.0 / 240.0),
    ];
    for (i, want) in wants.iter().enumerate() {
        w.see(format!("P~{}", i + 1), rel(eig.symmetrized.eigen(i), want));
    }
    let total = rows(3, &[1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 11.0]) * (-1.0 / 120.0);
    w.see("sum of P~", rel(&eig.symmetrized.sum(), &total));
    for ((i, j), want) in cubic_pairs() {
        w.see(
            format!("P{}{}", i + 1, j + 1),
            rel(pairs.symmetrized.pair(i, j), &want),
        );
    }
    w.see("sum of pairs", rel(&pairs.symmetrized.sum(), &total));
    let rs = pairs.symmetrized.row_sums().map_err(|e| e.to_string())?;
    for i in 0..3 {
        w.see(format!("row {}", i + 1), rel(rs.eigen(i), &wants[i]));
    }
    let fast = elapsed < Duration::from_secs(1);
    let out = verdict(&[&w], vec![format!("runtime {elapsed:.2?}")]);
    match (out, fast) {
        (Ok(s), true) => Ok(s),
        (Ok(s), false) | (Err(s), _) => Err(s),
    }
}

fn criterion_2() -> Outcome {
    let es = cubic();
    let fin = finite_pair_subgramians(&es, 1.0).map_err(|e| e.to_string())?;
    let groups = fin.symmetrized().rate_groups(1e-9);
    let pairs: std::collections::HashMap<(usize, usize), DMatrix<f64>> =
        cubic_pairs().into_iter().collect();
    let sum_of = |idx: &[(usize, usize)]| {
        idx.iter()
            .fold(DMatrix::zeros(3, 3), |acc, k| acc + &pairs[k])
    };
    let expected = [
        (2.0, sum_of(&[(0, 0)])),
        (3.0, sum_of(&[(0, 1), (1, 0)])),
        (4.0, sum_of(&[(1, 1), (0, 2), (2, 0)])),
        (5.0, sum_of(&[(1, 2), (2, 1)])),
        (6.0, sum_of(&[(2, 2)])),
    ];
    let mut w = Worst::new(1e-10);
    // P(t) = Σ G_r (1 − e^{rt}), so the coefficient of e^{rt} is −G_r
    for (rate, g) in &expected {
        let found: Vec<_> = groups
            .iter()
            .filter(|(r, d, _)| *d == 0 && (r - c(*rate)).norm() < 1e-9)
            .collect();
        match found.as_slice() {
            [(_, _, m)] => w.see(format!("e^{{{rate}t}}"), rel(m, &(-g))),
            _ => {
                return Err(format!(
                    "expected one group at rate {rate}, found {}",
                    found.len()
                ))
            }
        }
    }
    if groups
        .iter()
        .any(|(r, _, _)| !expected.iter().any(|(e, _)| (r - c(*e)).norm() < 1e-9))
    {
        return Err("unexpected exponent in the pair expansion".into());
    }
    let total = rows(3, &[1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 11.0]) * (-1.0 / 120.0);
    w.see(
        "constant term",
        rel(&fin.symmetrized().static_set().sum(), &total),
    );

    let residues = [
        rows(3, &[6.0, -5.0, 1.0, 6.0, -5.0, 1.0, 6.0, -5.0, 1.0]) / 2.0,
        rows(3, &[-3.0, 4.0, -1.0, -6.0, 8.0, -2.0, -12.0, 16.0, -4.0]),
        rows(3, &[2.0, -3.0, 1.0, 6.0, -9.0, 3.0, 18.0, -27.0, 9.0]) / 2.0,
    ];
    for (i, want) in residues.iter().enumerate() {
        w.see(format!("R{}", i + 1), rel(&es.residues[i], want));
        let direct =
            residue_companion(c(i as f64 + 1.0), &es.poly, &tol()).map_err(|e| e.to_string())?;
        w.see(format!("R{} direct", i + 1), rel(&direct, want));
    }
    verdict(&[&w], vec![])
}

fn criterion_3() -> Outcome {
    let es = cubic();
    let inv = inverse_eigenparts(&es).map_err(|e| e.to_string())?;
    let pairs = inverse_pair_parts(&es).map_err(|e| e.to_string())?;
    let mut w = Worst::new(1e-10);
    let total = rows(3, &[11.0, 0.0, 1.0, 0.0, 10.0, 0.0, 1.0, 0.0, 1.0]) * -12.0;
    w.see("P^-1", rel(&inv.symmetrized.sum(), &total));
    let eig = [
        rows(3, &[-36.0, 0.0, -6.0, 0.0, 25.0, 0.0, -6.0, 0.0, -1.0]) * 12.0,
        rows(3, &[9.0, 0.0, 3.0, 0.0, -16.0, 0.0, 3.0, 0.0, 1.0]) * 60.0,
        rows(3, &[-4.0, 0.0, -2.0, 0.0, 9.0, 0.0, -2.0, 0.0, -1.0]) * 60.0,
    ];
    for (j, want) in eig.iter().enumerate() {
        w.see(
            format!("P~{}^-C", j + 1),
            rel(inv.symmetrized.eigen(j), want),
        );
    }
    let p11 = rows(3, &[36.0, -30.0, 6.0, -30.0, 25.0, -5.0, 6.0, -5.0, 1.0]) * -72.0;
    let p12 = rows(3, &[36.0, -39.0, 9.0, -39.0, 40.0, -9.0, 9.0, -9.0, 2.0]) * 120.0;
    let p22 = rows(3, &[9.0, -12.0, 3.0, -12.0, 16.0, -4.0, 3.0, -4.0, 1.0]) * -900.0;
    let p23 = rows(3, &[12.0, -17.0, 5.0, -17.0, 24.0, -7.0, 5.0, -7.0, 2.0]) * 360.0;
    let p33 = rows(3, &[4.0, -6.0, 2.0, -6.0, 9.0, -3.0, 2.0, -3.0, 1.0]) * -600.0;
    for ((i, j), want) in [
        ((0, 0), &p11),
        ((0, 1), &p12),
        ((1, 0), &p12),
        ((1, 1), &p22),
        ((1, 2), &p23),
        ((2, 1), &p23),
        ((2, 2), &p33),
    ] {
        w.see(
            format!("P{}{}^-C", i + 1, j + 1),
            rel(pairs.symmetrized.pair(i, j), want),
        );
    }
    // the (1,3) pair is not printed; its column sums pin it down
    let cols = pairs.symmetrized.column_sums().map_err(|e| e.to_string())?;
    for (j, want) in eig.iter().enumerate() {
        w.see(format!("column {}", j + 1), rel(cols.eigen(j), want));
    }
    w.see("pair sum", rel(&pairs.symmetrized.sum(), &total));

    let gram = infinite_subgramians(&es).map_err(|e| e.to_string())?;
    let rep =
        orthogonality_certificate(&gram.raw, &inv.raw, &es.residues).map_err(|e| e.to_string())?;
    let mut orth = Worst::new(1e-10);
    orth.see("P^_i P^_j^-C off-diagonal", rep.max_off_diagonal);
    orth.see("P^_i P^_i^-C − R_i", rep.max_violation);

    let cr = build_companion(&es.poly);
    let b = DVector::from_column_slice(cr.b.as_slice());
    let mut ric = Worst::new(1e-9);
    ric.see("Riccati residual", residual_riccati(&cr.a, &b, &total));
    verdict(&[&w, &orth, &ric], vec![])
}

fn criterion_4() -> Outcome {
    let es = cubic();
    let gram = infinite_subgramians(&es).map_err(|e| e.to_string())?;
    let inv = inverse_eigenparts(&es).map_err(|e| e.to_string())?;
    let mut w = Worst::new(1e-10);
    let raw_gram = [
        rows(3, &[-1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0]) / 48.0,
        rows(3, &[1.0, -2.0, 4.0, 2.0, -4.0, 8.0, 4.0, -8.0, 16.0]) / 60.0,
        rows(3, &[-1.0, 3.0, -9.0, -3.0, 9.0, -27.0, -9.0, 27.0, -81.0]) / 240.0,
    ];
    let raw_inv = [
        rows(3, &[-36.0, 30.0, -6.0, -30.0, 25.0, -5.0, -6.0, 5.0, -1.0]) * 12.0,
        rows(3, &[9.0, -12.0, 3.0, 12.0, -16.0, 4.0, 3.0, -4.0, 1.0]) * 60.0,
        rows(3, &[-4.0, 6.0, -2.0, -6.0, 9.0, -3.0, -2.0, 3.0, -1.0]) * 60.0,
    ];
    for i in 0..3 {
        w.see(format!("P^{}", i + 1), rel(gram.raw.eigen(i), &raw_gram[i]));
        w.see(
            format!("P^{}^-C", i + 1),
            rel(inv.raw.eigen(i), &raw_inv[i]),
        );
    }
    // the identity is checked in double-double; at t = 5 the Gramian's condition
    // number is past 1e12 and f64 rounding of either factor alone exceeds 1e-6
    let mut prod = Worst::new(1e-6);
    let mut extra = Vec::new();
    let id = CMatrix::identity(3, 3);
    for t in [0.1, 1.0, 5.0] {
        let zero = InitialCondition::zero(3);
        prod.see(
            format!("t = {t}"),
            finite_inverse_defect(&es, &zero, t).map_err(|e| format!("t = {t}: {e}"))?,
        );
        match finite_inverse(&es, &zero, t, &tol()) {
            Ok((state, fin)) => {
                let p = complexify(&gramian_sum(&es, Some(t)).map_err(|e| e.to_string())?);
                extra.push(format!(
                    "f64 product at t = {t}: {:.1e} (cond {:.1e})",
                    (fin.raw.sum() * &p - &id).norm(),
                    state.condition
                ));
            }
            Err(e) => extra.push(format!("f64 path at t = {t}: {e}")),
        }
    }
    verdict(&[&w, &prod], extra)
}

fn criterion_5() -> Outcome {
    let t = tol();
    let chains =
        jordan_chains_companion(&quintic_spec(), &quintic(), &t).map_err(|e| e.to_string())?;
    let mut w = Worst::new(1e-8);
    let m = rows(
        5,
        &[
            1.0, 1.0, 1.0, 0.5, 0.25, //
            1.0, 2.0, 2.0, 2.0, 1.0, //
            1.0, 3.0, 4.0, 6.0, 4.0, //
            1.0, 4.0, 8.0, 16.0, 14.0, //
            1.0, 5.0, 16.0, 40.0, 44.0,
        ],
    );
    let m_inv = rows(
        5,
        &[
            -8.0, 28.0, -30.0, 13.0, -2.0, //
            -8.0, 20.0, -18.0, 7.0, -1.0, //
            22.0, -62.5, 63.0, -26.5, 4.0, //
            -12.0, 35.0, -36.5, 16.0, -2.5, //
            4.0, -12.0, 13.0, -6.0, 1.0,
        ],
    );
    w.see("M", rel(&chains.m, &m));
    w.see("M^-1", rel(&chains.m_inv, &m_inv));
    w.see(
        "T1",
        rel(
            &chains.blocks[0].toeplitz,
            &rows(2, &[108.0, 0.0, 324.0, 108.0]),
        ),
    );
    w.see(
        "H1",
        rel(&chains.blocks[0].hankel, &rows(2, &[-2.0, -1.0, -1.0, 0.0])),
    );
    w.see(
        "T2",
        rel(
            &chains.blocks[1].toeplitz,
            &rows(
                3,
                &[576.0, 0.0, 0.0, 1104.0, 576.0, 0.0, 1012.0, 1104.0, 576.0],
            ),
        ),
    );
    w.see(
        "H2",
        rel(
            &chains.blocks[1].hankel,
            &rows(3, &[4.0, -2.5, 1.0, -2.5, 1.0, 0.0, 1.0, 0.0, 0.0]),
        ),
    );

    let gram = multiple_eig_companion(&chains).map_err(|e| e.to_string())?;
    let p1 = rows(
        5,
        &[
            1.0, 0.0, 3.0, 0.0, 5.0, //
            0.0, -3.0, 0.0, -5.0, 0.0, //
            3.0, 0.0, 5.0, 0.0, 7.0, //
            0.0, -5.0, 0.0, -7.0, 0.0, //
            5.0, 0.0, 7.0, 0.0, 9.0,
        ],
    ) / 108.0;
    let p2 = rows(
        5,
        &[
            -169.0, 0.0, -372.0, 0.0, -656.0, //
            0.0, 372.0, 0.0, 656.0, 0.0, //
            -372.0, 0.0, -656.0, 0.0, -832.0, //
            0.0, 656.0, 0.0, 832.0, 0.0, //
            -656.0, 0.0, -832.0, 0.0, -2304.0,
        ],
    ) / (128.0 * 108.0);
    // printed without the common factor and with +1152 in the corner; the two
    // sub-Gramians above and the Lyapunov equation both give this matrix
    let pc = rows(
        5,
        &[
            -41.0, 0.0, 12.0, 0.0, -16.0, //
            0.0, -12.0, 0.0, 16.0, 0.0, //
            12.0, 0.0, -16.0, 0.0, 64.0, //
            0.0, 16.0, 0.0, -64.0, 0.0, //
            -16.0, 0.0, 64.0, 0.0, -1152.0,
        ],
    ) / 13824.0;
    w.see("P~1", rel(gram.symmetrized.eigen(0), &p1));
    w.see("P~2", rel(gram.symmetrized.eigen(1), &p2));
    w.see("P_C", rel(&gram.symmetrized.sum(), &pc));

    let inv = inverse_multiple_eig(&chains).map_err(|e| e.to_string())?;
    let q1 = rows(
        5,
        &[
            192.0, 0.0, 528.0, 0.0, 32.0, //
            0.0, -1520.0, 0.0, -596.0, 0.0, //
            528.0, 0.0, 1404.0, 0.0, 84.0, //
            0.0, -596.0, 0.0, -231.0, 0.0, //
            32.0, 0.0, 84.0, 0.0, 5.0,
        ],
    ) * 108.0;
    let q2 = rows(
        5,
        &[
            -5296.0, 0.0, -14356.0, 0.0, -868.0, //
            0.0, 40608.0, 0.0, 15984.0, 0.0, //
            -14356.0, 0.0, -38275.0, 0.0, -2287.0, //
            0.0, 15984.0, 0.0, 6156.0, 0.0, //
            -868.0, 0.0, -2287.0, 0.0, -139.0,
        ],
    ) * 4.0;
    w.see("P~1^-C", rel(inv.symmetrized.eigen(0), &q1));
    let mut extra = Vec::new();
    // P~2^-C as printed does not complete the inverse; report it without gating
    extra.push(format!(
        "P~2^-C deviation {:.2e}",
        rel(inv.symmetrized.eigen(1), &q2)
    ));
    let id = CMatrix::identity(5, 5);
    w.see(
        "(ΣP~^-C)·P_C − I",
        (inv.symmetrized.sum() * complexify(&pc) - id).norm(),
    );
    verdict(&[&w], extra)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(0x6a11);
    let b = SpectrumBox::default();
    let mut gram = Worst::new(1e-8);
    let mut inv = Worst::new(1e-7);
    let mut fin = Worst::new(1e-6);
    for k in 0..200 {
        let n = 2 + k % 7;
        let roots = simple_spectrum(&mut rng, n, &b);
        let p = Polynomial::from_roots(&roots).map_err(|e| e.to_string())?;
        let es = companion_eigenstructure(&p, &tol()).map_err(|e| format!("system {k}: {e}"))?;
        let cr = build_companion(&p);
        let q = cr.input_gram();
        let want = solve_lyapunov_dense(&cr.a, &q)
            .map_err(|e| e.to_string())?
            .matrix;
        let parts = infinite_subgramians(&es).map_err(|e| e.to_string())?;
        gram.see(
            format!("system {k}, n = {n}"),
            rel(&parts.symmetrized.sum(), &want),
        );
        let want_inv = want
            .clone()
            .try_inverse()
            .ok_or("oracle Gramian is singular")?;
        let got_inv = inverse_eigenparts(&es)
            .map_err(|e| e.to_string())?
            .symmetrized
            .sum();
        inv.see(format!("system {k}, n = {n}"), rel(&got_inv, &want_inv));
        for t in [0.1, 1.0] {
            let rk = integrate_lyapunov(&cr.a, &q, &DMatrix::zeros(n, n), t, 2000)
                .map_err(|e| e.to_string())?
                .matrix;
            let got = gramian_sum(&es, Some(t)).map_err(|e| e.to_string())?;
            fin.see(format!("system {k}, n = {n}, t = {t}"), rel_real(&got, &rk));
        }
    }
    let elapsed = start.elapsed();
    let out = verdict(&[&gram, &inv, &fin], vec![format!("runtime {elapsed:.2?}")]);
    match out {
        Ok(s) if elapsed < Duration::from_secs(60) => Ok(s),
        Ok(s) | Err(s) => Err(s),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = seeded(0x7a11);
    let t = tol();
    let mut w = Worst::new(1e-7);
    for k in 0..50 {
        let sys = stable_system(&mut rng, 4, 2, 0.2, 1e4).map_err(|e| e.to_string())?;
        let poly = char_poly(&sys.a).map_err(|e| e.to_string())?;
        let spec = cluster(
            &find_roots(&poly, &t).map_err(|e| e.to_string())?,
            t.cluster,
        );
        let es = EigenStructure::new(&build_companion(&poly), &spec, &t)
            .map_err(|e| format!("system {k}: {e}"))?;
        let st = SimilarityTransform::new(&sys, &poly, &t).map_err(|e| e.to_string())?;
        let parts = infinite_subgramians(&es).map_err(|e| e.to_string())?;
        let lifted = lift_to_original(&parts.symmetrized, &st).map_err(|e| e.to_string())?;
        let want = solve_lyapunov_dense(&sys.a, &sys.input_gram())
            .map_err(|e| e.to_string())?
            .matrix;
        w.see(format!("system {k}"), rel(&lifted.sum(), &want));
    }
    verdict(&[&w], vec![])
}

fn criterion_8() -> Outcome {
    let mut rng = seeded(0x8a11);
    let t = tol();
    let mut quad = Worst::new(1e-4);
    let mut closure = Worst::new(1e-9);
    let mut oracle = Worst::new(1e-7);
    for k in 0..20 {
        let n = 2 + k % 4;
        let sys = stable_system(&mut rng, n, 1, 0.2, 1e4).map_err(|e| e.to_string())?;
        let (st, cr) = to_companion(&sys, &t).map_err(|e| e.to_string())?;
        let spec = cluster(
            &find_roots(&cr.poly, &t).map_err(|e| e.to_string())?,
            t.cluster,
        );
        let es = EigenStructure::new(&cr, &spec, &t).map_err(|e| format!("system {k}: {e}"))?;
        let x0 = target(&mut rng, n);
        // the same target in companion coordinates
        let z0 = st.t_inverse(&t).map_err(|e| e.to_string())? * &x0;
        let part = energy_partition(&z0, &es).map_err(|e| e.to_string())?;
        let sig = optimal_control(&z0, &es).map_err(|e| e.to_string())?;
        let e_quad = sig.energy_by_quadrature();
        quad.see(
            format!("system {k}, n = {n}"),
            (e_quad - part.total).abs() / part.total.abs(),
        );
        closure.see(format!("system {k}, n = {n}"), part.closure_defect());
        let p = solve_lyapunov_dense(&sys.a, &sys.input_gram())
            .map_err(|e| e.to_string())?
            .matrix;
        let e_oracle = x0.dot(&(p.try_inverse().ok_or("singular Gramian")? * &x0));
        oracle.see(
            format!("system {k} vs oracle"),
            (e_oracle - part.total).abs() / part.total.abs(),
        );
    }
    verdict(&[&quad, &closure, &oracle], vec![])
}

fn criterion_9() -> Outcome {
    let mut rng = seeded(0x9a11);
    let t = tol();
    let b = SpectrumBox {
        min_separation: 0.3,
        ..Default::default()
    };
    let mut gram = Worst::new(1e-7);
    let mut inv = Worst::new(1e-7);
    let mut general = Worst::new(1e-7);
    let mut tries = 0;
    let mut done = 0;
    while done < 20 {
        tries += 1;
        let n = 2 + tries % 5;
        let spec = jordan_spectrum(&mut rng, n, 3, &b);
        if spec.is_simple() {
            continue;
        }
        done += 1;
        let p = spec.polynomial().map_err(|e| e.to_string())?;
        let chains = jordan_chains_companion(&spec, &p, &t).map_err(|e| e.to_string())?;
        let cr = build_companion(&p);
        let want = solve_lyapunov_dense(&cr.a, &cr.input_gram())
            .map_err(|e| e.to_string())?
            .matrix;
        let label = format!(
            "{:?}",
            spec.entries()
                .iter()
                .map(|e| e.multiplicity)
                .collect::<Vec<_>>()
        );
        gram.see(
            label.clone(),
            rel(
                &multiple_eig_companion(&chains)
                    .map_err(|e| e.to_string())?
                    .symmetrized
                    .sum(),
                &want,
            ),
        );
        let bm = DMatrix::from_column_slice(n, 1, cr.b.as_slice());
        let g6 = multiple_eig_gramian(&cr.a, &bm, &spec, None, &t).map_err(|e| e.to_string())?;
        general.see(label.clone(), rel(&g6.static_set().sum(), &want));
        let want_inv = want.try_inverse().ok_or("oracle Gramian is singular")?;
        inv.see(
            label,
            rel(
                &inverse_multiple_eig(&chains)
                    .map_err(|e| e.to_string())?
                    .symmetrized
                    .sum(),
                &want_inv,
            ),
        );
    }

    let mut reduce = Worst::new(1e-8);
    let mut rng = seeded(0x9a12);
    for k in 0..20 {
        let n = 2 + k % 5;
        let roots = simple_spectrum(&mut rng, n, &SpectrumBox::default());
        let p = Polynomial::from_roots(&roots).map_err(|e| e.to_string())?;
        let es = companion_eigenstructure(&p, &t).map_err(|e| e.to_string())?;
        let spec = Spectrum::simple(&es.eigenvalues).map_err(|e| e.to_string())?;
        let chains = jordan_chains_companion(&spec, &p, &t).map_err(|e| e.to_string())?;
        let simple = infinite_subgramians(&es).map_err(|e| e.to_string())?;
        let multi = multiple_eig_companion(&chains).map_err(|e| e.to_string())?;
        let simple_inv = inverse_eigenparts(&es).map_err(|e| e.to_string())?;
        let multi_inv = inverse_multiple_eig(&chains).map_err(|e| e.to_string())?;
        for i in 0..n {
            let a = simple.raw.eigen(i);
            reduce.see(
                format!("system {k}, P^{i}"),
                (multi.raw.eigen(i) - a).norm() / a.norm(),
            );
            let a = simple_inv.raw.eigen(i);
            reduce.see(
                format!("system {k}, P^{i}^-C"),
                (multi_inv.raw.eigen(i) - a).norm() / a.norm(),
            );
        }
    }
    verdict(&[&gram, &general, &inv, &reduce], vec![])
}

fn criterion_10() -> Outcome {
    let mut rng = seeded(0x10a11);
    let mut plaid = Worst::new(1e-10);
    let mut psd = Worst::new(1e-10);
    for k in 0..100 {
        let n = 1 + k % 8;
        let roots = simple_spectrum(&mut rng, n, &SpectrumBox::default());
        let p = Polynomial::from_roots(&roots).map_err(|e| e.to_string())?;
        let es = companion_eigenstructure(&p, &tol()).map_err(|e| e.to_string())?;
        let gram = infinite_subgramians(&es).map_err(|e| e.to_string())?;
        let inv = inverse_eigenparts(&es).map_err(|e| e.to_string())?;
        for (name, set) in [
            ("gramian", &gram.symmetrized),
            ("inverse", &inv.symmetrized),
        ] {
            // real eigenvalues carry the pattern alone, complex ones together with their conjugate
            for (_, m) in &set.components {
                plaid.see(
                    format!("{name} component, system {k}"),
                    plaid_zero_violation(&complexify(&real_part(m))),
                );
            }
            for (_, m, _) in set.merge_conjugates(1e-9) {
                let m = complexify(&m);
                plaid.see(
                    format!("{name} conjugate group, system {k}"),
                    plaid_zero_violation(&m),
                );
                if name == "gramian" {
                    plaid.see(
                        format!("{name} Hankel rule, system {k}"),
                        plaid_hankel_violation(&m),
                    );
                }
            }
            plaid.see(
                format!("{name} sum, system {k}"),
                plaid_zero_violation(&set.sum()),
            );
        }
        let pairs = infinite_pair_subgramians(&es).map_err(|e| e.to_string())?;
        let inv_pairs = inverse_pair_parts(&es).map_err(|e| e.to_string())?;
        for i in 0..n {
            for (name, m) in [
                ("P_ii", pairs.symmetrized.pair(i, i)),
                ("P_ii^-C", inv_pairs.symmetrized.pair(i, i)),
            ] {
                psd.see(
                    format!("{name}, system {k}"),
                    (-min_hermitian_eigenvalue(m)).max(0.0) / m.norm().max(1.0),
                );
            }
        }
    }

    let mut ops = Vec::new();
    for n in [4usize, 8, 16, 32, 64] {
        let roots = simple_spectrum(&mut seeded(n as u64), n, &SpectrumBox::default());
        let p = Polynomial::from_roots(&roots).map_err(|e| e.to_string())?;
        ops.push((n, inverse_eigenpart_counted(&p, roots[0]).1));
    }
    let per_n2 = ops
        .iter()
        .map(|&(n, k)| k as f64 / (n * n) as f64)
        .fold(0.0, f64::max);
    let growth = ops
        .windows(2)
        .map(|w| w[1].1 as f64 / w[0].1 as f64)
        .fold(0.0, f64::max);
    let mut cost = Worst::new(4.5);
    cost.see("op count ratio per doubling of n", growth);
    verdict(
        &[&plaid, &psd, &cost],
        vec![format!("max ops/n² {per_n2:.2}")],
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("cubic fixture: sub-Gramians and pair parts", criterion_1),
        (
            "cubic fixture: finite pair expansion and residues",
            criterion_2,
        ),
        (
            "cubic fixture: inverse parts and orthogonality",
            criterion_3,
        ),
        (
            "cubic fixture: raw parts and finite inverse products",
            criterion_4,
        ),
        (
            "repeated-root fixture: chains, Gramian and inverse",
            criterion_5,
        ),
        ("random companion systems vs oracles", criterion_6),
        ("multi-input lifting vs oracle", criterion_7),
        ("energy partition and quadrature", criterion_8),
        ("multiple-eigenvalue path", criterion_9),
        ("structural properties", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let out = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
