use gramspec_oracle::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Companion matrix for `sⁿ + a_{n−1}sⁿ⁻¹ + … + a_0`, `a` ascending without the leading 1.
fn companion(a: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == n {
            -a[j]
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    })
}

fn en(n: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    b
}

fn rows(n: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v)
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

fn cubic() -> DMatrix<f64> {
    companion(&[-6.0, 11.0, -6.0])
}

#[test]
fn kron_reproduces_cubic_fixture() {
    let a = cubic();
    let r = solve_lyapunov_dense(&a, &(en(3) * en(3).transpose())).unwrap();
    let want = rows(3, &[1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 11.0]) * (-1.0 / 120.0);
    assert!(rel(&r.matrix, &want) < 1e-10);
    assert!(r.residual < 1e-12);
}

#[test]
fn kron_inverse_matches_closed_form() {
    let r = solve_lyapunov_dense(&cubic(), &(en(3) * en(3).transpose())).unwrap();
    let inv = r.matrix.try_inverse().unwrap();
    let want = rows(3, &[11.0, 0.0, 1.0, 0.0, 10.0, 0.0, 1.0, 0.0, 1.0]) * -12.0;
    assert!(rel(&inv, &want) < 1e-10);
    let b = DVector::from_column_slice(en(3).as_slice());
    assert!(residual_riccati(&cubic(), &b, &want) < 1e-9);
}

#[test]
fn kron_reproduces_repeated_root_fixture() {
    // (s − 1)²(s − 2)³
    let a = companion(&[-8.0, 28.0, -38.0, 25.0, -8.0]);
    let r = solve_lyapunov_dense(&a, &(en(5) * en(5).transpose())).unwrap();
    let want = rows(
        5,
        &[
            -41.0, 0.0, 12.0, 0.0, -16.0, //
            0.0, -12.0, 0.0, 16.0, 0.0, //
            12.0, 0.0, -16.0, 0.0, 64.0, //
            0.0, 16.0, 0.0, -64.0, 0.0, //
            -16.0, 0.0, 64.0, 0.0, -1152.0,
        ],
    ) / 13824.0;
    assert!(rel(&r.matrix, &want) < 1e-10, "{}", r.matrix * 13824.0);
}

#[test]
fn stored_residual_recomputes() {
    let a = companion(&[6.0, 11.0, 6.0]);
    let q = en(3) * en(3).transpose();
    let r = solve_lyapunov_dense(&a, &q).unwrap();
    assert!((r.recompute_residual(&a, &q) - r.residual).abs() <= 1e-12);
    let f = integrate_lyapunov(&a, &q, &DMatrix::zeros(3, 3), 1.0, 500).unwrap();
    assert!((f.recompute_residual(&a, &q) - f.residual).abs() <= 1e-12);
    assert_eq!(f.method.as_str(), "rk4");
}

#[test]
fn quadrature_reaches_the_algebraic_solution() {
    let a = companion(&[6.0, 11.0, 6.0]);
    let q = en(3) * en(3).transpose();
    let p = solve_lyapunov_dense(&a, &q).unwrap().matrix;
    let g = gramian_quadrature(&a, &en(3), 30.0).unwrap().matrix;
    assert!(rel(&g, &p) < 1e-6);
}

#[test]
fn quadrature_and_rk4_agree_on_unstable_cubic() {
    let a = cubic();
    let q = en(3) * en(3).transpose();
    let g = gramian_quadrature(&a, &en(3), 0.5).unwrap().matrix;
    let r = integrate_lyapunov(&a, &q, &DMatrix::zeros(3, 3), 0.5, 2000)
        .unwrap()
        .matrix;
    assert!(rel(&g, &r) < 1e-6);
}

#[test]
fn exponential_matches_sylvester_expansion() {
    // e^{At} = Σ_i e^{λ_i t} Π_{j≠i} (A − λ_j I)/(λ_i − λ_j)
    let a = cubic();
    let lam = [1.0f64, 2.0, 3.0];
    let t = 0.3;
    let id = DMatrix::<f64>::identity(3, 3);
    let mut want = DMatrix::zeros(3, 3);
    for (i, &li) in lam.iter().enumerate() {
        let mut term = id.clone() * (li * t).exp();
        for (j, &lj) in lam.iter().enumerate() {
            if i != j {
                term = term * (&a - &id * lj) / (li - lj);
            }
        }
        want += term;
    }
    assert!(rel(&matrix_exp_reference(&a, t), &want) < 1e-9);
}

#[test]
fn rk4_error_drops_sixteenfold() {
    let one = |v| DMatrix::from_element(1, 1, v);
    let exact = (-2.0f64).exp();
    let err = |steps| {
        (integrate_lyapunov(&one(-1.0), &one(0.0), &one(1.0), 1.0, steps)
            .unwrap()
            .matrix[(0, 0)]
            - exact)
            .abs()
    };
    for steps in [10, 20, 40] {
        let ratio = err(steps) / err(2 * steps);
        assert!((ratio - 16.0).abs() < 1.5, "{steps}: {ratio}");
    }
    assert!(err(10_000) < 1e-10);
}

fn stable_pair() -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (1usize..=6, 1usize..=2).prop_flat_map(|(n, m)| {
        (
            proptest::collection::vec(-1.0f64..1.0, n * n),
            proptest::collection::vec(-1.0f64..1.0, n * m),
        )
            .prop_map(move |(a, b)| {
                let mut a = DMatrix::from_vec(n, n, a);
                // every eigenvalue lies in the disc of radius ‖A‖₁, so this shift
                // puts the spectrum left of −0.2
                let norm = a
                    .column_iter()
                    .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                a -= DMatrix::identity(n, n) * (norm + 0.2);
                (a, DMatrix::from_vec(n, m, b))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn two_oracles_agree((a, b) in stable_pair(), t in 0.1f64..3.0) {
        let q = &b * b.transpose();
        let n = a.nrows();
        let quad = gramian_quadrature(&a, &b, t).unwrap().matrix;
        let ode = integrate_lyapunov(&a, &q, &DMatrix::zeros(n, n), t, 4000).unwrap().matrix;
        prop_assert!((&quad - &ode).norm() <= 1e-6 * ode.norm().max(1e-12));
    }

    #[test]
    fn kron_solution_is_the_long_time_limit((a, b) in stable_pair()) {
        let q = &b * b.transpose();
        let r = solve_lyapunov_dense(&a, &q).unwrap();
        prop_assert!(r.residual <= 1e-10);
        prop_assert!(symmetry_defect(&r.matrix) <= 1e-12);
        let g = gramian_quadrature(&a, &b, 80.0).unwrap().matrix;
        prop_assert!((&g - &r.matrix).norm() <= 1e-6 * r.matrix.norm().max(1e-12));
    }

    #[test]
    fn rk4_keeps_symmetry((a, b) in stable_pair()) {
        let n = a.nrows();
        let p0 = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let r = integrate_lyapunov(&a, &(&b * b.transpose()), &p0, 1.0, 500).unwrap();
        prop_assert!(symmetry_defect(&r.matrix) <= 1e-10);
    }
}
