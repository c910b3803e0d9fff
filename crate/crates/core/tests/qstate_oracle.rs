//! Cross-checks of the measurement routines against a dense operator oracle:
//! full `2^n x 2^n` tensor products of the equatorial observables and of
//! their eigenprojectors, applied by plain matrix-vector arithmetic.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use svqkd::qstate::{
    correlator, ghz_state, joint_outcome_probs, werner_state, DensityMatrix, MeasurementSetting,
    StateVector,
};
use svqkd::svetlichny::{probability_form_from_settings, protocol_settings, si_probability_value};
use svqkd::QUANTUM_BOUND;

type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `cos θ σx + sin θ σy`.
fn observable(theta: f64) -> Matrix {
    vec![
        vec![c(0.0, 0.0), c(theta.cos(), -theta.sin())],
        vec![c(theta.cos(), theta.sin()), c(0.0, 0.0)],
    ]
}

/// `(I ± O)/2` for outcome bit 0 (+) or 1 (-).
fn projector(theta: f64, bit: u8) -> Matrix {
    let o = observable(theta);
    let s = if bit == 0 { 0.5 } else { -0.5 };
    (0..2)
        .map(|r| {
            (0..2)
                .map(|col| {
                    let id = if r == col { 0.5 } else { 0.0 };
                    c(id, 0.0) + o[r][col] * s
                })
                .collect()
        })
        .collect()
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn kron_all(factors: &[Matrix]) -> Matrix {
    factors[1..].iter().fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

fn expectation_pure(psi: &[Complex64], m: &Matrix) -> f64 {
    let mut total = c(0.0, 0.0);
    for (r, row) in m.iter().enumerate() {
        let mv: Complex64 = row.iter().zip(psi).map(|(a, b)| a * b).sum();
        total += psi[r].conj() * mv;
    }
    total.re
}

fn expectation_mixed(rho: &DensityMatrix, m: &Matrix) -> f64 {
    let dim = rho.dim();
    let mut total = c(0.0, 0.0);
    for (k, row) in m.iter().enumerate().take(dim) {
        for (r, &op) in row.iter().enumerate().take(dim) {
            total += rho.entry(r, k) * op;
        }
    }
    total.re
}

fn settings(angles: &[f64]) -> Vec<MeasurementSetting> {
    angles.iter().copied().map(MeasurementSetting::new).collect()
}

fn dense_correlator(psi: &[Complex64], angles: &[f64]) -> f64 {
    let ops: Vec<Matrix> = angles.iter().map(|&t| observable(t)).collect();
    expectation_pure(psi, &kron_all(&ops))
}

fn dense_probs(psi: &[Complex64], angles: &[f64]) -> Vec<f64> {
    let n = angles.len();
    (0..1usize << n)
        .map(|idx| {
            let ops: Vec<Matrix> = (0..n)
                .map(|i| projector(angles[i], ((idx >> (n - 1 - i)) & 1) as u8))
                .collect();
            expectation_pure(psi, &kron_all(&ops))
        })
        .collect()
}

#[test]
fn ghz4_yyxx_eigenvalue() {
    let s = ghz_state(4).unwrap();
    let angles = [FRAC_PI_2, FRAC_PI_2, 0.0, 0.0];
    let oracle = dense_correlator(s.amplitudes(), &angles);
    assert!((oracle + 1.0).abs() < 1e-12);
    assert!((correlator(&s, &settings(&angles)).unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn ghz3_reference_correlators() {
    let s = ghz_state(3).unwrap();
    let angles = [FRAC_PI_4, FRAC_PI_2, FRAC_PI_2];
    let expected = (5.0 * PI / 4.0).cos();
    assert!((dense_correlator(s.amplitudes(), &angles) - expected).abs() < 1e-12);
    assert!((correlator(&s, &settings(&angles)).unwrap() - expected).abs() < 1e-12);

    let probs = dense_probs(s.amplitudes(), &[-FRAC_PI_4, 0.0, 0.0]);
    let even: f64 = probs
        .iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() % 2 == 0)
        .map(|(_, p)| p)
        .sum();
    let table = joint_outcome_probs(&s, &settings(&[-FRAC_PI_4, 0.0, 0.0])).unwrap();
    assert!((even - 0.853_553_390_593_273_7).abs() < 1e-12);
    assert!((table.parity_prob(0) - even).abs() < 1e-12);
}

#[test]
fn werner_purity_matches_matrix_arithmetic() {
    let rho = werner_state(0.5).unwrap();
    assert!((rho.trace() - 1.0).abs() < 1e-12);
    // explicit Tr(ρ·ρ) by matrix multiplication
    let dim = rho.dim();
    let mut tr = c(0.0, 0.0);
    for r in 0..dim {
        for k in 0..dim {
            tr += rho.entry(r, k) * rho.entry(k, r);
        }
    }
    let v = 0.5f64;
    let expected = v * v * (1.0 - 1.0 / 8.0) + 1.0 / 8.0;
    assert!((tr.re - expected).abs() < 1e-12);
    assert!((rho.purity() - expected).abs() < 1e-12);
    assert!(rho.min_eigenvalue() >= -1e-10);
}

#[test]
fn werner_correlators_against_trace_oracle() {
    for v in [0.0, 0.4, 0.9] {
        let rho = werner_state(v).unwrap();
        for angles in [[0.3, -1.2, 2.0], [FRAC_PI_4, 0.0, FRAC_PI_2], [0.0; 3]] {
            let ops: Vec<Matrix> = angles.iter().map(|&t| observable(t)).collect();
            let oracle = expectation_mixed(&rho, &kron_all(&ops));
            let got = correlator(&rho, &settings(&angles)).unwrap();
            assert!((oracle - got).abs() < 1e-12);
            let ghz = correlator(&ghz_state(3).unwrap(), &settings(&angles)).unwrap();
            assert!((got - v * ghz).abs() < 1e-12);
        }
    }
}

#[test]
fn werner_protocol_model() {
    for v in [0.2, 0.75, 1.0] {
        let rho = werner_state(v).unwrap();
        let model = probability_form_from_settings(&rho, &protocol_settings(3)).unwrap();
        let expected = v * QUANTUM_BOUND + (1.0 - v) / 2.0;
        assert!(model.is_isotropic());
        for p in model.entries() {
            assert!((p - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn generalized_protocol_reaches_bound_for_larger_n() {
    for n in 3..=6 {
        let s = ghz_state(n).unwrap();
        let model = probability_form_from_settings(&s, &protocol_settings(n)).unwrap();
        assert!(model.is_isotropic(), "n={n}");
        for p in model.entries() {
            assert!((p - QUANTUM_BOUND).abs() < 1e-10, "n={n}");
        }
        assert!((si_probability_value(&model).value - QUANTUM_BOUND).abs() < 1e-10);
    }
    // projector oracle at n = 4, 5
    for n in [4usize, 5] {
        let s = ghz_state(n).unwrap();
        let pairs = protocol_settings(n);
        for x in 0..1u32 << n {
            let angles: Vec<f64> = (0..n)
                .map(|i| pairs[i][((x >> (n - 1 - i)) & 1) as usize].angle())
                .collect();
            let k = x.count_ones();
            let target = ((k * k.saturating_sub(1) / 2) & 1) as usize;
            let probs = dense_probs(s.amplitudes(), &angles);
            let success: f64 = probs
                .iter()
                .enumerate()
                .filter(|(i, _)| (i.count_ones() as usize & 1) == target)
                .map(|(_, p)| p)
                .sum();
            assert!((success - QUANTUM_BOUND).abs() < 1e-10);
        }
    }
}

fn random_product_state(params: &[(f64, f64)]) -> StateVector {
    let mut amps = vec![c(1.0, 0.0)];
    for &(theta, phi) in params {
        let q = [c((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)];
        amps = amps
            .iter()
            .flat_map(|a| [a * q[0], a * q[1]])
            .collect();
    }
    StateVector::new(params.len(), amps).unwrap()
}

proptest! {
    #[test]
    fn ghz_correlator_is_cos_of_angle_sum(angles in prop::collection::vec(-PI..PI, 2..=6)) {
        let n = angles.len();
        let s = ghz_state(n).unwrap();
        let expected = angles.iter().sum::<f64>().cos();
        let got = correlator(&s, &settings(&angles)).unwrap();
        prop_assert!((got - expected).abs() < 1e-10);
        prop_assert!((dense_correlator(s.amplitudes(), &angles) - expected).abs() < 1e-10);
    }

    #[test]
    fn ghz_tables_normalized_with_uniform_marginals(angles in prop::collection::vec(-PI..PI, 2..=6)) {
        let n = angles.len();
        let s = ghz_state(n).unwrap();
        let t = joint_outcome_probs(&s, &settings(&angles)).unwrap();
        prop_assert!(t.probs().iter().all(|&p| p >= 0.0));
        prop_assert!((t.total() - 1.0).abs() < 1e-12);
        for party in 0..n {
            prop_assert!((t.marginal_zero(party) - 0.5).abs() < 1e-10);
        }
        let oracle = dense_probs(s.amplitudes(), &angles);
        for (a, b) in t.probs().iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn werner_correlator_linear_in_visibility(
        angles in prop::collection::vec(-PI..PI, 3),
        v1 in 0.0f64..=1.0,
        v2 in 0.0f64..=1.0,
    ) {
        let set = settings(&angles);
        let e1 = correlator(&werner_state(v1).unwrap(), &set).unwrap();
        let e2 = correlator(&werner_state(v2).unwrap(), &set).unwrap();
        let ghz = correlator(&ghz_state(3).unwrap(), &set).unwrap();
        prop_assert!((e1 - v1 * ghz).abs() < 1e-12);
        prop_assert!((e2 - v2 * ghz).abs() < 1e-12);
        let t = joint_outcome_probs(&werner_state(v1).unwrap(), &set).unwrap();
        prop_assert!(t.probs().iter().all(|&p| p >= 0.0));
        prop_assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_states_respect_deterministic_bound(
        params in prop::collection::vec((0.0..PI, -PI..PI), 3..=4),
        angles in prop::collection::vec((-PI..PI, -PI..PI), 4),
    ) {
        let n = params.len();
        let s = random_product_state(&params);
        let pairs: Vec<[MeasurementSetting; 2]> = angles[..n]
            .iter()
            .map(|&(a, b)| [MeasurementSetting::new(a), MeasurementSetting::new(b)])
            .collect();
        let model = probability_form_from_settings(&s, &pairs).unwrap();
        let prob_value = si_probability_value(&model).value;
        // back to correlator form: S = 2^{n+1} (P - 1/2)
        let s_value = (prob_value - 0.5) * f64::from(1u32 << (n + 1));
        let bound = svqkd::svetlichny::deterministic_bound(n).unwrap();
        prop_assert!(s_value.abs() <= bound + 1e-9);
    }
}
