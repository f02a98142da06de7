use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use randpf::hamiltonian::{Axis, PauliString};
use randpf::linalg::{herm_exp, spectral_norm};
use randpf::rng::rng_from_seed;
use randpf::schedule::{materialize, suzuki_p, FormulaSchedule};
use randpf::{Hamiltonian, Matrix};

fn random_hermitian(dim: usize, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    let a = Matrix::from_fn(dim, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let sum = &a + &a.adjoint();
    sum.scale(Complex64::new(0.5, 0.0))
}

fn identity_perm(l: usize) -> Vec<usize> {
    (1..=l).collect()
}

#[test]
fn suzuki_coefficients() {
    let p2 = suzuki_p(2);
    assert!((p2 - 1.0 / (4.0 - 4f64.powf(1.0 / 3.0))).abs() < 1e-15);
    assert!((4.0 * p2 + (1.0 - 4.0 * p2) - 1.0).abs() < 1e-15);
    let p3 = suzuki_p(3);
    assert!((p3 - 1.0 / (4.0 - 4f64.powf(0.2))).abs() < 1e-15);
}

#[test]
fn second_order_layout() {
    let s = FormulaSchedule::suzuki(3, 1, &[2, 3, 1]).unwrap();
    let ids: Vec<usize> = s.stages().iter().map(|st| st.term_id).collect();
    assert_eq!(ids, vec![2, 3, 1, 1, 3, 2]);
    assert!(s.stages().iter().all(|st| st.coeff == 0.5));
}

#[test]
fn csv_dump() {
    let s = FormulaSchedule::first_order(2, true).unwrap();
    assert_eq!(s.to_csv(), "position,term_id,coeff\n1,2,1.0000000000000000e0\n2,1,1.0000000000000000e0\n");
}

#[test]
fn symmetric_formulas_are_time_reversible() {
    // S_2k(λ) S_2k(−λ) = I for the symmetric Suzuki formulas.
    let terms: Vec<Matrix> = (0..3).map(|i| random_hermitian(4, 10 + i)).collect();
    let ham = Hamiltonian::from_dense_terms(terms).unwrap();
    for k in 1..=3 {
        let s = FormulaSchedule::suzuki(3, k, &identity_perm(3)).unwrap();
        let fwd = materialize(&s, &ham, Complex64::new(0.0, -0.3)).unwrap();
        let back = materialize(&s, &ham, Complex64::new(0.0, 0.3)).unwrap();
        let prod = fwd.matmul(&back).unwrap();
        assert!((&prod - &Matrix::identity(4)).max_abs() < 1e-12, "k={k}");
    }
}

#[test]
fn local_error_order() {
    // ||e^{-iδH} − S_2k(−iδ)|| = O(δ^{2k+1}); halving δ divides it by ~2^{2k+1}.
    let terms: Vec<Matrix> = (0..2).map(|i| random_hermitian(4, 40 + i)).collect();
    let ham = Hamiltonian::from_dense_terms(terms).unwrap();
    let h = ham.dense().unwrap();
    let err = |k: usize, d: f64| {
        let s = if k == 0 {
            FormulaSchedule::first_order(2, false).unwrap()
        } else {
            FormulaSchedule::suzuki(2, k, &identity_perm(2)).unwrap()
        };
        let u = materialize(&s, &ham, Complex64::new(0.0, -d)).unwrap();
        let v = herm_exp(&h, Complex64::new(0.0, -d)).unwrap();
        spectral_norm(&(&v - &u)).unwrap()
    };
    for (k, order) in [(0usize, 2.0f64), (1, 3.0), (2, 5.0)] {
        let d = if k == 2 { 0.2 } else { 0.02 };
        let ratio = err(k, d) / err(k, d / 2.0);
        let slope = ratio.log2();
        assert!((slope - order).abs() < 0.15, "k={k}: slope {slope}");
    }
}

#[test]
fn heisenberg_round_trip_and_norms() {
    let ham = Hamiltonian::heisenberg(5, 1.0, 77).unwrap();
    assert_eq!(ham.len(), 20);
    let back = Hamiltonian::from_json(&ham.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), ham.to_json().unwrap());
    assert!((ham.lambda_max() - 1.0).abs() < 1e-15);
    let big = Hamiltonian::heisenberg(4, 10.0, 3).unwrap();
    let fields: Vec<f64> = big.terms()[12..].iter().map(|t| t.coefficient().abs()).collect();
    let max = fields.iter().copied().fold(1.0, f64::max);
    assert!((big.lambda_max() - max).abs() < 1e-12);
}

#[test]
fn dense_body_matches_pauli_body() {
    let zz = PauliString::new([(1, Axis::Z), (2, Axis::Z)]).unwrap();
    let xx = PauliString::new([(1, Axis::X), (2, Axis::X)]).unwrap();
    let pauli = Hamiltonian::from_pauli_terms(2, vec![(zz.clone(), 0.7), (xx.clone(), -0.4)]).unwrap();
    let dense = Hamiltonian::from_dense_terms(vec![
        zz.matrix::<f64>(2).unwrap().scale(Complex64::new(0.7, 0.0)),
        xx.matrix::<f64>(2).unwrap().scale(Complex64::new(-0.4, 0.0)),
    ])
    .unwrap();
    let s = FormulaSchedule::suzuki(2, 2, &[1, 2]).unwrap();
    let lambda = Complex64::new(0.0, -0.9);
    let a = materialize(&s, &pauli, lambda).unwrap();
    let b = materialize(&s, &dense, lambda).unwrap();
    assert!((&a - &b).max_abs() < 1e-12);
}

fn perm_strategy(max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..=max_len).prop_flat_map(|l| Just((1..=l).collect::<Vec<_>>()).prop_shuffle())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn suzuki_stage_counts_and_weights(sigma in perm_strategy(7), k in 1usize..4) {
        let l = sigma.len();
        let s = FormulaSchedule::suzuki(l, k, &sigma).unwrap();
        prop_assert_eq!(s.stages().len(), 2 * l * 5usize.pow(k as u32 - 1));
        prop_assert_eq!(s.rows(), 2 * 5usize.pow(k as u32 - 1));
        for w in s.coefficient_sums() {
            prop_assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn relabelling_composes(sigma in perm_strategy(6), k in 1usize..3) {
        let l = sigma.len();
        let id = identity_perm(l);
        let direct = FormulaSchedule::suzuki(l, k, &sigma).unwrap();
        let relabelled = FormulaSchedule::suzuki(l, k, &id).unwrap().relabel(&sigma).unwrap();
        prop_assert_eq!(direct.stages(), relabelled.stages());
    }

    #[test]
    fn reversing_twice_is_identity(sigma in perm_strategy(6)) {
        let s = FormulaSchedule::first_order_permuted(&sigma).unwrap();
        prop_assert_eq!(s.reversed_stages().reversed_stages(), s);
    }

    #[test]
    fn pauli_hamiltonian_json_round_trip(
        terms in prop::collection::vec(
            (prop::collection::btree_map(1usize..5, 0u8..3, 1..4), -2.0f64..2.0),
            1..6,
        )
    ) {
        let terms: Vec<(PauliString, f64)> = terms
            .into_iter()
            .map(|(m, c)| {
                let axes = m.into_iter().map(|(site, a)| (site, [Axis::X, Axis::Y, Axis::Z][a as usize]));
                (PauliString::new(axes).unwrap(), c)
            })
            .collect();
        let ham = Hamiltonian::from_pauli_terms(4, terms).unwrap();
        let json = ham.to_json().unwrap();
        let back = Hamiltonian::from_json(&json).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), json);
        let a = ham.dense().unwrap();
        let b = back.dense().unwrap();
        prop_assert!((&a - &b).max_abs() == 0.0);
        prop_assert!(a.hermitian_deviation() < 1e-14);
    }

    #[test]
    fn products_are_unitary(seed in 0u64..1000, k in 0usize..3, step in -1.0f64..1.0) {
        let terms: Vec<Matrix> = (0..3).map(|i| random_hermitian(4, seed * 7 + i)).collect();
        let ham = Hamiltonian::from_dense_terms(terms).unwrap();
        let s = if k == 0 {
            FormulaSchedule::first_order(3, false).unwrap()
        } else {
            FormulaSchedule::suzuki(3, k, &identity_perm(3)).unwrap()
        };
        let u = materialize(&s, &ham, Complex64::new(0.0, -step)).unwrap();
        let g = u.adjoint().matmul(&u).unwrap();
        prop_assert!((&g - &Matrix::identity(4)).max_abs() < 1e-12);
    }
}
