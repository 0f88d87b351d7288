use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uqcm_core::algorithms::{program_decode, program_encode, qsvt_oracle, PhaseSequence};
use uqcm_core::circuit::{circuit_unitary, simulate};
use uqcm_core::codes::PauliString;
use uqcm_core::linalg::{self, max_abs, random_unitary};
use uqcm_core::mbqc::{compile_1q_gate, prepare_resource, run_pattern, Branch};
use uqcm_core::tensor::{bond_entanglement, mps_contract, state_to_mps};
use uqcm_core::{Circuit, Gate, GateKind, KrausChannel, PureState};

fn circuit_from(seed: u64, n: usize, depth: usize) -> Circuit {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        let g = match rng.random_range(0..4) {
            0 => Gate::h(rng.random_range(0..n)),
            1 => Gate::t(rng.random_range(0..n)),
            2 if n > 1 => {
                let a = rng.random_range(0..n);
                let b = (a + 1 + rng.random_range(0..n - 1)) % n;
                Gate::new(GateKind::CNOT, vec![a, b]).unwrap()
            }
            _ => Gate::new(GateKind::Custom(random_unitary(2, &mut rng)), vec![rng.random_range(0..n)]).unwrap(),
        };
        c.push(g).unwrap();
    }
    c
}

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n), 0u8..4)
        .prop_map(|(x, z, p)| PauliString::new(x, z, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulate_matches_unitary(seed in any::<u64>(), n in 1usize..=4, depth in 0usize..=20) {
        let c = circuit_from(seed, n, depth);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let psi = PureState::random(vec![2; n], &mut rng);
        let a = simulate(&c, &psi).unwrap();
        let b = circuit_unitary(&c).unwrap().apply_to(&psi).unwrap();
        prop_assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-10);
        prop_assert!((a.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concatenation_is_a_homomorphism(s1 in any::<u64>(), s2 in any::<u64>(), n in 1usize..=3) {
        let a = circuit_from(s1, n, 6);
        let b = circuit_from(s2, n, 6);
        let ab = circuit_unitary(&a.then(&b).unwrap()).unwrap();
        let prod = circuit_unitary(&b).unwrap().matrix() * circuit_unitary(&a).unwrap().matrix();
        prop_assert!(max_abs(&(ab.matrix() - prod)) < 1e-10);
    }

    #[test]
    fn mps_round_trip_and_entropy_bound(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = PureState::random(vec![2; n], &mut rng);
        let m = state_to_mps(&s, usize::MAX, 0.0).unwrap();
        prop_assert!(mps_contract(&m).unwrap().fidelity(&s) >= 1.0 - 1e-10);
        let bonds = m.bond_dims();
        for cut in 1..n {
            let e = bond_entanglement(&m, cut).unwrap();
            prop_assert!(e <= (bonds[cut] as f64).log2() + 1e-9);
        }
    }

    #[test]
    fn pauli_algebra_matches_matrices(a in pauli(3), b in pauli(3)) {
        let prod = a.mul(&b).unwrap();
        prop_assert!(max_abs(&(prod.to_matrix() - a.to_matrix() * b.to_matrix())) < 1e-12);
        let ab = a.to_matrix() * b.to_matrix();
        let ba = b.to_matrix() * a.to_matrix();
        prop_assert_eq!(a.commutes(&b), max_abs(&(ab - ba)) < 1e-12);
    }

    #[test]
    fn depolarizing_preserves_trace(p in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = PureState::random(vec![2], &mut rng).density();
        let out = KrausChannel::depolarizing(p).unwrap().apply(&rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn compiled_pattern_equals_gate(seed in any::<u64>(), branch in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(2, &mut rng);
        let psi = PureState::random(vec![2], &mut rng);
        let p = compile_1q_gate(&u).unwrap();
        let resource = prepare_resource(&p.graph, &p.inputs, &psi).unwrap();
        let run = run_pattern(&resource, &p, &Branch::Seeded(branch)).unwrap();
        let expected = psi.apply_matrix(&u, &[0]).unwrap();
        prop_assert!(run.corrected().unwrap().fidelity(&expected) >= 1.0 - 1e-9);
    }

    #[test]
    fn oracle_stays_bounded(phases in prop::collection::vec(-3.2f64..3.2, 0..8), s in 0.0f64..=1.0) {
        let p = qsvt_oracle(s, &PhaseSequence::new(phases).unwrap());
        prop_assert!(p.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn program_round_trip(kinds in prop::collection::vec((0u8..3, 0usize..4), 0..16)) {
        let mut c = Circuit::new(4);
        for (k, w) in kinds {
            let g = match k {
                0 => Gate::h(w),
                1 => Gate::t(w),
                _ => Gate::cz(w, (w + 1) % 4).unwrap(),
            };
            c.push(g).unwrap();
        }
        prop_assert_eq!(program_decode(&program_encode(&c).unwrap()).unwrap(), c);
    }
}

#[test]
fn interpolation_linearity() {
    use uqcm_core::aqc::{interpolate, AdiabaticPath};
    use uqcm_core::qca::transverse_field_ising;
    let h0 = transverse_field_ising(3, 0.0, 1.0);
    let hf = transverse_field_ising(3, 1.0, 0.2);
    let path = AdiabaticPath::linear(h0.clone(), hf.clone()).unwrap();
    let (a, b) = (h0.to_matrix().unwrap(), hf.to_matrix().unwrap());
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let got = interpolate(&path, s).unwrap().to_matrix().unwrap();
        let expected = &a * linalg::c(1.0 - s, 0.0) + &b * linalg::c(s, 0.0);
        assert!(linalg::spectral_norm(&(got - expected)) <= 1e-12);
    }
}
