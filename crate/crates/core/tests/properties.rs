use std::f64::consts::PI;

use epr_core::bellspace::{bell_probabilities, singlet, singlet_along, BellOutcome};
use epr_core::ensemble::{
    ensemble_trial, sample_pair, state_select, HiddenPair, OutcomeSubmodel, SelectionConfig,
};
use epr_core::qcore::{
    apply_one_qubit, axis_state, bloch_vector, fidelity, partial_trace, tensor, Complex64,
    DensityMatrix, Gate, PureState, Sign, UnitAxis,
};
use epr_core::teleport::{bob_marginal_before_classical, outcome_law, teleport_branch};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn axis() -> impl Strategy<Value = UnitAxis> {
    (-1.0f64..=1.0, -PI..PI).prop_map(|(z, phi)| UnitAxis::from_polar(z.clamp(-1.0, 1.0).acos(), phi))
}

fn state(num_qubits: usize) -> impl Strategy<Value = PureState> {
    let dim = 1usize << num_qubits;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().map(|(r, i)| r * r + i * i).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            PureState::normalized(v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect())
                .unwrap()
        })
}

/// `e^{i g} (cos t I - i sin t n.sigma)`.
fn unitary() -> impl Strategy<Value = Gate> {
    (axis(), -PI..PI, -PI..PI).prop_map(|(n, t, g)| {
        let (s, c) = t.sin_cos();
        let i = Complex64::new(0.0, 1.0);
        let ph = Complex64::from_polar(1.0, g);
        let [x, y, z] = n.to_array();
        Gate([
            [ph * (c - i * s * z), ph * (-i * s * Complex64::new(x, -y))],
            [ph * (-i * s * Complex64::new(x, y)), ph * (c + i * s * z)],
        ])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tensor_preserves_norm(a in state(1), b in state(2)) {
        let t = tensor(&a, &b).unwrap();
        prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gates_preserve_norm(g in unitary(), s in state(3), target in 0usize..3) {
        let out = apply_one_qubit(&g, target, &s).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_states_are_density_matrices(s in state(3), keep in 0usize..3) {
        let rho = partial_trace(&s, keep).unwrap();
        prop_assert!(rho.validate().is_ok(), "{:?}", rho);
        let b = bloch_vector(&rho).unwrap();
        prop_assert!(b.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1.0 + 1e-10);
    }

    #[test]
    fn two_qubit_reductions_are_density_matrices(s in state(2), keep in 0usize..2) {
        prop_assert!(partial_trace(&s, keep).unwrap().validate().is_ok());
    }

    #[test]
    fn bell_outcome_probabilities_sum_to_one(s in state(3), pair in prop::sample::select(vec![(0usize, 1usize), (0, 2), (1, 2), (2, 0)])) {
        let p = bell_probabilities(&s, pair).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn teleportation_is_exact_on_every_branch(input in state(1)) {
        for outcome in BellOutcome::ALL {
            let t = teleport_branch(&input, outcome).unwrap();
            prop_assert!((t.fidelity_out - 1.0).abs() < 1e-12);
        }
        for p in outcome_law(&input).unwrap() {
            prop_assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn no_signalling(input in state(1)) {
        let rho = bob_marginal_before_classical(&input).unwrap();
        prop_assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(2).unwrap()) < 1e-12);
    }

    #[test]
    fn hidden_pairs_anticorrelate(seed in any::<u64>()) {
        let p = sample_pair(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(p.bob_sign(), p.alice_sign().flip());
        let a = p.axis();
        prop_assert!((a.dot(&a) - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn axis_eigenstates_are_orthogonal(n in axis()) {
        let ip = axis_state(&n, Sign::Plus).inner(&axis_state(&n, Sign::Minus)).unwrap();
        prop_assert!(ip.norm() < 1e-12);
    }

    #[test]
    fn axis_state_overlap_is_half_angle_law(a in axis(), b in axis()) {
        let f = fidelity(&axis_state(&a, Sign::Plus), &axis_state(&b, Sign::Plus)).unwrap();
        let expected = (0.5 * a.angle_to(&b)).cos().powi(2);
        prop_assert!((f - expected).abs() < 1e-10);
    }

    #[test]
    fn singlet_is_isotropic(n in axis()) {
        let s = singlet_along(&n);
        prop_assert!((fidelity(&s, &singlet()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selection_matches_angle(alice in axis(), hidden in axis(), eps in 1e-3f64..PI) {
        let cfg = SelectionConfig::new(eps, OutcomeSubmodel::Malus).unwrap();
        let pair = HiddenPair::new(hidden, Sign::Plus);
        prop_assert_eq!(state_select(&alice, &pair, &cfg), hidden.angle_to(&alice) <= eps);
    }

    #[test]
    fn ensemble_fidelity_is_half_angle_law(alice in axis(), seed in any::<u64>(), eps in 0.05f64..PI) {
        let cfg = SelectionConfig::new(eps, OutcomeSubmodel::DeterministicSign).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let t = ensemble_trial(&alice, &cfg, &mut rng);
            prop_assert_eq!(t.accepted, t.bob_state.is_some());
            if let Some(f) = t.conditional_fidelity {
                let alpha = t.hidden_axis.angle_to(&alice);
                prop_assert!((f - (0.5 * alpha).cos().powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotations_preserve_dot_products(a in axis(), b in axis(), about in axis(), angle in -PI..PI) {
        let (ra, rb) = (a.rotated(&about, angle), b.rotated(&about, angle));
        prop_assert!((a.dot(&b) - ra.dot(&rb)).abs() < 1e-12);
    }
}
