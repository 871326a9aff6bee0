//! Cross-module invariants over random boxes, fields and couplings.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use z2gauge::forms::{set_boundary, wilson};
use z2gauge::oracle::wilson_expectation;
use z2gauge::samplers::{apply_coupling, lift_parity, uniform_subsurface, Configuration, CouplingStep};
use z2gauge::{BitVec, CellComplex, CouplingParams, GaugeField, Loop, TwoFormZ2};

fn boxes() -> impl Strategy<Value = CellComplex> {
    prop_oneof![
        Just(vec![2, 2, 1]),
        Just(vec![3, 2, 1]),
        Just(vec![2, 2, 2]),
        Just(vec![3, 3, 2]),
        Just(vec![3, 2, 2]),
    ]
    .prop_map(|e| CellComplex::new(3, &e).unwrap())
}

fn bits(len: usize, seed: u64) -> BitVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BitVec::from_bools(&(0..len).map(|_| rand::Rng::random_bool(&mut rng, 0.5)).collect::<Vec<_>>())
}

/// Boundary of a random plaquette set: always a closed loop.
fn random_loop(cx: &CellComplex, seed: u64) -> Loop {
    set_boundary(cx, &TwoFormZ2(bits(cx.num_plaquettes(), seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wilson_loops_are_gauge_invariant(cx in boxes(), s in any::<u64>(), l in any::<u64>(), g in any::<u64>()) {
        let sigma = GaugeField(bits(cx.num_edges(), s));
        let lambda = bits(cx.num_vertices(), l);
        let gamma = random_loop(&cx, g);
        let moved = sigma.gauge_transform(&cx, &lambda);
        prop_assert_eq!(wilson(&cx, &sigma, &gamma).unwrap(), wilson(&cx, &moved, &gamma).unwrap());
    }

    #[test]
    fn subsurfaces_bound_the_loop(cx in boxes(), seed in any::<u64>()) {
        let all = TwoFormZ2::full(&cx);
        let gamma = random_loop(&cx, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let sub = uniform_subsurface(&cx, &all, &gamma, &mut rng).unwrap();
        let bd = set_boundary(&cx, &sub);
        prop_assert_eq!(bd.support(), gamma.support());
    }

    #[test]
    fn lift_then_parity_is_identity(cx in boxes(), seed in any::<u64>(), beta in 0.01f64..2.0) {
        let eta = TwoFormZ2(bits(cx.num_plaquettes(), seed));
        let params = CouplingParams::uniform(beta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(lift_parity(&eta, &params, &mut rng).unwrap().parity(), eta);
    }

    #[test]
    fn union_steps_only_add_plaquettes(cx in boxes(), seed in any::<u64>(), beta in 0.01f64..2.0) {
        let params = CouplingParams::uniform(beta).unwrap();
        let eta = TwoFormZ2(bits(cx.num_plaquettes(), seed));
        let gamma = set_boundary(&cx, &eta);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for step in [CouplingStep::HatFromHt, CouplingStep::ClusterFromHt] {
            let out = apply_coupling(&cx, step, &Configuration::HighTemperature(eta.clone()), &gamma, &params, &mut rng).unwrap();
            prop_assert!(eta.0.is_subset(out.plaquettes().unwrap().bits()));
        }
    }

    #[test]
    fn wilson_expectations_lie_in_unit_interval(seed in any::<u64>(), beta in 0.0f64..1.5) {
        let cx = CellComplex::new(3, &[2, 2, 2]).unwrap();
        let gamma = random_loop(&cx, seed);
        let w = wilson_expectation(&cx, &gamma, &CouplingParams::uniform(beta).unwrap()).unwrap().to_f64();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&w), "{w}");
        if gamma.is_empty() {
            prop_assert!((w - 1.0).abs() < 1e-12);
        }
    }
}
