use catswap::catbell::{BellLabels, CatLabels};
use catswap::protocol::{
    collusion_posterior, recover_first_dit_pooled, recover_second_dit, run_round, run_round_forced, Engine,
    ProtocolConfig,
};
use catswap::swapcalc::{CatFragment, Register, SwapOutcome};
use catswap::{Dimension, ParticleId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config_strategy(max_d: u32, max_n: usize) -> impl Strategy<Value = ProtocolConfig> {
    (2..=max_d, 2..=max_n, any::<u64>()).prop_map(|(d, n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ProtocolConfig::random(Dimension::new(d).unwrap(), n, seed, &mut rng).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engines_agree_on_forced_outcomes(config in config_strategy(3, 3), picks in prop::collection::vec((0i64..9, 0i64..9), 3)) {
        let outcomes: Vec<SwapOutcome> =
            picks[..config.n].iter().map(|&(k, l)| SwapOutcome::new(config.dim, k, l)).collect();
        let symbolic = run_round_forced(&config, Engine::Symbolic, &outcomes).unwrap();
        let dense = run_round_forced(&config, Engine::StateVector, &outcomes).unwrap();
        prop_assert_eq!(&symbolic.announced, &dense.announced);
        prop_assert_eq!(&symbolic.final_bells, &dense.final_bells);
        prop_assert_eq!(symbolic.key, dense.key);
    }

    #[test]
    fn every_round_recovers_the_key(config in config_strategy(16, 8)) {
        let t = run_round(&config, Engine::Symbolic).unwrap();
        prop_assert!(t.consistency_error().is_none());
        let views: Vec<_> = (2..=config.n).map(|i| t.view(i).unwrap()).collect();
        for view in &views {
            prop_assert_eq!(recover_second_dit(view), t.key.u2);
        }
        prop_assert_eq!(recover_first_dit_pooled(&views).unwrap(), t.key.u1);
    }

    #[test]
    fn any_missing_share_leaves_first_dit_uniform(config in config_strategy(7, 6), drop in any::<prop::sample::Index>()) {
        let t = run_round(&config, Engine::Symbolic).unwrap();
        let missing = 2 + drop.index(config.n - 1);
        let known: Vec<usize> = (2..=config.n).filter(|&p| p != missing).collect();
        prop_assert!(collusion_posterior(&t, &known).unwrap().is_uniform());
    }

    #[test]
    fn register_swaps_match_dense_state(d in 2u32..=3, labels in prop::collection::vec(0i64..3, 5), k in 0i64..3, l in 0i64..3) {
        let dim = Dimension::new(d).unwrap();
        let cat = CatFragment::new(
            (0..3).map(ParticleId).collect(),
            CatLabels::from_values(dim, labels[..3].iter().copied()).unwrap(),
        ).unwrap();
        let bell = CatFragment::bell(ParticleId(3), ParticleId(4), BellLabels::new(dim, labels[3], labels[4])).unwrap();
        let register = Register::new(dim, vec![cat, bell]).unwrap();
        let dense = register.to_statevector().unwrap();
        let swap = register.bell_measure(ParticleId(3), ParticleId(2), SwapOutcome::new(dim, k, l)).unwrap();
        let measured = swap.register.fragment_of(ParticleId(3)).unwrap().to_statevector().unwrap();
        let projection = dense.project_onto(&measured).unwrap();
        let expected = measured.tensor(&projection.post.unwrap()).unwrap();
        let fidelity = swap.register.to_statevector().unwrap().fidelity(&expected).unwrap();
        prop_assert!((projection.probability - 1.0 / (d * d) as f64).abs() < 1e-9);
        prop_assert!(fidelity > 1.0 - 1e-9);
    }
}

#[test]
fn label_reuse_across_rounds_keeps_working() {
    let dim = Dimension::new(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut config = ProtocolConfig::random(dim, 4, 0, &mut rng).unwrap();
    for round in 1..=50 {
        let t = run_round(&config, Engine::Symbolic).unwrap();
        assert!(t.consistency_error().is_none(), "round {round}");
        config = t.next_config(round).unwrap();
    }
}
