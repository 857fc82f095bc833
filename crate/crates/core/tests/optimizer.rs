mod common;

use common::*;
use esla::data::{gen_boolean, BooleanEncoding, BooleanProblem};
use esla::netcore::{Activation, Network, Topology};
use esla::optim::{
    apply_update, rprop_adapt, stepsize_floor, train, Algorithm, OptimizerConfig, OptimizerState,
    RpropVariant,
};
use proptest::prelude::*;

fn xor_net(seed: u64) -> Network {
    let topology = Topology::parse("2-2-1", Activation::Tansig).unwrap();
    Network::init_weights(topology, seed, 0.5).unwrap()
}

fn fixed_epochs(algorithm: Algorithm, epochs: u64) -> OptimizerConfig {
    OptimizerConfig {
        algorithm,
        q: 2.1,
        max_epochs: epochs,
        error_target: f64::NEG_INFINITY,
        record_weights: true,
        ..OptimizerConfig::default()
    }
}

#[test]
fn esla_without_noise_or_floor_is_rprop() {
    let data = gen_boolean(BooleanProblem::Xor, BooleanEncoding::Bipolar);
    for seed in 0..10 {
        let net = xor_net(seed);
        let rprop = fixed_epochs(Algorithm::Rprop, 100);
        let esla = OptimizerConfig {
            mu_prime: 0.0,
            floor: false,
            ..fixed_epochs(Algorithm::Esla, 100)
        };
        let (a, ra) = train(&net, &data, &rprop, seed).unwrap();
        let (b, rb) = train(&net, &data, &esla, seed).unwrap();
        assert_eq!(a.params(), b.params(), "seed {seed}");
        assert_eq!(ra.weight_trace, rb.weight_trace, "seed {seed}");
        assert_eq!(ra.energy_trace, rb.energy_trace);
    }
}

#[test]
fn hls_and_esla_share_their_first_epoch() {
    let data = gen_boolean(BooleanProblem::Parity3, BooleanEncoding::Bipolar);
    let topology = Topology::parse("3-3-1", Activation::Tansig).unwrap();
    for seed in 0..10 {
        let net = Network::init_weights(topology.clone(), seed, 0.5).unwrap();
        let (a, _) = train(&net, &data, &fixed_epochs(Algorithm::Hls, 1), seed).unwrap();
        let (b, _) = train(&net, &data, &fixed_epochs(Algorithm::Esla, 1), seed).unwrap();
        assert_eq!(a.params(), b.params());
        let (a2, _) = train(&net, &data, &fixed_epochs(Algorithm::Hls, 3), seed).unwrap();
        let (b2, _) = train(&net, &data, &fixed_epochs(Algorithm::Esla, 3), seed).unwrap();
        assert_ne!(a2.params(), b2.params());
    }
}

#[test]
fn training_is_a_pure_function_of_its_inputs() {
    let data = gen_boolean(BooleanProblem::Xor, BooleanEncoding::Bipolar);
    for alg in Algorithm::ALL {
        let cfg = fixed_epochs(alg, 60);
        let a = train(&xor_net(5), &data, &cfg, 5).unwrap();
        let b = train(&xor_net(5), &data, &cfg, 5).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn convergence_is_checked_before_each_update() {
    let data = gen_boolean(BooleanProblem::Xor, BooleanEncoding::Bipolar);
    let net = xor_net(1);
    let e0 = net.energy(&data).unwrap();
    let cfg = OptimizerConfig {
        error_target: e0,
        ..OptimizerConfig::default()
    };
    let (trained, report) = train(&net, &data, &cfg, 1).unwrap();
    assert!(report.converged);
    assert_eq!(report.epochs_run, 1);
    assert_eq!(trained.params(), net.params());
}

#[test]
fn backtracking_reverts_a_flipped_step() {
    let cfg = OptimizerConfig {
        variant: RpropVariant::Backtracking,
        ..OptimizerConfig::default()
    };
    let mut state = OptimizerState::new(1, &cfg, 0);
    let mut w = vec![1.0];
    rprop_adapt(&mut state, &[2.0], &cfg);
    apply_update(&mut w, &mut state, &[2.0], &cfg);
    assert_eq!(w, vec![0.9]);
    rprop_adapt(&mut state, &[-1.0], &cfg);
    apply_update(&mut w, &mut state, &[-1.0], &cfg);
    assert_eq!(w, vec![1.0]);
    assert_eq!(state.eta, vec![0.05]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stepsizes_stay_within_bounds(
        seed in any::<u64>(),
        grads in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 6), 1..40),
        noise in 0.0f64..1.0,
        floor in any::<bool>(),
    ) {
        let cfg = OptimizerConfig {
            delta_max: 2.0,
            delta_min: 1e-4,
            floor,
            ..OptimizerConfig::default()
        };
        let mut state = OptimizerState::new(6, &cfg, seed);
        let mut w = vec![0.0; 6];
        for g in &grads {
            rprop_adapt(&mut state, g, &cfg);
            if cfg.floor {
                stepsize_floor(&mut state, &cfg, noise);
            }
            apply_update(&mut w, &mut state, g, &cfg);
            for &eta in &state.eta {
                prop_assert!(eta >= cfg.delta_min && eta <= cfg.delta_max);
            }
        }
    }

    #[test]
    fn floor_only_raises_small_stepsizes(seed in any::<u64>(), etas in proptest::collection::vec(1e-6f64..1.0, 1..20), noise in 0.0f64..1.0) {
        let cfg = OptimizerConfig::default();
        let mut state = OptimizerState::new(etas.len(), &cfg, seed);
        state.eta = etas.clone();
        stepsize_floor(&mut state, &cfg, noise);
        let threshold = cfg.rho * noise * noise;
        for (before, after) in etas.iter().zip(&state.eta) {
            if *before >= threshold {
                prop_assert_eq!(before, after);
            } else {
                prop_assert!(*after >= before * cfg.eta_minus);
                prop_assert!(*after <= before * cfg.eta_minus + 2.0 * threshold);
            }
        }
    }

    #[test]
    fn noisy_training_stays_finite(seed in 0u64..1000, q in 1.05f64..2.5, alg in 0usize..3) {
        let data = gen_boolean(BooleanProblem::Xor, BooleanEncoding::Bipolar);
        let cfg = OptimizerConfig { q, ..fixed_epochs(Algorithm::ALL[alg], 50) };
        let (net, report) = train(&xor_net(seed), &data, &cfg, seed).unwrap();
        prop_assert!(report.abort.is_none());
        prop_assert!(net.params().iter().all(|p| p.is_finite()));
        prop_assert_eq!(report.energy_trace.len(), 50);
    }
}

#[test]
fn random_networks_reduce_energy_under_rprop() {
    let mut r = rng(3);
    for topology in topologies() {
        let data = random_dataset(&topology, 10, &mut r);
        let net = random_network(&topology, &mut r, 0.5);
        let cfg = OptimizerConfig {
            max_epochs: 200,
            error_target: f64::NEG_INFINITY,
            ..OptimizerConfig::default().with_algorithm(Algorithm::Rprop)
        };
        let (trained, _) = train(&net, &data, &cfg, 0).unwrap();
        assert!(trained.energy(&data).unwrap() < net.energy(&data).unwrap());
    }
}
