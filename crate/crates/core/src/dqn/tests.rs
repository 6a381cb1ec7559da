use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::agent::{Experience, ObservationVector};
use crate::error::Error;

fn arch(dueling: bool, noisy: bool) -> Architecture {
    Architecture {
        inputs: 5,
        hidden: vec![6, 4],
        outputs: 3,
        dueling,
        noisy,
    }
}

fn random_input(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn linear_forward_by_hand() {
    let layer = Linear::from_parts(2, vec![1.0, 2.0], vec![0.5]);
    assert_eq!(layer.forward(&[1.0, 1.0]), vec![3.5]);
}

#[test]
fn dueling_subtracts_mean_advantage() {
    assert_eq!(dueling_combine(2.0, &[-1.0, 1.0]), vec![1.0, 3.0]);
}

#[test]
fn zero_weights_give_zero_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut net = QNetwork::new(&arch(false, false), &mut rng);
    for p in net.params_mut() {
        p.fill(0.0);
    }
    assert_eq!(net.forward(&[1.0; 5]).unwrap(), vec![0.0; 3]);
}

#[test]
fn wrong_input_length_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let net = QNetwork::new(&arch(false, false), &mut rng);
    assert!(matches!(
        net.forward(&[0.0; 4]),
        Err(Error::ShapeMismatch {
            expected: 5,
            actual: 4
        })
    ));
}

fn loss_of(
    net: &QNetwork,
    inputs: &[Vec<f64>],
    actions: &[usize],
    targets: &[f64],
    weights: &[f64],
) -> f64 {
    let batch: Vec<LossSample<'_>> = (0..inputs.len())
        .map(|i| LossSample {
            input: &inputs[i],
            action: actions[i],
            target: targets[i],
            weight: weights[i],
        })
        .collect();
    net.loss_and_gradient(&batch).unwrap().loss
}

/// Central finite differences over every parameter.
fn check_gradient(dueling: bool, noisy: bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut net = QNetwork::new(&arch(dueling, noisy), &mut rng);
    net.resample_noise(&mut rng);
    let inputs: Vec<Vec<f64>> = (0..4).map(|_| random_input(&mut rng, 5)).collect();
    let actions = [0, 2, 1, 2];
    // Targets both near and far from the outputs exercise both Huber branches.
    let targets = [0.3, -2.5, 4.0, 0.1];
    let weights = [1.0, 0.5, 0.25, 0.8];
    let batch: Vec<LossSample<'_>> = (0..4)
        .map(|i| LossSample {
            input: &inputs[i],
            action: actions[i],
            target: targets[i],
            weight: weights[i],
        })
        .collect();
    let analytic = net.loss_and_gradient(&batch).unwrap().grads;
    let h = 1e-5;
    let names = net.param_names();
    for (p, name) in names.iter().enumerate() {
        for (k, &a) in analytic[p].iter().enumerate() {
            let mut plus = net.clone();
            plus.params_mut()[p][k] += h;
            let mut minus = net.clone();
            minus.params_mut()[p][k] -= h;
            let numeric = (loss_of(&plus, &inputs, &actions, &targets, &weights)
                - loss_of(&minus, &inputs, &actions, &targets, &weights))
                / (2.0 * h);
            let err = (numeric - a).abs();
            assert!(err < 1e-4, "{name}[{k}]: numeric {numeric}, analytic {a}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences_plain() {
    check_gradient(false, false);
}

#[test]
fn gradient_matches_finite_differences_dueling() {
    check_gradient(true, false);
}

#[test]
fn gradient_matches_finite_differences_noisy_dueling() {
    check_gradient(true, true);
}

#[test]
fn gradient_matches_finite_differences_noisy_plain() {
    check_gradient(false, true);
}

#[test]
fn zero_loss_gives_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = QNetwork::new(&arch(false, false), &mut rng);
    let x = random_input(&mut rng, 5);
    let q = net.forward(&x).unwrap();
    let g = net
        .loss_and_gradient(&[LossSample {
            input: &x,
            action: 1,
            target: q[1],
            weight: 1.0,
        }])
        .unwrap();
    assert_eq!(g.loss, 0.0);
    assert!(g.grads.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn huber_branches() {
    assert_eq!(huber(0.5), 0.125);
    assert_eq!(huber(-3.0), 2.5);
    assert_eq!(huber_grad(0.5), 0.5);
    assert_eq!(huber_grad(-3.0), -1.0);
}

#[test]
fn double_q_target_by_hand() {
    let t = ddqn_targets(
        &[1.0, 1.0],
        &[false, true],
        &[vec![0.5, 0.9], vec![0.5, 0.9]],
        &[vec![0.7, 0.2], vec![0.7, 0.2]],
        0.99,
        true,
    );
    assert!((t[0] - 1.198).abs() < 1e-12);
    assert_eq!(t[1], 1.0);
    let t = ddqn_targets(
        &[1.0],
        &[false],
        &[vec![0.5, 0.9]],
        &[vec![0.7, 0.2]],
        0.0,
        true,
    );
    assert_eq!(t, vec![1.0]);
}

#[test]
fn single_network_target_is_the_max() {
    let q = vec![vec![0.5, 0.9, -0.2]];
    let double = ddqn_targets(&[0.3], &[false], &q, &q, 0.9, true);
    let plain = ddqn_targets(&[0.3], &[false], &[], &q, 0.9, false);
    assert!((double[0] - (0.3 + 0.9 * 0.9)).abs() < 1e-12);
    assert_eq!(double, plain);
}

#[test]
fn full_exploration_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = [0usize; 3];
    let n = 30_000;
    for _ in 0..n {
        counts[select_action(&[5.0, 0.0, 0.0], 1.0, &mut rng)] += 1;
    }
    for c in counts {
        assert!(
            (c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.015,
            "{counts:?}"
        );
    }
}

#[test]
fn greedy_ties_pick_lowest_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(select_action(&[1.0, 1.0, 0.0], 0.0, &mut rng), 0);
    assert_eq!(select_action(&[0.0, 2.0, 2.0], 0.0, &mut rng), 1);
}

fn experience(rng: &mut impl Rng, n: usize, actions: usize) -> Experience {
    Experience {
        observation: ObservationVector(random_input(rng, n)),
        action: rng.gen_range(0..actions),
        reward: rng.gen_range(-1.0..1.0),
        next_observation: ObservationVector(random_input(rng, n)),
        done: rng.gen_bool(0.05),
    }
}

fn small_hyper() -> Hyperparams {
    Hyperparams {
        batch_size: 8,
        hidden: vec![8],
        ..Hyperparams::default()
    }
}

#[test]
fn epsilon_decays_per_decision() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut agent = DqnAgent::new(small_hyper(), 5, 3).unwrap();
    for _ in 0..100 {
        agent.train_step(experience(&mut rng, 5, 3)).unwrap();
    }
    assert!((agent.epsilon() - 0.9995f64.powi(100)).abs() < 1e-12);
    assert!((agent.epsilon() - 0.9512).abs() < 1e-4);
}

#[test]
fn epsilon_floor() {
    let hyper = Hyperparams {
        epsilon_decay: 0.5,
        ..small_hyper()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut agent = DqnAgent::new(hyper, 5, 3).unwrap();
    for _ in 0..50 {
        agent.train_step(experience(&mut rng, 5, 3)).unwrap();
    }
    assert_eq!(agent.epsilon(), 0.01);
}

#[test]
fn no_update_before_a_batch_is_stored() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut agent = DqnAgent::new(small_hyper(), 5, 3).unwrap();
    let before = agent.online().clone();
    for _ in 0..7 {
        let stats = agent.train_step(experience(&mut rng, 5, 3)).unwrap();
        assert_eq!(stats.loss, None);
    }
    assert_eq!(agent.gradient_steps(), 0);
    assert_eq!(agent.online(), &before);
    let stats = agent.train_step(experience(&mut rng, 5, 3)).unwrap();
    assert!(stats.loss.is_some());
    assert_eq!(agent.gradient_steps(), 1);
    assert_ne!(agent.online(), &before);
}

#[test]
fn updates_every_fourth_decision() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut agent = DqnAgent::new(small_hyper(), 5, 3).unwrap();
    for _ in 0..40 {
        agent.train_step(experience(&mut rng, 5, 3)).unwrap();
    }
    // Steps at decisions 8, 12, ..., 40.
    assert_eq!(agent.gradient_steps(), 9);
}

#[test]
fn target_tracks_online_every_24_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let hyper = Hyperparams {
        update_every: 1,
        ..small_hyper()
    };
    let mut agent = DqnAgent::new(hyper, 5, 3).unwrap();
    for _ in 0..8 {
        agent.train_step(experience(&mut rng, 5, 3)).unwrap();
    }
    let initial_target = agent.target().clone();
    while agent.gradient_steps() < 23 {
        agent.train_step(experience(&mut rng, 5, 3)).unwrap();
        assert_eq!(agent.target(), &initial_target);
    }
    assert_ne!(agent.online(), agent.target());
    agent.train_step(experience(&mut rng, 5, 3)).unwrap();
    assert_eq!(agent.gradient_steps(), 24);
    assert_eq!(agent.online(), agent.target());
}

#[test]
fn noisy_agent_never_explores_randomly() {
    let hyper = Hyperparams {
        noisy: true,
        ..small_hyper()
    };
    let agent = DqnAgent::new(hyper, 5, 3).unwrap();
    assert_eq!(agent.epsilon(), 0.0);
}

#[test]
fn evaluation_is_deterministic() {
    let hyper = Hyperparams {
        noisy: true,
        dueling: true,
        ..small_hyper()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut agent = DqnAgent::new(hyper, 5, 3).unwrap();
    for _ in 0..30 {
        agent.train_step(experience(&mut rng, 5, 3)).unwrap();
    }
    agent.set_training(false);
    let x = random_input(&mut rng, 5);
    let first = agent.choose(&x).unwrap();
    for _ in 0..20 {
        assert_eq!(agent.choose(&x).unwrap(), first);
    }
}

#[test]
fn training_improves_fit_on_a_bandit() {
    // One-step episodes: the optimal Q-value is the reward itself.
    let hyper = Hyperparams {
        batch_size: 16,
        update_every: 1,
        learning_rate: 5e-3,
        hidden: vec![16],
        ..Hyperparams::default()
    };
    let mut agent = DqnAgent::new(hyper, 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3000 {
        let s = rng.gen_range(0..2);
        let obs = if s == 0 {
            vec![1.0, 0.0]
        } else {
            vec![0.0, 1.0]
        };
        let action = rng.gen_range(0..2);
        let reward = if action == s { 1.0 } else { -1.0 };
        agent
            .train_step(Experience {
                observation: ObservationVector(obs.clone()),
                action,
                reward,
                next_observation: ObservationVector(obs),
                done: true,
            })
            .unwrap();
    }
    let q0 = agent.q_values(&[1.0, 0.0]).unwrap();
    let q1 = agent.q_values(&[0.0, 1.0]).unwrap();
    assert!(
        (q0[0] - 1.0).abs() < 0.1 && (q0[1] + 1.0).abs() < 0.1,
        "{q0:?}"
    );
    assert!(
        (q1[1] - 1.0).abs() < 0.1 && (q1[0] + 1.0).abs() < 0.1,
        "{q1:?}"
    );
}

fn trained_checkpoint(noisy: bool) -> Checkpoint {
    let hyper = Hyperparams {
        noisy,
        dueling: noisy,
        ..small_hyper()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agent = DqnAgent::new(hyper.clone(), 5, 3).unwrap();
    for _ in 0..40 {
        agent.train_step(experience(&mut rng, 5, 3)).unwrap();
    }
    agent.set_training(false);
    Checkpoint {
        hyperparams: hyper,
        config_hash: "abc123".into(),
        observation_len: 5,
        actions: 3,
        network: agent.online().clone(),
    }
}

#[test]
fn checkpoint_round_trip_preserves_actions() {
    for noisy in [false, true] {
        let original = trained_checkpoint(noisy);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/model.ckpt");
        original.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(loaded.hyperparams, original.hyperparams);
        assert_eq!(loaded.config_hash, "abc123");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = random_input(&mut rng, 5);
            let a = original.network.forward(&x).unwrap();
            let b = loaded.network.forward(&x).unwrap();
            assert_eq!(a, b);
            assert_eq!(argmax(&a), argmax(&b));
        }
    }
}

#[test]
fn truncated_checkpoint_is_corrupt() {
    let text = trained_checkpoint(false).to_text();
    for cut in [text.len() / 3, text.len() - 10, 20] {
        assert!(matches!(
            Checkpoint::from_text(&text[..cut]),
            Err(Error::CorruptCheckpoint(_))
        ));
    }
}

#[test]
fn other_version_is_rejected() {
    let text = trained_checkpoint(false).to_text();
    let bumped = text.replacen(
        &format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}"),
        &format!("{CHECKPOINT_MAGIC} {}", CHECKPOINT_VERSION + 1),
        1,
    );
    assert!(matches!(
        Checkpoint::from_text(&bumped),
        Err(Error::CheckpointVersion {
            found: 2,
            expected: 1
        })
    ));
}

#[test]
fn uniform_priorities_sample_uniformly() {
    // α = 0 flattens any priorities; chi-square over 10 slots, 9 dof.
    let mut memory = ReplayMemory::prioritized(10, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..10 {
        let slot = memory.push(experience(&mut rng, 2, 2));
        memory.set_priority(slot, (i + 1) as f64);
    }
    let n = 20_000;
    let mut counts = [0usize; 10];
    let sample = memory.sample(n, 1.0, &mut rng);
    for i in sample.indices {
        counts[i] += 1;
    }
    let expected = n as f64 / 10.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 99.9th percentile of chi-square with 9 degrees of freedom.
    assert!(chi2 < 27.88, "chi2 = {chi2}, counts {counts:?}");
    assert!(sample.weights.iter().all(|&w| (w - 1.0).abs() < 1e-12));
}
