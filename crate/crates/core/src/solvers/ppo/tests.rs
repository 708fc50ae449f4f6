use super::*;
use crate::instance::{generate_instance, SeedSet};

fn micro_batch(model: &ActorCritic, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_actions = model.n_actions();
    (0..6)
        .map(|k| {
            let obs: Vec<f64> = (0..model.obs_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut mask: Vec<bool> = (0..n_actions).map(|_| rng.gen_bool(0.7)).collect();
            let action = k % n_actions;
            mask[action] = true;
            let p = masked_softmax(&model.logits(&obs), Some(&mask));
            Sample {
                obs,
                mask: Some(mask),
                action,
                old_log_prob: p[action].ln(),
                advantage: rng.gen_range(-2.0..2.0),
                ret: rng.gen_range(-1.0..1.0),
            }
        })
        .collect()
}

#[test]
fn disabled_actions_get_zero_probability() {
    let logits = [3.0, -1.0, 0.5, 10.0];
    let mask = [true, false, true, false];
    let p = masked_softmax(&logits, Some(&mask));
    assert_eq!(p[1], 0.0);
    assert_eq!(p[3], 0.0);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn argmax_is_shift_invariant() {
    let model = ActorCritic::new(5, 4, 8, 2);
    let obs = [0.1, 0.2, -0.3, 0.5, 0.0];
    let mask = [true, true, false, true];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let a = model.act(&obs, Some(&mask), true, &mut rng).unwrap();
    let mut shifted = model.clone();
    let last = shifted.actor.layers.len() - 1;
    shifted.actor.layers[last].bias.iter_mut().for_each(|b| *b += 7.5);
    assert_eq!(shifted.act(&obs, Some(&mask), true, &mut rng).unwrap(), a);
    assert_eq!(model.act(&obs, Some(&mask), true, &mut rng).unwrap(), a);
    assert!(mask[a]);
    let single = [false, false, true, false];
    for _ in 0..20 {
        assert_eq!(model.act(&obs, Some(&single), false, &mut rng).unwrap(), 2);
    }
    assert!(matches!(
        model.act(&obs, Some(&[false; 4]), false, &mut rng),
        Err(PpoError::EmptyMask)
    ));
}

#[test]
fn ratio_one_reduces_clip_term_to_mean_advantage() {
    let model = ActorCritic::new(4, 3, 6, 1);
    let batch = micro_batch(&model, 9);
    let cfg = PpoConfig::default();
    let parts = ppo_loss(&model, &batch, &cfg, None);
    let mean_adv = batch.iter().map(|s| s.advantage).sum::<f64>() / batch.len() as f64;
    assert!((parts.policy + mean_adv).abs() < 1e-12);
    assert!(parts.approx_kl.abs() < 1e-12);
}

#[test]
fn loss_gradient_matches_finite_differences() {
    let model = ActorCritic::new(4, 3, 5, 11);
    let batch = micro_batch(&model, 5);
    // Move away from the old policy so some ratios leave the clip range.
    let mut moved = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    moved.actor.for_each_param_mut(|_, p| *p += rng.gen_range(-0.4..0.4));
    let cfg = PpoConfig {
        entropy_coef: 0.05,
        clip: 0.2,
        ..PpoConfig::default()
    };
    let mut ga = moved.actor.zeros_like();
    let mut gc = moved.critic.zeros_like();
    ppo_loss(&moved, &batch, &cfg, Some((&mut ga, &mut gc)));
    let h = 1e-6;
    let check = |analytic: Vec<f64>, which: u8| {
        for (i, a) in analytic.iter().enumerate() {
            let eval = |delta: f64| {
                let mut m = moved.clone();
                let net = if which == 0 { &mut m.actor } else { &mut m.critic };
                net.for_each_param_mut(|k, p| {
                    if k == i {
                        *p += delta
                    }
                });
                ppo_loss(&m, &batch, &cfg, None).total
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-7);
            assert!(rel < 1e-4, "net {which} param {i}: analytic {a} numeric {numeric}");
        }
    };
    check(ga.params(), 0);
    check(gc.params(), 1);
}

#[test]
fn checkpoint_round_trip() {
    let model = ActorCritic::new(7, 3, 4, 3);
    let ck = Checkpoint::new(model, PpoConfig::default(), EnvConfig::default());
    let back = Checkpoint::from_json(&ck.to_json()).unwrap();
    assert_eq!(back, ck);
    let mut tampered = ck.clone();
    tampered.version = 99;
    assert!(Checkpoint::from_json(&tampered.to_json()).is_err());
}

#[test]
fn short_training_run_is_deterministic_and_masked() {
    let mut inst = generate_instance(3, 3, 2, &SeedSet::BENCHMARK).unwrap();
    inst.n_agvs = 2;
    let proto = Env::new(&inst, EnvConfig::default()).unwrap();
    let cfg = PpoConfig {
        total_steps: 600,
        rollout_len: 200,
        hidden: 16,
        epochs: 2,
        ..PpoConfig::default()
    };
    let run = || {
        let mut make = |_: &mut ChaCha8Rng| Ok(proto.clone());
        ppo_train(&mut make, &cfg, None).unwrap()
    };
    let (m1, l1) = run();
    let (m2, l2) = run();
    assert_eq!(m1, m2);
    assert_eq!(l1.episode_rewards, l2.episode_rewards);
    assert_eq!(l1.updates.len(), 3);
    assert!(!l1.episode_makespans.is_empty());
    assert!(l1.updates.iter().all(|u| u.loss.is_finite()));
}
