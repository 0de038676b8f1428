use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmrl_core::env::{ActionId, EnvConfig, EnvState, Tabletop, TaskMode, Vec2};

fn env(slip_std: f64) -> Tabletop {
    Tabletop::new(EnvConfig {
        slip_std,
        ..EnvConfig::default()
    })
    .unwrap()
}

fn random_action(rng: &mut impl Rng) -> ActionId {
    ActionId::ALL[rng.random_range(0..ActionId::COUNT)]
}

/// Fraction of uniform-random rollouts that succeed within one phase.
fn random_success_rate(e: &Tabletop, object: impl Fn(&mut ChaCha8Rng) -> Vec2, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = 0;
    for _ in 0..trials {
        let mut s = e.reset_full(&mut rng);
        s.object = object(&mut rng);
        let goal = e.sample_goal(TaskMode::Train, &mut rng, s.object);
        for _ in 0..e.config().max_phase_steps {
            if e.step(&mut s, random_action(&mut rng), goal, &mut rng).success {
                wins += 1;
                break;
            }
        }
    }
    wins as f64 / trials as f64
}

#[test]
fn edge_objects_are_harder_for_a_random_policy() {
    let e = env(0.02);
    let center = random_success_rate(&e, |r| Vec2::new(r.random_range(0.4..0.6), r.random_range(0.4..0.6)), 1500, 1);
    let edge = random_success_rate(
        &e,
        |r| {
            let t = r.random_range(0.0..1.0);
            let d = r.random_range(0.0..0.05);
            match r.random_range(0..4) {
                0 => Vec2::new(d, t),
                1 => Vec2::new(1.0 - d, t),
                2 => Vec2::new(t, d),
                _ => Vec2::new(t, 1.0 - d),
            }
        },
        1500,
        2,
    );
    // Two-proportion z-test at roughly 3 sigma.
    let pooled = (center + edge) / 2.0;
    let se = (2.0 * pooled * (1.0 - pooled) / 1500.0).sqrt();
    eprintln!("random-policy success: center {center}, edge {edge}");
    assert!(center - edge > 3.0 * se, "center {center} edge {edge}");
}

#[test]
fn reset_objects_vary_across_seeds() {
    let e = env(0.02);
    let objects: Vec<Vec2> = (0..100)
        .map(|seed| e.reset_full(&mut ChaCha8Rng::seed_from_u64(seed)).object)
        .collect();
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            assert_ne!(a, b);
        }
    }
}

fn gutter_state(rng: &mut ChaCha8Rng, e: &Tabletop) -> EnvState {
    let y = rng.random_range(0.2..0.8);
    let mut s = e.reset_full(rng);
    s.gripper = Vec2::new(0.96, y);
    s.object = Vec2::new(0.99, y);
    let r = e.step(&mut s, ActionId::MoveXPlus, Vec2::new(0.5, 0.5), rng);
    assert!(r.gt_irreversible && s.in_gutter);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gutter_is_absorbing(seed in any::<u64>(), steps in 1usize..400) {
        let e = env(0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = gutter_state(&mut rng, &e);
        let frozen = s.object;
        for _ in 0..steps {
            let r = e.step(&mut s, random_action(&mut rng), Vec2::new(0.5, 0.5), &mut rng);
            prop_assert!(s.in_gutter && r.gt_irreversible && !s.holding && !r.success);
            prop_assert_eq!(s.object, frozen);
        }
    }

    #[test]
    fn noiseless_env_is_deterministic(seed in any::<u64>(), actions in prop::collection::vec(0usize..6, 1..300)) {
        let e = env(0.0);
        let run = |rng_seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = e.reset_full(&mut rng);
            // A different stream after the reset must not matter once slip is off.
            let mut other = ChaCha8Rng::seed_from_u64(rng_seed);
            let rewards: Vec<f64> = actions
                .iter()
                .map(|&a| e.step(&mut s, ActionId::ALL[a], Vec2::new(0.3, 0.6), &mut other).reward)
                .collect();
            (s, rewards)
        };
        prop_assert_eq!(run(1), run(2));
    }

    #[test]
    fn state_invariants_hold(seed in any::<u64>(), steps in 1usize..500) {
        let e = env(0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = e.reset_full(&mut rng);
        let goal = e.sample_goal(TaskMode::PosOod, &mut rng, s.object);
        for _ in 0..steps {
            e.step(&mut s, random_action(&mut rng), goal, &mut rng);
            prop_assert!((0.0..=1.0).contains(&s.gripper.x) && (0.0..=1.0).contains(&s.gripper.y));
            if s.holding {
                prop_assert_eq!(s.object, s.gripper);
            }
            if s.in_gutter {
                prop_assert!(!s.holding);
                let o = s.object;
                prop_assert!(o.x < 0.0 || o.x > 1.0 || o.y < 0.0 || o.y > 1.0);
            }
            prop_assert!(e.observation(&s, goal).iter().all(|v| v.is_finite()));
        }
    }
}
