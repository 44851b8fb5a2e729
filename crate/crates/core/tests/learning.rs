use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ubuntuworld::agents::{
    bellman_update, beta_schedule, choose_branch, evaluate, train, Agent, AgentSnapshot, Branch, LearnParams,
    QKey, QLearningAgent, QTable, RandomAgent,
};
use ubuntuworld::environment::GoalMix;
use ubuntuworld::{ActionId, Environment, Goal, Problem, ProblemGenerator, State, World};

fn problems(world: &Arc<World>, n: usize, seed: u64) -> Vec<Problem> {
    ProblemGenerator::new(world.clone(), GoalMix::family_only("open"))
        .generate_many(&mut ChaCha8Rng::seed_from_u64(seed), n)
        .unwrap()
}

#[test]
fn q_values_stay_within_reward_bounds() {
    let world = World::bundled();
    let params = LearnParams::default();
    let mut agent = QLearningAgent::new(world.clone(), params, 3).unwrap();
    let mut env = Environment::emulated(world.clone(), 30);
    train(&mut agent, &mut env, &problems(&world, 300, 1), 2).unwrap();
    // the goal state is never acted from, so its values stay 0 and bound
    // everything above by the goal reward; the floor is the discounted
    // sum of the worst step reward
    let floor = -10.0 / (1.0 - params.gamma);
    for v in agent.q_table().values() {
        assert!(v.is_finite());
        assert!((floor..=95.0).contains(&v), "{v}");
    }
}

#[test]
fn random_agent_is_uniform() {
    let world = World::bundled();
    let mut env = Environment::emulated(world.clone(), 30);
    let p = &problems(&world, 1, 5)[0];
    let obs = env.reset(p).unwrap();
    let mut agent = RandomAgent::new(&world, 11);
    let n = world.actions().len();
    let draws = 1600 * n;
    let mut counts = vec![0usize; n];
    for _ in 0..draws {
        counts[agent.act(&obs, &p.goal).unwrap().0] += 1;
    }
    let expected = draws as f64 / n as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9th percentile of chi-square with 15 degrees of freedom
    assert!(chi2 < 37.70, "chi2 = {chi2}, counts = {counts:?}");
}

#[test]
fn greedy_learning_ignores_the_seed() {
    let world = World::bundled();
    let params = LearnParams { epsilon: 0.0, beta0: 0.0, ..LearnParams::default() };
    let tasks = problems(&world, 200, 8);
    let run = |seed| {
        let mut agent = QLearningAgent::new(world.clone(), params, seed).unwrap();
        let mut env = Environment::emulated(world.clone(), 30);
        let curve: Vec<usize> = train(&mut agent, &mut env, &tasks, 1).unwrap().iter().map(|r| r.length()).collect();
        let mut table: Vec<(String, String, usize, u64)> = agent
            .q_table()
            .entries()
            .into_iter()
            .map(|(k, a, v)| (k.state.to_bits(), world.describe_goal(&k.goal), a.0, v.to_bits()))
            .collect();
        table.sort();
        (curve, table)
    };
    assert_eq!(run(1), run(987_654_321));
}

#[test]
fn snapshot_resume_equals_uninterrupted_training() {
    let world = World::bundled();
    let tasks = problems(&world, 150, 4);
    let (first, second) = tasks.split_at(75);
    let mut env = Environment::emulated(world.clone(), 30);

    let mut straight = QLearningAgent::new(world.clone(), LearnParams::default(), 21).unwrap();
    train(&mut straight, &mut env, first, 0).unwrap();
    train(&mut straight, &mut env, second, 0).unwrap();

    let mut paused = QLearningAgent::new(world.clone(), LearnParams::default(), 21).unwrap();
    train(&mut paused, &mut env, first, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.json");
    paused.snapshot().save(&path).unwrap();
    let mut resumed = QLearningAgent::restore(world.clone(), &AgentSnapshot::load(&path).unwrap(), None).unwrap();
    train(&mut resumed, &mut env, second, 0).unwrap();

    assert_eq!(straight.snapshot().to_json(), resumed.snapshot().to_json());
    assert_eq!(evaluate(&straight, &mut env, &tasks).unwrap(), evaluate(&resumed, &mut env, &tasks).unwrap());
}

#[test]
fn evaluation_leaves_the_agent_untouched() {
    let world = World::bundled();
    let tasks = problems(&world, 50, 6);
    let mut env = Environment::emulated(world.clone(), 30);
    let mut agent = QLearningAgent::new(world.clone(), LearnParams::default(), 2).unwrap();
    train(&mut agent, &mut env, &tasks, 0).unwrap();
    let before = agent.snapshot().to_json();
    evaluate(&agent, &mut env, &tasks).unwrap();
    assert_eq!(agent.snapshot().to_json(), before);
}

fn key(mask: u8) -> QKey {
    let bits: String = (0..8).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect();
    QKey::new(State::from_bits(&bits).unwrap(), Goal::empty())
}

proptest! {
    #[test]
    fn bellman_matches_direct_substitution(
        q0 in -50.0f64..50.0, next_best in -50.0f64..50.0, r in -10.0f64..95.0,
        alpha in 0.01f64..1.0, gamma in 0.0f64..0.99, s in 0u8..255, a in 0usize..16,
    ) {
        let params = LearnParams { alpha, gamma, ..LearnParams::default() };
        let mut q = QTable::new(16);
        let (sk, nk) = (key(s), key(s + 1));
        q.set(&sk, ActionId(a), q0);
        q.set(&nk, ActionId(15 - a), next_best);
        let best = next_best.max(0.0);
        let got = bellman_update(&mut q, &sk, ActionId(a), r, &nk, &params).unwrap();
        let want = q0 + alpha * (r + gamma * best - q0);
        prop_assert!((got - want).abs() < 1e-9);
        prop_assert_eq!(q.get(&sk, ActionId(a)), got);
    }

    #[test]
    fn beta_stays_in_range(t in 0u64..100_000, beta0 in 0.0f64..5.0, epsilon in 0.0f64..1.0) {
        let params = LearnParams { beta0, epsilon, ..LearnParams::default() };
        let b = beta_schedule(t, &params);
        prop_assert!(b >= 0.0);
        prop_assert!(b + epsilon <= 1.0 + 1e-12);
    }

    #[test]
    fn branch_thresholds(u in 0.0f64..1.0, epsilon in 0.0f64..0.5, beta in 0.0f64..0.5, consult in prop::option::of(any::<bool>())) {
        let b = choose_branch(u, epsilon, beta, consult);
        let want = if u < epsilon {
            Branch::Random
        } else if u < epsilon + beta {
            match consult {
                None => Branch::Exploit,
                Some(true) => Branch::Recommend,
                Some(false) => Branch::Random,
            }
        } else {
            Branch::Exploit
        };
        prop_assert_eq!(b, want);
    }
}
