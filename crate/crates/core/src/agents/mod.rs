//! Agents and the loops that run them.
//!
//! Every agent answers the same question, "what next?", through [`Agent::act`].
//! Learning agents also see each transition through [`Agent::learn`].

mod baseline;
mod qlearning;
mod snapshot;

use thiserror::Error;

use crate::domain::{ActionId, Goal, State};
use crate::environment::{Backend, EnvError, Environment, EpisodeRecord, Observation, Problem};

pub use baseline::{PlanningAgent, RandomAgent};
pub use qlearning::{
    beta_schedule, bellman_update, choose_branch, select_action, Branch, Consult, LearnParams, QKey, QLearningAgent,
    QTable,
};
pub use snapshot::{AgentSnapshot, SnapshotError, SNAPSHOT_FORMAT};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("goal is unreachable from the current state")]
    Unsolvable,
    #[error("goal already holds; nothing to do")]
    GoalAlreadyReached,
    #[error("reward {0} is not finite")]
    NonFiniteReward(f64),
    #[error("invalid learning parameters: {0}")]
    InvalidParams(String),
}

/// One observed step, as handed to [`Agent::learn`].
#[derive(Debug)]
pub struct Transition<'a> {
    pub state: &'a State,
    pub goal: &'a Goal,
    pub action: ActionId,
    pub reward: f64,
    pub next: &'a Observation,
}

pub trait Agent {
    fn name(&self) -> &'static str;

    fn act(&mut self, obs: &Observation, goal: &Goal) -> Result<ActionId, AgentError>;

    fn learn(&mut self, _step: &Transition<'_>) -> Result<(), AgentError> {
        Ok(())
    }

    fn end_episode(&mut self) {}

    /// Off: greedy, no exploration, no table updates, no episode counting.
    fn set_training(&mut self, _training: bool) {}
}

/// Runs one episode until the goal holds or `max_steps` actions were taken.
pub fn run_episode<A, B>(
    agent: &mut A,
    env: &mut Environment<B>,
    problem: &Problem,
    max_steps: usize,
) -> Result<EpisodeRecord, AgentError>
where
    A: Agent + ?Sized,
    B: Backend,
{
    env.set_max_steps(max_steps);
    let mut obs = env.reset(problem)?;
    let mut record = EpisodeRecord {
        problem: problem.clone(),
        actions: Vec::new(),
        rewards: Vec::new(),
        success: obs.goal_reached,
    };
    while !obs.done {
        let action = agent.act(&obs, &problem.goal)?;
        let (next, reward) = env.step(action)?;
        agent.learn(&Transition {
            state: &obs.state,
            goal: &problem.goal,
            action,
            reward,
            next: &next,
        })?;
        record.actions.push(action);
        record.rewards.push(reward);
        obs = next;
    }
    record.success = obs.goal_reached;
    agent.end_episode();
    Ok(record)
}

/// Trains on `instances`, repeated `replays + 1` times in order, calling
/// `on_episode` with each finished episode's index and record.
pub fn train_with<A, B, F>(
    agent: &mut A,
    env: &mut Environment<B>,
    instances: &[Problem],
    replays: usize,
    mut on_episode: F,
) -> Result<Vec<EpisodeRecord>, AgentError>
where
    A: Agent + ?Sized,
    B: Backend,
    F: FnMut(usize, &EpisodeRecord),
{
    agent.set_training(true);
    let max_steps = env.max_steps();
    let mut curve = Vec::with_capacity(instances.len() * (replays + 1));
    for _ in 0..=replays {
        for problem in instances {
            let record = run_episode(agent, env, problem, max_steps)?;
            on_episode(curve.len(), &record);
            curve.push(record);
        }
    }
    Ok(curve)
}

pub fn train<A, B>(
    agent: &mut A,
    env: &mut Environment<B>,
    instances: &[Problem],
    replays: usize,
) -> Result<Vec<EpisodeRecord>, AgentError>
where
    A: Agent + ?Sized,
    B: Backend,
{
    train_with(agent, env, instances, replays, |_, _| {})
}

/// Greedy test run on a copy of the agent; the agent itself is untouched.
/// Returns `(length, success)` per problem.
pub fn evaluate<A, B>(agent: &A, env: &mut Environment<B>, problems: &[Problem]) -> Result<Vec<(usize, bool)>, AgentError>
where
    A: Agent + Clone,
    B: Backend,
{
    let mut copy = agent.clone();
    copy.set_training(false);
    let max_steps = env.max_steps();
    problems
        .iter()
        .map(|p| run_episode(&mut copy, env, p, max_steps).map(|r| (r.length(), r.success)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::World;
    use crate::environment::{GoalMix, ProblemGenerator};
    use crate::planner::plan_optimal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup(n: usize) -> (Arc<World>, Environment, Vec<Problem>) {
        let world = World::bundled();
        let env = Environment::emulated(world.clone(), 30);
        let gen = ProblemGenerator::new(world.clone(), GoalMix::default());
        let problems = gen.generate_many(&mut ChaCha8Rng::seed_from_u64(11), n).unwrap();
        (world, env, problems)
    }

    #[test]
    fn planner_episodes_are_optimal() {
        let (world, mut env, problems) = setup(40);
        let agent = PlanningAgent::new(world.clone());
        for (p, (len, ok)) in problems.iter().zip(evaluate(&agent, &mut env, &problems).unwrap()) {
            assert!(ok);
            assert_eq!(len, plan_optimal(&world, &p.start, &p.goal).unwrap().cost());
        }
    }

    #[test]
    fn random_agent_may_hit_the_cap() {
        let (world, mut env, _) = setup(0);
        let mut agent = RandomAgent::new(&world, 5);
        let p = Problem {
            start: world.state_from_true::<&str>(&[]).unwrap(),
            goal: world.goal_from(&[("open vlc file", true)]).unwrap(),
        };
        let rec = run_episode(&mut agent, &mut env, &p, 30).unwrap();
        assert!(rec.length() <= 30);
        assert_eq!(rec.length(), rec.rewards.len());
        assert!(rec.success || rec.length() == 30);
    }

    #[test]
    fn train_curve_length_and_determinism() {
        let (world, mut env, problems) = setup(10);
        let mut a = QLearningAgent::new(world.clone(), LearnParams::default(), 1).unwrap();
        let curve = train(&mut a, &mut env, &problems, 2).unwrap();
        assert_eq!(curve.len(), 30);
        assert_eq!(a.episode(), 30);
        let mut b = QLearningAgent::new(world.clone(), LearnParams::default(), 1).unwrap();
        assert_eq!(train(&mut b, &mut env, &problems, 2).unwrap(), curve);
        let mut c = QLearningAgent::new(world, LearnParams::default(), 1).unwrap();
        assert_eq!(train(&mut c, &mut env, &problems, 0).unwrap().len(), 10);
    }

    #[test]
    fn evaluate_is_idempotent_and_read_only() {
        let (world, mut env, problems) = setup(20);
        let mut agent = QLearningAgent::new(world.clone(), LearnParams::default(), 3).unwrap();
        train(&mut agent, &mut env, &problems, 1).unwrap();
        let before = agent.q_table().clone();
        let first = evaluate(&agent, &mut env, &problems).unwrap();
        assert_eq!(evaluate(&agent, &mut env, &problems).unwrap(), first);
        assert_eq!(agent.q_table(), &before);

        let random = RandomAgent::new(&world, 9);
        assert_eq!(
            evaluate(&random, &mut env, &problems).unwrap(),
            evaluate(&random, &mut env, &problems).unwrap()
        );
    }

    #[test]
    fn greedy_zero_table_walks_canonically() {
        let (world, mut env, _) = setup(0);
        let agent = QLearningAgent::new(world.clone(), LearnParams::default().greedy(), 0).unwrap();
        let p = Problem {
            start: world.state_from_true::<&str>(&[]).unwrap(),
            goal: world.goal_from(&[("open gedit file", true)]).unwrap(),
        };
        // action 0 fails forever from the empty state
        assert_eq!(evaluate(&agent, &mut env, &[p]).unwrap(), vec![(30, false)]);
    }
}
