//! Episodic simulation of the world.
//!
//! [`Environment`] drives one episode at a time against a [`Backend`]. The
//! only shipped backend is the [`Emulator`], which executes grounded actions
//! against an in-memory state and answers with the footprint templates from
//! the domain file. Rewards follow a fixed scheme: every action costs 10, an
//! action that changes the state gets 5 back, and reaching the goal pays 100.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::domain::{ActionId, DomainError, Goal, State, World};
use crate::planner;

pub const DEFAULT_MAX_STEPS: usize = 30;

pub const STEP_REWARD: f64 = -10.0;
pub const CHANGE_BONUS: f64 = 5.0;
pub const GOAL_BONUS: f64 = 100.0;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("problem does not belong to this domain: {0}")]
    ForeignProblem(DomainError),
    #[error("unknown action #{0}")]
    UnknownAction(usize),
    #[error("episode is over; call reset first")]
    EpisodeDone,
    #[error("no episode in progress; call reset first")]
    NotStarted,
    #[error("no reachable goal is left unsatisfied by the sampled start states")]
    NoGoal,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Problem {
    pub start: State,
    pub goal: Goal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub state: State,
    /// Terminal output of the last action; empty right after reset.
    pub footprint: String,
    /// Whether the last action failed to execute.
    pub failed: bool,
    pub steps_taken: usize,
    pub done: bool,
    pub goal_reached: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            max_steps: DEFAULT_MAX_STEPS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub problem: Problem,
    pub actions: Vec<ActionId>,
    pub rewards: Vec<f64>,
    pub success: bool,
}

impl EpisodeRecord {
    pub fn length(&self) -> usize {
        self.actions.len()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// Outcome of running one action on a backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub footprint: String,
    pub ok: bool,
}

/// Where actions actually run.
pub trait Backend {
    /// Puts the backend into `state` (sets every sensed variable).
    fn set_state(&mut self, state: &State) -> Result<(), EnvError>;
    fn execute(&mut self, action: ActionId) -> Result<Execution, EnvError>;
    fn sense(&self) -> Result<State, EnvError>;
}

/// Simulation-mode backend: the domain model is the world.
#[derive(Debug, Clone)]
pub struct Emulator {
    world: Arc<World>,
    state: State,
}

impl Emulator {
    pub fn new(world: Arc<World>) -> Self {
        let state = world.initial_state();
        Emulator { world, state }
    }
}

impl Backend for Emulator {
    fn set_state(&mut self, state: &State) -> Result<(), EnvError> {
        self.world.check_state(state).map_err(EnvError::ForeignProblem)?;
        self.state = state.clone();
        Ok(())
    }

    fn execute(&mut self, action: ActionId) -> Result<Execution, EnvError> {
        if action.0 >= self.world.actions().len() {
            return Err(EnvError::UnknownAction(action.0));
        }
        let (ok, footprint) = self.world.footprint(&self.state, action);
        if ok {
            self.state = self.world.apply_effects(&self.state, action);
        }
        Ok(Execution { footprint, ok })
    }

    fn sense(&self) -> Result<State, EnvError> {
        Ok(self.state.clone())
    }
}

/// Placeholder for running actions in a real Bash shell. Not available in
/// this build; every call reports [`EnvError::BackendUnavailable`].
#[derive(Debug, Default, Clone, Copy)]
pub struct ShellBackend;

impl Backend for ShellBackend {
    fn set_state(&mut self, _state: &State) -> Result<(), EnvError> {
        Err(EnvError::BackendUnavailable("shell"))
    }

    fn execute(&mut self, _action: ActionId) -> Result<Execution, EnvError> {
        Err(EnvError::BackendUnavailable("shell"))
    }

    fn sense(&self) -> Result<State, EnvError> {
        Err(EnvError::BackendUnavailable("shell"))
    }
}

/// Reward for the transition `s --a--> s_next` under `goal`.
pub fn reward_fn(world: &World, s: &State, _a: ActionId, s_next: &State, goal: &Goal) -> f64 {
    let mut r = STEP_REWARD;
    if s_next != s {
        r += CHANGE_BONUS;
    }
    if world.satisfies(s_next, goal) {
        r += GOAL_BONUS;
    }
    r
}

#[derive(Debug)]
struct Episode {
    state: State,
    goal: Goal,
    steps: usize,
    done: bool,
    goal_reached: bool,
}

pub struct Environment<B: Backend = Emulator> {
    world: Arc<World>,
    backend: B,
    max_steps: usize,
    episode: Option<Episode>,
}

impl Environment<Emulator> {
    pub fn emulated(world: Arc<World>, max_steps: usize) -> Self {
        let backend = Emulator::new(world.clone());
        Environment::new(world, backend, max_steps)
    }
}

impl<B: Backend> Environment<B> {
    pub fn new(world: Arc<World>, backend: B, max_steps: usize) -> Self {
        assert!(max_steps >= 1, "max_steps must be at least 1");
        Environment {
            world,
            backend,
            max_steps,
            episode: None,
        }
    }

    pub fn world(&self) -> &Arc<World> {
        &self.world
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn set_max_steps(&mut self, max_steps: usize) {
        assert!(max_steps >= 1, "max_steps must be at least 1");
        self.max_steps = max_steps;
    }

    pub fn reset(&mut self, problem: &Problem) -> Result<Observation, EnvError> {
        self.world.check_state(&problem.start).map_err(EnvError::ForeignProblem)?;
        self.world.check_goal(&problem.goal).map_err(EnvError::ForeignProblem)?;
        self.backend.set_state(&problem.start)?;
        let state = self.backend.sense()?;
        let reached = self.world.satisfies(&state, &problem.goal);
        self.episode = Some(Episode {
            state: state.clone(),
            goal: problem.goal.clone(),
            steps: 0,
            done: reached,
            goal_reached: reached,
        });
        Ok(Observation {
            state,
            footprint: String::new(),
            failed: false,
            steps_taken: 0,
            done: reached,
            goal_reached: reached,
        })
    }

    pub fn step(&mut self, action: ActionId) -> Result<(Observation, f64), EnvError> {
        let max_steps = self.max_steps;
        let episode = self.episode.as_mut().ok_or(EnvError::NotStarted)?;
        if episode.done {
            return Err(EnvError::EpisodeDone);
        }
        if action.0 >= self.world.actions().len() {
            return Err(EnvError::UnknownAction(action.0));
        }
        let exec = self.backend.execute(action)?;
        let next = self.backend.sense()?;
        let reward = reward_fn(&self.world, &episode.state, action, &next, &episode.goal);
        episode.steps += 1;
        episode.goal_reached = self.world.satisfies(&next, &episode.goal);
        episode.done = episode.goal_reached || episode.steps >= max_steps;
        episode.state = next.clone();
        Ok((
            Observation {
                state: next,
                footprint: exec.footprint,
                failed: !exec.ok,
                steps_taken: episode.steps,
                done: episode.done,
                goal_reached: episode.goal_reached,
            },
            reward,
        ))
    }

    /// Overwrites the current world state, outside of any episode accounting.
    /// Models the user changing the machine behind the agent's back.
    pub fn force_state(&mut self, state: &State) -> Result<(), EnvError> {
        self.backend.set_state(state)?;
        if let Some(ep) = self.episode.as_mut() {
            ep.state = state.clone();
        }
        Ok(())
    }

    pub fn sense(&self) -> Result<State, EnvError> {
        self.backend.sense()
    }
}

/// Goal distribution for generated problems.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalMix {
    /// Predicate whose positive groundings form the main task family.
    pub family_predicate: String,
    /// Probability of drawing a task-family goal; the rest are uniform
    /// satisfiable one- or two-literal goals.
    pub family_fraction: f64,
}

impl Default for GoalMix {
    fn default() -> Self {
        GoalMix {
            family_predicate: "open".to_string(),
            family_fraction: 0.8,
        }
    }
}

impl GoalMix {
    /// Only task-family goals.
    pub fn family_only(predicate: &str) -> Self {
        GoalMix {
            family_predicate: predicate.to_string(),
            family_fraction: 1.0,
        }
    }
}

/// Draws training and test problems for a world.
#[derive(Debug, Clone)]
pub struct ProblemGenerator {
    world: Arc<World>,
    mix: GoalMix,
    reachable: Vec<State>,
    family_goals: Vec<Goal>,
    other_goals: Vec<Goal>,
}

const MAX_DRAWS: usize = 1000;

impl ProblemGenerator {
    pub fn new(world: Arc<World>, mix: GoalMix) -> Self {
        let reachable = planner::reachable_states(&world, &world.initial_state());
        let n = world.atoms().len();
        let family_goals = world
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, p)| p.name == mix.family_predicate)
            .map(|(i, _)| Goal::new(vec![(i, true)]))
            .collect();

        let satisfiable = |g: &Goal| reachable.iter().any(|s| world.satisfies(s, g));
        let mut other_goals = Vec::new();
        for i in 0..n {
            for v in [false, true] {
                let g = Goal::new(vec![(i, v)]);
                if satisfiable(&g) {
                    other_goals.push(g);
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for vi in [false, true] {
                    for vj in [false, true] {
                        let g = Goal::new(vec![(i, vi), (j, vj)]);
                        if satisfiable(&g) {
                            other_goals.push(g);
                        }
                    }
                }
            }
        }
        ProblemGenerator {
            world,
            mix,
            reachable,
            family_goals,
            other_goals,
        }
    }

    pub fn reachable_states(&self) -> &[State] {
        &self.reachable
    }

    pub fn family_goals(&self) -> &[Goal] {
        &self.family_goals
    }

    /// One problem: start uniform over reachable states, goal from the mix,
    /// never satisfied at the start and always reachable from it.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Problem, EnvError> {
        for _ in 0..MAX_DRAWS {
            let start = self.reachable.choose(rng).ok_or(EnvError::NoGoal)?;
            let use_family = rng.gen::<f64>() < self.mix.family_fraction;
            let pool = if use_family && !self.family_goals.is_empty() {
                &self.family_goals
            } else {
                &self.other_goals
            };
            let Some(goal) = pool.choose(rng) else { continue };
            if self.world.satisfies(start, goal) {
                continue;
            }
            if planner::plan_optimal(&self.world, start, goal).is_none() {
                continue;
            }
            return Ok(Problem {
                start: start.clone(),
                goal: goal.clone(),
            });
        }
        Err(EnvError::NoGoal)
    }

    pub fn generate_many<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<Problem>, EnvError> {
        (0..count).map(|_| self.generate(rng)).collect()
    }
}
