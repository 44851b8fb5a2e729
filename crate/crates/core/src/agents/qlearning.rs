//! Tabular, goal-conditioned Q-learning with ε-random and data-driven
//! exploration.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Agent, AgentError, Transition};
use crate::domain::{ActionId, Goal, State, World};
use crate::environment::Observation;
use crate::retrieval::Recommender;

/// Table key: the sensed state together with the goal being pursued.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QKey {
    pub state: State,
    pub goal: Goal,
}

impl QKey {
    pub fn new(state: State, goal: Goal) -> Self {
        QKey { state, goal }
    }
}

/// Q-values per key, one slot per grounded action. Missing keys read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    actions: usize,
    rows: HashMap<QKey, Vec<f64>>,
}

impl QTable {
    pub fn new(actions: usize) -> Self {
        QTable {
            actions,
            rows: HashMap::new(),
        }
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn get(&self, key: &QKey, action: ActionId) -> f64 {
        self.rows.get(key).map_or(0.0, |row| row[action.0])
    }

    pub fn set(&mut self, key: &QKey, action: ActionId, value: f64) {
        let n = self.actions;
        match self.rows.get_mut(key) {
            Some(row) => row[action.0] = value,
            None => {
                let mut row = vec![0.0; n];
                row[action.0] = value;
                self.rows.insert(key.clone(), row);
            }
        }
    }

    pub fn max(&self, key: &QKey) -> f64 {
        match self.rows.get(key) {
            Some(row) => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            None => 0.0,
        }
    }

    /// Highest-valued action; ties go to the earliest action in canonical order.
    pub fn argmax(&self, key: &QKey) -> ActionId {
        let Some(row) = self.rows.get(key) else {
            return ActionId(0);
        };
        let mut best = 0;
        for (i, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = i;
            }
        }
        ActionId(best)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Non-zero entries sorted by key then action.
    pub fn entries(&self) -> Vec<(&QKey, ActionId, f64)> {
        let mut keys: Vec<&QKey> = self.rows.keys().collect();
        keys.sort();
        keys.into_iter()
            .flat_map(|k| {
                self.rows[k]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(move |(i, v)| (k, ActionId(i), *v))
            })
            .collect()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.values().flat_map(|r| r.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnParams {
    /// Learning rate.
    pub alpha: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Probability of a uniformly random action.
    pub epsilon: f64,
    /// Peak probability of consulting the recommender.
    pub beta0: f64,
    /// Decay constant of the recommender schedule, in episodes.
    pub tau: f64,
    /// Period of the recommender schedule oscillation, in episodes.
    pub period: f64,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            alpha: 0.05,
            gamma: 0.9,
            epsilon: 0.1,
            beta0: 0.5,
            tau: 1000.0,
            period: 200.0,
        }
    }
}

impl LearnParams {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |what: &str| Err(AgentError::InvalidParams(what.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(self.beta0 >= 0.0 && self.beta0.is_finite()) {
            return bad("beta0 must be non-negative");
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return bad("tau must be positive");
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return bad("period must be positive");
        }
        Ok(())
    }

    /// Parameters for greedy evaluation: no exploration of any kind.
    pub fn greedy(&self) -> Self {
        LearnParams {
            epsilon: 0.0,
            beta0: 0.0,
            ..*self
        }
    }
}

/// `Q(s,a) <- (1-α) Q(s,a) + α (r + γ max_a' Q(s',a'))`. Returns the new value.
pub fn bellman_update(
    q: &mut QTable,
    s: &QKey,
    a: ActionId,
    r: f64,
    s_next: &QKey,
    params: &LearnParams,
) -> Result<f64, AgentError> {
    if !r.is_finite() {
        return Err(AgentError::NonFiniteReward(r));
    }
    let target = r + params.gamma * q.max(s_next);
    let value = (1.0 - params.alpha) * q.get(s, a) + params.alpha * target;
    q.set(s, a, value);
    Ok(value)
}

/// Probability of consulting the recommender in episode `t`: a damped,
/// rectified sine, clamped so that `ε + β ≤ 1`.
pub fn beta_schedule(t: u64, params: &LearnParams) -> f64 {
    let t = t as f64;
    let envelope = params.beta0 * (-t / params.tau).exp();
    let raw = envelope * (2.0 * PI * t / params.period).sin().abs();
    raw.clamp(0.0, (1.0 - params.epsilon).max(0.0))
}

/// Which rule picked an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Random,
    Recommend,
    Exploit,
}

/// Recommender plus the footprint it would be asked about.
#[derive(Clone, Copy)]
pub struct Consult<'a> {
    pub recommender: &'a dyn Recommender,
    pub footprint: &'a str,
    /// Only failure footprints are sent to the recommender.
    pub failed: bool,
}

/// Splits a uniform draw `u` into the ε / β / exploitation bands.
///
/// Without a recommender the β band is exploitation; with one, it is
/// exploration: the recommender after a failure, a random action otherwise.
pub fn choose_branch(u: f64, epsilon: f64, beta: f64, consult: Option<bool>) -> Branch {
    if u < epsilon {
        Branch::Random
    } else if u < epsilon + beta {
        match consult {
            None => Branch::Exploit,
            Some(true) => Branch::Recommend,
            Some(false) => Branch::Random,
        }
    } else {
        Branch::Exploit
    }
}

/// Chooses the next action and reports which rule chose it. A recommender
/// that has nothing to say degrades to a random action.
pub fn select_action<R: Rng + ?Sized>(
    q: &QTable,
    key: &QKey,
    t: u64,
    params: &LearnParams,
    rng: &mut R,
    consult: Option<Consult<'_>>,
) -> (ActionId, Branch) {
    let n = q.action_count();
    assert!(n > 0, "no grounded actions");
    let beta = if consult.is_some() { beta_schedule(t, params) } else { 0.0 };
    let u: f64 = rng.gen();
    match choose_branch(u, params.epsilon, beta, consult.map(|c| c.failed)) {
        Branch::Random => (ActionId(rng.gen_range(0..n)), Branch::Random),
        Branch::Exploit => (q.argmax(key), Branch::Exploit),
        Branch::Recommend => {
            let c = consult.expect("recommend branch needs a recommender");
            match c.recommender.recommend(c.footprint) {
                Some(a) => (a, Branch::Recommend),
                None => (ActionId(rng.gen_range(0..n)), Branch::Random),
            }
        }
    }
}

/// The learning agent. With a recommender attached it is the data-driven
/// variant; without one it is plain ε-random Q-learning.
#[derive(Clone)]
pub struct QLearningAgent {
    pub(crate) world: Arc<World>,
    pub(crate) q: QTable,
    pub(crate) params: LearnParams,
    pub(crate) episode: u64,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) recommender: Option<Arc<dyn Recommender>>,
    training: bool,
}

impl QLearningAgent {
    pub fn new(world: Arc<World>, params: LearnParams, seed: u64) -> Result<Self, AgentError> {
        params.validate()?;
        let q = QTable::new(world.actions().len());
        Ok(QLearningAgent {
            world,
            q,
            params,
            episode: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            recommender: None,
            training: true,
        })
    }

    pub fn with_recommender(mut self, recommender: Arc<dyn Recommender>) -> Self {
        self.recommender = Some(recommender);
        self
    }

    pub(crate) fn from_parts(
        world: Arc<World>,
        q: QTable,
        params: LearnParams,
        episode: u64,
        rng: ChaCha8Rng,
        recommender: Option<Arc<dyn Recommender>>,
    ) -> Self {
        QLearningAgent {
            world,
            q,
            params,
            episode,
            rng,
            recommender,
            training: true,
        }
    }

    pub fn is_data_driven(&self) -> bool {
        self.recommender.is_some()
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    pub fn params(&self) -> &LearnParams {
        &self.params
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn world(&self) -> &Arc<World> {
        &self.world
    }

    /// The greedy action, or `None` when the goal already holds.
    pub fn suggest(&self, state: &State, goal: &Goal) -> Option<ActionId> {
        if self.world.satisfies(state, goal) {
            return None;
        }
        Some(self.q.argmax(&QKey::new(state.clone(), goal.clone())))
    }
}

impl Agent for QLearningAgent {
    fn name(&self) -> &'static str {
        if self.is_data_driven() {
            "qlearn+data"
        } else {
            "qlearn"
        }
    }

    fn act(&mut self, obs: &Observation, goal: &Goal) -> Result<ActionId, AgentError> {
        let key = QKey::new(obs.state.clone(), goal.clone());
        if !self.training {
            return Ok(self.q.argmax(&key));
        }
        let consult = self.recommender.as_deref().map(|r| Consult {
            recommender: r,
            footprint: &obs.footprint,
            failed: obs.failed,
        });
        let (action, _) = select_action(&self.q, &key, self.episode, &self.params, &mut self.rng, consult);
        Ok(action)
    }

    fn learn(&mut self, step: &Transition<'_>) -> Result<(), AgentError> {
        if !self.training {
            return Ok(());
        }
        let s = QKey::new(step.state.clone(), step.goal.clone());
        let s_next = QKey::new(step.next.state.clone(), step.goal.clone());
        bellman_update(&mut self.q, &s, step.action, step.reward, &s_next, &self.params)?;
        Ok(())
    }

    fn end_episode(&mut self) {
        if self.training {
            self.episode += 1;
        }
    }

    fn set_training(&mut self, training: bool) {
        self.training = training;
    }
}
