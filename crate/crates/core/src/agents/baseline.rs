use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Agent, AgentError};
use crate::domain::{ActionId, Goal, World};
use crate::environment::Observation;
use crate::planner::{planning_agent_next_action, NextStep, PlanError};

/// Picks uniformly among all grounded actions and learns nothing.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    actions: usize,
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(world: &World, seed: u64) -> Self {
        RandomAgent {
            actions: world.actions().len(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &'static str {
        "random"
    }

    fn act(&mut self, _obs: &Observation, _goal: &Goal) -> Result<ActionId, AgentError> {
        Ok(ActionId(self.rng.gen_range(0..self.actions)))
    }
}

/// Replans optimally from the sensed state at every step.
#[derive(Debug, Clone)]
pub struct PlanningAgent {
    world: Arc<World>,
}

impl PlanningAgent {
    pub fn new(world: Arc<World>) -> Self {
        PlanningAgent { world }
    }
}

impl Agent for PlanningAgent {
    fn name(&self) -> &'static str {
        "planner"
    }

    fn act(&mut self, obs: &Observation, goal: &Goal) -> Result<ActionId, AgentError> {
        match planning_agent_next_action(&self.world, &obs.state, goal) {
            Ok(NextStep::Act(a)) => Ok(a),
            Ok(NextStep::Done) => Err(AgentError::GoalAlreadyReached),
            Err(PlanError::Unsolvable) => Err(AgentError::Unsolvable),
        }
    }
}
