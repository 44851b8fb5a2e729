//! Optimal planning over the grounded transition system.
//!
//! Actions have unit cost and the reachable state space of the bundled
//! domain is tiny, so plain breadth-first search gives optimal plans.
//! Successors are generated in canonical action order, which fixes the
//! tie-breaking between equally short plans.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::domain::{ActionId, Goal, State, World};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub actions: Vec<ActionId>,
}

impl Plan {
    pub fn cost(&self) -> usize {
        self.actions.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("goal is unreachable from the given state")]
    Unsolvable,
}

/// Shortest plan from `state` to any state satisfying `goal`, or `None`.
pub fn plan_optimal(world: &World, state: &State, goal: &Goal) -> Option<Plan> {
    if world.satisfies(state, goal) {
        return Some(Plan { actions: Vec::new() });
    }
    let mut parent: HashMap<State, (State, ActionId)> = HashMap::new();
    let mut queue = VecDeque::from([state.clone()]);
    parent.insert(state.clone(), (state.clone(), ActionId(usize::MAX)));

    while let Some(current) = queue.pop_front() {
        for id in world.action_ids() {
            if !world.applicable(&current, id) {
                continue;
            }
            let next = world.apply_effects(&current, id);
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), (current.clone(), id));
            if world.satisfies(&next, goal) {
                return Some(Plan {
                    actions: unwind(&parent, state, next),
                });
            }
            queue.push_back(next);
        }
    }
    None
}

fn unwind(parent: &HashMap<State, (State, ActionId)>, root: &State, mut at: State) -> Vec<ActionId> {
    let mut actions = Vec::new();
    while &at != root {
        let (prev, id) = &parent[&at];
        actions.push(*id);
        at = prev.clone();
    }
    actions.reverse();
    actions
}

/// What the planning agent does next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextStep {
    Act(ActionId),
    Done,
}

/// Replans from scratch and returns the first action of the optimal plan.
pub fn planning_agent_next_action(world: &World, state: &State, goal: &Goal) -> Result<NextStep, PlanError> {
    let plan = plan_optimal(world, state, goal).ok_or(PlanError::Unsolvable)?;
    Ok(plan.actions.first().map_or(NextStep::Done, |&a| NextStep::Act(a)))
}

/// Every state reachable from `from`, in breadth-first discovery order.
pub fn reachable_states(world: &World, from: &State) -> Vec<State> {
    let mut seen: HashMap<State, ()> = HashMap::new();
    let mut order = vec![from.clone()];
    seen.insert(from.clone(), ());
    let mut i = 0;
    while i < order.len() {
        let current = order[i].clone();
        i += 1;
        for id in world.action_ids() {
            if world.applicable(&current, id) {
                let next = world.apply_effects(&current, id);
                if seen.insert(next.clone(), ()).is_none() {
                    order.push(next);
                }
            }
        }
    }
    order
}
