//! UbuntuWorld: a simulated Ubuntu troubleshooting environment with a
//! planning ground-truth agent, tabular Q-learning agents and a forum
//! retrieval engine that steers exploration.
//!
//! The crate is organised the way the pieces depend on each other:
//!
//! - [`domain`]: the declarative world description and its grounding.
//! - [`environment`]: the emulator, rewards and problem generation.
//! - [`planner`]: optimal breadth-first planning.
//! - [`retrieval`]: the Q&A index and action recommender.
//! - [`agents`]: random, planning and Q-learning agents with train/evaluate loops.
//! - [`harness`]: experiment commands, metric files and the interactive demo.

pub mod agents;
pub mod domain;
pub mod environment;
pub mod harness;
pub mod planner;
pub mod retrieval;

pub use domain::{ActionId, Domain, Goal, GroundedAction, Predicate, State, World};
pub use environment::{Environment, EpisodeRecord, Observation, Problem, ProblemGenerator};
