//! Experiment harness: the `train`, `test`, `query`, `plan` and `demo`
//! commands behind the command-line tool, and the metric files they write.
//!
//! Every random choice in a run is drawn from a stream derived from the run
//! seed and a fixed label (training instances, test tasks, the agent, the
//! random baseline), so changing one consumer never shifts another.

mod commands;
mod config;
mod demo;
mod metrics;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::{Agent, AgentError, PlanningAgent, QLearningAgent, RandomAgent, SnapshotError, Transition};
use crate::domain::{parse_domain, ActionId, Goal, World};
use crate::environment::{EnvError, GoalMix, Observation, Problem, ProblemGenerator};
use crate::retrieval::{load_corpus, CorpusIndex, DataDrivenRecommender, Recommender, BUNDLED_CORPUS};

pub use commands::{cmd_plan, cmd_query, cmd_test, cmd_train, TestReport, TestRow, TrainReport, TEST_HEADER};
pub use config::{ConfigLayer, RunConfig};
pub use demo::{cmd_demo, Demo, DemoPolicy};
pub use metrics::{read_curve, CurveWriter, MetricsRow, MovingAverage, CURVE_HEADER};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for bad configuration or usage, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum AgentKind {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "planner")]
    Planner,
    #[serde(rename = "qlearn")]
    QLearn,
    #[serde(rename = "qlearn+data")]
    QLearnData,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Planner => "planner",
            AgentKind::QLearn => "qlearn",
            AgentKind::QLearnData => "qlearn+data",
        }
    }

    pub fn learns(self) -> bool {
        matches!(self, AgentKind::QLearn | AgentKind::QLearnData)
    }
}

impl std::str::FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(AgentKind::Random),
            "planner" => Ok(AgentKind::Planner),
            "qlearn" => Ok(AgentKind::QLearn),
            "qlearn+data" => Ok(AgentKind::QLearnData),
            other => Err(format!("unknown agent `{other}` (random | planner | qlearn | qlearn+data)")),
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Independent 64-bit seed for one named consumer of a run seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}/{label}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn load_world(config: &RunConfig) -> Result<Arc<World>, HarnessError> {
    match &config.domain {
        None => Ok(World::bundled()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| HarnessError::Config(format!("cannot read domain {}: {e}", path.display())))?;
            let domain =
                parse_domain(&text).map_err(|e| HarnessError::Config(format!("domain {}: {e}", path.display())))?;
            Ok(World::new(domain))
        }
    }
}

pub fn load_index(config: &RunConfig) -> Result<Arc<CorpusIndex>, HarnessError> {
    let text = match &config.corpus {
        None => BUNDLED_CORPUS.to_string(),
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read corpus {}: {e}", path.display())))?,
    };
    let posts = load_corpus(&text).map_err(|e| HarnessError::Config(format!("corpus: {e}")))?;
    let index = CorpusIndex::build(posts).map_err(|e| HarnessError::Config(format!("corpus: {e}")))?;
    Ok(Arc::new(index))
}

pub fn load_recommender(config: &RunConfig, world: &Arc<World>) -> Result<Arc<dyn Recommender>, HarnessError> {
    let index = load_index(config)?;
    Ok(Arc::new(DataDrivenRecommender::new(world.clone(), index).with_top_k(config.top_k)))
}

pub fn generator(config: &RunConfig, world: &Arc<World>) -> ProblemGenerator {
    ProblemGenerator::new(
        world.clone(),
        GoalMix {
            family_predicate: config.family.clone(),
            family_fraction: config.family_fraction,
        },
    )
}

pub fn training_problems(config: &RunConfig, world: &Arc<World>) -> Result<Vec<Problem>, HarnessError> {
    let seed = config.require_seed()?;
    problems(config, world, derive_seed(seed, "instances"), config.episodes)
}

pub fn test_problems(config: &RunConfig, world: &Arc<World>) -> Result<Vec<Problem>, HarnessError> {
    let seed = config.require_seed()?;
    problems(config, world, derive_seed(seed, "test"), config.test_tasks)
}

fn problems(config: &RunConfig, world: &Arc<World>, seed: u64, count: usize) -> Result<Vec<Problem>, HarnessError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Ok(generator(config, world).generate_many(&mut rng, count)?)
}

/// Any of the four agent kinds behind one type.
#[derive(Clone)]
pub enum AnyAgent {
    Random(RandomAgent),
    Planner(PlanningAgent),
    Learner(QLearningAgent),
}

impl AnyAgent {
    /// A fresh, untrained agent of the configured kind.
    pub fn fresh(config: &RunConfig, world: &Arc<World>) -> Result<Self, HarnessError> {
        let seed = derive_seed(config.require_seed()?, "agent");
        Ok(match config.agent {
            AgentKind::Random => AnyAgent::Random(RandomAgent::new(world, seed)),
            AgentKind::Planner => AnyAgent::Planner(PlanningAgent::new(world.clone())),
            AgentKind::QLearn => AnyAgent::Learner(QLearningAgent::new(world.clone(), config.params, seed)?),
            AgentKind::QLearnData => AnyAgent::Learner(
                QLearningAgent::new(world.clone(), config.params, seed)?
                    .with_recommender(load_recommender(config, world)?),
            ),
        })
    }

    /// The configured agent ready for evaluation: learners come from the
    /// snapshot file, the others are built fresh.
    pub fn for_evaluation(config: &RunConfig, world: &Arc<World>) -> Result<Self, HarnessError> {
        if !config.agent.learns() {
            return AnyAgent::fresh(config, world);
        }
        let path = config.snapshot_path();
        let snap = crate::agents::AgentSnapshot::load(&path).map_err(|e| match e {
            SnapshotError::Io(io) => HarnessError::io(&path, io),
            other => HarnessError::Snapshot(other),
        })?;
        let recommender = if snap.kind == AgentKind::QLearnData.as_str() {
            Some(load_recommender(config, world)?)
        } else {
            None
        };
        Ok(AnyAgent::Learner(QLearningAgent::restore(world.clone(), &snap, recommender)?))
    }

    pub fn learner(&self) -> Option<&QLearningAgent> {
        match self {
            AnyAgent::Learner(a) => Some(a),
            _ => None,
        }
    }
}

impl Agent for AnyAgent {
    fn name(&self) -> &'static str {
        match self {
            AnyAgent::Random(a) => a.name(),
            AnyAgent::Planner(a) => a.name(),
            AnyAgent::Learner(a) => a.name(),
        }
    }

    fn act(&mut self, obs: &Observation, goal: &Goal) -> Result<ActionId, AgentError> {
        match self {
            AnyAgent::Random(a) => a.act(obs, goal),
            AnyAgent::Planner(a) => a.act(obs, goal),
            AnyAgent::Learner(a) => a.act(obs, goal),
        }
    }

    fn learn(&mut self, step: &Transition<'_>) -> Result<(), AgentError> {
        match self {
            AnyAgent::Random(a) => a.learn(step),
            AnyAgent::Planner(a) => a.learn(step),
            AnyAgent::Learner(a) => a.learn(step),
        }
    }

    fn end_episode(&mut self) {
        match self {
            AnyAgent::Random(a) => a.end_episode(),
            AnyAgent::Planner(a) => a.end_episode(),
            AnyAgent::Learner(a) => a.end_episode(),
        }
    }

    fn set_training(&mut self, training: bool) {
        match self {
            AnyAgent::Random(a) => a.set_training(training),
            AnyAgent::Planner(a) => a.set_training(training),
            AnyAgent::Learner(a) => a.set_training(training),
        }
    }
}
