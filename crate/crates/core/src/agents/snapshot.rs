//! Agent snapshots: a versioned, checksummed JSON document holding the
//! learning parameters, episode counter, RNG state and the non-zero Q-values.
//!
//! ```text
//! {
//!   "format": "ubuntuworld-agent-snapshot/1",
//!   "domain": "<grounded domain fingerprint>",
//!   "kind": "qlearn" | "qlearn+data",
//!   "params": { "alpha": .., "gamma": .., "epsilon": .., "beta0": .., "tau": .., "period": .. },
//!   "episode": 5000,
//!   "rng": { ChaCha8 seed, stream and word position },
//!   "entries": [ { "state": "10010000", "goal": "open gedit file=T", "action": "Sudo_On()", "value": -1.0 }, .. ],
//!   "checksum": "<sha256 of the document with an empty checksum>"
//! }
//! ```

use std::path::Path;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{LearnParams, QKey, QLearningAgent, QTable};
use crate::domain::{State, World};
use crate::retrieval::Recommender;

pub const SNAPSHOT_FORMAT: &str = "ubuntuworld-agent-snapshot/1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot is corrupt: {0}")]
    Corrupt(String),
    #[error("unsupported snapshot format `{0}`")]
    Format(String),
    #[error("snapshot was taken on a different domain ({found}, expected {expected})")]
    DomainMismatch { expected: String, found: String },
    #[error("snapshot of a {0} agent needs a recommender")]
    MissingRecommender(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QEntry {
    pub state: String,
    pub goal: String,
    pub action: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub format: String,
    pub domain: String,
    pub kind: String,
    pub params: LearnParams,
    pub episode: u64,
    pub rng: ChaCha8Rng,
    pub entries: Vec<QEntry>,
    pub checksum: String,
}

impl AgentSnapshot {
    fn digest(&self) -> String {
        let mut blank = self.clone();
        blank.checksum.clear();
        let bytes = serde_json::to_vec(&blank).expect("snapshot serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("snapshot serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, SnapshotError> {
        let snap: AgentSnapshot = serde_json::from_str(text).map_err(|e| SnapshotError::Corrupt(e.to_string()))?;
        if snap.format != SNAPSHOT_FORMAT {
            return Err(SnapshotError::Format(snap.format));
        }
        if snap.digest() != snap.checksum {
            return Err(SnapshotError::Corrupt("checksum mismatch".into()));
        }
        Ok(snap)
    }

    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        AgentSnapshot::from_json(&std::fs::read_to_string(path)?)
    }
}

impl QLearningAgent {
    pub fn snapshot(&self) -> AgentSnapshot {
        let world = &self.world;
        let entries = self
            .q
            .entries()
            .into_iter()
            .map(|(key, action, value)| QEntry {
                state: key.state.to_bits(),
                goal: world.describe_goal(&key.goal),
                action: world.action(action).name(),
                value,
            })
            .collect();
        let mut snap = AgentSnapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            domain: world.fingerprint(),
            kind: crate::agents::Agent::name(self).to_string(),
            params: self.params,
            episode: self.episode,
            rng: self.rng.clone(),
            entries,
            checksum: String::new(),
        };
        snap.checksum = snap.digest();
        snap
    }

    /// Rebuilds an agent. Data-driven snapshots need the recommender back.
    pub fn restore(
        world: Arc<World>,
        snapshot: &AgentSnapshot,
        recommender: Option<Arc<dyn Recommender>>,
    ) -> Result<Self, SnapshotError> {
        if snapshot.domain != world.fingerprint() {
            return Err(SnapshotError::DomainMismatch {
                expected: world.fingerprint(),
                found: snapshot.domain.clone(),
            });
        }
        let recommender = match (snapshot.kind.as_str(), recommender) {
            ("qlearn", _) => None,
            ("qlearn+data", Some(r)) => Some(r),
            ("qlearn+data", None) => return Err(SnapshotError::MissingRecommender(snapshot.kind.clone())),
            (other, _) => return Err(SnapshotError::Corrupt(format!("unknown agent kind `{other}`"))),
        };
        snapshot
            .params
            .validate()
            .map_err(|e| SnapshotError::Corrupt(e.to_string()))?;
        let mut q = QTable::new(world.actions().len());
        for e in &snapshot.entries {
            let state = State::from_bits(&e.state)
                .filter(|s| world.check_state(s).is_ok())
                .ok_or_else(|| SnapshotError::Corrupt(format!("bad state `{}`", e.state)))?;
            let goal = world
                .parse_goal(&e.goal)
                .map_err(|err| SnapshotError::Corrupt(err.to_string()))?;
            let action = world
                .action_id(&e.action)
                .map_err(|err| SnapshotError::Corrupt(err.to_string()))?;
            if !e.value.is_finite() {
                return Err(SnapshotError::Corrupt(format!("non-finite value for {}", e.action)));
            }
            q.set(&QKey::new(state, goal), action, e.value);
        }
        Ok(QLearningAgent::from_parts(
            world,
            q,
            snapshot.params,
            snapshot.episode,
            snapshot.rng.clone(),
            recommender,
        ))
    }
}
