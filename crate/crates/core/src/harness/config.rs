use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{AgentKind, HarnessError};
use crate::agents::LearnParams;
use crate::environment::DEFAULT_MAX_STEPS;

/// Everything a subcommand needs. Built from defaults, then an optional TOML
/// file, then command-line flags, each layer overriding the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Domain file; the bundled domain when absent.
    pub domain: Option<PathBuf>,
    /// JSON-lines corpus; the bundled corpus when absent.
    pub corpus: Option<PathBuf>,
    pub agent: AgentKind,
    pub params: LearnParams,
    /// Distinct training instances.
    pub episodes: usize,
    /// Additional passes over the training instances.
    pub replays: usize,
    pub test_tasks: usize,
    pub max_steps: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub window: usize,
    pub snapshot: Option<PathBuf>,
    /// Predicate whose positive groundings form the task family.
    pub family: String,
    /// Share of task-family goals among generated problems.
    pub family_fraction: f64,
    pub top_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: None,
            corpus: None,
            agent: AgentKind::QLearn,
            params: LearnParams::default(),
            episodes: 1000,
            replays: 4,
            test_tasks: 200,
            max_steps: DEFAULT_MAX_STEPS,
            seed: None,
            out: PathBuf::from("runs"),
            window: 100,
            snapshot: None,
            family: "open".to_string(),
            family_fraction: 1.0,
            top_k: crate::retrieval::DEFAULT_TOP_K,
        }
    }
}

/// A partial configuration: the contents of a config file, or the flags given
/// on the command line. Unset fields leave the underlying value alone.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub domain: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub agent: Option<AgentKind>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub beta0: Option<f64>,
    pub tau: Option<f64>,
    pub period: Option<f64>,
    pub episodes: Option<usize>,
    pub replays: Option<usize>,
    pub test_tasks: Option<usize>,
    pub max_steps: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub window: Option<usize>,
    pub snapshot: Option<PathBuf>,
    pub family: Option<String>,
    pub family_fraction: Option<f64>,
    pub top_k: Option<usize>,
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", path.display())))?;
        ConfigLayer::from_toml(&text)
    }
}

impl RunConfig {
    pub fn apply(&mut self, layer: &ConfigLayer) {
        fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
            if let Some(v) = value {
                *slot = v.clone();
            }
        }
        if layer.domain.is_some() {
            self.domain = layer.domain.clone();
        }
        if layer.corpus.is_some() {
            self.corpus = layer.corpus.clone();
        }
        if layer.seed.is_some() {
            self.seed = layer.seed;
        }
        if layer.snapshot.is_some() {
            self.snapshot = layer.snapshot.clone();
        }
        set(&mut self.agent, &layer.agent);
        set(&mut self.params.alpha, &layer.alpha);
        set(&mut self.params.gamma, &layer.gamma);
        set(&mut self.params.epsilon, &layer.epsilon);
        set(&mut self.params.beta0, &layer.beta0);
        set(&mut self.params.tau, &layer.tau);
        set(&mut self.params.period, &layer.period);
        set(&mut self.episodes, &layer.episodes);
        set(&mut self.replays, &layer.replays);
        set(&mut self.test_tasks, &layer.test_tasks);
        set(&mut self.max_steps, &layer.max_steps);
        set(&mut self.out, &layer.out);
        set(&mut self.window, &layer.window);
        set(&mut self.family, &layer.family);
        set(&mut self.family_fraction, &layer.family_fraction);
        set(&mut self.top_k, &layer.top_k);
    }

    /// Defaults, then the file (if any), then the flags.
    pub fn resolve(file: Option<&Path>, flags: &ConfigLayer) -> Result<Self, HarnessError> {
        let mut config = RunConfig::default();
        if let Some(path) = file {
            config.apply(&ConfigLayer::load(path)?);
        }
        config.apply(flags);
        config.validate()?;
        Ok(config)
    }

    /// Range checks that do not touch the filesystem.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.params
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.family_fraction) {
            return bad("family_fraction must lie in [0, 1]");
        }
        for (label, path) in [("domain", &self.domain), ("corpus", &self.corpus), ("snapshot", &self.snapshot)] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(HarnessError::Config(format!("{label} file {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64, HarnessError> {
        self.seed
            .ok_or_else(|| HarnessError::Config("a seed is required (--seed or `seed` in the config file)".into()))
    }

    pub fn snapshot_path(&self) -> PathBuf {
        self.snapshot.clone().unwrap_or_else(|| self.out.join("snapshot.json"))
    }
}
