use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use super::{
    derive_seed, load_index, load_world, test_problems, training_problems, AnyAgent, CurveWriter,
    HarnessError, MetricsRow, RunConfig,
};
use crate::agents::{evaluate, train_with, RandomAgent};
use crate::domain::World;
use crate::environment::{Environment, Problem};
use crate::planner::{plan_optimal, Plan};
use crate::retrieval::{DataDrivenRecommender, RetrievalError};

pub const TEST_HEADER: &str = "task,agent_length,agent_success,optimal_length,random_length";

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub curve: PathBuf,
    pub snapshot: Option<PathBuf>,
    pub rows: Vec<MetricsRow>,
}

fn optimal_length(world: &World, p: &Problem) -> Result<usize, HarnessError> {
    plan_optimal(world, &p.start, &p.goal)
        .map(|plan| plan.cost())
        .ok_or_else(|| HarnessError::Runtime("generated problem has no plan".into()))
}

fn create_out_dir(config: &RunConfig) -> Result<(), HarnessError> {
    std::fs::create_dir_all(&config.out).map_err(|e| HarnessError::io(&config.out, e))
}

/// Trains the configured agent on `episodes` instances, `replays + 1` times,
/// writing `curve.csv` as it goes and the snapshot at the end.
pub fn cmd_train(config: &RunConfig) -> Result<TrainReport, HarnessError> {
    let world = load_world(config)?;
    let problems = training_problems(config, &world)?;
    let mut optimal: HashMap<&Problem, usize> = HashMap::new();
    for p in &problems {
        if !optimal.contains_key(p) {
            optimal.insert(p, optimal_length(&world, p)?);
        }
    }
    let mut agent = AnyAgent::fresh(config, &world)?;
    create_out_dir(config)?;
    let curve = config.out.join("curve.csv");
    let mut writer = CurveWriter::create(&curve, config.window)?;
    let mut env = Environment::emulated(world.clone(), config.max_steps);
    let mut rows = Vec::with_capacity(problems.len() * (config.replays + 1));
    let mut write_error = None;
    train_with(&mut agent, &mut env, &problems, config.replays, |_, record| {
        if write_error.is_some() {
            return;
        }
        match writer.append(record.length(), record.total_reward(), record.success, optimal[&record.problem]) {
            Ok(row) => rows.push(row),
            Err(e) => write_error = Some(e),
        }
    })?;
    if let Some(e) = write_error {
        return Err(HarnessError::io(&curve, e));
    }
    let snapshot = match agent.learner() {
        Some(learner) => {
            let path = config.snapshot_path();
            learner.snapshot().save(&path).map_err(|e| match e {
                crate::agents::SnapshotError::Io(io) => HarnessError::io(&path, io),
                other => HarnessError::Snapshot(other),
            })?;
            Some(path)
        }
        None => None,
    };
    Ok(TrainReport { curve, snapshot, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestRow {
    pub task: usize,
    pub agent_length: usize,
    pub agent_success: bool,
    pub optimal_length: usize,
    pub random_length: usize,
}

#[derive(Debug, Clone)]
pub struct TestReport {
    pub path: PathBuf,
    pub rows: Vec<TestRow>,
}

impl TestReport {
    fn mean(&self, f: impl Fn(&TestRow) -> usize) -> f64 {
        self.rows.iter().map(|r| f(r) as f64).sum::<f64>() / self.rows.len().max(1) as f64
    }

    pub fn mean_agent(&self) -> f64 {
        self.mean(|r| r.agent_length)
    }

    pub fn mean_optimal(&self) -> f64 {
        self.mean(|r| r.optimal_length)
    }

    pub fn mean_random(&self) -> f64 {
        self.mean(|r| r.random_length)
    }

    pub fn success_rate(&self) -> f64 {
        self.mean(|r| usize::from(r.agent_success))
    }

    pub fn summary(&self) -> String {
        format!(
            "# mean agent_length={:.4} optimal_length={:.4} random_length={:.4} success_rate={:.4} tasks={}",
            self.mean_agent(),
            self.mean_optimal(),
            self.mean_random(),
            self.success_rate(),
            self.rows.len()
        )
    }
}

/// Runs the configured agent greedily on fresh tasks next to the optimal
/// planner and a random agent, writing `test.csv`.
pub fn cmd_test(config: &RunConfig) -> Result<TestReport, HarnessError> {
    let world = load_world(config)?;
    let seed = config.require_seed()?;
    let agent = AnyAgent::for_evaluation(config, &world)?;
    let tasks = test_problems(config, &world)?;
    let mut env = Environment::emulated(world.clone(), config.max_steps);
    let agent_runs = evaluate(&agent, &mut env, &tasks)?;
    let random_runs = evaluate(&RandomAgent::new(&world, derive_seed(seed, "random")), &mut env, &tasks)?;
    let mut rows = Vec::with_capacity(tasks.len());
    for (i, p) in tasks.iter().enumerate() {
        rows.push(TestRow {
            task: i + 1,
            agent_length: agent_runs[i].0,
            agent_success: agent_runs[i].1,
            optimal_length: optimal_length(&world, p)?,
            random_length: random_runs[i].0,
        });
    }
    create_out_dir(config)?;
    let path = config.out.join("test.csv");
    let report = TestReport { path: path.clone(), rows };
    let mut text = format!("{TEST_HEADER}\n");
    for r in &report.rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.task,
            r.agent_length,
            u8::from(r.agent_success),
            r.optimal_length,
            r.random_length
        ));
    }
    text.push_str(&report.summary());
    text.push('\n');
    File::create(&path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| HarnessError::io(&path, e))?;
    Ok(report)
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<(), HarnessError> {
    out.write_fmt(text)
        .map_err(|e| HarnessError::Runtime(format!("cannot write output: {e}")))
}

/// Prints the top posts for `text` and the action their answers point to.
/// Returns the recommended grounded action's name, if any.
pub fn cmd_query(config: &RunConfig, text: &str, out: &mut dyn Write) -> Result<Option<String>, HarnessError> {
    let world = load_world(config)?;
    let index = load_index(config)?;
    let rec = DataDrivenRecommender::new(world.clone(), index.clone()).with_top_k(config.top_k);
    let hits = match index.query(text, config.top_k) {
        Ok(h) => h,
        Err(e) => {
            emit(out, format_args!("no recommendation: {e}\n"))?;
            return Ok(None);
        }
    };
    if hits.is_empty() {
        emit(out, format_args!("no matching posts\nno recommendation\n"))?;
        return Ok(None);
    }
    emit(out, format_args!("top posts:\n"))?;
    for (rank, h) in hits.iter().enumerate() {
        let post = index.post(h.doc);
        let answered = if post.accepted_answer.is_some() { "" } else { " (no accepted answer)" };
        emit(
            out,
            format_args!("  {}. {} {:.4} {}{}\n", rank + 1, post.id, h.score, post.title, answered),
        )?;
    }
    match rec.explain(text) {
        Ok((action, r, _)) => {
            let name = world.action(action).name();
            emit(
                out,
                format_args!(
                    "recommended action: {name} (matched {} with similarity {:.4})\nsupporting posts: {}\n",
                    r.action,
                    r.similarity,
                    r.supporting_posts.join(", ")
                ),
            )?;
            Ok(Some(name))
        }
        Err(e @ (RetrievalError::NoAnswers | RetrievalError::NoRecommendation | RetrievalError::Ungroundable(_))) => {
            emit(out, format_args!("no recommendation: {e}\n"))?;
            Ok(None)
        }
        Err(e) => Err(HarnessError::Runtime(e.to_string())),
    }
}

/// Plans from `start` (comma-separated true predicates, or the domain's
/// initial state) to `goal` (`pred args=T, ...`) and prints the plan.
pub fn cmd_plan(
    config: &RunConfig,
    start: Option<&str>,
    goal: &str,
    out: &mut dyn Write,
) -> Result<Option<Plan>, HarnessError> {
    let world = load_world(config)?;
    let state = match start {
        Some(text) => world
            .parse_state(text)
            .map_err(|e| HarnessError::Config(format!("start state: {e}")))?,
        None => world.initial_state(),
    };
    let goal = world
        .parse_goal(goal)
        .map_err(|e| HarnessError::Config(format!("goal: {e}")))?;
    if goal.literals().is_empty() {
        return Err(HarnessError::Config("goal is empty".into()));
    }
    let plan = plan_optimal(&world, &state, &goal);
    match &plan {
        None => emit(out, format_args!("unsolvable: no action sequence reaches {}\n", world.describe_goal(&goal)))?,
        Some(p) if p.actions.is_empty() => emit(out, format_args!("empty plan: the goal already holds\n"))?,
        Some(p) => {
            let noun = if p.cost() == 1 { "step" } else { "steps" };
            emit(out, format_args!("plan ({} {noun}):\n", p.cost()))?;
            for (i, a) in p.actions.iter().enumerate() {
                emit(out, format_args!("  {}. {}\n", i + 1, world.action(*a).name()))?;
            }
        }
    }
    Ok(plan)
}
