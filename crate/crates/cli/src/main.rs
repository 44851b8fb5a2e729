use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ubuntuworld::harness::{
    cmd_demo, cmd_plan, cmd_query, cmd_test, cmd_train, AgentKind, ConfigLayer, HarnessError, RunConfig,
};

/// Train and evaluate agents in the emulated Ubuntu troubleshooting world.
#[derive(Debug, Parser)]
#[command(name = "ubuntuworld", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train an agent and write the learning curve and a snapshot.
    Train(Common),
    /// Compare an agent with the optimal planner and a random agent on fresh tasks.
    Test(Common),
    /// Interactive session with a trained agent (or the planner).
    Demo(Common),
    /// Search the forum corpus with an error message and recommend an action.
    Query {
        #[command(flatten)]
        common: Common,
        /// Error text to search for.
        #[arg(required = true, num_args = 1..)]
        text: Vec<String>,
    },
    /// Print an optimal plan.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Goal, e.g. "open firefox file=T, sudo-on=F".
        #[arg(long)]
        goal: String,
        /// Comma-separated predicates true at the start; the domain's initial state if omitted.
        #[arg(long)]
        start: Option<String>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with any of the settings below; flags win over it.
    #[arg(long, env = "UBUNTUWORLD_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "UBUNTUWORLD_DOMAIN")]
    domain: Option<PathBuf>,
    #[arg(long, env = "UBUNTUWORLD_CORPUS")]
    corpus: Option<PathBuf>,
    /// random | planner | qlearn | qlearn+data
    #[arg(long, env = "UBUNTUWORLD_AGENT")]
    agent: Option<AgentKind>,
    #[arg(long, env = "UBUNTUWORLD_SEED")]
    seed: Option<u64>,
    /// Distinct training instances.
    #[arg(long, env = "UBUNTUWORLD_EPISODES")]
    episodes: Option<usize>,
    /// Extra passes over the training instances.
    #[arg(long, env = "UBUNTUWORLD_REPLAYS")]
    replays: Option<usize>,
    #[arg(long, env = "UBUNTUWORLD_TEST_TASKS")]
    test_tasks: Option<usize>,
    #[arg(long, env = "UBUNTUWORLD_MAX_STEPS")]
    max_steps: Option<usize>,
    #[arg(long, env = "UBUNTUWORLD_ALPHA")]
    alpha: Option<f64>,
    #[arg(long, env = "UBUNTUWORLD_GAMMA")]
    gamma: Option<f64>,
    #[arg(long, env = "UBUNTUWORLD_EPSILON")]
    epsilon: Option<f64>,
    #[arg(long, env = "UBUNTUWORLD_BETA0")]
    beta0: Option<f64>,
    #[arg(long, env = "UBUNTUWORLD_TAU")]
    tau: Option<f64>,
    #[arg(long, env = "UBUNTUWORLD_PERIOD")]
    period: Option<f64>,
    /// Output directory.
    #[arg(long, env = "UBUNTUWORLD_OUT")]
    out: Option<PathBuf>,
    /// Moving-average window of the learning curve.
    #[arg(long, env = "UBUNTUWORLD_WINDOW")]
    window: Option<usize>,
    /// Snapshot file (default: <out>/snapshot.json).
    #[arg(long, env = "UBUNTUWORLD_SNAPSHOT")]
    snapshot: Option<PathBuf>,
    /// Predicate whose positive groundings make up the task family.
    #[arg(long, env = "UBUNTUWORLD_FAMILY")]
    family: Option<String>,
    /// Share of task-family goals; the rest are arbitrary one- or two-literal goals.
    #[arg(long, env = "UBUNTUWORLD_FAMILY_FRACTION")]
    family_fraction: Option<f64>,
    /// Posts consulted per query.
    #[arg(long, env = "UBUNTUWORLD_TOP_K")]
    top_k: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let flags = ConfigLayer {
            domain: self.domain.clone(),
            corpus: self.corpus.clone(),
            agent: self.agent,
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: self.epsilon,
            beta0: self.beta0,
            tau: self.tau,
            period: self.period,
            episodes: self.episodes,
            replays: self.replays,
            test_tasks: self.test_tasks,
            max_steps: self.max_steps,
            seed: self.seed,
            out: self.out.clone(),
            window: self.window,
            snapshot: self.snapshot.clone(),
            family: self.family.clone(),
            family_fraction: self.family_fraction,
            top_k: self.top_k,
        };
        RunConfig::resolve(self.config.as_deref(), &flags)
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let say = |out: &mut dyn Write, text: String| {
        out.write_all(text.as_bytes())
            .map_err(|e| HarnessError::Runtime(format!("stdout: {e}")))
    };
    match cli.command {
        Command::Train(common) => {
            let config = common.resolve()?;
            let report = cmd_train(&config)?;
            let last = report.rows.last();
            let mut text = format!("wrote {} ({} episodes)\n", report.curve.display(), report.rows.len());
            if let Some(row) = last {
                text.push_str(&format!("final moving average length: {:.3}\n", row.moving_avg_length));
            }
            if let Some(snap) = &report.snapshot {
                text.push_str(&format!("wrote {}\n", snap.display()));
            }
            say(&mut out, text)
        }
        Command::Test(common) => {
            let config = common.resolve()?;
            let report = cmd_test(&config)?;
            say(&mut out, format!("wrote {}\n{}\n", report.path.display(), report.summary()))
        }
        Command::Demo(common) => {
            let config = common.resolve()?;
            cmd_demo(&config, io::stdin().lock(), out)
        }
        Command::Query { common, text } => {
            let config = common.resolve()?;
            cmd_query(&config, &text.join(" "), &mut out).map(|_| ())
        }
        Command::Plan { common, goal, start } => {
            let config = common.resolve()?;
            cmd_plan(&config, start.as_deref(), &goal, &mut out).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
