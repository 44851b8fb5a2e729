use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{load_world, AgentKind, AnyAgent, HarnessError, RunConfig};
use crate::agents::QLearningAgent;
use crate::domain::{ActionId, Goal, Predicate, World};
use crate::environment::{Environment, Problem};
use crate::planner::{planning_agent_next_action, NextStep};

const HELP: &str = "\
requests:
  open <software>      open the software on the file
  install <software>   install the software
  close <software>     close the software
  remove <software>    uninstall it yourself, behind the agent's back
  suggest <request>    show the agent's next action for a request or goal
  state                show the machine state
  help                 show this text
  quit                 leave
";

/// What picks actions in the demo. Never learns.
#[derive(Clone)]
pub enum DemoPolicy {
    Learned(Box<QLearningAgent>),
    Planner(Arc<World>),
}

impl DemoPolicy {
    /// Greedy next action, `None` once the goal holds.
    /// Also `None` when the planner finds the goal unreachable.
    pub fn next(&self, state: &crate::domain::State, goal: &Goal) -> Option<ActionId> {
        match self {
            DemoPolicy::Learned(agent) => agent.suggest(state, goal),
            DemoPolicy::Planner(world) => match planning_agent_next_action(world, state, goal) {
                Ok(NextStep::Act(a)) => Some(a),
                _ => None,
            },
        }
    }
}

/// The interactive session: one emulated machine whose state persists
/// across requests.
pub struct Demo {
    world: Arc<World>,
    policy: DemoPolicy,
    env: Environment,
}

enum Request {
    Task(Goal, String),
    Remove(String),
    Suggest(Goal),
    State,
    Help,
    Quit,
}

impl Demo {
    pub fn new(world: Arc<World>, policy: DemoPolicy, max_steps: usize) -> Self {
        let mut env = Environment::emulated(world.clone(), max_steps);
        env.force_state(&world.initial_state())
            .expect("emulator accepts the initial state");
        Demo { world, policy, env }
    }

    pub fn state(&self) -> crate::domain::State {
        self.env.sense().expect("emulator always senses")
    }

    /// Handles one input line. Returns the reply and whether to keep going.
    pub fn handle(&mut self, line: &str) -> (String, bool) {
        match self.parse(line) {
            Err(msg) => (format!("{msg}\n{HELP}"), true),
            Ok(Request::Quit) => ("bye\n".to_string(), false),
            Ok(Request::Help) => (HELP.to_string(), true),
            Ok(Request::State) => (self.world.describe_state(&self.state()), true),
            Ok(Request::Remove(sw)) => (self.remove(&sw), true),
            Ok(Request::Suggest(goal)) => {
                let state = self.state();
                let reply = match self.policy.next(&state, &goal) {
                    None => "nothing to do: that already holds\n".to_string(),
                    Some(a) => format!("suggested action: {}\n", self.world.action(a).name()),
                };
                (reply, true)
            }
            Ok(Request::Task(goal, label)) => (self.run(&goal, &label), true),
        }
    }

    fn software(&self, name: &str) -> Result<String, String> {
        let known = self.world.domain().objects_of_type("software").any(|o| o == name);
        if known {
            Ok(name.to_string())
        } else {
            Err(format!("unknown software `{name}`"))
        }
    }

    fn open_atom(&self, sw: &str) -> Result<usize, String> {
        self.world
            .atoms()
            .iter()
            .position(|p| p.name == "open" && p.args.first().map(String::as_str) == Some(sw))
            .ok_or_else(|| format!("nothing can open `{sw}`"))
    }

    fn task_goal(&self, verb: &str, arg: &str) -> Result<Option<Goal>, String> {
        let goal = match verb {
            "open" => Goal::new(vec![(self.open_atom(&self.software(arg)?)?, true)]),
            "close" => Goal::new(vec![(self.open_atom(&self.software(arg)?)?, false)]),
            "install" => {
                let sw = self.software(arg)?;
                let atom = self
                    .world
                    .atom(&Predicate {
                        name: "installed".into(),
                        args: vec![sw],
                    })
                    .map_err(|e| e.to_string())?;
                Goal::new(vec![(atom, true)])
            }
            _ => return Ok(None),
        };
        Ok(Some(goal))
    }

    fn parse(&self, line: &str) -> Result<Request, String> {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] => Err("empty request".into()),
            ["quit"] | ["exit"] => Ok(Request::Quit),
            ["help"] => Ok(Request::Help),
            ["state"] => Ok(Request::State),
            ["remove", sw] => Ok(Request::Remove(self.software(sw)?)),
            ["suggest", rest @ ..] if !rest.is_empty() => {
                if let [verb, arg] = rest {
                    if let Some(goal) = self.task_goal(verb, arg)? {
                        return Ok(Request::Suggest(goal));
                    }
                }
                self.world
                    .parse_goal(&rest.join(" "))
                    .map(Request::Suggest)
                    .map_err(|e| format!("cannot read goal: {e}"))
            }
            [verb, arg] => match self.task_goal(verb, arg)? {
                Some(goal) => Ok(Request::Task(goal, format!("{verb} {arg}"))),
                None => Err(format!("unknown request `{}`", line.trim())),
            },
            _ => Err(format!("unknown request `{}`", line.trim())),
        }
    }

    fn remove(&mut self, sw: &str) -> String {
        let mut state = self.state();
        for (i, p) in self.world.atoms().iter().enumerate() {
            let about = p.args.first().map(String::as_str) == Some(sw);
            if about && (p.name == "installed" || p.name == "open") {
                state = state.with(i, false);
            }
        }
        self.env.force_state(&state).expect("emulator accepts reachable states");
        format!("(you uninstalled {sw})\n")
    }

    /// Runs the policy until the goal holds, the step cap is hit, or the
    /// policy revisits a state (a deterministic policy would then cycle).
    fn run(&mut self, goal: &Goal, label: &str) -> String {
        let start = self.state();
        let mut out = String::new();
        let mut obs = match self.env.reset(&Problem {
            start: start.clone(),
            goal: goal.clone(),
        }) {
            Ok(o) => o,
            Err(e) => return format!("cannot start: {e}\n"),
        };
        if obs.goal_reached {
            return format!("{label}: already done\n");
        }
        let mut seen = HashSet::from([start]);
        while !obs.done {
            let Some(action) = self.policy.next(&obs.state, goal) else {
                out.push_str("the agent has no idea how to do that\n");
                return out;
            };
            let (next, _) = self.env.step(action).expect("episode in progress");
            out.push_str(&format!("  -> {}\n", self.world.action(action).name()));
            for l in next.footprint.lines() {
                out.push_str(&format!("     {l}\n"));
            }
            obs = next;
            if !obs.done && !seen.insert(obs.state.clone()) {
                out.push_str(&format!("{label}: stuck after {}\n", steps(obs.steps_taken)));
                return out;
            }
        }
        if obs.goal_reached {
            out.push_str(&format!("{label}: done in {}\n", steps(obs.steps_taken)));
        } else {
            out.push_str(&format!("{label}: gave up after {}\n", steps(obs.steps_taken)));
        }
        out
    }
}

fn steps(n: usize) -> String {
    if n == 1 {
        "1 step".to_string()
    } else {
        format!("{n} steps")
    }
}

/// Runs the REPL over arbitrary input and output streams.
pub fn cmd_demo<R: BufRead, W: Write>(config: &RunConfig, input: R, mut output: W) -> Result<(), HarnessError> {
    let world = load_world(config)?;
    let policy = match config.agent {
        AgentKind::Planner => DemoPolicy::Planner(world.clone()),
        AgentKind::Random => {
            return Err(HarnessError::Config("the demo needs a planner or a trained agent".into()));
        }
        AgentKind::QLearn | AgentKind::QLearnData => match AnyAgent::for_evaluation(config, &world)? {
            AnyAgent::Learner(agent) => DemoPolicy::Learned(Box::new(agent)),
            _ => unreachable!("learning kinds restore learners"),
        },
    };
    let mut demo = Demo::new(world, policy, config.max_steps);
    let io = |e: std::io::Error| HarnessError::Runtime(format!("terminal: {e}"));
    write!(output, "UbuntuWorld demo. Type `help` for requests.\n> ").map_err(io)?;
    output.flush().map_err(io)?;
    for line in input.lines() {
        let line = line.map_err(io)?;
        let (reply, go_on) = demo.handle(&line);
        output.write_all(reply.as_bytes()).map_err(io)?;
        if !go_on {
            return Ok(());
        }
        write!(output, "> ").map_err(io)?;
        output.flush().map_err(io)?;
    }
    writeln!(output).map_err(io)?;
    Ok(())
}
