//! Declarative world description: typed objects, predicates and STRIPS-style
//! action schemas, plus grounding and the state/goal semantics built on it.

mod parser;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::{parse_domain, serialize_domain};

/// The bundled reference domain.
pub const BUNDLED_DOMAIN: &str = include_str!("../../data/ubuntuworld.domain");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undeclared {kind} `{name}`")]
    Undeclared {
        line: usize,
        kind: &'static str,
        name: String,
    },
    #[error("line {line}: duplicate {kind} `{name}`")]
    Duplicate {
        line: usize,
        kind: &'static str,
        name: String,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("unknown grounded predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("action `{0}` is not applicable in this state")]
    NotApplicable(String),
    #[error("state has {got} values, the domain grounds {expected} predicates")]
    StateSize { expected: usize, got: usize },
}

/// A predicate instance. Grounded predicates carry object names only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub args: Vec<String>,
}

impl Predicate {
    pub fn new(name: impl Into<String>, args: &[&str]) -> Self {
        Predicate {
            name: name.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    /// Parses the whitespace-separated form used throughout, e.g. `open gedit file`.
    pub fn parse(text: &str) -> Option<Self> {
        let mut words = text.split_whitespace();
        let name = words.next()?.to_string();
        Some(Predicate {
            name,
            args: words.map(str::to_string).collect(),
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub params: Vec<(String, String)>,
}

/// Argument of a lifted literal: either an action parameter or a constant object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Param(String),
    Object(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Param(p) => write!(f, "?{p}"),
            Term::Object(o) => f.write_str(o),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub predicate: String,
    pub args: Vec<Term>,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        f.write_str(&self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    /// `(name, type)` pairs; names are stored without the leading `?`.
    pub params: Vec<(String, String)>,
    pub preconditions: Vec<Literal>,
    pub effects: Vec<Literal>,
    /// Man-page style documentation, matched against forum answers.
    pub doc: String,
    pub footprint_success: String,
    /// Fallback failure text when no precondition-specific template exists.
    pub footprint_failure: String,
    /// Failure text keyed by the precondition literal that did not hold.
    pub failure_footprints: Vec<(Literal, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub types: Vec<String>,
    /// `(object, type)` in declaration order.
    pub objects: Vec<(String, String)>,
    pub predicates: Vec<PredicateSchema>,
    /// Predicates true in the canonical base state; everything else is false.
    pub init: Vec<Predicate>,
    pub schemas: Vec<ActionSchema>,
}

impl Domain {
    pub fn bundled() -> Domain {
        parse_domain(BUNDLED_DOMAIN).expect("bundled domain parses")
    }

    pub fn objects_of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.objects
            .iter()
            .filter(move |(_, t)| t == ty)
            .map(|(o, _)| o.as_str())
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }
}

/// Index of a grounded action in the canonical action order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedAction {
    /// Index into `Domain::schemas`.
    pub schema: usize,
    pub schema_name: String,
    /// Objects bound to the schema parameters, in parameter order.
    pub binding: Vec<String>,
    pub preconditions: Vec<(usize, bool)>,
    pub effects: Vec<(usize, bool)>,
    /// Failure footprints keyed by grounded precondition, in precondition order.
    failure_footprints: Vec<((usize, bool), String)>,
    footprint_success: String,
    footprint_failure: String,
}

impl GroundedAction {
    pub fn name(&self) -> String {
        format!("{}({})", self.schema_name, self.binding.join(","))
    }
}

/// Grounds every predicate and action schema over the typed objects.
///
/// Predicates come out in declaration order (schema, then object order);
/// actions sorted by schema name and then by bound object names.
pub fn ground(domain: &Domain) -> (Vec<Predicate>, Vec<GroundedAction>) {
    let mut atoms = Vec::new();
    for p in &domain.predicates {
        for combo in bindings(domain, &p.params) {
            atoms.push(Predicate {
                name: p.name.clone(),
                args: combo,
            });
        }
    }
    let index: HashMap<&Predicate, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();

    let mut actions = Vec::new();
    for (si, schema) in domain.schemas.iter().enumerate() {
        for binding in bindings(domain, &schema.params) {
            let subst = |lit: &Literal| -> (usize, bool) {
                let atom = Predicate {
                    name: lit.predicate.clone(),
                    args: lit
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Object(o) => o.clone(),
                            Term::Param(p) => {
                                let k = schema.params.iter().position(|(n, _)| n == p).expect("validated param");
                                binding[k].clone()
                            }
                        })
                        .collect(),
                };
                (*index.get(&atom).expect("validated predicate"), lit.positive)
            };
            let fill = |text: &str| -> String {
                let mut out = text.to_string();
                for ((name, _), obj) in schema.params.iter().zip(&binding) {
                    out = out.replace(&format!("{{?{name}}}"), obj);
                }
                out
            };
            actions.push(GroundedAction {
                schema: si,
                schema_name: schema.name.clone(),
                preconditions: schema.preconditions.iter().map(subst).collect(),
                effects: schema.effects.iter().map(subst).collect(),
                failure_footprints: schema
                    .failure_footprints
                    .iter()
                    .map(|(lit, text)| (subst(lit), fill(text)))
                    .collect(),
                footprint_success: fill(&schema.footprint_success),
                footprint_failure: fill(&schema.footprint_failure),
                binding,
            });
        }
    }
    actions.sort_by(|a, b| a.schema_name.cmp(&b.schema_name).then_with(|| a.binding.cmp(&b.binding)));
    (atoms, actions)
}

fn bindings(domain: &Domain, params: &[(String, String)]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for (_, ty) in params {
        let objs: Vec<&str> = domain.objects_of_type(ty).collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                objs.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.to_string());
                    next
                })
            })
            .collect();
    }
    out
}

/// Total truth assignment over the grounded predicates, in grounding order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct State(Vec<bool>);

impl State {
    pub fn from_values(values: Vec<bool>) -> Self {
        State(values)
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, atom: usize) -> bool {
        self.0[atom]
    }

    pub fn with(&self, atom: usize, value: bool) -> State {
        let mut next = self.clone();
        next.0[atom] = value;
        next
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Compact `0`/`1` rendering in grounding order.
    pub fn to_bits(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bits(bits: &str) -> Option<Self> {
        bits.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(State)
    }
}

/// Partial assignment over grounded predicates, kept sorted by predicate index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Goal(Vec<(usize, bool)>);

impl Goal {
    pub fn new(mut literals: Vec<(usize, bool)>) -> Self {
        literals.sort_unstable();
        literals.dedup();
        Goal(literals)
    }

    pub fn empty() -> Self {
        Goal(Vec::new())
    }

    pub fn literals(&self) -> &[(usize, bool)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A domain together with its grounding; the shared, immutable handle every
/// other component works against.
#[derive(Debug)]
pub struct World {
    domain: Domain,
    atoms: Vec<Predicate>,
    atom_index: HashMap<Predicate, usize>,
    actions: Vec<GroundedAction>,
    action_index: HashMap<String, ActionId>,
}

impl World {
    pub fn new(domain: Domain) -> Arc<World> {
        let (atoms, actions) = ground(&domain);
        let atom_index = atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let action_index = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name(), ActionId(i)))
            .collect();
        Arc::new(World {
            domain,
            atoms,
            atom_index,
            actions,
            action_index,
        })
    }

    pub fn bundled() -> Arc<World> {
        World::new(Domain::bundled())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn atoms(&self) -> &[Predicate] {
        &self.atoms
    }

    pub fn actions(&self) -> &[GroundedAction] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &GroundedAction {
        &self.actions[id.0]
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len()).map(ActionId)
    }

    /// Looks up an action by its display name, e.g. `AptGet(gedit)` or `Sudo_On()`.
    /// The empty parentheses may be omitted for parameterless actions.
    pub fn action_id(&self, name: &str) -> Result<ActionId, DomainError> {
        let key = if name.contains('(') {
            name.replace(' ', "")
        } else {
            format!("{name}()")
        };
        self.action_index
            .get(&key)
            .copied()
            .ok_or_else(|| DomainError::UnknownAction(name.to_string()))
    }

    pub fn atom(&self, predicate: &Predicate) -> Result<usize, DomainError> {
        self.atom_index
            .get(predicate)
            .copied()
            .ok_or_else(|| DomainError::UnknownPredicate(predicate.to_string()))
    }

    pub fn atom_by_text(&self, text: &str) -> Result<usize, DomainError> {
        let p = Predicate::parse(text).ok_or_else(|| DomainError::UnknownPredicate(text.to_string()))?;
        self.atom(&p)
    }

    /// The canonical base state given by the domain's `init` section.
    pub fn initial_state(&self) -> State {
        let mut values = vec![false; self.atoms.len()];
        for p in &self.domain.init {
            values[self.atom_index[p]] = true;
        }
        State(values)
    }

    /// Builds a state where exactly the listed predicates hold.
    pub fn state_from_true<S: AsRef<str>>(&self, true_atoms: &[S]) -> Result<State, DomainError> {
        let mut values = vec![false; self.atoms.len()];
        for t in true_atoms {
            values[self.atom_by_text(t.as_ref())?] = true;
        }
        Ok(State(values))
    }

    /// Builds a goal from `(predicate text, value)` pairs.
    pub fn goal_from<S: AsRef<str>>(&self, literals: &[(S, bool)]) -> Result<Goal, DomainError> {
        let lits = literals
            .iter()
            .map(|(t, v)| Ok((self.atom_by_text(t.as_ref())?, *v)))
            .collect::<Result<Vec<_>, DomainError>>()?;
        Ok(Goal::new(lits))
    }

    pub fn check_state(&self, state: &State) -> Result<(), DomainError> {
        if state.len() != self.atoms.len() {
            return Err(DomainError::StateSize {
                expected: self.atoms.len(),
                got: state.len(),
            });
        }
        Ok(())
    }

    pub fn check_goal(&self, goal: &Goal) -> Result<(), DomainError> {
        match goal.literals().iter().find(|(i, _)| *i >= self.atoms.len()) {
            Some((i, _)) => Err(DomainError::UnknownPredicate(format!("#{i}"))),
            None => Ok(()),
        }
    }

    pub fn applicable(&self, state: &State, action: ActionId) -> bool {
        self.actions[action.0]
            .preconditions
            .iter()
            .all(|&(atom, value)| state.get(atom) == value)
    }

    /// The first precondition that does not hold, if any.
    pub fn failed_precondition(&self, state: &State, action: ActionId) -> Option<(usize, bool)> {
        self.actions[action.0]
            .preconditions
            .iter()
            .copied()
            .find(|&(atom, value)| state.get(atom) != value)
    }

    pub fn apply(&self, state: &State, action: ActionId) -> Result<State, DomainError> {
        if !self.applicable(state, action) {
            return Err(DomainError::NotApplicable(self.actions[action.0].name()));
        }
        Ok(self.apply_effects(state, action))
    }

    /// Applies the effects without checking preconditions.
    pub(crate) fn apply_effects(&self, state: &State, action: ActionId) -> State {
        let mut next = state.clone();
        for &(atom, value) in &self.actions[action.0].effects {
            next.0[atom] = value;
        }
        next
    }

    pub fn satisfies(&self, state: &State, goal: &Goal) -> bool {
        goal.literals().iter().all(|&(atom, value)| state.get(atom) == value)
    }

    /// Terminal text for an action outcome in `state` (the state before execution).
    pub fn footprint(&self, state: &State, action: ActionId) -> (bool, String) {
        let a = &self.actions[action.0];
        match self.failed_precondition(state, action) {
            None => (true, a.footprint_success.clone()),
            Some(lit) => {
                let text = a
                    .failure_footprints
                    .iter()
                    .find(|(l, _)| *l == lit)
                    .map(|(_, t)| t.clone())
                    .unwrap_or_else(|| a.footprint_failure.clone());
                (false, text)
            }
        }
    }

    /// Renders a state one predicate per line, `name : True|False`.
    pub fn describe_state(&self, state: &State) -> String {
        self.atoms
            .iter()
            .zip(state.values())
            .map(|(p, v)| format!("{p} : {}\n", if *v { "True" } else { "False" }))
            .collect()
    }

    pub fn describe_goal(&self, goal: &Goal) -> String {
        goal.literals()
            .iter()
            .map(|&(i, v)| format!("{}={}", self.atoms[i], if v { "T" } else { "F" }))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Parses `pred args=T, pred args=F` (the inverse of [`World::describe_goal`]).
    /// A bare predicate without `=` means true.
    pub fn parse_goal(&self, text: &str) -> Result<Goal, DomainError> {
        let mut lits = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (atom, value) = match part.rsplit_once('=') {
                Some((a, v)) => (a.trim(), parse_truth(v.trim()).ok_or_else(|| DomainError::UnknownPredicate(part.to_string()))?),
                None => (part, true),
            };
            lits.push((self.atom_by_text(atom)?, value));
        }
        Ok(Goal::new(lits))
    }

    /// Parses a comma-separated list of true predicates into a total state.
    pub fn parse_state(&self, text: &str) -> Result<State, DomainError> {
        let atoms: Vec<&str> = text.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        self.state_from_true(&atoms)
    }

    /// Stable identifier of the grounded domain, used to match snapshots.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for a in &self.atoms {
            h.update(a.to_string().as_bytes());
            h.update(b"\n");
        }
        for a in &self.actions {
            h.update(a.name().as_bytes());
            h.update(b"\n");
        }
        hex::encode(&h.finalize()[..8])
    }
}

fn parse_truth(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "t" | "true" | "1" => Some(true),
        "f" | "false" | "0" => Some(false),
        _ => None,
    }
}
