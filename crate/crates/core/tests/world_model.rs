mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ubuntuworld::domain::{parse_domain, serialize_domain, ActionSchema, Domain, Literal, PredicateSchema, Term};
use ubuntuworld::environment::{reward_fn, GoalMix};
use ubuntuworld::planner::{plan_optimal, reachable_states};
use ubuntuworld::{ActionId, Goal, ProblemGenerator, State, World};

fn state(mask: u32) -> State {
    State::from_bits(&common::bits(mask)).unwrap()
}

#[test]
fn grounded_actions_match_hand_model_on_all_states() {
    let world = World::bundled();
    let names: Vec<String> = world.actions().iter().map(|a| a.name()).collect();
    assert_eq!(names, common::action_names());
    for mask in 0..256u32 {
        let s = state(mask);
        for id in world.action_ids() {
            let expected = common::step(mask, &names[id.0]);
            assert_eq!(world.applicable(&s, id), expected.is_some(), "{} in {mask:08b}", names[id.0]);
            match expected {
                Some(n) => assert_eq!(common::mask_of(world.apply(&s, id).unwrap().values()), n),
                None => assert!(world.apply(&s, id).is_err()),
            }
        }
    }
}

#[test]
fn reachable_component_is_strongly_connected() {
    let world = World::bundled();
    let from_init = reachable_states(&world, &world.initial_state());
    assert_eq!(from_init.len(), 108);
    let set: HashSet<&State> = from_init.iter().collect();
    for s in &from_init {
        let mut from_s = reachable_states(&world, s);
        assert_eq!(from_s.len(), 108);
        from_s.retain(|t| set.contains(t));
        assert_eq!(from_s.len(), 108);
    }
    let dist = common::distances(common::init_mask());
    assert_eq!(dist.iter().filter(|d| **d != u32::MAX).count(), 108);
}

#[test]
fn generated_problems_are_valid_against_the_hand_model() {
    let world = World::bundled();
    let reachable = common::distances(common::init_mask());
    for mix in [GoalMix::default(), GoalMix::family_only("open")] {
        let gen = ProblemGenerator::new(world.clone(), mix);
        let problems = gen.generate_many(&mut ChaCha8Rng::seed_from_u64(99), 1000).unwrap();
        for p in problems {
            let mask = common::mask_of(p.start.values());
            assert_ne!(reachable[mask as usize], u32::MAX);
            let goal: Vec<(u32, bool)> = p.goal.literals().iter().map(|&(i, v)| (1 << i, v)).collect();
            assert!(!goal.iter().all(|&(bit, v)| (mask & bit != 0) == v), "goal holds at start");
            let oracle = common::shortest(mask, &goal).expect("oracle finds a plan");
            assert!(oracle >= 1);
            assert_eq!(plan_optimal(&world, &p.start, &p.goal).unwrap().cost() as u32, oracle);
        }
    }
}

#[test]
fn open_file_tasks_span_one_to_five_steps() {
    let world = World::bundled();
    let gen = ProblemGenerator::new(world.clone(), GoalMix::family_only("open"));
    let mut lengths = HashSet::new();
    for s in gen.reachable_states() {
        for g in gen.family_goals() {
            if !world.satisfies(s, g) {
                lengths.insert(plan_optimal(&world, s, g).unwrap().cost());
            }
        }
    }
    assert_eq!(lengths, (1..=5).collect());
}

fn any_state() -> impl Strategy<Value = u32> {
    0u32..256
}

proptest! {
    #[test]
    fn effects_touch_only_their_atoms(mask in any_state(), action in 0usize..16) {
        let world = World::bundled();
        let s = state(mask);
        let id = ActionId(action);
        let a = world.action(id);
        if let Ok(next) = world.apply(&s, id) {
            let touched: HashSet<usize> = a.effects.iter().map(|(i, _)| *i).collect();
            for i in 0..s.len() {
                if touched.contains(&i) {
                    let want = a.effects.iter().find(|(j, _)| *j == i).unwrap().1;
                    prop_assert_eq!(next.get(i), want);
                } else {
                    prop_assert_eq!(next.get(i), s.get(i));
                }
            }
            prop_assert!(world.footprint(&s, id).0);
        } else {
            prop_assert!(!world.footprint(&s, id).0);
            prop_assert!(world.failed_precondition(&s, id).is_some());
        }
    }

    #[test]
    fn rewards_take_only_the_four_scheme_values(mask in any_state(), action in 0usize..16, atom in 0usize..8, value: bool) {
        let world = World::bundled();
        let s = state(mask);
        let id = ActionId(action);
        let next = world.apply(&s, id).unwrap_or_else(|_| s.clone());
        let goal = Goal::new(vec![(atom, value)]);
        let r = reward_fn(&world, &s, id, &next, &goal);
        let changed = next != s;
        let reached = next.get(atom) == value;
        let expected = -10.0 + if changed { 5.0 } else { 0.0 } + if reached { 100.0 } else { 0.0 };
        prop_assert_eq!(r, expected);
        prop_assert!([-10.0, -5.0, 90.0, 95.0].contains(&r));
    }

    #[test]
    fn generated_domains_round_trip(domain in arb_domain()) {
        let text = serialize_domain(&domain);
        let parsed = parse_domain(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&parsed, &domain);
        prop_assert_eq!(serialize_domain(&parsed), text);
    }
}

const TYPES: [&str; 2] = ["tool", "thing"];

fn arb_text() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9 ().:'/-]{0,20}[a-z0-9.]"
}

fn arb_footprint() -> impl Strategy<Value = String> {
    prop::collection::vec(arb_text(), 1..3).prop_map(|parts| parts.join("\n"))
}

/// Small random domain: two types with one or two objects each, up to four
/// predicates with up to two typed parameters, up to three actions.
fn arb_domain() -> impl Strategy<Value = Domain> {
    let objects = (1usize..=2, 1usize..=2);
    let predicates = prop::collection::vec(prop::collection::vec(0usize..2, 0..=2), 1..=4);
    (objects, predicates).prop_flat_map(|((n0, n1), pred_types)| {
        let objects: Vec<(String, String)> = (0..n0)
            .map(|i| (format!("t{i}"), TYPES[0].to_string()))
            .chain((0..n1).map(|i| (format!("h{i}"), TYPES[1].to_string())))
            .collect();
        let predicates: Vec<PredicateSchema> = pred_types
            .iter()
            .enumerate()
            .map(|(i, tys)| PredicateSchema {
                name: format!("p{i}"),
                params: tys.iter().enumerate().map(|(j, t)| (format!("x{j}"), TYPES[*t].to_string())).collect(),
            })
            .collect();
        let actions = prop::collection::vec(arb_action(predicates.clone(), objects.clone()), 0..=3);
        let init_bits = prop::collection::vec(any::<bool>(), 8);
        (Just(objects), Just(predicates), actions, init_bits)
    })
    .prop_map(|(objects, predicates, actions, init_bits)| {
        let mut init = Vec::new();
        let mut k = 0;
        for p in &predicates {
            if p.params.is_empty() {
                if init_bits[k % init_bits.len()] {
                    init.push(ubuntuworld::Predicate::new(p.name.clone(), &[]));
                }
                k += 1;
            }
        }
        let schemas = actions
            .into_iter()
            .enumerate()
            .map(|(i, mut a)| {
                a.name = format!("Act{i}");
                a
            })
            .collect();
        Domain {
            types: TYPES.iter().map(|t| t.to_string()).collect(),
            objects,
            predicates,
            init,
            schemas,
        }
    })
}

fn arb_action(predicates: Vec<PredicateSchema>, objects: Vec<(String, String)>) -> impl Strategy<Value = ActionSchema> {
    let params = prop::collection::vec(0usize..2, 0..=2);
    (params, prop::collection::vec((0..predicates.len(), any::<bool>(), any::<u64>()), 0..=3),
        prop::collection::vec((0..predicates.len(), any::<bool>(), any::<u64>()), 0..=3),
        arb_text(), arb_footprint(), arb_footprint(), prop::collection::vec((any::<u64>(), arb_footprint()), 0..=2))
        .prop_map(move |(param_types, pre, eff, doc, ok, err, keyed)| {
            let params: Vec<(String, String)> =
                param_types.iter().enumerate().map(|(i, t)| (format!("a{i}"), TYPES[*t].to_string())).collect();
            let literal = |(p, positive, pick): (usize, bool, u64)| {
                let schema = &predicates[p];
                let args = schema
                    .params
                    .iter()
                    .enumerate()
                    .map(|(j, (_, ty))| {
                        let mut options: Vec<Term> =
                            params.iter().filter(|(_, t)| t == ty).map(|(n, _)| Term::Param(n.clone())).collect();
                        options.extend(objects.iter().filter(|(_, t)| t == ty).map(|(o, _)| Term::Object(o.clone())));
                        options[((pick >> (8 * j)) as usize) % options.len()].clone()
                    })
                    .collect();
                Literal { positive, predicate: schema.name.clone(), args }
            };
            let dedup = |lits: Vec<Literal>| {
                let mut seen = HashSet::new();
                lits.into_iter()
                    .filter(|l| seen.insert((l.predicate.clone(), l.args.clone())))
                    .collect::<Vec<_>>()
            };
            let preconditions = dedup(pre.into_iter().map(literal).collect());
            let effects = dedup(eff.into_iter().map(literal).collect());
            let mut failure_footprints = Vec::new();
            if !preconditions.is_empty() {
                let mut used = HashSet::new();
                for (pick, text) in keyed {
                    let lit = preconditions[(pick as usize) % preconditions.len()].clone();
                    if used.insert(lit.clone()) {
                        failure_footprints.push((lit, text));
                    }
                }
            }
            ActionSchema {
                name: String::new(),
                params,
                preconditions,
                effects,
                doc,
                footprint_success: ok,
                footprint_failure: err,
                failure_footprints,
            }
        })
}
