//! Generators and brute-force oracles shared by the integration tests and
//! the acceptance runner. Nothing here calls into the library's own
//! composition or search code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use strata::lts::{ActionLabel, Lts, SyncSet, Transition};
use strata::prop::SymbolTable;
use strata::value::{Domain, EnumType};

pub fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(rel)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const ACTION_POOL: [&str; 5] = ["a", "b", "c", "d", "e"];

fn label(name: &str) -> ActionLabel {
    if name == "tau" {
        ActionLabel::Tau
    } else {
        ActionLabel::visible(name).unwrap()
    }
}

/// Random LTS with at most 6 states and at most 4 actions, possibly
/// including the internal action.
pub fn random_lts(r: &mut ChaCha8Rng, prefix: &str) -> Lts {
    let n = r.gen_range(1..=6);
    let mut pool: Vec<&str> = ACTION_POOL.to_vec();
    pool.push("tau");
    pool.shuffle(r);
    let k = r.gen_range(1..=4);
    let actions: Vec<ActionLabel> = pool[..k].iter().map(|a| label(a)).collect();
    let density = r.gen_range(0.05..0.5);
    let mut transitions = Vec::new();
    for s in 0..n {
        for a in &actions {
            for t in 0..n {
                if r.gen_bool(density) {
                    transitions.push(Transition {
                        source: s,
                        action: a.clone(),
                        target: t,
                    });
                }
            }
        }
    }
    let names = (0..n).map(|i| format!("{prefix}{i}")).collect();
    let initial = r.gen_range(0..n);
    Lts::new(names, actions.into_iter().collect(), transitions, initial).unwrap()
}

/// Random sync set over visible actions, drawn from both alphabets and a
/// few actions neither operand knows.
pub fn random_sync(r: &mut ChaCha8Rng, p: &Lts, q: &Lts) -> SyncSet {
    let mut candidates: BTreeSet<ActionLabel> = p.alphabet().union(q.alphabet()).cloned().collect();
    candidates.insert(label("e"));
    let chosen: Vec<ActionLabel> = candidates
        .into_iter()
        .filter(|a| !a.is_internal() && r.gen_bool(0.5))
        .collect();
    SyncSet::new(chosen).unwrap()
}

pub type Edge = (String, String, String);

/// Action, target pair and the rule that produced it.
type Move = (ActionLabel, (usize, usize), u8);

pub struct Product {
    /// Composed state names reachable from the initial pair.
    pub states: BTreeSet<String>,
    pub edges: BTreeSet<Edge>,
    /// Edges out of reachable states tagged with the rule numbers that
    /// produced them (1 left, 2 right, 3 both).
    pub rules: BTreeMap<Edge, BTreeSet<u8>>,
}

fn pair(p: &Lts, q: &Lts, a: usize, b: usize) -> String {
    format!("({},{})", p.state_name(a), q.state_name(b))
}

/// The whole product built rule by rule, then cut down to what the
/// initial pair reaches.
pub fn product_oracle(p: &Lts, q: &Lts, sync: &SyncSet) -> Product {
    let has = |l: &Lts, s: usize, a: &ActionLabel, t: usize| {
        l.transitions()
            .iter()
            .any(|x| x.source == s && &x.action == a && x.target == t)
    };
    let alphabet: BTreeSet<ActionLabel> = p.alphabet().union(q.alphabet()).cloned().collect();
    let mut all: BTreeMap<(usize, usize), Vec<Move>> = BTreeMap::new();
    for a in 0..p.state_count() {
        for b in 0..q.state_count() {
            let out = all.entry((a, b)).or_default();
            for act in &alphabet {
                let synced = sync.contains(act);
                for a2 in 0..p.state_count() {
                    for b2 in 0..q.state_count() {
                        if !synced && b2 == b && has(p, a, act, a2) {
                            out.push((act.clone(), (a2, b2), 1));
                        }
                        if !synced && a2 == a && has(q, b, act, b2) {
                            out.push((act.clone(), (a2, b2), 2));
                        }
                        if synced && has(p, a, act, a2) && has(q, b, act, b2) {
                            out.push((act.clone(), (a2, b2), 3));
                        }
                    }
                }
            }
        }
    }
    let start = (p.initial(), q.initial());
    let mut seen: HashSet<(usize, usize)> = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(s) = stack.pop() {
        for (_, t, _) in &all[&s] {
            if seen.insert(*t) {
                stack.push(*t);
            }
        }
    }
    let mut out = Product {
        states: BTreeSet::new(),
        edges: BTreeSet::new(),
        rules: BTreeMap::new(),
    };
    for &(a, b) in &seen {
        out.states.insert(pair(p, q, a, b));
        for (act, (a2, b2), rule) in &all[&(a, b)] {
            let e = (pair(p, q, a, b), act.to_string(), pair(p, q, *a2, *b2));
            out.edges.insert(e.clone());
            out.rules.entry(e).or_default().insert(*rule);
        }
    }
    out
}

pub fn named_edges(l: &Lts) -> BTreeSet<Edge> {
    l.transitions()
        .iter()
        .map(|t| {
            (
                l.state_name(t.source).to_string(),
                t.action.to_string(),
                l.state_name(t.target).to_string(),
            )
        })
        .collect()
}

/// Random LTS with up to `max_states` states whose state `i` carries one
/// integer in 0..=9.
pub fn random_model(r: &mut ChaCha8Rng, max_states: usize) -> (Lts, Vec<Vec<i64>>) {
    let n = r.gen_range(1..=max_states);
    let actions = [label("a"), label("b"), ActionLabel::Tau];
    let out_degree: f64 = r.gen_range(0.5..3.0);
    let mut transitions = Vec::new();
    for s in 0..n {
        let k = (out_degree + r.gen_range(-0.5..0.5)).max(0.0).round() as usize;
        for _ in 0..k {
            // Mostly local edges so that paths get long.
            let t = if r.gen_bool(0.8) {
                (s + r.gen_range(1..=3)).min(n - 1)
            } else {
                r.gen_range(0..n)
            };
            transitions.push(Transition {
                source: s,
                action: actions[r.gen_range(0..actions.len())].clone(),
                target: t,
            });
        }
    }
    let names = (0..n).map(|i| format!("s{i}")).collect();
    let values = (0..n).map(|_| vec![r.gen_range(0..=9)]).collect();
    let lts = Lts::new(names, actions.into_iter().collect(), transitions, 0).unwrap();
    (lts, values)
}

/// Length of the shortest path from the initial state to a state where
/// `bad` holds, by repeated relaxation of a distance table.
pub fn shortest_violation(l: &Lts, bad: impl Fn(usize) -> bool) -> Option<usize> {
    let n = l.state_count();
    let mut dist = vec![usize::MAX; n];
    dist[l.initial()] = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for t in l.transitions() {
            if dist[t.source] != usize::MAX && dist[t.source] + 1 < dist[t.target] {
                dist[t.target] = dist[t.source] + 1;
                changed = true;
            }
        }
    }
    (0..n).filter(|&s| bad(s) && dist[s] != usize::MAX).map(|s| dist[s]).min()
}

/// Scope for generated properties: integers `x` and `y`, flag `b`, an enum
/// `mode` and a component `Ctl` with three locations.
pub fn property_scope() -> SymbolTable {
    let mut t = SymbolTable::new();
    t.declare_var("x", Domain::int(0, 9));
    t.declare_var("y", Domain::int(-5, 5));
    t.declare_var("b", Domain::Bool);
    let mode = Arc::new(EnumType {
        name: "Mode".into(),
        constants: vec![("OFF".into(), None), ("LOW".into(), Some(1)), ("HIGH".into(), Some(3))],
    });
    t.declare_var("mode", Domain::Enum(mode));
    t.declare_component("Ctl", vec!["idle".into(), "busy".into(), "done".into()]);
    t
}

fn atom(r: &mut ChaCha8Rng) -> String {
    const OPS: [&str; 6] = ["==", "!=", "<", "<=", ">", ">="];
    let op = OPS[r.gen_range(0..OPS.len())];
    match r.gen_range(0..9) {
        0 => format!("x {op} {}", r.gen_range(0..10)),
        1 => format!("{} {op} y", r.gen_range(-5..6)),
        2 => format!("x - y {op} {}", r.gen_range(-10..10)),
        3 => "b".into(),
        4 => format!("b {} {}", ["==", "!="][r.gen_range(0..2)], r.gen_bool(0.5)),
        5 => format!("mode {} {}", ["==", "!="][r.gen_range(0..2)], ["OFF", "LOW", "HIGH"][r.gen_range(0..3)]),
        6 => {
            let k = r.gen_range(1..=4);
            let set: Vec<String> = (0..k).map(|_| r.gen_range(0..10).to_string()).collect();
            format!("x in {{{}}}", set.join(", "))
        }
        7 => format!("Ctl.{}", ["idle", "busy", "done"][r.gen_range(0..3)]),
        _ => ["true", "false"][r.gen_range(0..2)].into(),
    }
}

fn expr(r: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || r.gen_bool(0.3) {
        return atom(r);
    }
    let sub = |r: &mut ChaCha8Rng| {
        let e = expr(r, depth - 1);
        if r.gen_bool(0.5) {
            format!("({e})")
        } else {
            e
        }
    };
    match r.gen_range(0..4) {
        0 => format!("not ({})", expr(r, depth - 1)),
        1 => format!("{} and {}", sub(r), sub(r)),
        2 => format!("{} or {}", sub(r), sub(r)),
        _ => format!("({}) imply ({})", expr(r, depth - 1), expr(r, depth - 1)),
    }
}

/// A random well-typed property statement over [`property_scope`].
pub fn random_property(r: &mut ChaCha8Rng) -> String {
    let modality = ["always", "never", "initially", "A[]"][r.gen_range(0..4)];
    let mut body = expr(r, 4);
    // Initial-state properties cannot talk about locations.
    while modality == "initially" && body.contains("Ctl.") {
        body = expr(r, 4);
    }
    let rank = if r.gen_bool(0.2) {
        format!(" rank {}", r.gen_range(0..5))
    } else {
        String::new()
    };
    format!("Property P-{}{rank}: {modality} {body};", r.gen_range(0..100))
}

/// Report JSON with the timestamp line removed.
pub fn without_timestamp(json: &str) -> String {
    json.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}
