//! Explicit-state invariant checking with shortest counterexamples.

use std::collections::VecDeque;
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::explore::StateSpace;
use crate::lts::{Lts, StateId, Trace, Transition};
use crate::prop::{Modality, Property};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    AssumptionViolated,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
            Status::AssumptionViolated => "ASSUMPTION_VIOLATED",
            Status::Error => "ERROR",
        }
    }

    pub const ALL: [Status; 5] = [
        Status::Pass,
        Status::Fail,
        Status::Skipped,
        Status::AssumptionViolated,
        Status::Error,
    ];
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub property: String,
    pub witness: Option<Trace>,
    pub states_explored: usize,
    pub duration: Duration,
    pub message: Option<String>,
}

impl Verdict {
    fn new(status: Status, p: &Property, states: usize, started: Instant) -> Self {
        Verdict {
            status,
            property: p.name.clone(),
            witness: None,
            states_explored: states,
            duration: started.elapsed(),
            message: None,
        }
    }

    pub fn skipped(property: &str, reason: &str) -> Self {
        Verdict {
            status: Status::Skipped,
            property: property.to_string(),
            witness: None,
            states_explored: 0,
            duration: Duration::ZERO,
            message: Some(reason.to_string()),
        }
    }

    pub fn error(property: &str, message: String) -> Self {
        Verdict {
            status: Status::Error,
            property: property.to_string(),
            witness: None,
            states_explored: 0,
            duration: Duration::ZERO,
            message: Some(message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Threads used to evaluate the property over the state space.
    pub workers: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { workers: 1 }
    }
}

/// Shortest path (BFS over the transition order) from the initial state to
/// a state satisfying `target`. Also returns how many states were dequeued.
pub fn shortest_path_to<F>(lts: &Lts, mut target: F) -> (Option<Trace>, usize)
where
    F: FnMut(StateId) -> bool,
{
    let n = lts.state_count();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let start = lts.initial();
    seen[start] = true;
    queue.push_back(start);
    let mut dequeued = 0;
    while let Some(s) = queue.pop_front() {
        dequeued += 1;
        if target(s) {
            let mut steps: Vec<Transition> = Vec::new();
            let mut at = s;
            while let Some(ti) = parent[at] {
                let t = lts.transitions()[ti].clone();
                at = t.source;
                steps.push(t);
            }
            steps.reverse();
            return (Some(Trace { origin: start, steps }), dequeued);
        }
        for ti in lts.successor_range(s) {
            let t = &lts.transitions()[ti];
            if !seen[t.target] {
                seen[t.target] = true;
                parent[t.target] = Some(ti);
                queue.push_back(t.target);
            }
        }
    }
    (None, dequeued)
}

/// Per-state violation flags; the synthetic root is never violating.
fn violations(space: &StateSpace, p: &Property, opts: CheckOptions) -> Result<Vec<bool>, String> {
    let eval = |s: StateId| -> Result<bool, String> {
        match space.values(s) {
            None => Ok(false),
            Some(v) => p.violated_by(v).map_err(|e| e.to_string()),
        }
    };
    let n = space.state_count();
    if opts.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| (0..n).into_par_iter().map(eval).collect())
    } else {
        (0..n).map(eval).collect()
    }
}

/// `always`/`never` over every reachable state; `initially` is delegated to
/// [`check_init`].
pub fn check_invariant(space: &StateSpace, p: &Property) -> Verdict {
    check_invariant_with(space, p, CheckOptions::default())
}

pub fn check_invariant_with(space: &StateSpace, p: &Property, opts: CheckOptions) -> Verdict {
    if p.modality == Modality::InitOnly {
        return check_init(space, p);
    }
    let started = Instant::now();
    let bad = match violations(space, p, opts) {
        Ok(b) => b,
        Err(m) => {
            let mut v = Verdict::new(Status::Error, p, 0, started);
            v.message = Some(m);
            return v;
        }
    };
    let (trace, dequeued) = shortest_path_to(&space.lts, |s| bad[s]);
    match trace {
        None => Verdict::new(Status::Pass, p, dequeued, started),
        Some(t) => {
            let mut v = Verdict::new(Status::Fail, p, dequeued, started);
            v.witness = Some(t);
            v
        }
    }
}

/// Every admissible initial valuation satisfies the body.
pub fn check_init(space: &StateSpace, p: &Property) -> Verdict {
    let started = Instant::now();
    let mut checked = 0;
    for &s in &space.starts {
        checked += 1;
        let values = space.values(s).expect("start states carry values");
        match p.body.eval(values) {
            Err(e) => {
                let mut v = Verdict::new(Status::Error, p, checked, started);
                v.message = Some(e.to_string());
                return v;
            }
            Ok(true) => {}
            Ok(false) => {
                let mut v = Verdict::new(Status::Fail, p, checked, started);
                let origin = space.lts.initial();
                let steps = space
                    .lts
                    .successors(origin)
                    .iter()
                    .find(|t| t.target == s && origin != s)
                    .cloned()
                    .into_iter()
                    .collect();
                v.witness = Some(Trace { origin, steps });
                return v;
            }
        }
    }
    Verdict::new(Status::Pass, p, checked, started)
}

/// Does `t` start at the initial state and follow real transitions?
pub fn replay(lts: &Lts, t: &Trace) -> bool {
    t.origin == lts.initial()
        && t.is_connected()
        && t.steps
            .iter()
            .all(|s| lts.has_transition(s.source, &s.action, s.target))
}

/// Numbered witness steps `k: (locations) --action--> (locations)` followed
/// by the variables that changed. `view` gives a state's location summary
/// and its named variable values.
pub fn render_witness<V>(t: &Trace, view: V) -> Vec<String>
where
    V: Fn(StateId) -> (String, Vec<(String, String)>),
{
    let mut out = Vec::new();
    let (loc0, vars0) = view(t.origin);
    if t.steps.is_empty() {
        let vals: Vec<String> = vars0.iter().map(|(n, v)| format!("{n}={v}")).collect();
        out.push(format!("0: {loc0} {}", vals.join(" ")).trim_end().to_string());
        return out;
    }
    for (k, step) in t.steps.iter().enumerate() {
        let (la, va) = view(step.source);
        let (lb, vb) = view(step.target);
        let mut line = format!("{}: {la} --{}--> {lb}", k + 1, step.action);
        let deltas: Vec<String> = vb
            .iter()
            .filter_map(|(n, v)| match va.iter().find(|(m, _)| m == n) {
                Some((_, old)) if old == v => None,
                Some((_, old)) => Some(format!("{n}: {old} -> {v}")),
                None => Some(format!("{n} = {v}")),
            })
            .collect();
        if !deltas.is_empty() {
            line.push_str(&format!("  [{}]", deltas.join(", ")));
        }
        out.push(line);
    }
    out
}
