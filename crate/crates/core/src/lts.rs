//! Labelled transition systems, their parallel composition and exploration.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

pub type StateId = usize;

/// Name used for the internal action in renderings.
pub const TAU_NAME: &str = "tau";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("action names must be non-empty")]
    EmptyActionName,
    #[error("`{0}` is reserved for the internal action")]
    ReservedActionName(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(StateId),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("transition label `{0}` is not in the alphabet")]
    LabelNotInAlphabet(String),
    #[error("the internal action cannot be synchronized")]
    InternalInSyncSet,
    #[error("LTS has no states")]
    Empty,
    #[error("state limit of {0} exceeded")]
    StateLimit(usize),
}

/// An action of the global universe: the single internal action or a named
/// visible one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionLabel {
    Tau,
    Visible(Arc<str>),
}

impl ActionLabel {
    pub fn visible(name: &str) -> Result<Self, LtsError> {
        if name.is_empty() {
            return Err(LtsError::EmptyActionName);
        }
        if name == TAU_NAME {
            return Err(LtsError::ReservedActionName(name.to_string()));
        }
        Ok(ActionLabel::Visible(Arc::from(name)))
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, ActionLabel::Tau)
    }

    pub fn name(&self) -> &str {
        match self {
            ActionLabel::Tau => TAU_NAME,
            ActionLabel::Visible(n) => n,
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: StateId,
    pub action: ActionLabel,
    pub target: StateId,
}

/// Set of visible actions two operands must perform jointly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SyncSet {
    actions: BTreeSet<ActionLabel>,
}

impl SyncSet {
    pub fn new<I>(actions: I) -> Result<Self, LtsError>
    where
        I: IntoIterator<Item = ActionLabel>,
    {
        let actions: BTreeSet<_> = actions.into_iter().collect();
        if actions.contains(&ActionLabel::Tau) {
            return Err(LtsError::InternalInSyncSet);
        }
        Ok(SyncSet { actions })
    }

    pub fn from_names<'a, I>(names: I) -> Result<Self, LtsError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut actions = BTreeSet::new();
        for n in names {
            if n == TAU_NAME {
                return Err(LtsError::InternalInSyncSet);
            }
            actions.insert(ActionLabel::visible(n)?);
        }
        Ok(SyncSet { actions })
    }

    pub fn contains(&self, a: &ActionLabel) -> bool {
        self.actions.contains(a)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionLabel> {
        self.actions.iter()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// A finite labelled transition system.
///
/// States are identified by strings and addressed internally by dense
/// indices. Transitions are kept sorted by `(source, action, target)` so
/// every traversal visits successors in the same order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    states: Vec<String>,
    index: HashMap<String, StateId>,
    alphabet: BTreeSet<ActionLabel>,
    transitions: Vec<Transition>,
    outgoing: Vec<Range<usize>>,
    initial: StateId,
    arity: usize,
}

impl Lts {
    /// Builds a validated LTS. Transitions are deduplicated and sorted.
    pub fn new(
        states: Vec<String>,
        alphabet: BTreeSet<ActionLabel>,
        transitions: Vec<Transition>,
        initial: StateId,
    ) -> Result<Self, LtsError> {
        Self::with_arity(states, alphabet, transitions, initial, 1)
    }

    pub(crate) fn with_arity(
        states: Vec<String>,
        alphabet: BTreeSet<ActionLabel>,
        mut transitions: Vec<Transition>,
        initial: StateId,
        arity: usize,
    ) -> Result<Self, LtsError> {
        if states.is_empty() {
            return Err(LtsError::Empty);
        }
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(LtsError::DuplicateState(s.clone()));
            }
        }
        if initial >= states.len() {
            return Err(LtsError::StateOutOfRange(initial));
        }
        for t in &transitions {
            if t.source >= states.len() {
                return Err(LtsError::StateOutOfRange(t.source));
            }
            if t.target >= states.len() {
                return Err(LtsError::StateOutOfRange(t.target));
            }
            if !alphabet.contains(&t.action) {
                return Err(LtsError::LabelNotInAlphabet(t.action.to_string()));
            }
        }
        transitions.sort();
        transitions.dedup();
        let mut outgoing = vec![0..0; states.len()];
        let mut start = 0;
        while start < transitions.len() {
            let src = transitions[start].source;
            let mut end = start;
            while end < transitions.len() && transitions[end].source == src {
                end += 1;
            }
            outgoing[src] = start..end;
            start = end;
        }
        Ok(Lts {
            states,
            index,
            alphabet,
            transitions,
            outgoing,
            initial,
            arity,
        })
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn alphabet(&self) -> &BTreeSet<ActionLabel> {
        &self.alphabet
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn successors(&self, s: StateId) -> &[Transition] {
        &self.transitions[self.outgoing[s].clone()]
    }

    /// Indices into [`Lts::transitions`] of the transitions leaving `s`.
    pub fn successor_range(&self, s: StateId) -> std::ops::Range<usize> {
        self.outgoing[s].clone()
    }

    /// Number of components a composed system's state tuples carry.
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn has_transition(&self, source: StateId, action: &ActionLabel, target: StateId) -> bool {
        self.successors(source)
            .binary_search_by(|t| (&t.action, t.target).cmp(&(action, target)))
            .is_ok()
    }

    /// States on some directed path from the initial state.
    pub fn reachable_states(&self) -> BTreeSet<StateId> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for t in self.successors(s) {
                if !seen[t.target] {
                    seen[t.target] = true;
                    queue.push_back(t.target);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter_map(|(i, &r)| r.then_some(i))
            .collect()
    }

    /// States reachable from `state` through internal moves only,
    /// including `state` itself.
    pub fn tau_closure(&self, state: &str) -> Result<BTreeSet<StateId>, LtsError> {
        let start = self
            .state_id(state)
            .ok_or_else(|| LtsError::UnknownState(state.to_string()))?;
        Ok(self.tau_closure_of(start))
    }

    pub fn tau_closure_of(&self, start: StateId) -> BTreeSet<StateId> {
        let mut out = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            for t in self.successors(s).iter().filter(|t| t.action.is_internal()) {
                if out.insert(t.target) {
                    stack.push(t.target);
                }
            }
        }
        out
    }

    /// Graphviz rendering; the internal action is printed as `tau`.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", escape_dot(name));
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  __start [shape=point];");
        for (i, s) in self.states.iter().enumerate() {
            let shape = if i == self.initial {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  s{} [label=\"{}\", shape={}];", i, escape_dot(s), shape);
        }
        let _ = writeln!(out, "  __start -> s{};", self.initial);
        for t in &self.transitions {
            let _ = writeln!(
                out,
                "  s{} -> s{} [label=\"{}\"];",
                t.source,
                t.target,
                escape_dot(t.action.name())
            );
        }
        out.push_str("}\n");
        out
    }

    /// Renames visible actions; names mapped to `None` become internal.
    pub fn relabel<F>(&self, mut f: F) -> Result<Lts, LtsError>
    where
        F: FnMut(&ActionLabel) -> ActionLabel,
    {
        let alphabet = self.alphabet.iter().map(&mut f).collect();
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition {
                source: t.source,
                action: f(&t.action),
                target: t.target,
            })
            .collect();
        Lts::with_arity(
            self.states.clone(),
            alphabet,
            transitions,
            self.initial,
            self.arity,
        )
    }
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders a composed state identifier, flattening a left operand that is
/// itself a composition.
pub fn pair_name(p: &str, p_arity: usize, q: &str) -> String {
    let left = if p_arity > 1 {
        &p[1..p.len() - 1]
    } else {
        p
    };
    format!("({left},{q})")
}

/// Which composition rule produced a composed transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Left operand moves alone on an unsynchronized action.
    Left,
    /// Right operand moves alone on an unsynchronized action.
    Right,
    /// Both operands move on a synchronized action.
    Sync,
}

/// Result of a composition together with the operand states of each
/// composed state.
#[derive(Debug, Clone)]
pub struct Composition {
    pub lts: Lts,
    pub pairs: Vec<(StateId, StateId)>,
}

/// Parallel composition restricted to the part reachable from the pair of
/// initial states.
pub fn parallel_compose(p: &Lts, q: &Lts, sync: &SyncSet) -> Result<Lts, LtsError> {
    compose_with_pairs(p, q, sync, usize::MAX).map(|c| c.lts)
}

/// Same as [`parallel_compose`] but also returns the operand pair of every
/// composed state and enforces a state ceiling.
pub fn compose_with_pairs(
    p: &Lts,
    q: &Lts,
    sync: &SyncSet,
    state_limit: usize,
) -> Result<Composition, LtsError> {
    if sync.contains(&ActionLabel::Tau) {
        return Err(LtsError::InternalInSyncSet);
    }
    let mut ids: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = vec![(p.initial, q.initial)];
    ids.insert((p.initial, q.initial), 0);
    let mut transitions = Vec::new();
    let mut next = 0;
    while next < pairs.len() {
        let (a, b) = pairs[next];
        let mut succ: Vec<(ActionLabel, (StateId, StateId))> = Vec::new();
        for t in p.successors(a) {
            if sync.contains(&t.action) {
                for u in q.successors(b).iter().filter(|u| u.action == t.action) {
                    succ.push((t.action.clone(), (t.target, u.target)));
                }
            } else {
                succ.push((t.action.clone(), (t.target, b)));
            }
        }
        for u in q.successors(b) {
            if !sync.contains(&u.action) {
                succ.push((u.action.clone(), (a, u.target)));
            }
        }
        // Discovery order follows (action, target name) so indices do not
        // depend on operand numbering.
        succ.sort_by(|x, y| {
            x.0.cmp(&y.0)
                .then_with(|| p.state_name(x.1 .0).cmp(p.state_name(y.1 .0)))
                .then_with(|| q.state_name(x.1 .1).cmp(q.state_name(y.1 .1)))
        });
        for (action, pair) in succ {
            let target = match ids.get(&pair) {
                Some(&id) => id,
                None => {
                    if pairs.len() >= state_limit {
                        return Err(LtsError::StateLimit(state_limit));
                    }
                    let id = pairs.len();
                    ids.insert(pair, id);
                    pairs.push(pair);
                    id
                }
            };
            transitions.push(Transition {
                source: next,
                action,
                target,
            });
        }
        next += 1;
    }
    let states = pairs
        .iter()
        .map(|&(a, b)| pair_name(p.state_name(a), p.arity, q.state_name(b)))
        .collect();
    let alphabet = p.alphabet.union(&q.alphabet).cloned().collect();
    let lts = Lts::with_arity(states, alphabet, transitions, 0, p.arity + q.arity)?;
    Ok(Composition { lts, pairs })
}

/// The full product over every state pair, built by checking each rule on
/// every candidate triple. Exponentially slower than [`parallel_compose`];
/// meant for cross-checking on small inputs.
pub fn full_product(p: &Lts, q: &Lts, sync: &SyncSet) -> Result<Composition, LtsError> {
    if sync.contains(&ActionLabel::Tau) {
        return Err(LtsError::InternalInSyncSet);
    }
    let alphabet: BTreeSet<ActionLabel> = p.alphabet.union(&q.alphabet).cloned().collect();
    let n = q.state_count();
    let id = |a: StateId, b: StateId| a * n + b;
    let mut pairs = Vec::with_capacity(p.state_count() * n);
    for a in 0..p.state_count() {
        for b in 0..n {
            pairs.push((a, b));
        }
    }
    let mut transitions = Vec::new();
    for &(a, b) in &pairs {
        for action in &alphabet {
            for &(a2, b2) in &pairs {
                let licensed = justifying_rules(p, q, sync, (a, b), action, (a2, b2));
                if !licensed.is_empty() {
                    transitions.push(Transition {
                        source: id(a, b),
                        action: action.clone(),
                        target: id(a2, b2),
                    });
                }
            }
        }
    }
    let states = pairs
        .iter()
        .map(|&(a, b)| pair_name(p.state_name(a), p.arity, q.state_name(b)))
        .collect();
    let lts = Lts::with_arity(
        states,
        alphabet,
        transitions,
        id(p.initial, q.initial),
        p.arity + q.arity,
    )?;
    Ok(Composition { lts, pairs })
}

/// Every composition rule that licenses `(from) -action-> (to)`.
pub fn justifying_rules(
    p: &Lts,
    q: &Lts,
    sync: &SyncSet,
    from: (StateId, StateId),
    action: &ActionLabel,
    to: (StateId, StateId),
) -> Vec<Rule> {
    let mut rules = Vec::new();
    let synced = sync.contains(action);
    if !synced && to.1 == from.1 && p.has_transition(from.0, action, to.0) {
        rules.push(Rule::Left);
    }
    if !synced && to.0 == from.0 && q.has_transition(from.1, action, to.1) {
        rules.push(Rule::Right);
    }
    if synced && p.has_transition(from.0, action, to.0) && q.has_transition(from.1, action, to.1) {
        rules.push(Rule::Sync);
    }
    rules
}

/// Explicit counterexample or path through an LTS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub origin: StateId,
    pub steps: Vec<Transition>,
}

impl Trace {
    pub fn empty(origin: StateId) -> Self {
        Trace {
            origin,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Last state visited, or the origin for an empty trace.
    pub fn last_state(&self) -> StateId {
        self.steps.last().map_or(self.origin, |t| t.target)
    }

    /// True iff the steps form a connected path starting at `origin`.
    pub fn is_connected(&self) -> bool {
        let mut at = self.origin;
        for s in &self.steps {
            if s.source != at {
                return false;
            }
            at = s.target;
        }
        true
    }
}

/// Small builder used by parsers and tests to assemble an LTS by name.
#[derive(Debug, Default)]
pub struct LtsBuilder {
    states: Vec<String>,
    index: HashMap<String, StateId>,
    alphabet: BTreeSet<ActionLabel>,
    transitions: Vec<Transition>,
}

impl LtsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn action(&mut self, label: ActionLabel) -> &mut Self {
        self.alphabet.insert(label);
        self
    }

    pub fn edge(&mut self, from: &str, label: ActionLabel, to: &str) -> &mut Self {
        let source = self.state(from);
        let target = self.state(to);
        self.alphabet.insert(label.clone());
        self.transitions.push(Transition {
            source,
            action: label,
            target,
        });
        self
    }

    /// Convenience edge with a visible label, or the internal action when
    /// the label is `tau`.
    pub fn edge_named(&mut self, from: &str, label: &str, to: &str) -> &mut Self {
        let l = if label == TAU_NAME {
            ActionLabel::Tau
        } else {
            ActionLabel::visible(label).expect("non-empty label")
        };
        self.edge(from, l, to)
    }

    pub fn build(self, initial: &str) -> Result<Lts, LtsError> {
        let initial = *self
            .index
            .get(initial)
            .ok_or_else(|| LtsError::UnknownState(initial.to_string()))?;
        Lts::new(self.states, self.alphabet, self.transitions, initial)
    }
}
