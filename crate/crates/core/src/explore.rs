//! Breadth-first construction of an LTS from a successor function over
//! state vectors. Layers are expanded in parallel and merged in a fixed
//! order, so the result does not depend on the worker count.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::lts::{ActionLabel, Lts, StateId, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    pub state_limit: usize,
    pub workers: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            state_limit: 10_000_000,
            workers: 1,
        }
    }
}

/// Explored state space. State `i` holds `values[i * stride..(i + 1) * stride]`
/// unless it is the synthetic root introduced for several initial states.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub lts: Lts,
    pub stride: usize,
    values: Vec<i64>,
    pub root: Option<StateId>,
    /// States entered directly from the start (the initial state, or the
    /// root's successors).
    pub starts: Vec<StateId>,
}

impl StateSpace {
    /// Wraps an existing LTS whose state `i` carries `values[i]`.
    pub fn from_parts(lts: Lts, values: Vec<Vec<i64>>) -> Self {
        let stride = values.first().map_or(0, Vec::len);
        assert_eq!(values.len(), lts.state_count());
        assert!(values.iter().all(|v| v.len() == stride));
        let starts = vec![lts.initial()];
        StateSpace {
            lts,
            stride,
            values: values.concat(),
            root: None,
            starts,
        }
    }

    pub fn values(&self, s: StateId) -> Option<&[i64]> {
        if Some(s) == self.root {
            return None;
        }
        Some(&self.values[s * self.stride..(s + 1) * self.stride])
    }

    pub fn state_count(&self) -> usize {
        self.lts.state_count()
    }
}

pub const ROOT_NAME: &str = "init";

#[derive(Debug)]
pub enum ExploreError<E> {
    Step(E),
    StateLimit(usize),
}

pub type Successors = Vec<(ActionLabel, Vec<i64>)>;

/// Explores from `initials`. `succ` must be a pure function of the state.
/// With several initial vectors a root state named `init` is added with an
/// internal step to each of them.
pub fn explore<E, S, N>(
    initials: Vec<Vec<i64>>,
    succ: S,
    name: N,
    opts: ExploreOptions,
) -> Result<StateSpace, ExploreError<E>>
where
    E: Send,
    S: Fn(&[i64]) -> Result<Successors, E> + Sync,
    N: Fn(&[i64]) -> String + Sync,
{
    let stride = initials.first().map_or(0, Vec::len);
    let mut initials = initials;
    initials.sort();
    initials.dedup();

    let mut index: HashMap<Box<[i64]>, StateId> = HashMap::new();
    let mut values: Vec<i64> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut transitions: Vec<Transition> = Vec::new();
    let mut alphabet = BTreeSet::new();

    let root = if initials.len() > 1 {
        names.push(ROOT_NAME.to_string());
        values.extend(std::iter::repeat_n(0, stride));
        Some(0)
    } else {
        None
    };

    let mut frontier: Vec<StateId> = Vec::new();
    let mut starts = Vec::new();
    for v in initials {
        let id = names.len();
        if id >= opts.state_limit {
            return Err(ExploreError::StateLimit(opts.state_limit));
        }
        names.push(name(&v));
        values.extend_from_slice(&v);
        index.insert(v.into_boxed_slice(), id);
        frontier.push(id);
        starts.push(id);
        if let Some(r) = root {
            alphabet.insert(ActionLabel::Tau);
            transitions.push(Transition {
                source: r,
                action: ActionLabel::Tau,
                target: id,
            });
        }
    }

    let pool = if opts.workers > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .ok()
    } else {
        None
    };

    let expand = |s: StateId, values: &[i64]| -> Result<Successors, E> {
        let mut out = succ(&values[s * stride..(s + 1) * stride])?;
        out.sort();
        out.dedup();
        Ok(out)
    };

    while !frontier.is_empty() {
        let layer: Vec<Result<Successors, E>> = match &pool {
            Some(p) => p.install(|| frontier.par_iter().map(|&s| expand(s, &values)).collect()),
            None => frontier.iter().map(|&s| expand(s, &values)).collect(),
        };
        let mut next = Vec::new();
        for (&s, succs) in frontier.iter().zip(layer) {
            let succs = succs.map_err(ExploreError::Step)?;
            for (action, v) in succs {
                let target = match index.get(v.as_slice()) {
                    Some(&t) => t,
                    None => {
                        let id = names.len();
                        if id >= opts.state_limit {
                            return Err(ExploreError::StateLimit(opts.state_limit));
                        }
                        names.push(name(&v));
                        values.extend_from_slice(&v);
                        index.insert(v.into_boxed_slice(), id);
                        next.push(id);
                        id
                    }
                };
                alphabet.insert(action.clone());
                transitions.push(Transition {
                    source: s,
                    action,
                    target,
                });
            }
        }
        frontier = next;
    }

    let initial = root.unwrap_or(0);
    let lts = Lts::new(names, alphabet, transitions, initial)
        .expect("explorer produces well-formed systems");
    Ok(StateSpace {
        lts,
        stride,
        values,
        root,
        starts,
    })
}
