use crate::explore::{explore, ExploreError, ExploreOptions, StateSpace, Successors};
use crate::lts::{ActionLabel, Lts};
use crate::prop::Expr;

use super::{Component, DslError, Init, RhsBase};

pub const TICK: &str = "tick";

pub type CompileOptions = ExploreOptions;

/// A component placed in a larger state vector: slot `i` of its own layout
/// lives at `slots[i]`.
#[derive(Debug, Clone)]
pub struct BoundComponent {
    pub instance: String,
    pub component: Component,
    pub slots: Vec<usize>,
    guards: Vec<Expr>,
    invariants: Vec<Option<Expr>>,
    out_edges: Vec<Vec<usize>>,
    /// Timers this component advances on a tick, with their caps.
    pub ticking: Vec<(usize, i64)>,
    /// Channel actions carry the bare channel name instead of `c!`/`c?`.
    pub fuse_channels: bool,
}

/// One step a component can take from a given state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalMove {
    /// Index into the component's edges; `None` for a tick.
    pub edge: Option<usize>,
    pub label: ActionLabel,
    pub writes: Vec<(usize, i64)>,
    /// Error raised if this move is actually taken (e.g. a domain overflow
    /// on an edge that still waits for its rendezvous partner).
    pub fault: Option<Box<DslError>>,
}

impl BoundComponent {
    /// Binds `c` into a layout. Shared timers are listed in `ticking` only
    /// when `tick_shared` holds.
    pub fn bind(
        c: &Component,
        instance: &str,
        slots: Vec<usize>,
        tick_shared: bool,
        fuse_channels: bool,
    ) -> Self {
        assert_eq!(slots.len(), c.slot_count());
        let map = |s: usize| slots[s];
        let guards = c.edges.iter().map(|e| e.guard.map_slots(&map)).collect();
        let invariants = c
            .locations
            .iter()
            .map(|l| l.invariant.as_ref().map(|e| e.map_slots(&map)))
            .collect();
        let mut out_edges = vec![Vec::new(); c.locations.len()];
        for (i, e) in c.edges.iter().enumerate() {
            out_edges[e.source].push(i);
        }
        let ticking = c
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_timer() && (tick_shared || !v.shared))
            .map(|(i, v)| (slots[i + 1], v.domain.max_code()))
            .collect();
        BoundComponent {
            instance: instance.to_string(),
            component: c.clone(),
            slots,
            guards,
            invariants,
            out_edges,
            ticking,
            fuse_channels,
        }
    }

    pub fn loc_slot(&self) -> usize {
        self.slots[0]
    }

    pub fn location(&self, state: &[i64]) -> usize {
        state[self.slots[0]] as usize
    }

    pub fn invariant_holds(&self, state: &[i64]) -> Result<bool, DslError> {
        match &self.invariants[self.location(state)] {
            None => Ok(true),
            Some(e) => e.eval(state).map_err(|err| {
                DslError::semantic(Default::default(), format!("{}: {err}", self.instance))
            }),
        }
    }

    fn label(&self, sync: &Option<super::Sync>) -> ActionLabel {
        match sync {
            None => ActionLabel::Tau,
            Some(s) if self.fuse_channels => ActionLabel::visible(&s.channel).unwrap(),
            Some(s) => ActionLabel::visible(&s.to_string()).unwrap(),
        }
    }

    pub fn tick_move(&self, state: &[i64]) -> LocalMove {
        let writes = self
            .ticking
            .iter()
            .filter(|(s, cap)| state[*s] < *cap)
            .map(|(s, _)| (*s, state[*s] + 1))
            .collect();
        LocalMove {
            edge: None,
            label: ActionLabel::visible(TICK).unwrap(),
            writes,
            fault: None,
        }
    }

    /// Enabled edge moves (ticks excluded) from `state`.
    pub fn moves(&self, state: &[i64], out: &mut Vec<LocalMove>) -> Result<(), DslError> {
        let loc = self.location(state);
        let mut scratch = state.to_vec();
        for &i in &self.out_edges[loc] {
            let g = self.guards[i].eval(state).map_err(|err| {
                DslError::semantic(self.component.edges[i].pos, format!("{}: {err}", self.instance))
            })?;
            if !g {
                continue;
            }
            let e = &self.component.edges[i];
            scratch.copy_from_slice(state);
            let mut writes: Vec<(usize, i64)> = Vec::new();
            let mut fault = None;
            for a in &e.assignments {
                let v = match &a.value.base {
                    RhsBase::Lit(l) => l.code(),
                    RhsBase::Var(v) => scratch[self.slots[v.slot]],
                } + a.value.offset;
                if !a.target.domain.contains(v) {
                    fault = Some(Box::new(DslError::DomainOverflow {
                        edge: self.component.describe_edge(e),
                        var: a.target.name.clone(),
                        value: v,
                        domain: a.target.domain.clone(),
                    }));
                    break;
                }
                let slot = self.slots[a.target.slot];
                scratch[slot] = v;
                writes.retain(|(s, _)| *s != slot);
                writes.push((slot, v));
            }
            for t in &e.timer_resets {
                let slot = self.slots[t.slot];
                writes.retain(|(s, _)| *s != slot);
                writes.push((slot, 0));
            }
            writes.push((self.slots[0], e.target as i64));
            writes.sort();
            out.push(LocalMove {
                edge: Some(i),
                label: self.label(&e.sync),
                writes,
                fault,
            });
        }
        Ok(())
    }

    /// `loc{a=1;b=true}` over the given local slots, or just `loc`.
    pub fn render(&self, state: &[i64], local_slots: &[usize]) -> String {
        let c = &self.component;
        let loc = &c.locations[self.location(state)].name;
        if local_slots.is_empty() {
            return loc.clone();
        }
        let mut s = format!("{loc}{{");
        for (k, &i) in local_slots.iter().enumerate() {
            if k > 0 {
                s.push(';');
            }
            let v = &c.vars[i - 1];
            s.push_str(&v.name);
            s.push('=');
            s.push_str(&v.domain.render(state[self.slots[i]]));
        }
        s.push('}');
        s
    }
}

/// Every combination of initial values; `Init::Any` ranges over the domain.
pub(crate) fn initial_values(c: &Component) -> Vec<Vec<i64>> {
    let mut out = vec![vec![c.initial as i64]];
    for v in &c.vars {
        let choices: Vec<i64> = match &v.init {
            Init::Value(x) => vec![*x],
            Init::Any => v.domain.codes().collect(),
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect();
    }
    out
}

/// A component's own state space.
#[derive(Debug, Clone)]
pub struct CompiledComponent {
    pub space: StateSpace,
}

impl CompiledComponent {
    pub fn lts(&self) -> &Lts {
        &self.space.lts
    }
}

pub fn compile_to_lts(c: &Component) -> Result<Lts, DslError> {
    Ok(compile_with(c, CompileOptions::default())?.space.lts)
}

/// Compiles a component on its own: every timer ticks, channel actions keep
/// their direction (`c!`, `c?`), and `tick` is always offered.
pub fn compile_with(c: &Component, opts: CompileOptions) -> Result<CompiledComponent, DslError> {
    let slots: Vec<usize> = (0..c.slot_count()).collect();
    let b = BoundComponent::bind(c, &c.name, slots, true, false);
    let locals: Vec<usize> = (1..c.slot_count()).collect();

    let mut initials = Vec::new();
    for v in initial_values(c) {
        if b.invariant_holds(&v)? {
            initials.push(v);
        }
    }
    if initials.is_empty() {
        return Err(DslError::NoInitialState(format!(
            "the invariant of `{}` excludes every initial valuation",
            c.locations[c.initial].name
        )));
    }

    let succ = |state: &[i64]| -> Result<Successors, DslError> {
        let mut moves = Vec::new();
        b.moves(state, &mut moves)?;
        moves.push(b.tick_move(state));
        let mut out = Vec::with_capacity(moves.len());
        for m in moves {
            if let Some(f) = m.fault {
                return Err(*f);
            }
            let mut next = state.to_vec();
            for (s, v) in m.writes {
                next[s] = v;
            }
            if b.invariant_holds(&next)? {
                out.push((m.label, next));
            }
        }
        Ok(out)
    };
    let space = explore(initials, succ, |v| b.render(v, &locals), opts).map_err(|e| match e {
        ExploreError::Step(e) => e,
        ExploreError::StateLimit(n) => DslError::StateLimit(n),
    })?;
    Ok(CompiledComponent { space })
}

/// Relabels `c!` and `c?` to the channel name `c`.
pub fn fuse_channel_label(a: &ActionLabel) -> ActionLabel {
    match a {
        ActionLabel::Visible(n) if n.ends_with('!') || n.ends_with('?') => {
            ActionLabel::visible(&n[..n.len() - 1]).unwrap()
        }
        other => other.clone(),
    }
}
