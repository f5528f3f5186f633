//! System assembly: `.mrt` files, composability checks, and the composed
//! state space of several components over a shared variable store.
//!
//! ```text
//! system Climate_control {
//!     tick cap 40;
//!     narrow CC.IS_temperature = 14..18;
//!     component PM = "pm.pml" contract "pm.ctr";
//!     component CC = "cc.pml" contract "cc.ctr";
//!     chan power_c: PM -> CC;
//!     mutant heater-overflow { CC = "cc_heater_overflow.pml"; }
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::contract::{normalize_in, parse_contract, ContractError, GeneralizedContract, WellStructuredComponent};
use crate::dsl::{
    parse_component_with, BoundComponent, Component, DslError, Init, LocalMove, Narrowing,
    ParseOptions, SyncDir, DEFAULT_TIMER_CAP, TICK,
};
use crate::explore::{explore, ExploreError, ExploreOptions, StateSpace, Successors};
use crate::lexer::{Cursor, SyntaxError, Tok};
use crate::lts::{ActionLabel, SyncSet};
use crate::prop::{property_name, SymbolTable};
use crate::value::{Domain, EnumType};

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: syntax error at {source}")]
    Syntax { path: PathBuf, source: SyntaxError },
    #[error("{path}:\n{source}")]
    Component { path: PathBuf, source: DslError },
    #[error("{path}: {source}")]
    Contract { path: PathBuf, source: ContractError },
    #[error("not composable: {0}")]
    Composability(String),
    #[error("shared variable `{var}` is written by both {first} and {second}")]
    WriteConflict {
        var: String,
        first: String,
        second: String,
    },
    #[error("unknown mutant `{0}`")]
    UnknownMutant(String),
    #[error("narrowing `{0}` matches no integer variable")]
    UnusedNarrowing(String),
    #[error("{0}")]
    Step(DslError),
    #[error("state limit of {0} exceeded")]
    StateLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentRef {
    pub instance: String,
    pub behaviour: PathBuf,
    pub contract: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelDecl {
    pub name: String,
    pub sender: String,
    pub receiver: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub name: String,
    pub replacements: Vec<(String, PathBuf)>,
}

/// Parsed `.mrt` file; paths are relative to the file's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemFile {
    pub name: String,
    pub tick_cap: Option<i64>,
    pub components: Vec<ComponentRef>,
    pub channels: Vec<ChannelDecl>,
    pub mutants: Vec<Mutant>,
    /// Domain limits applied every time the system is loaded.
    pub narrow: Vec<Narrowing>,
}

pub fn parse_system_file(src: &str) -> Result<SystemFile, SyntaxError> {
    let mut c = Cursor::new(src)?;
    c.expect_keyword("system")?;
    let (name, _) = c.ident()?;
    let mut f = SystemFile {
        name,
        tick_cap: None,
        components: Vec::new(),
        channels: Vec::new(),
        mutants: Vec::new(),
        narrow: Vec::new(),
    };
    c.expect(&Tok::LBrace)?;
    while !c.accept(&Tok::RBrace) {
        if c.accept_keyword("tick") {
            c.expect_keyword("cap")?;
            let pos = c.pos();
            let n = c.int()?;
            if n < 1 {
                return Err(SyntaxError::new(pos, "tick cap must be positive"));
            }
            f.tick_cap = Some(n);
            c.expect(&Tok::Semi)?;
        } else if c.accept_keyword("component") {
            let (instance, pos) = c.ident()?;
            if f.components.iter().any(|x| x.instance == instance) {
                return Err(SyntaxError::new(pos, format!("duplicate component `{instance}`")));
            }
            c.expect(&Tok::Assign)?;
            let behaviour = PathBuf::from(c.string()?);
            let contract = if c.accept_keyword("contract") {
                Some(PathBuf::from(c.string()?))
            } else {
                None
            };
            c.expect(&Tok::Semi)?;
            f.components.push(ComponentRef {
                instance,
                behaviour,
                contract,
            });
        } else if c.accept_keyword("chan") {
            let (name, _) = c.ident()?;
            c.expect(&Tok::Colon)?;
            let (sender, _) = c.ident()?;
            c.expect(&Tok::Arrow)?;
            let (receiver, _) = c.ident()?;
            c.expect(&Tok::Semi)?;
            f.channels.push(ChannelDecl {
                name,
                sender,
                receiver,
            });
        } else if c.accept_keyword("narrow") {
            let (first, _) = c.ident()?;
            let (component, var) = if c.accept(&Tok::Dot) {
                (Some(first), c.ident()?.0)
            } else {
                (None, first)
            };
            c.expect(&Tok::Assign)?;
            let pos = c.pos();
            let lo = c.int()?;
            c.expect(&Tok::DotDot)?;
            let hi = c.int()?;
            if lo > hi {
                return Err(SyntaxError::new(pos, format!("empty range {lo}..{hi}")));
            }
            c.expect(&Tok::Semi)?;
            f.narrow.push(Narrowing { component, var, lo, hi });
        } else if c.accept_keyword("mutant") {
            let name = property_name(&mut c)?;
            let mut replacements = Vec::new();
            c.expect(&Tok::LBrace)?;
            while !c.accept(&Tok::RBrace) {
                let (inst, _) = c.ident()?;
                c.expect(&Tok::Assign)?;
                replacements.push((inst, PathBuf::from(c.string()?)));
                c.expect(&Tok::Semi)?;
            }
            f.mutants.push(Mutant { name, replacements });
        } else {
            return Err(c.unexpected("`component`, `chan`, `tick`, `narrow`, `mutant` or `}`"));
        }
    }
    if !c.at_eof() {
        return Err(c.unexpected("end of input"));
    }
    Ok(f)
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub mutant: Option<String>,
    pub narrow: Vec<Narrowing>,
}

/// Components of a system with their contracts (not yet resolved).
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub name: String,
    pub components: Vec<(Component, GeneralizedContract)>,
    pub channels: Vec<ChannelDecl>,
    pub tick_cap: i64,
    pub narrow: Vec<Narrowing>,
    /// Name of the mutant swapped in, if any.
    pub mutant: Option<String>,
}

fn read(path: &Path) -> Result<String, SystemError> {
    std::fs::read_to_string(path).map_err(|source| SystemError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a `.mrt` file and everything it references.
pub fn load_system(path: &Path, opts: &LoadOptions) -> Result<SystemSpec, SystemError> {
    let src = read(path)?;
    let file = parse_system_file(&src).map_err(|source| SystemError::Syntax {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let tick_cap = file.tick_cap.unwrap_or(DEFAULT_TIMER_CAP);
    let narrow: Vec<Narrowing> = file.narrow.iter().chain(&opts.narrow).cloned().collect();

    let mut refs = file.components.clone();
    if let Some(m) = &opts.mutant {
        let mutant = file
            .mutants
            .iter()
            .find(|x| &x.name == m)
            .ok_or_else(|| SystemError::UnknownMutant(m.clone()))?;
        for (inst, p) in &mutant.replacements {
            let r = refs
                .iter_mut()
                .find(|r| &r.instance == inst)
                .ok_or_else(|| SystemError::Composability(format!("mutant replaces unknown component `{inst}`")))?;
            r.behaviour = p.clone();
        }
    }

    let mut components = Vec::new();
    for r in &refs {
        let bpath = dir.join(&r.behaviour);
        let popts = ParseOptions {
            name: Some(r.instance.clone()),
            default_cap: tick_cap,
            narrow: narrow.clone(),
        };
        let comp = parse_component_with(&read(&bpath)?, &popts).map_err(|source| {
            SystemError::Component {
                path: bpath.clone(),
                source,
            }
        })?;
        let contract = match &r.contract {
            Some(p) => {
                let cpath = dir.join(p);
                parse_contract(&read(&cpath)?).map_err(|source| SystemError::Contract {
                    path: cpath.clone(),
                    source,
                })?
            }
            None => GeneralizedContract::empty(&r.instance),
        };
        components.push((comp, contract));
    }

    for n in &narrow {
        let hit = components.iter().any(|(c, _)| {
            n.component.as_deref().is_none_or(|x| x == c.name)
                && c.var(&n.var).is_some_and(|v| matches!(v.domain, Domain::Int { .. }))
        });
        if !hit {
            return Err(SystemError::UnusedNarrowing(n.to_string()));
        }
    }

    Ok(SystemSpec {
        name: file.name,
        components,
        channels: file.channels,
        tick_cap,
        narrow,
        mutant: opts.mutant.clone(),
    })
}

/// Where every variable and location of a system lives in the state vector.
#[derive(Debug, Clone)]
pub struct Layout {
    /// Per slot: printable name and domain (`None` for location slots).
    pub slots: Vec<(String, Option<Domain>)>,
    /// Per component: global slot of each local slot.
    pub maps: Vec<Vec<usize>>,
    /// Shared variables: name, global slot.
    pub shared: Vec<(String, usize)>,
    /// Shared timers with their caps.
    pub shared_timers: Vec<(usize, i64)>,
}

/// Matched channel endpoints: name, sender index, receiver index.
pub type ChannelTable = Vec<(String, usize, usize)>;

/// Checks channels, shared variables and enum agreement; builds the layout.
pub fn check_composable(spec: &SystemSpec) -> Result<(Layout, ChannelTable), SystemError> {
    let comps: Vec<&Component> = spec.components.iter().map(|(c, _)| c).collect();
    let index_of = |name: &str| comps.iter().position(|c| c.name == name);

    // Enums with the same name must agree.
    let mut enums: BTreeMap<String, (Arc<EnumType>, String)> = BTreeMap::new();
    for c in &comps {
        for e in &c.enums {
            match enums.get(&e.name) {
                Some((other, owner)) if other != e => {
                    return Err(SystemError::Composability(format!(
                        "enum `{}` differs between {owner} and {}",
                        e.name, c.name
                    )))
                }
                Some(_) => {}
                None => {
                    enums.insert(e.name.clone(), (e.clone(), c.name.clone()));
                }
            }
        }
    }

    // Channels: exactly one sender and one receiver, in distinct components.
    let mut ends: BTreeMap<String, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, c) in comps.iter().enumerate() {
        for (ch, dir) in c.channel_uses() {
            let e = ends.entry(ch).or_default();
            match dir {
                SyncDir::Send => e.0.push(i),
                SyncDir::Receive => e.1.push(i),
            }
        }
    }
    let mut table = Vec::new();
    for (ch, (senders, receivers)) in &ends {
        let names = |v: &[usize]| v.iter().map(|&i| comps[i].name.clone()).collect::<Vec<_>>().join(", ");
        match (senders.as_slice(), receivers.as_slice()) {
            ([s], [r]) if s != r => table.push((ch.clone(), *s, *r)),
            ([s], [_]) => {
                return Err(SystemError::Composability(format!(
                    "{} both sends and receives on `{ch}`",
                    comps[*s].name
                )))
            }
            (_, []) => {
                return Err(SystemError::Composability(format!(
                    "channel `{ch}` has a sender ({}) but no receiver",
                    names(senders)
                )))
            }
            ([], _) => {
                return Err(SystemError::Composability(format!(
                    "channel `{ch}` has a receiver ({}) but no sender",
                    names(receivers)
                )))
            }
            _ => {
                return Err(SystemError::Composability(format!(
                    "channel `{ch}` pairs several senders ({}) or receivers ({})",
                    names(senders),
                    names(receivers)
                )))
            }
        }
    }
    for d in &spec.channels {
        let found = table.iter().find(|(n, _, _)| n == &d.name);
        let ok = match found {
            Some((_, s, r)) => comps[*s].name == d.sender && comps[*r].name == d.receiver,
            None => false,
        };
        if !ok || index_of(&d.sender).is_none() || index_of(&d.receiver).is_none() {
            return Err(SystemError::Composability(format!(
                "channel `{}: {} -> {}` does not match the components' use",
                d.name, d.sender, d.receiver
            )));
        }
    }
    if !spec.channels.is_empty() {
        for (n, _, _) in &table {
            if !spec.channels.iter().any(|d| &d.name == n) {
                return Err(SystemError::Composability(format!(
                    "channel `{n}` is missing from the system's channel table"
                )));
            }
        }
    }

    // Shared variables: identical declarations, at most one writer.
    let mut slots: Vec<(String, Option<Domain>)> = comps
        .iter()
        .map(|c| (c.name.clone(), None))
        .collect();
    let mut shared: Vec<(String, usize)> = Vec::new();
    let mut shared_timers = Vec::new();
    let mut writer: BTreeMap<String, String> = BTreeMap::new();
    let mut decl_of: BTreeMap<String, (crate::dsl::VarDecl, String)> = BTreeMap::new();
    for c in &comps {
        let written: BTreeSet<String> = c.written_vars().into_iter().collect();
        for v in c.vars.iter().filter(|v| v.shared) {
            match decl_of.get(&v.name) {
                Some((d, owner)) => {
                    if d.domain != v.domain || d.init != v.init || d.kind != v.kind {
                        return Err(SystemError::Composability(format!(
                            "shared variable `{}` is declared differently in {owner} and {}",
                            v.name, c.name
                        )));
                    }
                }
                None => {
                    decl_of.insert(v.name.clone(), (v.clone(), c.name.clone()));
                    let slot = slots.len();
                    slots.push((v.name.clone(), Some(v.domain.clone())));
                    shared.push((v.name.clone(), slot));
                    if v.is_timer() {
                        shared_timers.push((slot, v.domain.max_code()));
                    }
                }
            }
            if written.contains(&v.name) {
                if let Some(first) = writer.get(&v.name) {
                    return Err(SystemError::WriteConflict {
                        var: v.name.clone(),
                        first: first.clone(),
                        second: c.name.clone(),
                    });
                }
                writer.insert(v.name.clone(), c.name.clone());
            }
        }
    }

    let mut maps = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        let mut m = vec![i];
        for v in &c.vars {
            if v.shared {
                m.push(shared.iter().find(|(n, _)| n == &v.name).unwrap().1);
            } else {
                m.push(slots.len());
                slots.push((format!("{}.{}", c.name, v.name), Some(v.domain.clone())));
            }
        }
        maps.push(m);
    }

    Ok((
        Layout {
            slots,
            maps,
            shared,
            shared_timers,
        },
        table,
    ))
}

/// Name scope for contracts of component `i` inside the system: its own
/// variables bare, every shared variable bare, every `Comp.var` and
/// `Comp.location`.
pub fn system_scope(spec: &SystemSpec, layout: &Layout, i: usize) -> SymbolTable {
    let mut t = SymbolTable::new();
    for (j, (c, _)) in spec.components.iter().enumerate() {
        for e in &c.enums {
            t.declare_enum(e.clone());
        }
        t.bind_component(&c.name, layout.maps[j][0], c.location_names());
        for (k, v) in c.vars.iter().enumerate() {
            t.bind_qualified(&c.name, &v.name, layout.maps[j][k + 1], v.domain.clone());
        }
    }
    for (name, slot) in &layout.shared {
        let d = layout.slots[*slot].1.clone().unwrap();
        t.bind_var(name, *slot, d);
    }
    let (c, _) = &spec.components[i];
    for (k, v) in c.vars.iter().enumerate() {
        t.bind_var(&v.name, layout.maps[i][k + 1], v.domain.clone());
    }
    t
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(usize),
    Pair(Box<Node>, Box<Node>, SyncSet),
}

/// Composed system: the explored state space plus everything needed to
/// interpret its state vectors.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub name: String,
    pub space: StateSpace,
    pub layout: Layout,
    pub channels: ChannelTable,
    pub bound: Vec<BoundComponent>,
    /// Sync set of each binary pairing, left to right.
    pub sync_sets: Vec<SyncSet>,
}

impl SystemModel {
    /// `(CC:config, Airing:idle)` style rendering of a state's locations.
    pub fn render_locations(&self, values: &[i64]) -> String {
        let locs: Vec<String> = self
            .bound
            .iter()
            .map(|b| format!("{}:{}", b.instance, b.component.locations[b.location(values)].name))
            .collect();
        format!("({})", locs.join(", "))
    }

    /// Printable value of every variable slot.
    pub fn render_var(&self, values: &[i64], slot: usize) -> Option<(String, String)> {
        let (name, d) = &self.layout.slots[slot];
        d.as_ref().map(|d| (name.clone(), d.render(values[slot])))
    }
}

/// Normalizes every component's contract against the composed layout.
pub fn normalize_system(
    spec: &SystemSpec,
    layout: &Layout,
) -> Result<Vec<WellStructuredComponent>, SystemError> {
    let mut out = Vec::new();
    let mut problems = Vec::new();
    for (i, (c, k)) in spec.components.iter().enumerate() {
        match normalize_in(c, k, system_scope(spec, layout, i)) {
            Ok(w) => out.push(w),
            Err(e) => problems.push(format!("contract of {}: {e}", c.name)),
        }
    }
    if !problems.is_empty() {
        return Err(SystemError::Contract {
            path: PathBuf::from(&spec.name),
            source: ContractError::Unresolved(
                problems
                    .into_iter()
                    .map(|m| crate::prop::PropError::Type {
                        pos: Default::default(),
                        message: m,
                    })
                    .collect(),
            ),
        });
    }
    Ok(out)
}

fn initial_vectors(spec: &SystemSpec, layout: &Layout) -> Vec<Vec<i64>> {
    let mut out = vec![vec![0i64; layout.slots.len()]];
    for (i, (c, _)) in spec.components.iter().enumerate() {
        for row in out.iter_mut() {
            row[layout.maps[i][0]] = c.initial as i64;
        }
    }
    let mut done = BTreeSet::new();
    for (i, (c, _)) in spec.components.iter().enumerate() {
        for (k, v) in c.vars.iter().enumerate() {
            let slot = layout.maps[i][k + 1];
            if !done.insert(slot) {
                continue;
            }
            let choices: Vec<i64> = match &v.init {
                Init::Value(x) => vec![*x],
                Init::Any => v.domain.codes().collect(),
            };
            out = out
                .into_iter()
                .flat_map(|row| {
                    choices.iter().map(move |x| {
                        let mut r = row.clone();
                        r[slot] = *x;
                        r
                    })
                })
                .collect();
        }
    }
    out
}

/// Composes the system left-associatively. Each pairing synchronizes on
/// the channels between its two sides plus the global tick; shared
/// variables live in the state vector and shared timers advance on tick.
pub fn compose_system(spec: &SystemSpec, opts: ExploreOptions) -> Result<SystemModel, SystemError> {
    if spec.components.is_empty() {
        return Err(SystemError::Composability("system has no components".into()));
    }
    let (layout, channels) = check_composable(spec)?;
    let bound: Vec<BoundComponent> = spec
        .components
        .iter()
        .enumerate()
        .map(|(i, (c, _))| BoundComponent::bind(c, &c.name, layout.maps[i].clone(), false, true))
        .collect();

    let tick = ActionLabel::visible(TICK).unwrap();
    let mut tree = Node::Leaf(0);
    let mut sync_sets = Vec::new();
    for j in 1..bound.len() {
        let mut names = vec![TICK.to_string()];
        for (ch, s, r) in &channels {
            if (*s < j && *r == j) || (*r < j && *s == j) {
                names.push(ch.clone());
            }
        }
        let set = SyncSet::from_names(names.iter().map(String::as_str)).unwrap();
        sync_sets.push(set.clone());
        tree = Node::Pair(Box::new(tree), Box::new(Node::Leaf(j)), set);
    }

    let local_slots: Vec<Vec<usize>> = spec
        .components
        .iter()
        .map(|(c, _)| {
            c.vars
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.shared)
                .map(|(k, _)| k + 1)
                .collect()
        })
        .collect();
    let name = |v: &[i64]| -> String {
        let mut parts: Vec<String> = bound
            .iter()
            .zip(&local_slots)
            .map(|(b, l)| b.render(v, l))
            .collect();
        if !layout.shared.is_empty() {
            let store: Vec<String> = layout
                .shared
                .iter()
                .map(|(n, s)| format!("{n}={}", layout.slots[*s].1.as_ref().unwrap().render(v[*s])))
                .collect();
            parts.push(format!("{{{}}}", store.join(";")));
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("({})", parts.join(","))
        }
    };

    let all_invariants = |v: &[i64]| -> Result<bool, DslError> {
        for b in &bound {
            if !b.invariant_holds(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut initials = Vec::new();
    for v in initial_vectors(spec, &layout) {
        if all_invariants(&v).map_err(SystemError::Step)? {
            initials.push(v);
        }
    }
    if initials.is_empty() {
        return Err(SystemError::Step(DslError::NoInitialState(
            "location invariants exclude every initial valuation".into(),
        )));
    }

    let succ = |state: &[i64]| -> Result<Successors, DslError> {
        let moves = node_moves(&tree, &bound, state)?;
        let mut out = Vec::with_capacity(moves.len());
        for (label, writes, fault) in moves {
            if let Some(f) = fault {
                return Err(*f);
            }
            let mut next = state.to_vec();
            for (s, v) in writes {
                next[s] = v;
            }
            if label == tick {
                for (s, cap) in &layout.shared_timers {
                    if next[*s] < *cap {
                        next[*s] += 1;
                    }
                }
            }
            if all_invariants(&next)? {
                out.push((label, next));
            }
        }
        Ok(out)
    };

    let space = explore(initials, succ, name, opts).map_err(|e| match e {
        ExploreError::Step(e) => SystemError::Step(e),
        ExploreError::StateLimit(n) => SystemError::StateLimit(n),
    })?;
    Ok(SystemModel {
        name: spec.name.clone(),
        space,
        layout,
        channels,
        bound,
        sync_sets,
    })
}

type Move = (ActionLabel, Vec<(usize, i64)>, Option<Box<DslError>>);

fn node_moves(n: &Node, bound: &[BoundComponent], state: &[i64]) -> Result<Vec<Move>, DslError> {
    match n {
        Node::Leaf(i) => {
            let mut ms: Vec<LocalMove> = Vec::new();
            bound[*i].moves(state, &mut ms)?;
            ms.push(bound[*i].tick_move(state));
            Ok(ms.into_iter().map(|m| (m.label, m.writes, m.fault)).collect())
        }
        Node::Pair(l, r, sync) => {
            let lm = node_moves(l, bound, state)?;
            let rm = node_moves(r, bound, state)?;
            let mut out: Vec<Move> = Vec::new();
            out.extend(lm.iter().filter(|(a, _, _)| !sync.contains(a)).cloned());
            out.extend(rm.iter().filter(|(a, _, _)| !sync.contains(a)).cloned());
            for (a, lw, lf) in lm.iter().filter(|(a, _, _)| sync.contains(a)) {
                for (b, rw, rf) in rm.iter().filter(|(b, _, _)| b == a) {
                    let mut w = lw.clone();
                    for (s, v) in rw {
                        if let Some((_, old)) = w.iter().find(|(x, _)| x == s) {
                            if old != v {
                                return Err(DslError::semantic(
                                    Default::default(),
                                    format!("joint `{b}` writes slot {s} twice"),
                                ));
                            }
                        } else {
                            w.push((*s, *v));
                        }
                    }
                    out.push((a.clone(), w, lf.clone().or_else(|| rf.clone())));
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{compile_to_lts, fuse_channel_label, parse_component};
    use crate::lts::parallel_compose;

    fn spec(srcs: &[&str]) -> SystemSpec {
        SystemSpec {
            name: "S".into(),
            components: srcs
                .iter()
                .map(|s| {
                    let c = parse_component(s).unwrap();
                    let k = GeneralizedContract::empty(&c.name);
                    (c, k)
                })
                .collect(),
            channels: Vec::new(),
            tick_cap: DEFAULT_TIMER_CAP,
            narrow: Vec::new(),
            mutant: None,
        }
    }

    const SENDER: &str = "chan go; timer t cap 3; proctype A() {
        a: do :: t >= 2 -> go!; t = 0; goto b; od
        b: do :: go! -> goto a; od }";
    const RECEIVER: &str = "chan go; int[0..2] n = 0; proctype B() {
        x: do :: n < 2 -> go?; n = n + 1; goto y; od
        y: do :: go? -> goto x; :: n == 2 -> n = 0; od }";
    const IDLE: &str = "bool f = false; proctype C() { p: do :: true -> f = true; goto q; od q: }";

    #[test]
    fn rendezvous_fuses_send_and_receive() {
        let m = compose_system(&spec(&[SENDER, RECEIVER]), Default::default()).unwrap();
        let go = ActionLabel::visible("go").unwrap();
        assert!(m.space.lts.alphabet().contains(&go));
        assert!(!m
            .space
            .lts
            .alphabet()
            .iter()
            .any(|a| a.name().ends_with('!') || a.name().ends_with('?')));
        for t in m.space.lts.transitions().iter().filter(|t| t.action == go) {
            let a = m.space.values(t.source).unwrap();
            let b = m.space.values(t.target).unwrap();
            // Both sides move on every fused step.
            assert_ne!(a[0], b[0]);
            assert_ne!(a[1], b[1]);
        }
    }

    #[test]
    fn matches_pairwise_composition_without_shared_state() {
        let s = spec(&[SENDER, RECEIVER, IDLE]);
        let m = compose_system(&s, Default::default()).unwrap();
        let ltss: Vec<_> = s
            .components
            .iter()
            .map(|(c, _)| compile_to_lts(c).unwrap().relabel(fuse_channel_label).unwrap())
            .collect();
        let mut acc = ltss[0].clone();
        for (j, l) in ltss.iter().enumerate().skip(1) {
            acc = parallel_compose(&acc, l, &m.sync_sets[j - 1]).unwrap();
        }
        let names = |l: &crate::lts::Lts| -> BTreeSet<String> { l.state_names().iter().cloned().collect() };
        let edges = |l: &crate::lts::Lts| -> BTreeSet<(String, String, String)> {
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
        };
        assert_eq!(names(&m.space.lts), names(&acc));
        assert_eq!(edges(&m.space.lts), edges(&acc));
    }

    #[test]
    fn dangling_sender_is_not_composable() {
        let err = compose_system(&spec(&[SENDER, IDLE]), Default::default()).unwrap_err();
        assert!(err.to_string().contains("sender (A) but no receiver"), "{err}");
    }

    #[test]
    fn two_writers_conflict() {
        let a = "shared int[0..1] x = 0; proctype A() { a: do :: true -> x = 1; od }";
        let b = "shared int[0..1] x = 0; proctype B() { b: do :: true -> x = 0; od }";
        let err = compose_system(&spec(&[a, b]), Default::default()).unwrap_err();
        assert!(matches!(err, SystemError::WriteConflict { .. }), "{err}");
    }

    #[test]
    fn shared_timer_ticks_once_per_tick() {
        let a = "shared timer t cap 4; proctype A() { a: invariant t <= 3; do :: t == 3 -> t = 0; od }";
        let b = "shared timer t cap 4; proctype B() { b: do :: t == 3 -> goto c; od c: }";
        let m = compose_system(&spec(&[a, b]), Default::default()).unwrap();
        let tick = ActionLabel::visible(TICK).unwrap();
        let slot = m.layout.shared[0].1;
        for t in m.space.lts.transitions() {
            let x = m.space.values(t.source).unwrap()[slot];
            let y = m.space.values(t.target).unwrap()[slot];
            if t.action == tick {
                assert_eq!(y, (x + 1).min(4));
            } else {
                assert!(y == x || y == 0);
            }
        }
        assert!(m.space.lts.state_names().iter().any(|n| n.contains("{t=3}")));
    }

    #[test]
    fn system_file_syntax() {
        let f = parse_system_file(
            r#"system S { tick cap 5;
                component A = "a.pml" contract "a.ctr";
                component B = "b.pml";
                chan go: A -> B;
                narrow A.x = -2..3;
                mutant flip-it { B = "b2.pml"; } }"#,
        )
        .unwrap();
        assert_eq!(f.tick_cap, Some(5));
        assert_eq!(f.components.len(), 2);
        assert_eq!(f.components[1].contract, None);
        assert_eq!(f.mutants[0].name, "flip-it");
        assert_eq!(f.channels[0].receiver, "B");
        assert_eq!(f.narrow[0].to_string(), "A.x=-2..3");
        assert!(parse_system_file("system S { narrow x = 3..1; }").is_err());
    }
}
