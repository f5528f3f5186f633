//! The component language: a small ProMeLa-flavoured process notation with
//! bounded variables, discrete timers, location invariants and rendezvous
//! channels.
//!
//! ```text
//! enum OnOff { OFF = 0, ON = 1 };
//! OnOff AC = OFF;
//! int[0..7] heater_v = 0;
//! shared timer AC_comp_working cap 40;
//! chan sleep;
//!
//! active proctype Climate_controller() {
//! Air_condition:
//!     invariant AC_comp_working <= 30;
//!     do
//!     :: (AC_comp_working < 30 and AC == 1) -> goto Air_condition;
//!     :: (AC_comp_working == 30) -> sleep!; goto AC_sleeping;
//!     od
//! AC_sleeping:
//! }
//! ```

mod compile;
mod export;
mod parse;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lexer::{Pos, SyntaxError};
use crate::prop::{Expr, Lit, PropError, RawExpr, SymbolTable, VarRef};
use crate::value::{Domain, EnumType};

pub(crate) use compile::initial_values;
pub use compile::{
    compile_to_lts, compile_with, fuse_channel_label, BoundComponent, CompileOptions,
    CompiledComponent, LocalMove, TICK,
};
pub use export::export_uppaal_like;
pub use parse::{parse_component, parse_component_with, Narrowing, ParseOptions, DEFAULT_TIMER_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: {message}")]
    Semantic { pos: Pos, message: String },
    #[error("{}", join(.0))]
    Many(Vec<DslError>),
    #[error("domain overflow on edge {edge}: `{var}` would become {value}, outside {domain}")]
    DomainOverflow {
        edge: String,
        var: String,
        value: i64,
        domain: Domain,
    },
    #[error("no admissible initial state: {0}")]
    NoInitialState(String),
    #[error("state limit of {0} exceeded")]
    StateLimit(usize),
}

fn join(errs: &[DslError]) -> String {
    errs.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

impl DslError {
    pub(crate) fn semantic(pos: Pos, message: impl Into<String>) -> Self {
        DslError::Semantic {
            pos,
            message: message.into(),
        }
    }

    pub(crate) fn from_prop(errs: Vec<PropError>) -> Self {
        let mut out: Vec<DslError> = errs
            .into_iter()
            .map(|e| match e {
                PropError::Syntax(s) => DslError::Syntax(s),
                PropError::Unknown { name, pos } => {
                    DslError::semantic(pos, format!("unknown identifier `{name}`"))
                }
                PropError::Type { pos, message } => DslError::semantic(pos, message),
            })
            .collect();
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            DslError::Many(out)
        }
    }

    /// Flattened list of individual diagnostics.
    pub fn diagnostics(&self) -> Vec<&DslError> {
        match self {
            DslError::Many(v) => v.iter().flat_map(|e| e.diagnostics()).collect(),
            e => vec![e],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Plain,
    /// Discrete counter that advances by one on every global tick and
    /// saturates at the top of its domain.
    Timer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    Value(i64),
    /// Nondeterministic: any value of the domain is an admissible start.
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
    pub init: Init,
    pub kind: VarKind,
    /// Lives in the system-wide store rather than in this component.
    pub shared: bool,
    pub pos: Pos,
}

impl VarDecl {
    pub fn is_timer(&self) -> bool {
        self.kind == VarKind::Timer
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyncDir {
    Send,
    Receive,
}

impl SyncDir {
    pub fn suffix(self) -> char {
        match self {
            SyncDir::Send => '!',
            SyncDir::Receive => '?',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sync {
    pub channel: String,
    pub dir: SyncDir,
}

impl fmt::Display for Sync {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.channel, self.dir.suffix())
    }
}

/// Right-hand side of an assignment: a literal or variable plus an
/// optional integer offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhsBase {
    Lit(Lit),
    Var(VarRef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rhs {
    pub base: RhsBase,
    pub offset: i64,
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.base {
            RhsBase::Lit(l) => write!(f, "{l}")?,
            RhsBase::Var(v) => f.write_str(&v.name)?,
        }
        match self.offset {
            0 => Ok(()),
            n if n > 0 => write!(f, " + {n}"),
            n => write!(f, " - {}", -n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub target: VarRef,
    pub value: Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub guard: Expr,
    pub guard_raw: RawExpr,
    pub sync: Option<Sync>,
    /// Applied in order after the guard holds.
    pub assignments: Vec<Assignment>,
    /// Timers set back to zero by this edge.
    pub timer_resets: Vec<VarRef>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: Option<Expr>,
}

/// A parsed and resolved component.
///
/// Expressions are resolved against the component's own layout: slot 0
/// holds the current location index and slot `i + 1` holds `vars[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub enums: Vec<Arc<EnumType>>,
    pub vars: Vec<VarDecl>,
    pub channels: Vec<String>,
    pub locations: Vec<Location>,
    pub initial: usize,
    pub edges: Vec<Edge>,
}

impl Component {
    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn var_slot(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name).map(|i| i + 1)
    }

    pub fn slot_count(&self) -> usize {
        self.vars.len() + 1
    }

    pub fn location_names(&self) -> Vec<String> {
        self.locations.iter().map(|l| l.name.clone()).collect()
    }

    /// Symbols visible to contracts of this component when it is checked on
    /// its own: its variables and `<name>.<location>`.
    pub fn symbol_table(&self) -> SymbolTable {
        let mut t = SymbolTable::new();
        t.bind_component(&self.name, 0, self.location_names());
        for e in &self.enums {
            t.declare_enum(e.clone());
        }
        for (i, v) in self.vars.iter().enumerate() {
            t.bind_var(&v.name, i + 1, v.domain.clone());
        }
        t
    }

    /// Channels used for sending and receiving.
    pub fn channel_uses(&self) -> Vec<(String, SyncDir)> {
        let mut out: Vec<(String, SyncDir)> = self
            .edges
            .iter()
            .filter_map(|e| e.sync.as_ref().map(|s| (s.channel.clone(), s.dir)))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0).then((a.1 as u8).cmp(&(b.1 as u8))));
        out.dedup();
        out
    }

    /// Names of the variables some edge assigns or resets.
    pub fn written_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .edges
            .iter()
            .flat_map(|e| {
                e.assignments
                    .iter()
                    .map(|a| a.target.name.clone())
                    .chain(e.timer_resets.iter().map(|t| t.name.clone()))
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Short description used in diagnostics.
    pub fn describe_edge(&self, e: &Edge) -> String {
        format!(
            "{}: {} -> {} at {}",
            self.name, self.locations[e.source].name, self.locations[e.target].name, e.pos
        )
    }
}
