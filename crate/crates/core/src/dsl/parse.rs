use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::lexer::{Cursor, Pos, SyntaxError, Tok};
use crate::prop::{parse_expr, EnumInts, Expr, Lit, RawExpr, RawTerm, Resolver, Symbol, VarRef};
use crate::value::{Domain, EnumType};

use super::{
    Assignment, Component, DslError, Edge, Init, Location, Rhs, RhsBase, Sync, SyncDir, VarDecl,
    VarKind,
};

/// Timer cap used when neither the declaration nor the system gives one.
pub const DEFAULT_TIMER_CAP: i64 = 60;

#[derive(Debug, Clone)]
enum RawValue {
    Int(i64),
    Name(String),
    Offset(String, i64),
}

#[derive(Debug, Clone)]
struct RawDecl {
    name: String,
    pos: Pos,
    ty: RawType,
    init: Option<(RawValue, Pos)>,
    input: bool,
    shared: bool,
}

#[derive(Debug, Clone)]
enum RawType {
    Bool,
    Int(i64, i64),
    Timer(Option<i64>),
    Named(String, Pos),
}

#[derive(Debug, Clone, Default)]
struct RawOption {
    pos: Pos,
    guard: Option<RawExpr>,
    sync: Option<(Sync, Pos)>,
    gotos: Vec<(String, Pos)>,
    assigns: Vec<(String, Pos, RawValue)>,
}

#[derive(Debug, Clone)]
struct RawLabel {
    name: String,
    pos: Pos,
    invariant: Option<RawExpr>,
    options: Vec<RawOption>,
}

#[derive(Default)]
struct RawComponent {
    name: String,
    enums: Vec<(Arc<EnumType>, Pos)>,
    decls: Vec<RawDecl>,
    channels: Vec<(String, Pos)>,
    labels: Vec<RawLabel>,
    proc_pos: Pos,
}

/// Restricts an integer variable to a sub-range. `component` limits the
/// override to one component; `None` applies it wherever the name occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Narrowing {
    pub component: Option<String>,
    pub var: String,
    pub lo: i64,
    pub hi: i64,
}

impl std::fmt::Display for Narrowing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(c) = &self.component {
            write!(f, "{c}.")?;
        }
        write!(f, "{}={}..{}", self.var, self.lo, self.hi)
    }
}

impl Narrowing {
    /// `var=lo..hi` or `Comp.var=lo..hi`.
    pub fn parse(text: &str) -> Result<Narrowing, String> {
        let (lhs, range) = text
            .split_once('=')
            .ok_or_else(|| format!("expected `var=lo..hi`, got `{text}`"))?;
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| format!("expected `lo..hi`, got `{range}`"))?;
        let num = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| format!("`{s}` is not an integer"))
        };
        let (component, var) = match lhs.trim().split_once('.') {
            Some((c, v)) => (Some(c.to_string()), v.to_string()),
            None => (None, lhs.trim().to_string()),
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(format!("empty range {lo}..{hi}"));
        }
        Ok(Narrowing { component, var, lo, hi })
    }

    fn applies_to(&self, component: &str, var: &str) -> bool {
        self.var == var && self.component.as_deref().is_none_or(|c| c == component)
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Instance name replacing the proctype's name.
    pub name: Option<String>,
    /// Cap of timers declared without one.
    pub default_cap: i64,
    pub narrow: Vec<Narrowing>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            name: None,
            default_cap: DEFAULT_TIMER_CAP,
            narrow: Vec::new(),
        }
    }
}

/// Parses a component file; the component takes the proctype's name.
pub fn parse_component(src: &str) -> Result<Component, DslError> {
    parse_component_with(src, &ParseOptions::default())
}

pub fn parse_component_with(src: &str, opts: &ParseOptions) -> Result<Component, DslError> {
    let mut raw = parse_raw(src)?;
    if let Some(n) = &opts.name {
        raw.name = n.clone();
    }
    resolve(raw, opts)
}

fn is_decl_start(c: &Cursor, enums: &[(Arc<EnumType>, Pos)]) -> bool {
    match c.peek() {
        Tok::Ident(s) => {
            matches!(s.as_str(), "bool" | "int" | "timer" | "shared" | "input")
                || s.starts_with("TIMER_")
                || (enums.iter().any(|(e, _)| &e.name == s)
                    && matches!(c.peek_at(1), Tok::Ident(_)))
        }
        _ => false,
    }
}

fn parse_raw(src: &str) -> Result<RawComponent, SyntaxError> {
    let mut c = Cursor::new(src)?;
    let mut raw = RawComponent::default();
    let mut seen_proc = false;
    while !c.at_eof() {
        if c.accept(&Tok::Semi) {
            continue;
        }
        if c.is_keyword("enum") {
            let e = parse_enum(&mut c)?;
            raw.enums.push(e);
        } else if c.is_keyword("chan") {
            parse_chan(&mut c, &mut raw.channels)?;
        } else if is_decl_start(&c, &raw.enums) {
            let d = parse_decl(&mut c)?;
            raw.decls.push(d);
        } else if matches!(c.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case("active"))
            || c.is_keyword("proctype")
        {
            if seen_proc {
                return Err(SyntaxError::new(
                    c.pos(),
                    "a component file holds exactly one proctype",
                ));
            }
            seen_proc = true;
            parse_proctype(&mut c, &mut raw)?;
        } else {
            return Err(c.unexpected("a declaration or a proctype"));
        }
    }
    if !seen_proc {
        return Err(SyntaxError::new(c.pos(), "missing proctype"));
    }
    Ok(raw)
}

fn parse_enum(c: &mut Cursor) -> Result<(Arc<EnumType>, Pos), SyntaxError> {
    let pos = c.expect_keyword("enum")?;
    let (name, _) = c.ident()?;
    c.expect(&Tok::LBrace)?;
    let mut constants = Vec::new();
    loop {
        let (k, _) = c.ident()?;
        let alias = if c.accept(&Tok::Assign) {
            Some(c.int()?)
        } else {
            None
        };
        constants.push((k, alias));
        if !c.accept(&Tok::Comma) {
            break;
        }
    }
    c.expect(&Tok::RBrace)?;
    c.accept(&Tok::Semi);
    Ok((Arc::new(EnumType { name, constants }), pos))
}

/// `chan a, b;` or the ProMeLa form `chan a = [0] of { bit };`.
fn parse_chan(c: &mut Cursor, out: &mut Vec<(String, Pos)>) -> Result<(), SyntaxError> {
    c.expect_keyword("chan")?;
    loop {
        let (name, pos) = c.ident()?;
        if c.accept(&Tok::Assign) {
            c.expect(&Tok::LBracket)?;
            let cap = c.int()?;
            if cap != 0 {
                return Err(SyntaxError::new(pos, "only rendezvous channels (`[0]`) are supported"));
            }
            c.expect(&Tok::RBracket)?;
            c.expect_keyword("of")?;
            c.expect(&Tok::LBrace)?;
            while !c.accept(&Tok::RBrace) {
                c.next();
                if c.at_eof() {
                    return Err(c.unexpected("`}`"));
                }
            }
        }
        out.push((name, pos));
        if !c.accept(&Tok::Comma) {
            break;
        }
    }
    c.expect(&Tok::Semi)?;
    Ok(())
}

fn parse_value(c: &mut Cursor) -> Result<RawValue, SyntaxError> {
    match c.peek().clone() {
        Tok::Int(_) | Tok::Minus => Ok(RawValue::Int(c.int()?)),
        Tok::Ident(name) => {
            c.next();
            let sign = match c.peek() {
                Tok::Plus => 1,
                Tok::Minus => -1,
                _ => return Ok(RawValue::Name(name)),
            };
            c.next();
            let n = c.int()?;
            Ok(RawValue::Offset(name, sign * n))
        }
        _ => Err(c.unexpected("a value")),
    }
}

fn parse_decl(c: &mut Cursor) -> Result<RawDecl, SyntaxError> {
    let mut shared = false;
    let mut input = false;
    loop {
        if c.accept_keyword("shared") {
            shared = true;
        } else if c.accept_keyword("input") {
            input = true;
        } else {
            break;
        }
    }
    let (tname, tpos) = c.ident()?;
    let mut ty = match tname.as_str() {
        "bool" => RawType::Bool,
        "int" => {
            c.expect(&Tok::LBracket)?;
            let lo = c.int()?;
            c.expect(&Tok::DotDot)?;
            let hi = c.int()?;
            c.expect(&Tok::RBracket)?;
            if lo > hi {
                return Err(SyntaxError::new(tpos, format!("empty range {lo}..{hi}")));
            }
            RawType::Int(lo, hi)
        }
        "timer" => RawType::Timer(None),
        t if t.starts_with("TIMER_") => RawType::Timer(None),
        _ => RawType::Named(tname.clone(), tpos),
    };
    let (name, pos) = c.ident()?;
    if c.accept_keyword("cap") {
        let RawType::Timer(_) = ty else {
            return Err(SyntaxError::new(pos, "`cap` only applies to timers"));
        };
        let n = c.int()?;
        if n < 1 {
            return Err(SyntaxError::new(pos, "timer cap must be positive"));
        }
        ty = RawType::Timer(Some(n));
    }
    let init = if c.accept(&Tok::Assign) {
        let p = c.pos();
        Some((parse_value(c)?, p))
    } else {
        None
    };
    c.expect(&Tok::Semi)?;
    Ok(RawDecl {
        name,
        pos,
        ty,
        init,
        input,
        shared,
    })
}

fn parse_proctype(c: &mut Cursor, raw: &mut RawComponent) -> Result<(), SyntaxError> {
    if matches!(c.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case("active")) {
        c.next();
    }
    raw.proc_pos = c.expect_keyword("proctype")?;
    raw.name = c.ident()?.0;
    c.expect(&Tok::LParen)?;
    c.expect(&Tok::RParen)?;
    c.expect(&Tok::LBrace)?;
    loop {
        if c.accept(&Tok::RBrace) {
            break;
        }
        if c.accept(&Tok::Semi) {
            continue;
        }
        if matches!(c.peek(), Tok::Ident(_)) && c.peek_at(1) == &Tok::Colon {
            raw.labels.push(parse_label(c)?);
            continue;
        }
        if raw.labels.is_empty() {
            if c.is_keyword("chan") {
                parse_chan(c, &mut raw.channels)?;
                continue;
            }
            if is_decl_start(c, &raw.enums) {
                let d = parse_decl(c)?;
                raw.decls.push(d);
                continue;
            }
            return Err(SyntaxError::new(c.pos(), "missing initial label"));
        }
        return Err(c.unexpected("a label or `}`"));
    }
    Ok(())
}

fn parse_label(c: &mut Cursor) -> Result<RawLabel, SyntaxError> {
    let (name, pos) = c.ident()?;
    c.expect(&Tok::Colon)?;
    let mut label = RawLabel {
        name,
        pos,
        invariant: None,
        options: Vec::new(),
    };
    if c.accept_keyword("invariant") {
        label.invariant = Some(parse_expr(c)?);
        c.expect(&Tok::Semi)?;
    }
    if c.accept_keyword("do") {
        while c.accept(&Tok::DoubleColon) {
            label.options.push(parse_option(c)?);
        }
        if label.options.is_empty() {
            return Err(SyntaxError::new(c.pos(), "`do` block without options"));
        }
        c.expect_keyword("od")?;
        c.accept(&Tok::Semi);
    }
    Ok(label)
}

fn is_sync_start(c: &Cursor) -> bool {
    matches!(c.peek(), Tok::Ident(_)) && matches!(c.peek_at(1), Tok::Bang | Tok::Question)
}

fn parse_sync(c: &mut Cursor) -> Result<(Sync, Pos), SyntaxError> {
    let (channel, pos) = c.ident()?;
    let dir = match c.next().tok {
        Tok::Bang => SyncDir::Send,
        _ => SyncDir::Receive,
    };
    Ok((Sync { channel, dir }, pos))
}

fn set_sync(opt: &mut RawOption, s: (Sync, Pos)) -> Result<(), SyntaxError> {
    if opt.sync.is_some() {
        return Err(SyntaxError::new(s.1, "an option synchronises on at most one channel"));
    }
    opt.sync = Some(s);
    Ok(())
}

fn parse_option(c: &mut Cursor) -> Result<RawOption, SyntaxError> {
    let mut opt = RawOption {
        pos: c.pos(),
        ..RawOption::default()
    };
    let first_is_statement = is_sync_start(c)
        || c.is_keyword("goto")
        || c.is_keyword("skip")
        || (matches!(c.peek(), Tok::Ident(_)) && c.peek_at(1) == &Tok::Assign);
    if !first_is_statement {
        opt.guard = Some(parse_expr(c)?);
        if !c.accept(&Tok::Arrow) {
            c.accept(&Tok::Semi);
        }
    }
    loop {
        if c.accept(&Tok::Semi) || c.accept(&Tok::Arrow) {
            continue;
        }
        if matches!(c.peek(), Tok::DoubleColon) || c.is_keyword("od") {
            break;
        }
        if c.accept_keyword("skip") {
            continue;
        }
        if c.accept_keyword("goto") {
            opt.gotos.push(c.ident()?);
            continue;
        }
        if is_sync_start(c) {
            let s = parse_sync(c)?;
            set_sync(&mut opt, s)?;
            continue;
        }
        if matches!(c.peek(), Tok::Ident(_)) && c.peek_at(1) == &Tok::Assign {
            loop {
                let (var, pos) = c.ident()?;
                c.expect(&Tok::Assign)?;
                let v = parse_value(c)?;
                opt.assigns.push((var, pos, v));
                if !(c.is_keyword("and")
                    && matches!(c.peek_at(1), Tok::Ident(_))
                    && c.peek_at(2) == &Tok::Assign)
                {
                    break;
                }
                c.next();
            }
            continue;
        }
        return Err(c.unexpected("a statement, `::` or `od`"));
    }
    Ok(opt)
}

struct Ctx {
    errors: Vec<DslError>,
}

impl Ctx {
    fn err(&mut self, pos: Pos, msg: impl Into<String>) {
        self.errors.push(DslError::semantic(pos, msg));
    }
}

fn resolve(raw: RawComponent, opts: &ParseOptions) -> Result<Component, DslError> {
    let default_cap = opts.default_cap;
    let mut cx = Ctx { errors: Vec::new() };

    let mut enum_names = HashSet::new();
    let mut constant_names = HashMap::new();
    for (e, pos) in &raw.enums {
        if !enum_names.insert(e.name.clone()) {
            cx.err(*pos, format!("duplicate enum `{}`", e.name));
        }
        for (k, _) in &e.constants {
            if constant_names.insert(k.clone(), e.name.clone()).is_some() {
                cx.err(*pos, format!("duplicate enum constant `{k}`"));
            }
        }
    }
    let enums: Vec<Arc<EnumType>> = raw.enums.iter().map(|(e, _)| e.clone()).collect();

    // Labels first so that the symbol table knows the locations.
    let mut locations: Vec<Location> = Vec::new();
    let mut label_index = HashMap::new();
    for l in &raw.labels {
        if label_index.insert(l.name.clone(), locations.len()).is_some() {
            cx.err(l.pos, format!("duplicate label `{}`", l.name));
            continue;
        }
        locations.push(Location {
            name: l.name.clone(),
            invariant: None,
        });
    }
    if locations.is_empty() {
        cx.err(raw.proc_pos, "missing initial label");
    }

    let mut vars: Vec<VarDecl> = Vec::new();
    let mut var_names = HashSet::new();
    for d in &raw.decls {
        if !var_names.insert(d.name.clone()) {
            cx.err(d.pos, format!("duplicate variable `{}`", d.name));
            continue;
        }
        if constant_names.contains_key(&d.name) {
            cx.err(d.pos, format!("`{}` is both a variable and an enum constant", d.name));
        }
        let (domain, kind) = match &d.ty {
            RawType::Bool => (Domain::Bool, VarKind::Plain),
            RawType::Int(lo, hi) => (Domain::int(*lo, *hi), VarKind::Plain),
            RawType::Timer(cap) => (Domain::int(0, cap.unwrap_or(default_cap)), VarKind::Timer),
            RawType::Named(t, p) => match enums.iter().find(|e| &e.name == t) {
                Some(e) => (Domain::Enum(e.clone()), VarKind::Plain),
                None => {
                    cx.err(*p, format!("unknown type `{t}`"));
                    continue;
                }
            },
        };
        let mut domain = domain;
        for n in opts.narrow.iter().filter(|n| n.applies_to(&raw.name, &d.name)) {
            match domain {
                Domain::Int { lo, hi } if kind == VarKind::Plain && lo <= n.lo && n.hi <= hi => {
                    domain = Domain::int(n.lo, n.hi);
                }
                Domain::Int { .. } if kind == VarKind::Plain => cx.err(
                    d.pos,
                    format!("narrowing `{}` to {}..{} would widen {domain}", d.name, n.lo, n.hi),
                ),
                _ => cx.err(d.pos, format!("only integer variables can be narrowed, not `{}`", d.name)),
            }
        }
        let init = match (&d.init, d.input, kind) {
            (Some((_, p)), _, VarKind::Timer) => {
                cx.err(*p, "timers start at 0 and take no initializer");
                continue;
            }
            (Some((_, p)), true, _) => {
                cx.err(*p, "input variables take no initializer");
                continue;
            }
            (None, true, _) => Init::Any,
            (None, false, _) => Init::Value(domain.min_code()),
            (Some((v, p)), false, _) => match literal(v, &domain, &enums) {
                Ok(Lit::Int(n)) if !domain.contains(n) => {
                    cx.err(*p, format!("initial value {n} of `{}` is outside {domain}", d.name));
                    continue;
                }
                Ok(l) => Init::Value(l.code()),
                Err(m) => {
                    cx.err(*p, m);
                    continue;
                }
            },
        };
        vars.push(VarDecl {
            name: d.name.clone(),
            domain,
            init,
            kind,
            shared: d.shared,
            pos: d.pos,
        });
    }

    let mut channels = Vec::new();
    for (ch, pos) in &raw.channels {
        if channels.contains(ch) {
            cx.err(*pos, format!("duplicate channel `{ch}`"));
        } else {
            channels.push(ch.clone());
        }
    }

    let mut comp = Component {
        name: raw.name.clone(),
        enums,
        vars,
        channels,
        locations,
        initial: 0,
        edges: Vec::new(),
    };
    let symbols = comp.symbol_table();

    let mut invariants = Vec::new();
    let mut edges = Vec::new();
    for l in &raw.labels {
        let Some(&src) = label_index.get(&l.name) else {
            continue;
        };
        if let Some(inv) = &l.invariant {
            let mut r = Resolver::new(&symbols, EnumInts::ByAlias);
            let e = r.expr(inv);
            if !r.errors.is_empty() {
                cx.errors.push(DslError::from_prop(r.errors));
            } else if let Some(e) = e {
                check_timer_bounds(&e, &comp, l.pos, &mut cx);
                invariants.push((src, e));
            }
        }
        for o in &l.options {
            if let Some(e) = resolve_option(o, src, &comp, &symbols, &label_index, &mut cx) {
                edges.push(e);
            }
        }
    }
    for (i, e) in invariants {
        comp.locations[i].invariant = Some(e);
    }
    comp.edges = edges;

    match cx.errors.len() {
        0 => Ok(comp),
        1 => Err(cx.errors.pop().unwrap()),
        _ => Err(DslError::Many(cx.errors)),
    }
}

/// Literal for a declaration initializer.
fn literal(v: &RawValue, domain: &Domain, enums: &[Arc<EnumType>]) -> Result<Lit, String> {
    match (v, domain) {
        (RawValue::Int(n), Domain::Int { .. }) => Ok(Lit::Int(*n)),
        (RawValue::Int(n @ (0 | 1)), Domain::Bool) => Ok(Lit::Bool(*n == 1)),
        (RawValue::Name(b), Domain::Bool) if b == "true" || b == "false" => {
            Ok(Lit::Bool(b == "true"))
        }
        (RawValue::Int(n), Domain::Enum(e)) => e
            .index_of_alias(*n)
            .map(|i| Lit::Enum {
                name: e.constants[i].0.clone(),
                code: i as i64,
            })
            .ok_or_else(|| format!("no constant of {} has numeric alias {n}", e.name)),
        (RawValue::Name(k), Domain::Enum(e)) => match e.index_of(k) {
            Some(i) => Ok(Lit::Enum {
                name: k.clone(),
                code: i as i64,
            }),
            None if enums.iter().any(|x| x.index_of(k).is_some()) => {
                Err(format!("`{k}` is not a constant of {}", e.name))
            }
            None => Err(format!("unknown identifier `{k}`")),
        },
        _ => Err(format!("value does not fit {domain}")),
    }
}

/// A comparison demanding a timer value above its cap can never hold.
fn check_timer_bounds(e: &Expr, comp: &Component, pos: Pos, cx: &mut Ctx) {
    use crate::prop::{CmpOp, Term};
    match e {
        Expr::Cmp { op, lhs, rhs } => {
            let (v, n, op) = match (lhs, rhs) {
                (Term::Var(v), Term::Lit(Lit::Int(n))) => (v, *n, *op),
                (Term::Lit(Lit::Int(n)), Term::Var(v)) => {
                    let flipped = match op {
                        CmpOp::Lt => CmpOp::Gt,
                        CmpOp::Le => CmpOp::Ge,
                        CmpOp::Gt => CmpOp::Lt,
                        CmpOp::Ge => CmpOp::Le,
                        o => *o,
                    };
                    (v, *n, flipped)
                }
                _ => return,
            };
            let Some(d) = comp.var(&v.name) else { return };
            if !d.is_timer() {
                return;
            }
            let cap = d.domain.max_code();
            let impossible = match op {
                CmpOp::Eq | CmpOp::Ge => n > cap,
                CmpOp::Gt => n >= cap,
                _ => false,
            };
            if impossible {
                cx.err(
                    pos,
                    format!("`{} {} {n}` can never hold: timer `{}` saturates at {cap}", v.name, op.symbol(), v.name),
                );
            }
        }
        Expr::Not(a) => check_timer_bounds(a, comp, pos, cx),
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Imply(a, b) => {
            check_timer_bounds(a, comp, pos, cx);
            check_timer_bounds(b, comp, pos, cx);
        }
        _ => {}
    }
}

fn var_ref(comp: &Component, name: &str) -> Option<VarRef> {
    let slot = comp.var_slot(name)?;
    Some(VarRef {
        name: name.to_string(),
        slot,
        domain: comp.vars[slot - 1].domain.clone(),
    })
}

fn resolve_option(
    o: &RawOption,
    src: usize,
    comp: &Component,
    symbols: &crate::prop::SymbolTable,
    labels: &HashMap<String, usize>,
    cx: &mut Ctx,
) -> Option<Edge> {
    let before = cx.errors.len();
    let guard_raw = o
        .guard
        .clone()
        .unwrap_or_else(|| RawExpr::Atom(RawTerm::Name("true".into(), o.pos)));
    let mut r = Resolver::new(symbols, EnumInts::ByAlias);
    let guard = r.expr(&guard_raw);
    if !r.errors.is_empty() {
        cx.errors.push(DslError::from_prop(r.errors));
    }
    if let Some(g) = &guard {
        check_timer_bounds(g, comp, o.pos, cx);
    }

    let target = match o.gotos.as_slice() {
        [] => Some(src),
        [(l, p)] => match labels.get(l) {
            Some(&t) => Some(t),
            None => {
                cx.err(*p, format!("unknown label `{l}`"));
                None
            }
        },
        [_, (_, p), ..] => {
            cx.err(*p, "an option may contain at most one `goto`");
            None
        }
    };

    if let Some((s, p)) = &o.sync {
        if !comp.channels.contains(&s.channel) {
            cx.err(*p, format!("unknown channel `{}`", s.channel));
        }
    }

    let mut assignments = Vec::new();
    let mut timer_resets = Vec::new();
    for (name, pos, value) in &o.assigns {
        let Some(target) = var_ref(comp, name) else {
            match symbols.lookup(name) {
                Some(Symbol::Component { .. }) => {
                    cx.err(*pos, format!("cannot assign to component `{name}`"))
                }
                _ => cx.err(*pos, format!("unknown identifier `{name}`")),
            }
            continue;
        };
        let decl = comp.var(name).unwrap();
        if decl.is_timer() {
            match value {
                RawValue::Int(0) => timer_resets.push(target),
                _ => cx.err(*pos, format!("timer `{name}` can only be reset to 0")),
            }
            continue;
        }
        match rhs(value, &target.domain, comp) {
            Ok(v) => {
                if let RhsBase::Lit(Lit::Int(n)) = &v.base {
                    if !target.domain.contains(*n) {
                        cx.errors.push(DslError::DomainOverflow {
                            edge: format!("{} at {pos}", comp.locations[src].name),
                            var: name.clone(),
                            value: *n,
                            domain: target.domain.clone(),
                        });
                        continue;
                    }
                }
                assignments.push(Assignment { target, value: v });
            }
            Err(m) => cx.err(*pos, m),
        }
    }

    if cx.errors.len() > before {
        return None;
    }
    Some(Edge {
        source: src,
        target: target?,
        guard: guard?,
        guard_raw,
        sync: o.sync.as_ref().map(|(s, _)| s.clone()),
        assignments,
        timer_resets,
        pos: o.pos,
    })
}

fn rhs(v: &RawValue, domain: &Domain, comp: &Component) -> Result<Rhs, String> {
    let lit = |l| Rhs {
        base: RhsBase::Lit(l),
        offset: 0,
    };
    match v {
        RawValue::Name(n) => {
            if let Some(src) = var_ref(comp, n) {
                if src.domain.ty() != domain.ty() {
                    return Err(format!("cannot assign {} `{n}` to a {} variable", src.domain.ty(), domain.ty()));
                }
                return Ok(Rhs {
                    base: RhsBase::Var(src),
                    offset: 0,
                });
            }
            literal(v, domain, &comp.enums).map(lit)
        }
        RawValue::Int(_) => literal(v, domain, &comp.enums).map(lit),
        RawValue::Offset(n, k) => {
            let src = var_ref(comp, n).ok_or_else(|| format!("unknown identifier `{n}`"))?;
            if domain.ty() != crate::value::Ty::Int || src.domain.ty() != crate::value::Ty::Int {
                return Err("arithmetic needs integer variables".into());
            }
            Ok(Rhs {
                base: RhsBase::Var(src),
                offset: *k,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMP: &str = r#"
        enum OnOff { OFF = 0, ON = 1 };
        OnOff lamp = OFF;
        int[0..3] level = 0;
        timer t cap 5;
        chan press;

        active proctype Lamp() {
        off:
            do
            :: press? -> lamp = ON and level = 1; t = 0; goto on;
            od
        on:
            invariant t <= 4;
            do
            :: (level < 3 and t >= 1) -> level = level + 1;
            :: t == 4 -> lamp = 0; goto off;
            od
        }
    "#;

    #[test]
    fn parses_locations_edges_and_effects() {
        let c = parse_component(LAMP).unwrap();
        assert_eq!(c.name, "Lamp");
        assert_eq!(c.location_names(), vec!["off", "on"]);
        assert_eq!(c.edges.len(), 3);
        let e0 = &c.edges[0];
        assert_eq!(e0.sync.as_ref().unwrap().to_string(), "press?");
        assert_eq!(e0.assignments.len(), 2);
        assert_eq!(e0.timer_resets.len(), 1);
        assert_eq!((e0.source, e0.target), (0, 1));
        // No goto: the option loops on its label.
        assert_eq!((c.edges[1].source, c.edges[1].target), (1, 1));
        assert_eq!(c.edges[1].assignments[0].value.to_string(), "level + 1");
        // Integer stands for the constant with that alias.
        assert_eq!(
            c.edges[2].assignments[0].value.base,
            RhsBase::Lit(Lit::Enum { name: "OFF".into(), code: 0 })
        );
        assert!(c.locations[1].invariant.is_some());
        assert_eq!(c.var("t").unwrap().domain, Domain::int(0, 5));
    }

    #[test]
    fn unknown_label_is_reported() {
        let src = "active proctype P() { confing: do :: true -> goto config; od }";
        let err = parse_component(src).unwrap_err();
        assert!(err.to_string().contains("unknown label `config`"), "{err}");
    }

    #[test]
    fn duplicate_label_and_missing_initial() {
        let err = parse_component("proctype P() { a: a: }").unwrap_err();
        assert!(err.to_string().contains("duplicate label"), "{err}");
        let err = parse_component("proctype P() { do :: true od }").unwrap_err();
        assert!(err.to_string().contains("missing initial label"), "{err}");
    }

    #[test]
    fn empty_do_is_a_syntax_error() {
        let err = parse_component("proctype P() { a: do od }").unwrap_err();
        assert!(matches!(err, DslError::Syntax(_)), "{err}");
    }

    #[test]
    fn timer_guard_above_cap_is_rejected() {
        let src = "timer t cap 3; proctype P() { a: do :: t >= 4 -> goto a; od }";
        let err = parse_component(src).unwrap_err();
        assert!(err.to_string().contains("saturates at 3"), "{err}");
    }

    #[test]
    fn literal_overflow_names_the_edge() {
        let src = "int[0..3] h = 0; proctype P() { a: do :: true -> h = 4; od }";
        match parse_component(src).unwrap_err() {
            DslError::DomainOverflow { var, value, edge, .. } => {
                assert_eq!((var.as_str(), value), ("h", 4));
                assert!(edge.starts_with("a at"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn errors_are_collected() {
        let src = "proctype P() { a: do :: x > 1 -> y = 2; goto b; od }";
        let err = parse_component(src).unwrap_err();
        let msgs: Vec<String> = err.diagnostics().iter().map(|e| e.to_string()).collect();
        assert_eq!(msgs.len(), 3, "{msgs:?}");
    }

    #[test]
    fn capitalised_active_and_input_declarations() {
        let src = "input int[1..3] v; Active proctype P() { a: }";
        let c = parse_component(src).unwrap();
        assert_eq!(c.vars[0].init, Init::Any);
        assert!(c.edges.is_empty());
    }
}

#[cfg(test)]
mod narrowing_tests {
    use super::*;

    const SRC: &str = "input int[0..12] v; int[0..5] w = 4; proctype P() { a: }";

    #[test]
    fn narrows_and_rejects_widening() {
        let opts = ParseOptions {
            narrow: vec![Narrowing::parse("P.v=10..12").unwrap()],
            ..Default::default()
        };
        let c = parse_component_with(SRC, &opts).unwrap();
        assert_eq!(c.vars[0].domain, Domain::int(10, 12));

        let opts = ParseOptions {
            narrow: vec![Narrowing::parse("v=0..20").unwrap()],
            ..Default::default()
        };
        assert!(parse_component_with(SRC, &opts).unwrap_err().to_string().contains("widen"));
    }

    #[test]
    fn narrowing_below_the_initial_value_fails() {
        let opts = ParseOptions {
            narrow: vec![Narrowing::parse("w=0..2").unwrap()],
            ..Default::default()
        };
        assert!(parse_component_with(SRC, &opts).is_err());
    }

    #[test]
    fn narrowing_syntax() {
        assert!(Narrowing::parse("x").is_err());
        assert!(Narrowing::parse("x=3..1").is_err());
        assert_eq!(Narrowing::parse("CC.x=-3..1").unwrap().lo, -3);
    }
}
