use crate::lexer::{Cursor, Pos, SyntaxError, Tok};
use crate::value::{Domain, Ty};

use super::ast::{CmpOp, Expr, Lit, LocRef, Term, VarRef};
use super::symbols::{Symbol, SymbolTable};
use super::{Modality, PropError, Property, RawProperty};

/// Unresolved term as written in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawTerm {
    Name(String, Pos),
    Qualified(String, String, Pos),
    Diff(Box<RawTerm>, Box<RawTerm>),
    Int(i64, Pos),
}

impl RawTerm {
    fn pos(&self) -> Pos {
        match self {
            RawTerm::Name(_, p) | RawTerm::Qualified(_, _, p) | RawTerm::Int(_, p) => *p,
            RawTerm::Diff(a, _) => a.pos(),
        }
    }
}

/// Unresolved expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawExpr {
    Atom(RawTerm),
    Cmp(CmpOp, RawTerm, RawTerm, Pos),
    In(RawTerm, Vec<RawTerm>, Pos),
    Not(Box<RawExpr>),
    And(Box<RawExpr>, Box<RawExpr>),
    Or(Box<RawExpr>, Box<RawExpr>),
    Imply(Box<RawExpr>, Box<RawExpr>),
}

pub fn parse_expr(c: &mut Cursor) -> Result<RawExpr, SyntaxError> {
    let lhs = parse_or(c)?;
    if c.accept_keyword("imply") {
        let rhs = parse_expr(c)?;
        return Ok(RawExpr::Imply(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_or(c: &mut Cursor) -> Result<RawExpr, SyntaxError> {
    let mut lhs = parse_and(c)?;
    while c.accept_keyword("or") {
        let rhs = parse_and(c)?;
        lhs = RawExpr::Or(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_and(c: &mut Cursor) -> Result<RawExpr, SyntaxError> {
    let mut lhs = parse_unary(c)?;
    while c.accept_keyword("and") {
        let rhs = parse_unary(c)?;
        lhs = RawExpr::And(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_unary(c: &mut Cursor) -> Result<RawExpr, SyntaxError> {
    if c.accept_keyword("not") {
        return Ok(RawExpr::Not(Box::new(parse_unary(c)?)));
    }
    if c.accept(&Tok::LParen) {
        let e = parse_expr(c)?;
        c.expect(&Tok::RParen)?;
        return Ok(e);
    }
    parse_atom(c)
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        _ => return None,
    })
}

const RESERVED: &[&str] = &["and", "or", "not", "imply", "in", "always", "never", "initially"];

fn simple_term(c: &mut Cursor) -> Result<RawTerm, SyntaxError> {
    let pos = c.pos();
    match c.peek().clone() {
        Tok::Int(_) | Tok::Minus => Ok(RawTerm::Int(c.int()?, pos)),
        Tok::Ident(name) if !RESERVED.contains(&name.as_str()) => {
            c.next();
            if c.accept(&Tok::Dot) {
                let (member, _) = c.ident()?;
                Ok(RawTerm::Qualified(name, member, pos))
            } else {
                Ok(RawTerm::Name(name, pos))
            }
        }
        _ => Err(c.unexpected("a variable, constant or literal")),
    }
}

pub fn parse_term(c: &mut Cursor) -> Result<RawTerm, SyntaxError> {
    let t = simple_term(c)?;
    if matches!(t, RawTerm::Name(..) | RawTerm::Qualified(..)) && c.peek() == &Tok::Minus {
        c.next();
        let rhs = simple_term(c)?;
        return Ok(RawTerm::Diff(Box::new(t), Box::new(rhs)));
    }
    Ok(t)
}

fn parse_atom(c: &mut Cursor) -> Result<RawExpr, SyntaxError> {
    let lhs = parse_term(c)?;
    let pos = lhs.pos();
    if let Some(op) = cmp_op(c.peek()) {
        c.next();
        let rhs = parse_term(c)?;
        return Ok(RawExpr::Cmp(op, lhs, rhs, pos));
    }
    if c.accept_keyword("in") {
        c.expect(&Tok::LBrace)?;
        if c.peek() == &Tok::RBrace {
            return Err(SyntaxError::new(c.pos(), "membership set must not be empty"));
        }
        let mut set = vec![simple_term(c)?];
        while c.accept(&Tok::Comma) {
            set.push(simple_term(c)?);
        }
        c.expect(&Tok::RBrace)?;
        return Ok(RawExpr::In(lhs, set, pos));
    }
    Ok(RawExpr::Atom(lhs))
}

/// `Property <name> [rank <n>]: <modality> <expr> ;` or a bare
/// `<modality> <expr>` with an optional `;`.
pub fn parse_raw_property(c: &mut Cursor) -> Result<RawProperty, SyntaxError> {
    let pos = c.pos();
    let mut name = String::from("_");
    let mut rank = None;
    let mut headed = false;
    if c.accept_keyword("Property") {
        headed = true;
        name = property_name(c)?;
        if c.accept_keyword("rank") {
            rank = Some(c.int()?);
        }
        c.expect(&Tok::Colon)?;
    }
    let modality = parse_modality(c)?;
    let body = parse_expr(c)?;
    if headed {
        c.expect(&Tok::Semi)?;
    } else {
        c.accept(&Tok::Semi);
    }
    Ok(RawProperty {
        name,
        rank,
        modality,
        body,
        pos,
    })
}

/// Property names may contain inner hyphens, e.g. `CcV-Ac`.
pub fn property_name(c: &mut Cursor) -> Result<String, SyntaxError> {
    let (mut name, _) = c.ident()?;
    while c.peek() == &Tok::Minus {
        c.next();
        match c.peek().clone() {
            Tok::Ident(s) => {
                c.next();
                name.push('-');
                name.push_str(&s);
            }
            Tok::Int(n) => {
                c.next();
                name.push('-');
                name.push_str(&n.to_string());
            }
            _ => return Err(c.unexpected("property name segment")),
        }
    }
    Ok(name)
}

fn parse_modality(c: &mut Cursor) -> Result<Modality, SyntaxError> {
    if c.accept_keyword("always") {
        return Ok(Modality::Always);
    }
    if c.accept_keyword("never") {
        return Ok(Modality::Never);
    }
    if c.accept_keyword("initially") {
        return Ok(Modality::InitOnly);
    }
    if c.is_keyword("A") && c.peek_at(1) == &Tok::LBracket && c.peek_at(2) == &Tok::RBracket {
        c.next();
        c.next();
        c.next();
        return Ok(Modality::Always);
    }
    Err(c.unexpected("`always`, `never`, `initially` or `A[]`"))
}

/// How strictly integers and enum constants are kept apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumInts {
    /// Comparing an enum with an integer is a type error.
    Reject,
    /// Integers stand for the enum constant carrying that numeric alias,
    /// as in guards of the component language.
    ByAlias,
}

/// Resolves names against a symbol table, collecting every problem.
pub struct Resolver<'a> {
    pub symbols: &'a SymbolTable,
    pub enum_ints: EnumInts,
    pub errors: Vec<PropError>,
}

#[derive(Debug, Clone)]
enum Typed {
    Term(Term, Ty),
    Loc(LocRef),
}

impl<'a> Resolver<'a> {
    pub fn new(symbols: &'a SymbolTable, enum_ints: EnumInts) -> Self {
        Resolver {
            symbols,
            enum_ints,
            errors: Vec::new(),
        }
    }

    fn unknown(&mut self, name: &str, pos: Pos) {
        self.errors.push(PropError::Unknown {
            name: name.to_string(),
            pos,
        });
    }

    fn type_error(&mut self, pos: Pos, message: String) {
        self.errors.push(PropError::Type { pos, message });
    }

    pub fn var(&mut self, t: &RawTerm) -> Option<VarRef> {
        match self.term(t)? {
            Typed::Term(Term::Var(v), _) => Some(v),
            _ => {
                self.type_error(t.pos(), "expected a variable".into());
                None
            }
        }
    }

    fn term(&mut self, t: &RawTerm) -> Option<Typed> {
        match t {
            RawTerm::Int(n, _) => Some(Typed::Term(Term::Lit(Lit::Int(*n)), Ty::Int)),
            RawTerm::Name(name, pos) => {
                if let Some(sym) = self.symbols.lookup(name) {
                    return match sym {
                        Symbol::Var { slot, domain } => {
                            let ty = domain.ty();
                            Some(Typed::Term(
                                Term::Var(VarRef {
                                    name: name.clone(),
                                    slot: *slot,
                                    domain: domain.clone(),
                                }),
                                ty,
                            ))
                        }
                        Symbol::Component { .. } => {
                            self.type_error(
                                *pos,
                                format!("component `{name}` used as a value; write `{name}.<location>`"),
                            );
                            None
                        }
                    };
                }
                if let Some((e, i)) = self.symbols.constant(name) {
                    return Some(Typed::Term(
                        Term::Lit(Lit::Enum {
                            name: name.clone(),
                            code: i as i64,
                        }),
                        Ty::Enum(e.name.clone()),
                    ));
                }
                match name.as_str() {
                    "true" => Some(Typed::Term(Term::Lit(Lit::Bool(true)), Ty::Bool)),
                    "false" => Some(Typed::Term(Term::Lit(Lit::Bool(false)), Ty::Bool)),
                    _ => {
                        self.unknown(name, *pos);
                        None
                    }
                }
            }
            RawTerm::Qualified(comp, member, pos) => {
                if let Some((slot, domain)) = self.symbols.lookup_qualified(comp, member) {
                    let ty = domain.ty();
                    return Some(Typed::Term(
                        Term::Var(VarRef {
                            name: format!("{comp}.{member}"),
                            slot,
                            domain: domain.clone(),
                        }),
                        ty,
                    ));
                }
                match self.symbols.lookup(comp) {
                    Some(Symbol::Component { slot, locations }) => {
                        match locations.iter().position(|l| l == member) {
                            Some(i) => Some(Typed::Loc(LocRef {
                                component: comp.clone(),
                                location: member.clone(),
                                slot: *slot,
                                index: i as i64,
                            })),
                            None => {
                                self.unknown(&format!("{comp}.{member}"), *pos);
                                None
                            }
                        }
                    }
                    _ => {
                        self.unknown(&format!("{comp}.{member}"), *pos);
                        None
                    }
                }
            }
            RawTerm::Diff(a, b) => {
                let a = self.var(a);
                let b = self.var(b);
                let (a, b) = (a?, b?);
                if a.domain.ty() != Ty::Int || b.domain.ty() != Ty::Int {
                    self.type_error(t.pos(), "difference needs two integer variables".into());
                    return None;
                }
                Some(Typed::Term(Term::Diff(a, b), Ty::Int))
            }
        }
    }

    /// Turns an integer literal into the enum constant with that alias.
    fn coerce(&mut self, t: &Term, target: &Ty, pos: Pos) -> Option<Term> {
        let (Term::Lit(Lit::Int(n)), Ty::Enum(ename)) = (t, target) else {
            self.type_error(pos, format!("cannot use `{t}` as {target}"));
            return None;
        };
        let found = self
            .symbols
            .constant_of_enum_alias(ename, *n)
            .map(|(name, code)| Term::Lit(Lit::Enum { name, code }));
        if found.is_none() {
            self.type_error(pos, format!("no constant of {ename} has numeric alias {n}"));
        }
        found
    }

    pub fn expr(&mut self, e: &RawExpr) -> Option<Expr> {
        match e {
            RawExpr::Atom(t) => match self.term(t)? {
                Typed::Loc(l) => Some(Expr::At(l)),
                Typed::Term(Term::Var(v), Ty::Bool) => Some(Expr::Flag(v)),
                Typed::Term(Term::Lit(Lit::Bool(b)), _) => Some(Expr::Const(b)),
                Typed::Term(_, ty) => {
                    self.type_error(t.pos(), format!("expected a boolean predicate, found {ty}"));
                    None
                }
            },
            RawExpr::Cmp(op, l, r, pos) => {
                let lt = self.term(l);
                let rt = self.term(r);
                let (lt, rt) = (lt?, rt?);
                let (Typed::Term(mut lhs, lty), Typed::Term(mut rhs, rty)) = (lt, rt) else {
                    self.type_error(*pos, "location predicates cannot be compared".into());
                    return None;
                };
                let mut ty = lty.clone();
                if lty != rty {
                    let alias_case = self.enum_ints == EnumInts::ByAlias
                        && matches!((&lty, &rty), (Ty::Enum(_), Ty::Int) | (Ty::Int, Ty::Enum(_)));
                    if !alias_case {
                        self.type_error(*pos, format!("cannot compare {lty} with {rty}"));
                        return None;
                    }
                    if rty == Ty::Int {
                        rhs = self.coerce(&rhs, &lty, *pos)?;
                    } else {
                        lhs = self.coerce(&lhs, &rty, *pos)?;
                        ty = rty;
                    }
                }
                if op.is_ordering() && ty != Ty::Int {
                    self.type_error(*pos, format!("`{}` needs integer operands, found {ty}", op.symbol()));
                    return None;
                }
                Some(Expr::Cmp { op: *op, lhs, rhs })
            }
            RawExpr::In(v, set, pos) => {
                let var = self.var(v);
                let mut lits = Vec::new();
                let mut ok = true;
                for m in set {
                    match self.term(m) {
                        Some(Typed::Term(Term::Lit(l), ty)) => lits.push((l, ty, m.pos())),
                        Some(_) => {
                            self.type_error(m.pos(), "set members must be constants".into());
                            ok = false;
                        }
                        None => ok = false,
                    }
                }
                let var = var?;
                if !ok {
                    return None;
                }
                let vty = var.domain.ty();
                let mut set = Vec::new();
                for (l, ty, p) in lits {
                    if ty == vty {
                        set.push(l);
                    } else if self.enum_ints == EnumInts::ByAlias && ty == Ty::Int {
                        match self.coerce(&Term::Lit(l), &vty, p)? {
                            Term::Lit(c) => set.push(c),
                            _ => unreachable!(),
                        }
                    } else {
                        self.type_error(*pos, format!("set member of type {ty} in a set over {vty}"));
                        return None;
                    }
                }
                Some(Expr::In { var, set })
            }
            RawExpr::Not(e) => Some(Expr::Not(Box::new(self.expr(e)?))),
            RawExpr::And(a, b) => {
                let (a, b) = (self.expr(a), self.expr(b));
                Some(Expr::And(Box::new(a?), Box::new(b?)))
            }
            RawExpr::Or(a, b) => {
                let (a, b) = (self.expr(a), self.expr(b));
                Some(Expr::Or(Box::new(a?), Box::new(b?)))
            }
            RawExpr::Imply(a, b) => {
                let (a, b) = (self.expr(a), self.expr(b));
                Some(Expr::Imply(Box::new(a?), Box::new(b?)))
            }
        }
    }

    pub fn property(&mut self, raw: &RawProperty) -> Option<Property> {
        let body = self.expr(&raw.body)?;
        if raw.modality == Modality::InitOnly && body.mentions_location() {
            self.type_error(
                raw.pos,
                format!("initial-state property `{}` cannot mention locations", raw.name),
            );
            return None;
        }
        Some(Property {
            name: raw.name.clone(),
            rank: raw.rank,
            modality: raw.modality,
            body,
        })
    }
}

/// Checks that a domain-typed assignment value fits; used by the component
/// compiler for literal right-hand sides.
pub fn literal_fits(domain: &Domain, lit: &Lit) -> bool {
    match (domain, lit) {
        (Domain::Bool, Lit::Bool(_)) => true,
        (Domain::Int { lo, hi }, Lit::Int(n)) => lo <= n && n <= hi,
        (Domain::Enum(_), Lit::Enum { .. }) => true,
        _ => false,
    }
}
