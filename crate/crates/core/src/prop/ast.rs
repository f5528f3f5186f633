use std::fmt;

use thiserror::Error;

use crate::value::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub fn apply(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub name: String,
    pub slot: usize,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocRef {
    pub component: String,
    pub location: String,
    pub slot: usize,
    pub index: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lit {
    Int(i64),
    Bool(bool),
    Enum { name: String, code: i64 },
}

impl Lit {
    pub fn code(&self) -> i64 {
        match self {
            Lit::Int(n) => *n,
            Lit::Bool(b) => *b as i64,
            Lit::Enum { code, .. } => *code,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(n) => write!(f, "{n}"),
            Lit::Bool(b) => write!(f, "{b}"),
            Lit::Enum { name, .. } => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(VarRef),
    Diff(VarRef, VarRef),
    Lit(Lit),
}

/// Resolved predicate over a slot vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(bool),
    /// A boolean variable used directly as a predicate.
    Flag(VarRef),
    At(LocRef),
    Cmp { op: CmpOp, lhs: Term, rhs: Term },
    In { var: VarRef, set: Vec<Lit> },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Imply(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("symbol `{name}` is unbound (slot {slot})")]
    Unbound { name: String, slot: usize },
    #[error("`{name}` holds {value}, outside its domain {domain}")]
    Domain {
        name: String,
        value: i64,
        domain: Domain,
    },
}

fn read(v: &VarRef, values: &[i64]) -> Result<i64, EvalError> {
    let x = *values.get(v.slot).ok_or_else(|| EvalError::Unbound {
        name: v.name.clone(),
        slot: v.slot,
    })?;
    if !v.domain.contains(x) {
        return Err(EvalError::Domain {
            name: v.name.clone(),
            value: x,
            domain: v.domain.clone(),
        });
    }
    Ok(x)
}

impl VarRef {
    pub fn map_slot(&self, f: &impl Fn(usize) -> usize) -> VarRef {
        VarRef {
            slot: f(self.slot),
            ..self.clone()
        }
    }
}

impl Term {
    pub fn map_slots(&self, f: &impl Fn(usize) -> usize) -> Term {
        match self {
            Term::Var(v) => Term::Var(v.map_slot(f)),
            Term::Diff(a, b) => Term::Diff(a.map_slot(f), b.map_slot(f)),
            Term::Lit(l) => Term::Lit(l.clone()),
        }
    }

    pub fn eval(&self, values: &[i64]) -> Result<i64, EvalError> {
        match self {
            Term::Var(v) => read(v, values),
            Term::Diff(a, b) => Ok(read(a, values)? - read(b, values)?),
            Term::Lit(l) => Ok(l.code()),
        }
    }
}

impl Expr {
    /// Truth value over a slot vector. `imply` is material implication.
    pub fn eval(&self, values: &[i64]) -> Result<bool, EvalError> {
        Ok(match self {
            Expr::Const(b) => *b,
            Expr::Flag(v) => read(v, values)? != 0,
            Expr::At(l) => {
                let x = *values.get(l.slot).ok_or_else(|| EvalError::Unbound {
                    name: l.component.clone(),
                    slot: l.slot,
                })?;
                x == l.index
            }
            Expr::Cmp { op, lhs, rhs } => op.apply(lhs.eval(values)?, rhs.eval(values)?),
            Expr::In { var, set } => {
                let x = read(var, values)?;
                set.iter().any(|l| l.code() == x)
            }
            Expr::Not(e) => !e.eval(values)?,
            Expr::And(a, b) => {
                let x = a.eval(values)?;
                let y = b.eval(values)?;
                x && y
            }
            Expr::Or(a, b) => {
                let x = a.eval(values)?;
                let y = b.eval(values)?;
                x || y
            }
            Expr::Imply(a, b) => {
                let x = a.eval(values)?;
                let y = b.eval(values)?;
                !x || y
            }
        })
    }

    pub fn mentions_location(&self) -> bool {
        match self {
            Expr::At(_) => true,
            Expr::Not(e) => e.mentions_location(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Imply(a, b) => {
                a.mentions_location() || b.mentions_location()
            }
            _ => false,
        }
    }

    /// Slots read by this expression, in first-use order.
    pub fn slots(&self) -> Vec<usize> {
        fn term(t: &Term, out: &mut Vec<usize>) {
            match t {
                Term::Var(v) => out.push(v.slot),
                Term::Diff(a, b) => {
                    out.push(a.slot);
                    out.push(b.slot);
                }
                Term::Lit(_) => {}
            }
        }
        fn go(e: &Expr, out: &mut Vec<usize>) {
            match e {
                Expr::Const(_) => {}
                Expr::Flag(v) => out.push(v.slot),
                Expr::At(l) => out.push(l.slot),
                Expr::Cmp { lhs, rhs, .. } => {
                    term(lhs, out);
                    term(rhs, out);
                }
                Expr::In { var, .. } => out.push(var.slot),
                Expr::Not(e) => go(e, out),
                Expr::And(a, b) | Expr::Or(a, b) | Expr::Imply(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        let mut seen = std::collections::HashSet::new();
        out.retain(|s| seen.insert(*s));
        out
    }

    /// Copy with every slot moved through `f`.
    pub fn map_slots(&self, f: &impl Fn(usize) -> usize) -> Expr {
        let b = |e: &Expr| Box::new(e.map_slots(f));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Flag(v) => Expr::Flag(v.map_slot(f)),
            Expr::At(l) => Expr::At(LocRef {
                slot: f(l.slot),
                ..l.clone()
            }),
            Expr::Cmp { op, lhs, rhs } => Expr::Cmp {
                op: *op,
                lhs: lhs.map_slots(f),
                rhs: rhs.map_slots(f),
            },
            Expr::In { var, set } => Expr::In {
                var: var.map_slot(f),
                set: set.clone(),
            },
            Expr::Not(e) => Expr::Not(b(e)),
            Expr::And(x, y) => Expr::And(b(x), b(y)),
            Expr::Or(x, y) => Expr::Or(b(x), b(y)),
            Expr::Imply(x, y) => Expr::Imply(b(x), b(y)),
        }
    }

    fn is_compound(&self) -> bool {
        matches!(
            self,
            Expr::And(..) | Expr::Or(..) | Expr::Imply(..) | Expr::Not(..)
        )
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&v.name),
            Term::Diff(a, b) => write!(f, "{} - {}", a.name, b.name),
            Term::Lit(l) => write!(f, "{l}"),
        }
    }
}

struct Operand<'a>(&'a Expr);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_compound() {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(b) => write!(f, "{b}"),
            Expr::Flag(v) => f.write_str(&v.name),
            Expr::At(l) => write!(f, "{}.{}", l.component, l.location),
            Expr::Cmp { op, lhs, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Expr::In { var, set } => {
                write!(f, "{} in {{", var.name)?;
                for (i, l) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l}")?;
                }
                f.write_str("}")
            }
            Expr::Not(e) => write!(f, "not ({e})"),
            // Chains parse left-associated, so a left operand of the same
            // connective needs no parentheses.
            Expr::And(a, b) if matches!(**a, Expr::And(..)) => write!(f, "{a} and {}", Operand(b)),
            Expr::And(a, b) => write!(f, "{} and {}", Operand(a), Operand(b)),
            Expr::Or(a, b) if matches!(**a, Expr::Or(..)) => write!(f, "{a} or {}", Operand(b)),
            Expr::Or(a, b) => write!(f, "{} or {}", Operand(a), Operand(b)),
            Expr::Imply(a, b) => write!(f, "{} imply {}", Operand(a), Operand(b)),
        }
    }
}
