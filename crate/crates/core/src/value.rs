//! Finite value domains. Every value is stored as an `i64` code: booleans
//! as 0/1, integers as themselves, enum constants as their index.

use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnumType {
    pub name: String,
    /// Constants in declaration order with their optional numeric alias.
    pub constants: Vec<(String, Option<i64>)>,
}

impl EnumType {
    pub fn index_of(&self, constant: &str) -> Option<usize> {
        self.constants.iter().position(|(c, _)| c == constant)
    }

    /// Constant whose numeric alias equals `n`.
    pub fn index_of_alias(&self, n: i64) -> Option<usize> {
        self.constants.iter().position(|(_, a)| *a == Some(n))
    }

    /// Numeric rendering for targets without enums: the alias if declared,
    /// else the index.
    pub fn numeric(&self, index: usize) -> i64 {
        self.constants[index].1.unwrap_or(index as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Bool,
    Int { lo: i64, hi: i64 },
    Enum(Arc<EnumType>),
}

/// Coarse type used by the checker of comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ty {
    Bool,
    Int,
    Enum(String),
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => f.write_str("bool"),
            Ty::Int => f.write_str("int"),
            Ty::Enum(n) => write!(f, "enum {n}"),
        }
    }
}

impl Domain {
    pub fn int(lo: i64, hi: i64) -> Domain {
        Domain::Int { lo, hi }
    }

    pub fn ty(&self) -> Ty {
        match self {
            Domain::Bool => Ty::Bool,
            Domain::Int { .. } => Ty::Int,
            Domain::Enum(e) => Ty::Enum(e.name.clone()),
        }
    }

    pub fn min_code(&self) -> i64 {
        match self {
            Domain::Int { lo, .. } => *lo,
            _ => 0,
        }
    }

    pub fn max_code(&self) -> i64 {
        match self {
            Domain::Bool => 1,
            Domain::Int { hi, .. } => *hi,
            Domain::Enum(e) => e.constants.len() as i64 - 1,
        }
    }

    pub fn contains(&self, code: i64) -> bool {
        code >= self.min_code() && code <= self.max_code()
    }

    pub fn size(&self) -> u64 {
        (self.max_code() - self.min_code() + 1).max(0) as u64
    }

    pub fn codes(&self) -> impl Iterator<Item = i64> {
        self.min_code()..=self.max_code()
    }

    pub fn render(&self, code: i64) -> String {
        match self {
            Domain::Bool => (code != 0).to_string(),
            Domain::Int { .. } => code.to_string(),
            Domain::Enum(e) => e
                .constants
                .get(code as usize)
                .map(|(c, _)| c.clone())
                .unwrap_or_else(|| format!("<{code}>")),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => f.write_str("bool"),
            Domain::Int { lo, hi } => write!(f, "int[{lo}..{hi}]"),
            Domain::Enum(e) => f.write_str(&e.name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enum_codes_and_aliases() {
        let e = EnumType {
            name: "Level".into(),
            constants: vec![
                ("LOW".into(), Some(1)),
                ("MID".into(), Some(2)),
                ("HIGH".into(), Some(3)),
            ],
        };
        assert_eq!(e.index_of("MID"), Some(1));
        assert_eq!(e.index_of_alias(3), Some(2));
        assert_eq!(e.numeric(0), 1);
        let d = Domain::Enum(Arc::new(e));
        assert_eq!(d.size(), 3);
        assert_eq!(d.render(2), "HIGH");
        assert!(!d.contains(3));
    }

    #[test]
    fn int_domain_bounds() {
        let d = Domain::int(-30, 50);
        assert!(d.contains(-30) && d.contains(50) && !d.contains(51));
        assert_eq!(d.size(), 81);
        assert_eq!(d.to_string(), "int[-30..50]");
    }
}
