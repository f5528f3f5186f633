use std::collections::HashMap;
use std::sync::Arc;

use crate::value::{Domain, EnumType};

/// What a name in a property or guard refers to. Variables and component
/// locations live in numbered slots of a state vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Symbol {
    Var { slot: usize, domain: Domain },
    Component { slot: usize, locations: Vec<String> },
}

/// Name resolution scope for properties and guards.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    bare: HashMap<String, Symbol>,
    qualified: HashMap<(String, String), (usize, Domain)>,
    constants: HashMap<String, (Arc<EnumType>, usize)>,
    aliases: HashMap<String, String>,
    enums: HashMap<String, Arc<EnumType>>,
    slots: usize,
}

/// Values used when building a valuation by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Enum(String),
    Location(String),
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of slots a valuation over this table must provide.
    pub fn slot_count(&self) -> usize {
        self.slots
    }

    /// Declares a fresh variable in the next free slot.
    pub fn declare_var(&mut self, name: &str, domain: Domain) -> usize {
        let slot = self.slots;
        self.bind_var(name, slot, domain);
        slot
    }

    /// Makes `name` refer to an existing slot.
    pub fn bind_var(&mut self, name: &str, slot: usize, domain: Domain) {
        if let Domain::Enum(e) = &domain {
            self.declare_enum(e.clone());
        }
        self.slots = self.slots.max(slot + 1);
        self.bare
            .insert(name.to_string(), Symbol::Var { slot, domain });
    }

    pub fn declare_component(&mut self, name: &str, locations: Vec<String>) -> usize {
        let slot = self.slots;
        self.bind_component(name, slot, locations);
        slot
    }

    pub fn bind_component(&mut self, name: &str, slot: usize, locations: Vec<String>) {
        self.slots = self.slots.max(slot + 1);
        self.bare
            .insert(name.to_string(), Symbol::Component { slot, locations });
    }

    /// Makes `component.var` refer to a slot.
    pub fn bind_qualified(&mut self, component: &str, var: &str, slot: usize, domain: Domain) {
        if let Domain::Enum(e) = &domain {
            self.declare_enum(e.clone());
        }
        self.slots = self.slots.max(slot + 1);
        self.qualified
            .insert((component.to_string(), var.to_string()), (slot, domain));
    }

    pub fn declare_enum(&mut self, e: Arc<EnumType>) {
        self.enums.insert(e.name.clone(), e.clone());
        for (i, (c, _)) in e.constants.iter().enumerate() {
            self.constants.insert(c.clone(), (e.clone(), i));
        }
    }

    pub fn alias(&mut self, name: &str, target: &str) {
        self.aliases.insert(name.to_string(), target.to_string());
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        let name = self.aliases.get(name).map_or(name, String::as_str);
        self.bare.get(name)
    }

    pub fn lookup_qualified(&self, component: &str, member: &str) -> Option<(usize, &Domain)> {
        self.qualified
            .get(&(component.to_string(), member.to_string()))
            .map(|(s, d)| (*s, d))
    }

    pub fn constant(&self, name: &str) -> Option<(&Arc<EnumType>, usize)> {
        self.constants.get(name).map(|(e, i)| (e, *i))
    }

    /// Constant of enum `enum_name` carrying numeric alias `n`.
    pub fn constant_of_enum_alias(&self, enum_name: &str, n: i64) -> Option<(String, i64)> {
        let e = self.enums.get(enum_name)?;
        e.index_of_alias(n)
            .map(|i| (e.constants[i].0.clone(), i as i64))
    }

    pub fn enum_type(&self, name: &str) -> Option<&Arc<EnumType>> {
        self.enums.get(name)
    }

    pub fn is_known(&self, name: &str) -> bool {
        self.lookup(name).is_some()
            || self.constants.contains_key(name)
            || name == "true"
            || name == "false"
    }

    /// Builds a slot vector from named values; unnamed slots take their
    /// domain minimum (locations: the first one).
    pub fn valuation(&self, values: &[(&str, Value)]) -> Result<Vec<i64>, String> {
        let mut out = vec![0; self.slots];
        for sym in self.bare.values() {
            if let Symbol::Var { slot, domain } = sym {
                out[*slot] = domain.min_code();
            }
        }
        for (name, v) in values {
            let sym = self
                .lookup(name)
                .ok_or_else(|| format!("unknown symbol `{name}`"))?;
            match (sym, v) {
                (Symbol::Var { slot, domain }, v) => {
                    let code = match (domain, v) {
                        (Domain::Bool, Value::Bool(b)) => *b as i64,
                        (Domain::Int { .. }, Value::Int(n)) => *n,
                        (Domain::Enum(e), Value::Enum(c)) => e
                            .index_of(c)
                            .ok_or_else(|| format!("`{c}` is not a constant of {}", e.name))?
                            as i64,
                        _ => return Err(format!("value {v:?} does not fit `{name}`")),
                    };
                    out[*slot] = code;
                }
                (Symbol::Component { slot, locations }, Value::Location(l)) => {
                    out[*slot] = locations
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| format!("`{name}` has no location `{l}`"))?
                        as i64;
                }
                _ => return Err(format!("value {v:?} does not fit `{name}`")),
            }
        }
        Ok(out)
    }
}
