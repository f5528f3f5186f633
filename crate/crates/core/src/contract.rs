//! Generalized contracts: assume/guarantee property lists split by facet,
//! each facet carrying a verification priority (1 = checked first).
//!
//! ```text
//! contract CC {
//!     alias Heater = heater_v;
//!     facet security priority 2 {
//!         guarantee { Property Hmax: never Heater > 3; }
//!     }
//! }
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::dsl::Component;
use crate::lexer::{Cursor, SyntaxError, Tok};
use crate::prop::{
    parse_raw_property, property_name, EnumInts, PropError, Property, RawProperty, Resolver,
    SymbolTable,
};

/// Facet name, compared and stored in lower case.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FacetId(String);

impl FacetId {
    pub fn new(name: &str) -> Self {
        FacetId(name.to_ascii_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Priority used when a contract does not give one.
    pub fn default_priority(&self) -> u32 {
        match self.0.as_str() {
            "data" => 1,
            "security" => 2,
            "time" => 3,
            "functionality" => 4,
            _ => 100,
        }
    }
}

impl fmt::Display for FacetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Assume,
    Guarantee,
}

impl Side {
    pub fn keyword(self) -> &'static str {
        match self {
            Side::Assume => "assume",
            Side::Guarantee => "guarantee",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Facet {
    pub assume: Vec<RawProperty>,
    pub guarantee: Vec<RawProperty>,
}

impl Facet {
    fn side_mut(&mut self, side: Side) -> &mut Vec<RawProperty> {
        match side {
            Side::Assume => &mut self.assume,
            Side::Guarantee => &mut self.guarantee,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneralizedContract {
    pub component: String,
    /// `alias <name> = <target>` lines: contract vocabulary to model names.
    pub aliases: Vec<(String, String)>,
    pub facets: BTreeMap<FacetId, Facet>,
    pub priorities: BTreeMap<FacetId, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("unresolved symbols:\n{}", render_errors(.0))]
    Unresolved(Vec<PropError>),
    #[error("duplicate property name `{0}`")]
    DuplicateProperty(String),
    #[error("duplicate facet `{0}` (facet names are case-insensitive)")]
    DuplicateFacet(String),
    #[error("facet `{0}` has no priority")]
    MissingPriority(String),
    #[error("priority of facet `{0}` must be positive")]
    ZeroPriority(String),
    #[error("no property named `{0}`")]
    UnknownProperty(String),
}

fn render_errors(errs: &[PropError]) -> String {
    errs.iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl GeneralizedContract {
    pub fn empty(component: &str) -> Self {
        GeneralizedContract {
            component: component.to_string(),
            ..Default::default()
        }
    }

    pub fn set_priority(&mut self, facet: FacetId, priority: u32) {
        self.priorities.insert(facet, priority);
    }

    /// Every property with its facet and side, facets in name order.
    pub fn properties(&self) -> impl Iterator<Item = (&FacetId, Side, &RawProperty)> {
        self.facets.iter().flat_map(|(f, x)| {
            x.assume
                .iter()
                .map(move |p| (f, Side::Assume, p))
                .chain(x.guarantee.iter().map(move |p| (f, Side::Guarantee, p)))
        })
    }

    pub fn property_count(&self) -> usize {
        self.properties().count()
    }

    fn check(&self) -> Result<(), ContractError> {
        for f in self.facets.keys() {
            match self.priorities.get(f) {
                None => return Err(ContractError::MissingPriority(f.to_string())),
                Some(0) => return Err(ContractError::ZeroPriority(f.to_string())),
                _ => {}
            }
        }
        let mut seen = HashSet::new();
        for (_, _, p) in self.properties() {
            if p.name != "_" && !seen.insert(p.name.clone()) {
                return Err(ContractError::DuplicateProperty(p.name.clone()));
            }
        }
        Ok(())
    }
}

/// Facets in ascending priority, ties broken by name.
pub fn layer_order(k: &GeneralizedContract) -> Result<Vec<FacetId>, ContractError> {
    let mut out = Vec::new();
    for f in k.facets.keys().chain(k.priorities.keys()) {
        let p = *k
            .priorities
            .get(f)
            .ok_or_else(|| ContractError::MissingPriority(f.to_string()))?;
        out.push((p, f.clone()));
    }
    out.sort();
    out.dedup();
    Ok(out.into_iter().map(|(_, f)| f).collect())
}

/// Parses a `.ctr` file.
pub fn parse_contract(src: &str) -> Result<GeneralizedContract, ContractError> {
    let mut c = Cursor::new(src)?;
    c.expect_keyword("contract")?;
    let (component, _) = c.ident()?;
    let mut k = GeneralizedContract::empty(&component);
    c.expect(&Tok::LBrace)?;
    while !c.accept(&Tok::RBrace) {
        if c.accept_keyword("alias") {
            let (name, _) = c.ident()?;
            c.expect(&Tok::Assign)?;
            let (target, _) = c.ident()?;
            c.expect(&Tok::Semi)?;
            k.aliases.push((name, target));
            continue;
        }
        c.expect_keyword("facet")?;
        let name = property_name(&mut c)?;
        let id = FacetId::new(&name);
        if k.facets.contains_key(&id) {
            return Err(ContractError::DuplicateFacet(name));
        }
        let priority = if c.accept_keyword("priority") {
            let n = c.int()?;
            if n < 1 {
                return Err(ContractError::ZeroPriority(name));
            }
            n as u32
        } else {
            id.default_priority()
        };
        let mut facet = Facet::default();
        c.expect(&Tok::LBrace)?;
        while !c.accept(&Tok::RBrace) {
            let side = if c.accept_keyword("assume") {
                Side::Assume
            } else if c.accept_keyword("guarantee") {
                Side::Guarantee
            } else {
                return Err(c.unexpected("`assume`, `guarantee` or `}`").into());
            };
            c.expect(&Tok::LBrace)?;
            while !c.accept(&Tok::RBrace) {
                if !c.is_keyword("Property") {
                    return Err(c.unexpected("`Property` or `}`").into());
                }
                let p = parse_raw_property(&mut c)?;
                facet.side_mut(side).push(p);
            }
        }
        k.priorities.insert(id.clone(), priority);
        k.facets.insert(id, facet);
    }
    c.accept(&Tok::Semi);
    if !c.at_eof() {
        return Err(c.unexpected("end of input").into());
    }
    k.check()?;
    Ok(k)
}

/// A contract property after name resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub facet: FacetId,
    pub side: Side,
    pub property: Property,
    /// Position in the contract, used when ranks tie.
    pub order: usize,
}

/// A behaviour paired with its resolved contract.
#[derive(Debug, Clone)]
pub struct WellStructuredComponent {
    pub behaviour: Component,
    pub contract: GeneralizedContract,
    pub obligations: Vec<Obligation>,
    /// Set when facets were adjusted after normalization.
    pub needs_recheck: bool,
    scope: SymbolTable,
}

impl PartialEq for WellStructuredComponent {
    fn eq(&self, other: &Self) -> bool {
        self.behaviour == other.behaviour
            && self.contract == other.contract
            && self.obligations == other.obligations
            && self.needs_recheck == other.needs_recheck
    }
}

impl WellStructuredComponent {
    pub fn layer_order(&self) -> Vec<FacetId> {
        layer_order(&self.contract).expect("normalized contracts have total priorities")
    }

    pub fn priority(&self, f: &FacetId) -> Option<u32> {
        self.contract.priorities.get(f).copied()
    }

    /// Obligations of one facet, ordered by rank then declaration order.
    pub fn facet_obligations(&self, f: &FacetId) -> Vec<&Obligation> {
        let mut out: Vec<&Obligation> = self.obligations.iter().filter(|o| &o.facet == f).collect();
        out.sort_by_key(|o| (o.property.rank.unwrap_or(i64::MAX), o.order));
        out
    }

    pub fn scope(&self) -> &SymbolTable {
        &self.scope
    }
}

/// Resolves every contract property against `c`'s own symbols.
pub fn normalize(c: &Component, k: &GeneralizedContract) -> Result<WellStructuredComponent, ContractError> {
    normalize_in(c, k, c.symbol_table())
}

/// Resolves against an explicit scope, e.g. a composed system's state
/// layout. All unresolved references are reported together.
pub fn normalize_in(
    c: &Component,
    k: &GeneralizedContract,
    mut scope: SymbolTable,
) -> Result<WellStructuredComponent, ContractError> {
    k.check()?;
    for (name, target) in &k.aliases {
        scope.alias(name, target);
    }
    let mut errors = Vec::new();
    let mut obligations = Vec::new();
    for (order, (f, side, raw)) in k.properties().enumerate() {
        let mut r = Resolver::new(&scope, EnumInts::Reject);
        let p = r.property(raw);
        errors.extend(r.errors);
        if let Some(p) = p {
            obligations.push(Obligation {
                facet: f.clone(),
                side,
                property: p,
                order,
            });
        }
    }
    if !errors.is_empty() {
        return Err(ContractError::Unresolved(errors));
    }
    Ok(WellStructuredComponent {
        behaviour: c.clone(),
        contract: k.clone(),
        obligations,
        needs_recheck: false,
        scope,
    })
}

/// Adds and drops properties, then re-resolves. Any actual change marks
/// the result as needing a recheck.
pub fn adjust_facets(
    w: &WellStructuredComponent,
    add: &[(FacetId, RawProperty, Side)],
    drop: &[&str],
) -> Result<WellStructuredComponent, ContractError> {
    if add.is_empty() && drop.is_empty() {
        return Ok(w.clone());
    }
    let mut k = w.contract.clone();
    for name in drop {
        let mut found = false;
        for facet in k.facets.values_mut() {
            for list in [&mut facet.assume, &mut facet.guarantee] {
                let before = list.len();
                list.retain(|p| p.name != *name);
                found |= list.len() != before;
            }
        }
        if !found {
            return Err(ContractError::UnknownProperty(name.to_string()));
        }
    }
    for (f, p, side) in add {
        if !k.priorities.contains_key(f) {
            return Err(ContractError::MissingPriority(f.to_string()));
        }
        k.facets.entry(f.clone()).or_default().side_mut(*side).push(p.clone());
    }
    let mut out = normalize_in(&w.behaviour, &k, w.scope.clone())?;
    out.needs_recheck = true;
    Ok(out)
}
