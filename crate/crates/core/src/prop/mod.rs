//! The contract property language: grammar, name resolution, evaluation and
//! canonical rendering.
//!
//! ```text
//! Property HV: always Heater in {1, 2, 3};
//! Property Hmax: never Heater > 3;
//! Property Q: A[] Robot_painter.painting imply get_type == true;
//! ```

mod ast;
mod parse;
mod symbols;

use std::fmt;

use thiserror::Error;

use crate::lexer::{Cursor, Pos, SyntaxError};

pub use ast::{CmpOp, EvalError, Expr, Lit, LocRef, Term, VarRef};
pub use parse::{
    literal_fits, parse_expr, parse_raw_property, parse_term, property_name, EnumInts, RawExpr,
    RawTerm, Resolver,
};
pub use symbols::{Symbol, SymbolTable, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    /// Every reachable state satisfies the body.
    Always,
    /// No reachable state satisfies the body.
    Never,
    /// Every admissible initial state satisfies the body.
    InitOnly,
}

impl Modality {
    pub fn keyword(self) -> &'static str {
        match self {
            Modality::Always => "always",
            Modality::Never => "never",
            Modality::InitOnly => "initially",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: unknown identifier `{name}`")]
    Unknown { name: String, pos: Pos },
    #[error("{pos}: {message}")]
    Type { pos: Pos, message: String },
}

/// A property as parsed, before names are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawProperty {
    pub name: String,
    pub rank: Option<i64>,
    pub modality: Modality,
    pub body: RawExpr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Property {
    pub name: String,
    /// Optional ordering key within a facet layer.
    pub rank: Option<i64>,
    pub modality: Modality,
    pub body: Expr,
}

impl Property {
    /// `always (Heater in {1, 2, 3})`
    pub fn render_canonical(&self) -> String {
        format!("{} ({})", self.modality.keyword(), self.body)
    }

    /// `Property HV: always (Heater in {1, 2, 3});`
    pub fn to_statement(&self) -> String {
        match self.rank {
            Some(r) => format!(
                "Property {} rank {}: {};",
                self.name,
                r,
                self.render_canonical()
            ),
            None => format!("Property {}: {};", self.name, self.render_canonical()),
        }
    }

    /// Does the state vector `values` violate this property?
    pub fn violated_by(&self, values: &[i64]) -> Result<bool, EvalError> {
        let holds = self.body.eval(values)?;
        Ok(match self.modality {
            Modality::Always | Modality::InitOnly => !holds,
            Modality::Never => holds,
        })
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_statement())
    }
}

/// Parses one property and resolves it against `symbols`. Integers and
/// enum constants are kept apart.
pub fn parse_property(text: &str, symbols: &SymbolTable) -> Result<Property, Vec<PropError>> {
    let raw = parse_raw_single(text).map_err(|e| vec![PropError::Syntax(e)])?;
    resolve_property(&raw, symbols)
}

fn parse_raw_single(text: &str) -> Result<RawProperty, SyntaxError> {
    let mut c = Cursor::new(text)?;
    if c.at_eof() {
        return Err(c.unexpected("a property"));
    }
    let p = parse_raw_property(&mut c)?;
    if !c.at_eof() {
        return Err(c.unexpected("end of input"));
    }
    Ok(p)
}

pub fn resolve_property(raw: &RawProperty, symbols: &SymbolTable) -> Result<Property, Vec<PropError>> {
    let mut r = Resolver::new(symbols, EnumInts::Reject);
    match r.property(raw) {
        Some(p) if r.errors.is_empty() => Ok(p),
        _ => Err(r.errors),
    }
}

/// Parses a property file: `Property` statements with comments between.
pub fn parse_property_file(text: &str) -> Result<Vec<RawProperty>, SyntaxError> {
    let mut c = Cursor::new(text)?;
    let mut out = Vec::new();
    while !c.at_eof() {
        if !c.is_keyword("Property") {
            return Err(c.unexpected("`Property`"));
        }
        out.push(parse_raw_property(&mut c)?);
    }
    Ok(out)
}

/// Evaluates an expression over a valuation built by name.
pub fn eval_expr(e: &Expr, values: &[i64]) -> Result<bool, EvalError> {
    e.eval(values)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::value::{Domain, EnumType};

    fn level() -> Arc<EnumType> {
        Arc::new(EnumType {
            name: "Level".into(),
            constants: vec![
                ("LOW".into(), Some(1)),
                ("MID".into(), Some(2)),
                ("HIGH".into(), Some(3)),
            ],
        })
    }

    fn on_off() -> Arc<EnumType> {
        Arc::new(EnumType {
            name: "OnOff".into(),
            constants: vec![("OFF".into(), Some(0)), ("ON".into(), Some(1))],
        })
    }

    fn climate() -> SymbolTable {
        let mut t = SymbolTable::new();
        t.declare_var("Heater", Domain::int(0, 7));
        t.declare_var("FAN", Domain::int(0, 3));
        t.declare_var("Power", Domain::Enum(level()));
        t.declare_var("AC_comp", Domain::Enum(on_off()));
        t.declare_var("IS_temperature", Domain::int(-30, 50));
        t.declare_var("Set_temperature", Domain::int(16, 30));
        t.declare_var("get_type", Domain::Bool);
        t.declare_component("Robot_painter", vec!["idle".into(), "painting".into()]);
        t
    }

    #[test]
    fn membership_property() {
        let t = climate();
        let p = parse_property("Property HV: always Heater in {1, 2, 3};", &t).unwrap();
        assert_eq!(p.name, "HV");
        assert_eq!(p.modality, Modality::Always);
        match &p.body {
            Expr::In { var, set } => {
                assert_eq!(var.name, "Heater");
                assert_eq!(set, &vec![Lit::Int(1), Lit::Int(2), Lit::Int(3)]);
            }
            other => panic!("unexpected body {other:?}"),
        }
        assert_eq!(p.render_canonical(), "always (Heater in {1, 2, 3})");
    }

    #[test]
    fn never_property() {
        let t = climate();
        let p = parse_property("Property Hmax: never Heater > 3;", &t).unwrap();
        assert_eq!(p.modality, Modality::Never);
        assert!(matches!(&p.body, Expr::Cmp { op: CmpOp::Gt, .. }));
        assert_eq!(p.render_canonical(), "never (Heater > 3)");
    }

    #[test]
    fn empty_set_is_a_syntax_error() {
        let t = climate();
        let errs = parse_property("always Power in {}", &t).unwrap_err();
        assert!(matches!(errs[0], PropError::Syntax(_)), "{errs:?}");
    }

    #[test]
    fn uppaal_style_query() {
        let t = climate();
        let p = parse_property(
            "A[ ] Robot_painter.painting imply get_type == true",
            &t,
        )
        .unwrap();
        assert_eq!(p.modality, Modality::Always);
        assert!(matches!(&p.body, Expr::Imply(a, _) if matches!(**a, Expr::At(_))));
    }

    #[test]
    fn unknown_identifiers_are_all_reported() {
        let t = climate();
        let errs = parse_property("always Heaterr > 1 and Fann < 2", &t).unwrap_err();
        let names: Vec<_> = errs
            .iter()
            .filter_map(|e| match e {
                PropError::Unknown { name, .. } => Some(name.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(names, vec!["Heaterr", "Fann"]);
    }

    #[test]
    fn syntax_error_carries_position() {
        let t = climate();
        let errs = parse_property("always\n  Heater >", &t).unwrap_err();
        match &errs[0] {
            PropError::Syntax(e) => assert_eq!(e.pos, Pos { line: 2, col: 11 }),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn enum_against_integer_is_rejected() {
        let t = climate();
        let errs = parse_property("always Power == 1", &t).unwrap_err();
        assert!(matches!(errs[0], PropError::Type { .. }));
        let errs = parse_property("always Power in {LOW, 2}", &t).unwrap_err();
        assert!(matches!(errs[0], PropError::Type { .. }));
        let errs = parse_property("always Power < HIGH", &t).unwrap_err();
        assert!(matches!(errs[0], PropError::Type { .. }));
    }

    #[test]
    fn init_only_rejects_locations() {
        let t = climate();
        let errs = parse_property("initially Robot_painter.idle", &t).unwrap_err();
        assert!(matches!(errs[0], PropError::Type { .. }));
    }

    #[test]
    fn evaluation_examples() {
        let t = climate();
        let gt = parse_property("never Heater > 3", &t).unwrap().body;
        let v = t.valuation(&[("Heater", Value::Int(2))]).unwrap();
        assert!(!eval_expr(&gt, &v).unwrap());

        let pm = parse_property("always Power in {LOW, MID, HIGH}", &t).unwrap().body;
        let v = t.valuation(&[("Power", Value::Enum("MID".into()))]).unwrap();
        assert!(eval_expr(&pm, &v).unwrap());

        let cc = parse_property(
            "always (AC_comp == ON and Power == LOW) imply FAN == 1",
            &t,
        )
        .unwrap()
        .body;
        let v = t
            .valuation(&[
                ("AC_comp", Value::Enum("ON".into())),
                ("Power", Value::Enum("LOW".into())),
                ("FAN", Value::Int(1)),
            ])
            .unwrap();
        assert!(eval_expr(&cc, &v).unwrap());
    }

    #[test]
    fn difference_terms() {
        let t = climate();
        let p = parse_property("always IS_temperature - Set_temperature >= 0", &t).unwrap();
        let v = t
            .valuation(&[
                ("IS_temperature", Value::Int(30)),
                ("Set_temperature", Value::Int(16)),
            ])
            .unwrap();
        assert!(p.body.eval(&v).unwrap());
        assert_eq!(
            p.render_canonical(),
            "always (IS_temperature - Set_temperature >= 0)"
        );
    }

    #[test]
    fn eval_reports_domain_violations_and_unbound_slots() {
        let t = climate();
        let e = parse_property("always Heater > 1", &t).unwrap().body;
        let mut v = t.valuation(&[]).unwrap();
        v[0] = 9;
        assert!(matches!(e.eval(&v), Err(EvalError::Domain { value: 9, .. })));
        assert!(matches!(e.eval(&[]), Err(EvalError::Unbound { .. })));
    }

    #[test]
    fn aliases_resolve_to_targets() {
        let mut t = climate();
        t.alias("heater_v", "Heater");
        let p = parse_property("never heater_v > 3", &t).unwrap();
        assert_eq!(p.render_canonical(), "never (heater_v > 3)");
    }

    #[test]
    fn statement_round_trip_keeps_rank() {
        let t = climate();
        let p = parse_property("Property CcV-Ac rank 2: always not (FAN == 1 or get_type);", &t)
            .unwrap();
        assert_eq!(p.name, "CcV-Ac");
        let again = parse_property(&p.to_statement(), &t).unwrap();
        assert_eq!(p, again);
        assert_eq!(
            p.to_statement(),
            "Property CcV-Ac rank 2: always (not (FAN == 1 or get_type));"
        );
    }

    #[test]
    fn property_files_skip_comments() {
        let src = "// data\nProperty A: always true;\n/* x */ Property B: never false;";
        let ps = parse_property_file(src).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[1].name, "B");
    }
}
