//! Textual rendering in the style of a timed-automata template: a
//! declarations block, then the transitions grouped by source location.

use std::fmt::Write;

use super::{Component, Init, VarKind};
use crate::prop::Expr;
use crate::value::Domain;

fn uppaal_type(d: &Domain) -> String {
    match d {
        Domain::Bool => "bool".into(),
        Domain::Int { lo, hi } => format!("int[{lo},{hi}]"),
        Domain::Enum(e) => {
            let codes: Vec<i64> = (0..e.constants.len()).map(|i| e.numeric(i)).collect();
            let lo = codes.iter().min().copied().unwrap_or(0);
            let hi = codes.iter().max().copied().unwrap_or(0);
            format!("int[{lo},{hi}]")
        }
    }
}

pub fn export_uppaal_like(c: &Component) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "// {}", c.name);
    for e in &c.enums {
        for (i, (name, _)) in e.constants.iter().enumerate() {
            let _ = writeln!(out, "const int {name} = {};", e.numeric(i));
        }
    }
    if !c.channels.is_empty() {
        let _ = writeln!(out, "chan {};", c.channels.join(", "));
    }
    for v in &c.vars {
        let mut notes = Vec::new();
        if v.shared {
            notes.push("shared".to_string());
        }
        let line = if v.kind == VarKind::Timer {
            notes.push(format!("saturates at {}", v.domain.max_code()));
            format!("clock {};", v.name)
        } else {
            match &v.init {
                Init::Value(x) => format!(
                    "{} {} = {};",
                    uppaal_type(&v.domain),
                    v.name,
                    v.domain.render(*x)
                ),
                Init::Any => {
                    notes.push("any initial value".into());
                    format!("{} {};", uppaal_type(&v.domain), v.name)
                }
            }
        };
        if notes.is_empty() {
            let _ = writeln!(out, "{line}");
        } else {
            let _ = writeln!(out, "{line} // {}", notes.join(", "));
        }
    }

    let _ = writeln!(out, "\nprocess {} {{", c.name);
    let states: Vec<String> = c
        .locations
        .iter()
        .map(|l| match &l.invariant {
            Some(inv) => format!("{} {{ {inv} }}", l.name),
            None => l.name.clone(),
        })
        .collect();
    let _ = writeln!(out, "state\n    {};", states.join(",\n    "));
    let _ = writeln!(out, "init {};", c.locations[c.initial].name);

    let mut lines = Vec::new();
    for (li, loc) in c.locations.iter().enumerate() {
        for e in c.edges.iter().filter(|e| e.source == li) {
            let mut clauses = Vec::new();
            if e.guard != Expr::Const(true) {
                clauses.push(format!("guard {}", e.guard));
            }
            if let Some(s) = &e.sync {
                clauses.push(format!("sync {s}"));
            }
            let assigns: Vec<String> = e
                .assignments
                .iter()
                .map(|a| format!("{} = {}", a.target.name, a.value))
                .chain(e.timer_resets.iter().map(|t| format!("{} = 0", t.name)))
                .collect();
            if !assigns.is_empty() {
                clauses.push(format!("assign {}", assigns.join(", ")));
            }
            let target = &c.locations[e.target].name;
            if clauses.is_empty() {
                lines.push(format!("    {} -> {target} {{ }}", loc.name));
            } else {
                lines.push(format!("    {} -> {target} {{ {}; }}", loc.name, clauses.join("; ")));
            }
        }
    }
    if !lines.is_empty() {
        let _ = writeln!(out, "trans\n{};", lines.join(",\n"));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_component;
    use super::*;

    #[test]
    fn single_location_self_loop() {
        let c = parse_component("bool b = false; proctype P() { a: do :: b = true od }").unwrap();
        assert_eq!(
            export_uppaal_like(&c),
            "// P\nbool b = false;\n\nprocess P {\nstate\n    a;\ninit a;\ntrans\n    a -> a { assign b = true; };\n}\n"
        );
    }

    #[test]
    fn timers_become_clocks() {
        let c = parse_component(
            "TIMER_X t cap 5; chan go;
             proctype P() { a: invariant t <= 4; do :: t == 4 -> go!; t = 0; od }",
        )
        .unwrap();
        let text = export_uppaal_like(&c);
        assert!(text.contains("clock t; // saturates at 5\n"), "{text}");
        assert!(text.contains("chan go;\n"));
        assert!(text.contains("a { t <= 4 }"));
        assert!(text.contains("a -> a { guard t == 4; sync go!; assign t = 0; }"), "{text}");
    }

    #[test]
    fn enums_become_numeric_constants() {
        let c = parse_component(
            "enum Level { LOW = 1, HIGH = 3 }; Level l = HIGH; proctype P() { a: }",
        )
        .unwrap();
        let text = export_uppaal_like(&c);
        assert!(text.starts_with("// P\nconst int LOW = 1;\nconst int HIGH = 3;\nint[1,3] l = HIGH;\n"));
        assert!(!text.contains("trans"));
    }
}
