//! Layer-by-layer verification of a composed system and the report it
//! produces.

use std::collections::BTreeMap;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::checker::{check_invariant_with, render_witness, CheckOptions, Status, Verdict};
use crate::contract::{layer_order, normalize, FacetId, GeneralizedContract, Side, WellStructuredComponent};
use crate::dsl::{initial_values, BoundComponent, Component, DslError, VarKind};
use crate::explore::{explore, ExploreError, ExploreOptions, StateSpace, Successors};
use crate::lts::{ActionLabel, Trace};
use crate::prop::Modality;
use crate::system::{check_composable, compose_system, normalize_system, SystemError, SystemModel, SystemSpec};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Stop after the first layer with a non-passing verdict.
    pub short_circuit: bool,
    pub explore: ExploreOptions,
    /// Record per-verdict durations (makes reports differ between runs).
    pub include_timings: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            short_circuit: true,
            explore: ExploreOptions::default(),
            include_timings: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub component: String,
    pub property: String,
    pub side: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub statement: String,
    pub status: Status,
    pub states_explored: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
    #[serde(skip)]
    pub trace: Option<Trace>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerResult {
    pub facet: String,
    pub priority: u32,
    pub verdicts: Vec<VerdictRecord>,
}

impl LayerResult {
    pub fn has(&self, s: Status) -> bool {
        self.verdicts.iter().any(|v| v.status == s)
    }

    fn blocking(&self) -> bool {
        self.verdicts
            .iter()
            .any(|v| !matches!(v.status, Status::Pass | Status::Skipped))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Environment {
    pub tool_version: String,
    pub timestamp: u64,
    pub narrowing: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutant: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub system: String,
    pub environment: Environment,
    pub state_count: usize,
    pub transition_count: usize,
    pub layer_order: Vec<String>,
    pub layers: Vec<LayerResult>,
    pub short_circuited_at: Option<String>,
    pub totals: BTreeMap<String, usize>,
    pub error: Option<String>,
}

impl VerificationReport {
    fn new(spec_name: &str, narrowing: Vec<String>, mutant: Option<String>) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        VerificationReport {
            system: spec_name.to_string(),
            environment: Environment {
                tool_version: TOOL_VERSION.to_string(),
                timestamp,
                narrowing,
                mutant,
            },
            state_count: 0,
            transition_count: 0,
            layer_order: Vec::new(),
            layers: Vec::new(),
            short_circuited_at: None,
            totals: Status::ALL.iter().map(|s| (s.as_str().to_string(), 0)).collect(),
            error: None,
        }
    }

    fn finish(&mut self) {
        for v in self.layers.iter().flat_map(|l| &l.verdicts) {
            *self.totals.get_mut(v.status.as_str()).unwrap() += 1;
        }
    }

    /// True when nothing failed: every evaluated verdict is a pass and no
    /// report-level error occurred.
    pub fn all_passed(&self) -> bool {
        self.error.is_none()
            && self
                .layers
                .iter()
                .flat_map(|l| &l.verdicts)
                .all(|v| matches!(v.status, Status::Pass | Status::Skipped))
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn verdicts(&self) -> impl Iterator<Item = (&str, &VerdictRecord)> {
        self.layers
            .iter()
            .flat_map(|l| l.verdicts.iter().map(move |v| (l.facet.as_str(), v)))
    }

    pub fn verdict(&self, property: &str) -> Option<&VerdictRecord> {
        self.verdicts().map(|(_, v)| v).find(|v| v.property == property)
    }

    /// One line per layer: facet, priority and status counts.
    pub fn summary_table(&self) -> String {
        let mut out = format!("{:<16} {:>8}  {}\n", "layer", "priority", "verdicts");
        for l in &self.layers {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for v in &l.verdicts {
                *counts.entry(v.status.as_str()).or_default() += 1;
            }
            let c: Vec<String> = counts.iter().map(|(k, n)| format!("{k}={n}")).collect();
            out.push_str(&format!("{:<16} {:>8}  {}\n", l.facet, l.priority, c.join(" ")));
        }
        if let Some(f) = &self.short_circuited_at {
            out.push_str(&format!("stopped after layer `{f}`\n"));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        out
    }
}

/// Union of the components' facets. A facet takes the smallest priority
/// any component gives it; ties are broken by name.
pub fn merge_layer_orders(components: &[WellStructuredComponent]) -> Vec<(FacetId, u32)> {
    let mut best: BTreeMap<FacetId, u32> = BTreeMap::new();
    for w in components {
        for f in w.layer_order() {
            let p = w.priority(&f).unwrap_or_else(|| f.default_priority());
            best.entry(f)
                .and_modify(|q| *q = (*q).min(p))
                .or_insert(p);
        }
    }
    let mut out: Vec<(FacetId, u32)> = best.into_iter().collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

fn record(
    component: &str,
    side: Side,
    statement: String,
    v: Verdict,
    witness: Vec<String>,
    timings: bool,
) -> VerdictRecord {
    VerdictRecord {
        component: component.to_string(),
        property: v.property,
        side: side.keyword().to_string(),
        statement,
        status: v.status,
        states_explored: v.states_explored,
        witness_length: v.witness.as_ref().map(|t| t.steps.len()),
        witness,
        message: v.message,
        duration_ms: timings.then(|| duration_ms(v.duration)),
        trace: v.witness,
    }
}

fn duration_ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

fn witness_lines(model: &SystemModel, t: &Trace) -> Vec<String> {
    render_witness(t, |s| match model.space.values(s) {
        None => (model.space.lts.state_name(s).to_string(), Vec::new()),
        Some(v) => (
            model.render_locations(v),
            (0..v.len()).filter_map(|i| model.render_var(v, i)).collect(),
        ),
    })
}

/// Runs every layer in order over one composed state space.
fn run_layers<W>(
    report: &mut VerificationReport,
    comps: &[WellStructuredComponent],
    opts: &VerifyOptions,
    mut check: W,
) where
    W: FnMut(&WellStructuredComponent, &crate::contract::Obligation) -> VerdictRecord,
{
    let order = merge_layer_orders(comps);
    report.layer_order = order.iter().map(|(f, _)| f.to_string()).collect();
    for (facet, priority) in order {
        let mut layer = LayerResult {
            facet: facet.to_string(),
            priority,
            verdicts: Vec::new(),
        };
        let stopped = report.short_circuited_at.clone();
        for w in comps {
            for o in w.facet_obligations(&facet) {
                let rec = match &stopped {
                    Some(f) => record(
                        &w.behaviour.name,
                        o.side,
                        o.property.to_statement(),
                        Verdict::skipped(&o.property.name, &format!("layer `{f}` did not pass")),
                        Vec::new(),
                        false,
                    ),
                    None => check(w, o),
                };
                layer.verdicts.push(rec);
            }
        }
        if stopped.is_none() && opts.short_circuit && layer.blocking() {
            report.short_circuited_at = Some(layer.facet.clone());
        }
        report.layers.push(layer);
    }
}

/// Composes the system once and checks every contract property, layer by
/// layer in priority order. Assume properties are re-checked over the
/// composed states; a failing one is reported as an assumption violation.
pub fn verify_system(spec: &SystemSpec, opts: &VerifyOptions) -> VerificationReport {
    let mut report = VerificationReport::new(
        &spec.name,
        spec.narrow.iter().map(|n| n.to_string()).collect(),
        spec.mutant.clone(),
    );
    let comps = match check_composable(spec).and_then(|(layout, _)| normalize_system(spec, &layout)) {
        Ok(c) => c,
        Err(e) => {
            report.error = Some(e.to_string());
            report.finish();
            return report;
        }
    };
    let model = match compose_system(spec, opts.explore) {
        Ok(m) => m,
        Err(SystemError::StateLimit(n)) => {
            let msg = format!("state limit of {n} exceeded");
            run_layers(&mut report, &comps, opts, |w, o| {
                record(
                    &w.behaviour.name,
                    o.side,
                    o.property.to_statement(),
                    Verdict::error(&o.property.name, msg.clone()),
                    Vec::new(),
                    false,
                )
            });
            report.error = Some(msg);
            report.finish();
            return report;
        }
        Err(e) => {
            report.error = Some(e.to_string());
            report.finish();
            return report;
        }
    };
    report.state_count = model.space.state_count();
    report.transition_count = model.space.lts.transitions().len();
    let check_opts = CheckOptions {
        workers: opts.explore.workers,
    };
    run_layers(&mut report, &comps, opts, |w, o| {
        let mut v = check_invariant_with(&model.space, &o.property, check_opts);
        if o.side == Side::Assume && v.status == Status::Fail {
            v.status = Status::AssumptionViolated;
        }
        let lines = v
            .witness
            .as_ref()
            .map(|t| witness_lines(&model, t))
            .unwrap_or_default();
        record(
            &w.behaviour.name,
            o.side,
            o.property.to_statement(),
            v,
            lines,
            opts.include_timings,
        )
    });
    report.finish();
    report
}

/// State space of one component closed by a universal environment: shared
/// variables it never writes may change to any value at any time (an
/// internal `env` step), and its assume properties restrict the initial
/// valuations (`initially`) or the admissible states (`always`/`never`).
pub fn isolated_space(
    w: &WellStructuredComponent,
    opts: ExploreOptions,
) -> Result<StateSpace, SystemError> {
    let c = &w.behaviour;
    let slots: Vec<usize> = (0..c.slot_count()).collect();
    let b = BoundComponent::bind(c, &c.name, slots, true, false);
    let written = c.written_vars();
    let env_vars: Vec<(usize, Vec<i64>)> = c
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.shared && v.kind == VarKind::Plain && !written.contains(&v.name))
        .map(|(i, v)| (i + 1, v.domain.codes().collect()))
        .collect();
    let assumes: Vec<&crate::prop::Property> = w
        .obligations
        .iter()
        .filter(|o| o.side == Side::Assume)
        .map(|o| &o.property)
        .collect();
    let admissible = |v: &[i64], initial: bool| -> Result<bool, DslError> {
        if !b.invariant_holds(v)? {
            return Ok(false);
        }
        for p in &assumes {
            if p.modality == Modality::InitOnly && !initial {
                continue;
            }
            let bad = p
                .violated_by(v)
                .map_err(|e| DslError::semantic(Default::default(), e.to_string()))?;
            if bad {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut initials = Vec::new();
    for v in initial_values(c) {
        if admissible(&v, true).map_err(SystemError::Step)? {
            initials.push(v);
        }
    }
    if initials.is_empty() {
        return Err(SystemError::Step(DslError::NoInitialState(format!(
            "no initial valuation of `{}` satisfies its invariant and assumptions",
            c.name
        ))));
    }
    let env = ActionLabel::visible("env").unwrap();
    let locals: Vec<usize> = (1..c.slot_count()).collect();
    let succ = |state: &[i64]| -> Result<Successors, DslError> {
        let mut moves = Vec::new();
        b.moves(state, &mut moves)?;
        moves.push(b.tick_move(state));
        let mut out = Vec::new();
        for m in moves {
            if let Some(f) = m.fault {
                return Err(*f);
            }
            let mut next = state.to_vec();
            for (s, v) in m.writes {
                next[s] = v;
            }
            if admissible(&next, false)? {
                out.push((m.label, next));
            }
        }
        for (slot, codes) in &env_vars {
            for &x in codes {
                if x != state[*slot] {
                    let mut next = state.to_vec();
                    next[*slot] = x;
                    if admissible(&next, false)? {
                        out.push((env.clone(), next));
                    }
                }
            }
        }
        Ok(out)
    };
    explore(initials, succ, |v| b.render(v, &locals), opts).map_err(|e| match e {
        ExploreError::Step(e) => SystemError::Step(e),
        ExploreError::StateLimit(n) => SystemError::StateLimit(n),
    })
}

/// Checks one component on its own. Components that talk over channels
/// cannot be closed this way; their guarantees are reported as skipped
/// with a "needs composition" message. Assume properties act as
/// environment constraints and are listed as skipped.
pub fn verify_component(
    c: &Component,
    k: &GeneralizedContract,
    opts: &VerifyOptions,
) -> VerificationReport {
    let mut report = VerificationReport::new(&c.name, Vec::new(), None);
    let channels = c.channel_uses();
    if !channels.is_empty() {
        // The contract may mention partners, so it is not resolved here.
        let names: Vec<String> = channels.iter().map(|(n, _)| format!("`{n}`")).collect();
        let why = format!("needs composition: uses channel {}", names.join(", "));
        let order = match layer_order(k) {
            Ok(o) => o,
            Err(e) => {
                report.error = Some(format!("contract of {}: {e}", c.name));
                report.finish();
                return report;
            }
        };
        report.layer_order = order.iter().map(|f| f.to_string()).collect();
        for f in order {
            let verdicts = k
                .properties()
                .filter(|(g, _, _)| **g == f)
                .map(|(_, side, p)| {
                    record(&c.name, side, String::new(), Verdict::skipped(&p.name, &why), Vec::new(), false)
                })
                .collect();
            report.layers.push(LayerResult {
                priority: k.priorities[&f],
                facet: f.to_string(),
                verdicts,
            });
        }
        report.error = Some(why);
        report.finish();
        return report;
    }
    let w = match normalize(c, k) {
        Ok(w) => w,
        Err(e) => {
            report.error = Some(format!("contract of {}: {e}", c.name));
            report.finish();
            return report;
        }
    };
    let comps = vec![w];
    let space = match isolated_space(&comps[0], opts.explore) {
        Ok(s) => s,
        Err(e) => {
            report.error = Some(e.to_string());
            report.finish();
            return report;
        }
    };
    report.state_count = space.state_count();
    report.transition_count = space.lts.transitions().len();
    let check_opts = CheckOptions {
        workers: opts.explore.workers,
    };
    let vars: Vec<(String, crate::value::Domain)> =
        c.vars.iter().map(|v| (v.name.clone(), v.domain.clone())).collect();
    run_layers(&mut report, &comps, opts, |w, o| {
        if o.side == Side::Assume {
            return record(
                &w.behaviour.name,
                o.side,
                o.property.to_statement(),
                Verdict::skipped(&o.property.name, "environment constraint"),
                Vec::new(),
                false,
            );
        }
        let v = check_invariant_with(&space, &o.property, check_opts);
        let lines = v
            .witness
            .as_ref()
            .map(|t| {
                render_witness(t, |s| match space.values(s) {
                    None => (space.lts.state_name(s).to_string(), Vec::new()),
                    Some(vals) => (
                        format!("({})", c.locations[vals[0] as usize].name),
                        vars.iter()
                            .enumerate()
                            .map(|(i, (n, d))| (n.clone(), d.render(vals[i + 1])))
                            .collect(),
                    ),
                })
            })
            .unwrap_or_default();
        record(
            &w.behaviour.name,
            o.side,
            o.property.to_statement(),
            v,
            lines,
            opts.include_timings,
        )
    });
    report.finish();
    report
}
