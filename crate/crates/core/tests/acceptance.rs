//! Acceptance runner: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use strata::checker::{check_invariant, replay, Status};
use strata::dsl::parse_component;
use strata::explore::{ExploreOptions, StateSpace};
use strata::lts::{parallel_compose, ActionLabel};
use strata::prop::{parse_property, CmpOp, Expr, Lit, Modality, Property, Term, VarRef};
use strata::system::{check_composable, compose_system, load_system, normalize_system, LoadOptions, SystemSpec};
use strata::value::Domain;
use strata::verifier::{verify_system, VerificationReport, VerifyOptions};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(rel: &str, mutant: Option<&str>) -> Result<SystemSpec, String> {
    let opts = LoadOptions {
        mutant: mutant.map(String::from),
        narrow: Vec::new(),
    };
    load_system(&corpus(rel), &opts).map_err(|e| e.to_string())
}

fn climate_reproduction() -> Outcome {
    let report = verify_system(&load("climate/climate.mrt", None)?, &VerifyOptions::default());
    ensure(report.error.is_none(), || format!("report error {:?}", report.error))?;
    ensure(report.layer_order == ["data", "security", "time", "functionality"], || {
        format!("layer order {:?}", report.layer_order)
    })?;
    let wanted = ["PmV", "HV", "FV", "AcV", "CcV-H", "CcV-F", "CcV-Ac", "AcS", "Hmax"];
    for name in wanted {
        let v = report.verdict(name).ok_or(format!("{name} missing"))?;
        ensure(v.status == Status::Pass, || format!("{name} is {}", v.status))?;
    }
    ensure(report.verdicts().all(|(_, v)| v.status == Status::Pass), || "a non-PASS verdict".into())?;
    Ok(format!("{} properties PASS over {} states", report.verdicts().count(), report.state_count))
}

const PAINTING_QUERY: &str =
    "A[ ] Robot_painter.painting imply get_type == true and get_color == true and get_time == true";

fn paint_reproduction() -> Outcome {
    let spec = load("paint/paint.mrt", None)?;
    let (layout, _) = check_composable(&spec).map_err(|e| e.to_string())?;
    let ws = normalize_system(&spec, &layout).map_err(|e| e.to_string())?;
    let model = compose_system(&spec, ExploreOptions::default()).map_err(|e| e.to_string())?;
    let mut matched = None;
    for w in &ws {
        let Ok(query) = parse_property(PAINTING_QUERY, w.scope()) else { continue };
        let v = check_invariant(&model.space, &query);
        ensure(v.status == Status::Pass, || format!("query is {} in {}'s scope", v.status, w.contract.component))?;
        if let Some(o) = w.obligations.iter().find(|o| o.property.body == query.body) {
            matched = Some(o.property.name.clone());
        }
    }
    let name = matched.ok_or("no contract states the painting query")?;
    let report = verify_system(&spec, &VerifyOptions::default());
    let v = report.verdict(&name).ok_or(format!("{name} missing from the report"))?;
    ensure(v.status == Status::Pass, || format!("{name} is {}", v.status))?;
    ensure(report.all_passed(), || "another paint property failed".into())?;
    Ok(format!("{name} PASS over {} states", report.state_count))
}

const PAIRS: u64 = 1000;

fn composition_oracle() -> Outcome {
    let mut discrepancies = 0;
    let mut r = rng(1);
    for _ in 0..PAIRS {
        let p = random_lts(&mut r, "p");
        let q = random_lts(&mut r, "q");
        let sync = random_sync(&mut r, &p, &q);
        let got = parallel_compose(&p, &q, &sync).map_err(|e| e.to_string())?;
        let want = product_oracle(&p, &q, &sync);
        let states: BTreeSet<String> = got.state_names().iter().cloned().collect();
        if states != want.states || named_edges(&got) != want.edges {
            discrepancies += 1;
        }
    }
    ensure(discrepancies == 0, || format!("{discrepancies} discrepancies"))?;
    Ok(format!("{PAIRS} pairs, 0 discrepancies"))
}

fn rule_exclusivity() -> Outcome {
    let (mut violations, mut stutters, mut edges) = (0, 0, 0);
    let mut r = rng(1);
    for _ in 0..PAIRS {
        let p = random_lts(&mut r, "p");
        let q = random_lts(&mut r, "q");
        let sync = random_sync(&mut r, &p, &q);
        let got = parallel_compose(&p, &q, &sync).map_err(|e| e.to_string())?;
        let union: BTreeSet<ActionLabel> = p.alphabet().union(q.alphabet()).cloned().collect();
        if got.alphabet() != &union {
            violations += 1;
        }
        let want = product_oracle(&p, &q, &sync);
        for e in named_edges(&got) {
            edges += 1;
            let rules = &want.rules[&e];
            let synced = sync.iter().any(|a| a.to_string() == e.1);
            let ok = if synced {
                rules.len() == 1 && rules.contains(&3)
            } else if rules.contains(&3) {
                false
            } else if rules.len() > 1 {
                stutters += 1;
                e.0 == e.2
            } else {
                true
            };
            if !ok {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!(
        "{edges} transitions, 0 violations ({stutters} self-loops licensed by both interleaving rules)"
    ))
}

fn mutation_sensitivity() -> Outcome {
    let spec = load("climate/climate.mrt", Some("heater-overflow"))?;
    let report = verify_system(&spec, &VerifyOptions::default());
    let sec = report.layers.iter().find(|l| l.facet == "security").ok_or("no security layer")?;
    let hmax = sec.verdicts.iter().find(|v| v.property == "Hmax").ok_or("no Hmax")?;
    ensure(hmax.status == Status::Fail, || format!("Hmax is {}", hmax.status))?;
    let trace = hmax.trace.as_ref().ok_or("no witness")?;
    let model = compose_system(&spec, ExploreOptions::default()).map_err(|e| e.to_string())?;
    ensure(replay(&model.space.lts, trace), || "witness does not replay".into())?;
    let heater = model
        .layout
        .slots
        .iter()
        .position(|(n, _)| n == "CC.heater_v")
        .ok_or("no heater slot")?;
    let shortest = shortest_violation(&model.space.lts, |s| model.space.values(s).is_some_and(|v| v[heater] > 3));
    ensure(shortest == Some(trace.len()), || format!("witness {} vs shortest {shortest:?}", trace.len()))?;
    for l in report.layers.iter().filter(|l| l.facet == "time" || l.facet == "functionality") {
        ensure(l.verdicts.iter().all(|v| v.status == Status::Skipped), || format!("{} not skipped", l.facet))?;
    }
    let full = verify_system(
        &spec,
        &VerifyOptions {
            short_circuit: false,
            ..Default::default()
        },
    );
    ensure(full.totals["FAIL"] == 1 && full.totals["SKIPPED"] == 0, || {
        format!("without short-circuit: {:?}", full.totals)
    })?;
    Ok(format!("Hmax FAIL with a {}-step witness; full run has 1 FAIL, 0 SKIPPED", trace.len()))
}

fn witness_minimality() -> Outcome {
    let mut r = rng(6);
    let (mut fails, mut longest) = (0, 0);
    for i in 0..300 {
        let k = (i % 10) as i64;
        let (lts, values) = random_model(&mut r, 1000);
        let oracle = shortest_violation(&lts, |s| values[s][0] == k);
        let space = StateSpace::from_parts(lts, values);
        let p = Property {
            name: "NoK".into(),
            rank: None,
            modality: Modality::Never,
            body: Expr::Cmp {
                op: CmpOp::Eq,
                lhs: Term::Var(VarRef {
                    name: "v".into(),
                    slot: 0,
                    domain: Domain::int(0, 9),
                }),
                rhs: Term::Lit(Lit::Int(k)),
            },
        };
        let v = check_invariant(&space, &p);
        let got = v.witness.as_ref().map(|w| w.len());
        ensure(got == oracle, || format!("model {i}: witness {got:?} vs oracle {oracle:?}"))?;
        if let Some(n) = got {
            fails += 1;
            longest = longest.max(n);
        }
    }
    Ok(format!("300 models, {fails} FAIL witnesses all shortest (longest {longest})"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for rel in ["climate/climate.mrt", "paint/paint.mrt"] {
        let mut texts = Vec::new();
        for (i, workers) in ["1", "1", "4"].iter().enumerate() {
            let out = dir.path().join(format!("{i}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_strata"))
                .arg("verify")
                .arg(corpus(rel))
                .args(["--workers", workers, "--report"])
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?
                .status;
            ensure(status.success(), || format!("{rel} exited with {status}"))?;
            let text = fs::read_to_string(&out).map_err(|e| e.to_string())?;
            VerificationReport::from_json(&text).map_err(|e| e.to_string())?;
            texts.push(without_timestamp(&text));
        }
        ensure(texts[0] == texts[1], || format!("{rel}: consecutive runs differ"))?;
        ensure(texts[0] == texts[2], || format!("{rel}: 4 workers differ from 1"))?;
    }
    Ok("both corpus systems byte-identical over 3 runs (1, 1, 4 workers)".into())
}

fn round_trip() -> Outcome {
    let scope = property_scope();
    let mut r = rng(8);
    const GENERATED: usize = 10_000;
    for _ in 0..GENERATED {
        let text = random_property(&mut r);
        let first = parse_property(&text, &scope).map_err(|e| format!("{text}: {e:?}"))?;
        let second = parse_property(&first.to_statement(), &scope).map_err(|e| format!("{text}: {e:?}"))?;
        ensure(first == second, || format!("not a fixpoint: {text}"))?;
    }
    let mut corpus_props = 0;
    for rel in ["climate/climate.mrt", "paint/paint.mrt"] {
        let spec = load(rel, None)?;
        let (layout, _) = check_composable(&spec).map_err(|e| e.to_string())?;
        for w in normalize_system(&spec, &layout).map_err(|e| e.to_string())? {
            for o in &w.obligations {
                let text = o.property.to_statement();
                let again = parse_property(&text, w.scope()).map_err(|e| format!("{text}: {e:?}"))?;
                ensure(again == o.property, || format!("not a fixpoint: {text}"))?;
                corpus_props += 1;
            }
        }
    }
    Ok(format!("{corpus_props} corpus and {GENERATED} generated properties"))
}

fn translation_golden() -> Outcome {
    let src_path = corpus("fixtures/climate_controller.pml");
    let golden = fs::read_to_string(corpus("fixtures/climate_controller.golden")).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let out = Command::new(env!("CARGO_BIN_EXE_strata"))
            .arg("translate")
            .arg(&src_path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || "translate failed".into())?;
        outputs.push(String::from_utf8(out.stdout).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == golden && outputs[1] == golden, || "output differs from the golden file".into())?;
    let text = fs::read_to_string(&src_path).map_err(|e| e.to_string())?;
    let c = parse_component(&text).map_err(|e| e.to_string())?;
    let options = text.matches("::").count();
    ensure(c.locations.len() == 6, || format!("{} locations", c.locations.len()))?;
    ensure(c.edges.len() == options, || format!("{} edges for {options} options", c.edges.len()))?;
    Ok(format!("byte-stable, 6 locations, {options} edges"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("climate corpus verifies in four layers", climate_reproduction),
        ("paint corpus painting query passes", paint_reproduction),
        ("composition equals the reachable product", composition_oracle),
        ("rule exclusivity and alphabet law", rule_exclusivity),
        ("heater-overflow mutant is caught", mutation_sensitivity),
        ("witnesses are shortest", witness_minimality),
        ("reports are deterministic", determinism),
        ("properties round-trip", round_trip),
        ("translation golden file", translation_golden),
    ];
    let started = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
