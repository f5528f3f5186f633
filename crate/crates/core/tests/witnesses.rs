mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::Rng;
use strata::checker::{check_invariant, replay, Status};
use strata::explore::{ExploreOptions, StateSpace};
use strata::lts::{ActionLabel, Lts, Transition};
use strata::prop::{CmpOp, Expr, Lit, Modality, Property, Term, VarRef};
use strata::system::{compose_system, load_system, LoadOptions};
use strata::value::Domain;

use common::{corpus, random_model, rng, shortest_violation};

fn never_equal(k: i64) -> Property {
    Property {
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
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn witnesses_are_shortest(seed in any::<u64>(), k in 0i64..10) {
        let mut r = rng(seed);
        let (lts, values) = random_model(&mut r, 1000);
        let oracle = shortest_violation(&lts, |s| values[s][0] == k);
        let space = StateSpace::from_parts(lts, values.clone());
        let v = check_invariant(&space, &never_equal(k));
        match oracle {
            None => prop_assert_eq!(v.status, Status::Pass),
            Some(len) => {
                prop_assert_eq!(v.status, Status::Fail);
                let w = v.witness.unwrap();
                prop_assert_eq!(w.len(), len);
                prop_assert!(replay(&space.lts, &w));
                prop_assert_eq!(values[w.last_state()][0], k);
            }
        }
    }

    #[test]
    fn extra_transitions_never_repair_a_failure(seed in any::<u64>(), k in 0i64..10) {
        let mut r = rng(seed);
        let (lts, values) = random_model(&mut r, 200);
        let before = check_invariant(&StateSpace::from_parts(lts.clone(), values.clone()), &never_equal(k));
        let n = lts.state_count();
        let mut ts = lts.transitions().to_vec();
        for _ in 0..r.gen_range(1..20) {
            ts.push(Transition { source: r.gen_range(0..n), action: ActionLabel::Tau, target: r.gen_range(0..n) });
        }
        let bigger = Lts::new(lts.state_names().to_vec(), lts.alphabet().clone(), ts, lts.initial()).unwrap();
        let after = check_invariant(&StateSpace::from_parts(bigger, values), &never_equal(k));
        if before.status == Status::Fail {
            prop_assert_eq!(after.status, Status::Fail);
            prop_assert!(after.witness.unwrap().len() <= before.witness.unwrap().len());
        }
    }
}

#[test]
fn forged_steps_do_not_replay() {
    let mut r = rng(11);
    let mut forged = 0;
    for _ in 0..200 {
        let (lts, values) = random_model(&mut r, 100);
        let space = StateSpace::from_parts(lts, values);
        let v = check_invariant(&space, &never_equal(9));
        let Some(mut w) = v.witness else { continue };
        if w.len() < 2 {
            continue;
        }
        let mid = w.len() / 2;
        let step = &mut w.steps[mid];
        let bogus = (0..space.state_count()).find(|&t| !space.lts.has_transition(step.source, &step.action, t));
        let Some(t) = bogus else { continue };
        step.target = t;
        assert!(!replay(&space.lts, &w));
        forged += 1;
    }
    assert!(forged > 10);
}

/// Reachable states by depth-first search, independent of the checker.
fn reachable(l: &Lts) -> HashSet<usize> {
    let mut seen = HashSet::from([l.initial()]);
    let mut stack = vec![l.initial()];
    while let Some(s) = stack.pop() {
        for t in l.successors(s) {
            if seen.insert(t.target) {
                stack.push(t.target);
            }
        }
    }
    seen
}

#[test]
fn corpus_verdicts_agree_with_exhaustive_evaluation() {
    for sys in ["climate/climate.mrt", "paint/paint.mrt"] {
        for mutant in [None, Some("heater-overflow")] {
            if mutant.is_some() && sys.starts_with("paint") {
                continue;
            }
            let opts = LoadOptions { mutant: mutant.map(String::from), narrow: Vec::new() };
            let spec = load_system(&corpus(sys), &opts).unwrap();
            let model = compose_system(&spec, ExploreOptions::default()).unwrap();
            let (layout, _) = strata::system::check_composable(&spec).unwrap();
            let reach = reachable(&model.space.lts);
            for w in strata::system::normalize_system(&spec, &layout).unwrap() {
                for o in w.obligations.iter().filter(|o| o.property.modality != Modality::InitOnly) {
                    let v = check_invariant(&model.space, &o.property);
                    let violated = reach.iter().any(|&s| {
                        model.space.values(s).is_some_and(|vals| o.property.violated_by(vals).unwrap())
                    });
                    let expect = if violated { Status::Fail } else { Status::Pass };
                    assert_eq!(v.status, expect, "{sys} {mutant:?} {}", o.property.name);
                }
            }
        }
    }
}
