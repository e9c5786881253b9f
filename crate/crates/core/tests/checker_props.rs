//! Properties of the checkers: engines that commit to a verdict agree with
//! each other and with the brute-force oracle, and definite bounded verdicts
//! come with evidence that replays through the dynamics.

use std::collections::{BTreeMap, HashSet};

use gcgmp::arith::{eval_atom_by, Acf};
use gcgmp::checker::{
    atl_exact_for, check_atl, check_bounded, check_saturated, enumerate_oracle, saturated_exact_for, Budget,
    CheckError, StrategyTable, Truth,
};
use gcgmp::dynamics::{enabled_actions, step, trace_json, Configuration, History, TraceEntry};
use gcgmp::logic::{parse_formula, Fragment, Observation, PathFormula, StateFormula, StrategyClass};
use gcgmp::model::{cartesian, Profile};
use gcgmp::random::{self, FormulaShape, Guards, ModelShape};
use gcgmp::{Model, Payoff, Scalar};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const ORACLE_DEPTH: usize = 4;

type Formula = StateFormula<Payoff>;

fn zero(m: &Model) -> Configuration<Payoff> {
    Configuration::zero(0, m.num_agents())
}

/// Verdicts of each engine that applies, by name.
fn verdicts(m: &Model, f: &Formula, sp: StrategyClass, so: StrategyClass) -> Vec<(&'static str, Truth)> {
    let c0 = zero(m);
    let mut out = Vec::new();
    match enumerate_oracle(m, &c0, f, sp, so, ORACLE_DEPTH) {
        Ok(v) => out.push(("oracle", v.verdict)),
        Err(CheckError::TooLarge(_)) => {}
        Err(e) => panic!("oracle: {e}"),
    }
    let v = check_bounded(m, &c0, f, sp, so, Budget::depth(8)).expect("bounded");
    out.push(("bounded", v.verdict));
    if f.classify() == Fragment::AtlPure && m.all_guards_state_based() && atl_exact_for(sp, so) {
        let sat = check_atl(m, f).expect("atl");
        out.push(("atl", Truth::from_bool(sat.contains(&0))));
    }
    if saturated_exact_for(sp, so) {
        if let Ok(v) = check_saturated(m, &c0, f) {
            out.push(("saturated", v.verdict));
        }
    }
    out
}

fn instance(seed: u64, shape: &ModelShape, constraints: bool) -> (Model, Formula, StrategyClass, StrategyClass) {
    let mut rng = StdRng::seed_from_u64(seed);
    let m: Model = random::model(&mut rng, shape);
    let fs = FormulaShape::new(m.agents(), &shape.labels, rng.gen_range(1..=2), constraints);
    let f = random::formula(&mut rng, &fs);
    let (mut sp, mut so) = (random::class(&mut rng), random::class(&mut rng));
    // State-based classes cannot respect utility guards.
    if !m.all_guards_state_based() {
        sp.observation = Observation::ConfigurationBased;
        so.observation = Observation::ConfigurationBased;
    }
    (m, f, sp, so)
}

fn assert_agreement(seed: u64, shape: &ModelShape, constraints: bool) -> Result<(), TestCaseError> {
    let (m, f, sp, so) = instance(seed, shape, constraints);
    let vs = verdicts(&m, &f, sp, so);
    let definite: Vec<_> = vs.iter().filter(|(_, v)| v.is_definite()).collect();
    for w in definite.windows(2) {
        prop_assert_eq!(
            w[0].1,
            w[1].1,
            "{} vs {} on {} ({} vs {})\n{}",
            w[0].0,
            w[1].0,
            f,
            sp,
            so,
            gcgmp::model::to_json(&m)
        );
    }
    Ok(())
}

/// Truth of a formula without coalition operators, `None` otherwise.
fn flat(m: &Model, f: &Formula, c: &Configuration<Payoff>) -> Option<bool> {
    Some(match f {
        StateFormula::True => true,
        StateFormula::Atom(p) => m.has_label(c.state, p),
        StateFormula::Constraint(a) => {
            let lookup = |x: &str| m.agent_index(x).map(|i| &c.utilities[i]);
            eval_atom_by(a, &lookup).ok()?
        }
        StateFormula::Not(x) => !flat(m, x, c)?,
        StateFormula::And(a, b) => flat(m, a, c)? && flat(m, b, c)?,
        StateFormula::Or(a, b) => flat(m, a, c)? || flat(m, b, c)?,
        StateFormula::Coop(..) => return None,
    })
}

/// Follows a witness table from `c0`: the coalition plays the table, the
/// others play every enabled action. Checks each table entry is enabled
/// where it is consulted and that every outcome satisfies the objective.
/// `None` when the objective has nested coalitions.
fn replay(m: &Model, c0: &Configuration<Payoff>, f: &Formula, w: &StrategyTable) -> Option<bool> {
    let StateFormula::Coop(agents, body) = f else { return None };
    let state = |p: &PathFormula<Payoff>| match p {
        PathFormula::State(s) => Some(s.clone()),
        _ => None,
    };
    let (keep, goal, next) = match body.as_ref() {
        PathFormula::Next(a) => (None, state(a)?, true),
        PathFormula::Always(a) => (Some(state(a)?), StateFormula::True.not(), false),
        PathFormula::Until(a, b) => (Some(state(a)?), state(b)?, false),
        _ => return None,
    };
    flat(m, &goal, c0)?;
    if let Some(k) = &keep {
        flat(m, k, c0)?;
    }
    let timed = !w.class.is_memoryless() && !m.is_index_independent();
    let observe = |c: &Configuration<Payoff>, l: u64| {
        if w.class.observation == Observation::StateBased {
            m.states()[c.state].clone()
        } else if timed {
            format!("{} @{l}", c.display(m))
        } else {
            c.display(m).to_string()
        }
    };
    let members: Vec<usize> = agents.iter().map(|a| m.agent_index(a).unwrap()).collect();
    // Outcomes of one step under the table; `None` if it prescribes nothing
    // or a disabled action.
    let outcomes = |c: &Configuration<Payoff>, l: u64| -> Option<Vec<Configuration<Payoff>>> {
        let key = observe(c, l);
        let sets: Vec<Vec<usize>> = (0..m.num_agents())
            .map(|a| {
                let enabled = enabled_actions(m, c, a).unwrap();
                if !members.contains(&a) {
                    return Some(enabled);
                }
                let name = w.table.get(&m.agents()[a])?.get(&key)?;
                let x = m.action_index(a, name)?;
                enabled.contains(&x).then(|| vec![x])
            })
            .collect::<Option<_>>()?;
        Some(cartesian(&sets).iter().map(|p| step(m, c, p, l).unwrap()).collect())
    };
    let id = |c: &Configuration<Payoff>, l: u64| (c.clone(), if m.is_index_independent() { 0 } else { l });
    if next {
        return Some(outcomes(c0, 1)?.iter().all(|c| flat(m, &goal, c).unwrap()));
    }
    let keep = keep.unwrap();
    // Depth-first search; reaching a node already on the stack is a cycle
    // that never meets the goal, which only a safety objective tolerates.
    let safety = body_is_always(body);
    let mut done = HashSet::new();
    let mut on_stack = HashSet::new();
    let mut stack = vec![(c0.clone(), 1u64, None::<Vec<Configuration<Payoff>>>)];
    while let Some((c, l, succ)) = stack.pop() {
        match succ {
            None => {
                if !safety && flat(m, &goal, &c).unwrap() {
                    done.insert(id(&c, l));
                    continue;
                }
                if !flat(m, &keep, &c).unwrap() || done.len() > 100_000 {
                    return Some(false);
                }
                let Some(out) = outcomes(&c, l) else { return Some(false) };
                on_stack.insert(id(&c, l));
                stack.push((c, l, Some(out)));
            }
            Some(mut out) => match out.pop() {
                None => {
                    on_stack.remove(&id(&c, l));
                    done.insert(id(&c, l));
                }
                Some(n) => {
                    stack.push((c, l, Some(out)));
                    if on_stack.contains(&id(&n, l + 1)) {
                        if !safety {
                            return Some(false);
                        }
                    } else if !done.contains(&id(&n, l + 1)) {
                        stack.push((n, l + 1, None));
                    }
                }
            },
        }
    }
    Some(true)
}

fn body_is_always(body: &PathFormula<Payoff>) -> bool {
    matches!(body, PathFormula::Always(_))
}

fn replay_trace(m: &Model, c0: &Configuration<Payoff>, trace: &[TraceEntry]) -> bool {
    let profiles: Vec<Profile> = trace
        .iter()
        .filter_map(|e| e.profile.as_ref())
        .map(|p: &BTreeMap<String, String>| {
            let names: Vec<&str> = m.agents().iter().map(|a| p[a].as_str()).collect();
            m.parse_profile(&names).unwrap()
        })
        .collect();
    match History::from_profiles(m, c0.clone(), 1, &profiles) {
        Ok(h) => trace_json(m, &h) == trace,
        Err(_) => false,
    }
}

fn scaled(m: &Model, f: &Formula, k: i64) -> (Model, Formula) {
    let k = Payoff::from_int(k);
    let times = |x: &Payoff| x.clone() * k.clone();
    let mut out = m.clone();
    for s in 0..m.num_states() {
        for p in m.all_profiles() {
            out.set_payoff(s, &p, m.payoff(s, &p).iter().map(times).collect());
        }
        for a in 0..m.num_agents() {
            for x in 0..m.actions(a).len() {
                let g: Acf<Payoff> = m.guard(a, s, x).map_constants(&times);
                out.set_guard(a, s, x, g);
            }
        }
    }
    (out, f.map_constants(&times))
}

fn non_negative() -> ModelShape {
    ModelShape { payoffs: (0, 2), guards: Guards::Utility, ..ModelShape::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn engines_agree_on_qualitative_formulas(seed in any::<u64>()) {
        let shape = ModelShape { guards: Guards::StateBased, ..ModelShape::default() };
        assert_agreement(seed, &shape, false)?;
    }

    #[test]
    fn engines_agree_with_utility_guards(seed in any::<u64>()) {
        let shape = ModelShape { guards: Guards::Utility, discounts: true, ..ModelShape::default() };
        assert_agreement(seed, &shape, true)?;
    }

    #[test]
    fn engines_agree_on_non_negative_models(seed in any::<u64>()) {
        assert_agreement(seed, &non_negative(), true)?;
    }

    #[test]
    fn bounded_verdicts_carry_replayable_evidence(seed in any::<u64>(), guards in 0usize..3) {
        let guards = [Guards::Open, Guards::StateBased, Guards::Utility][guards];
        let shape = ModelShape { guards, discounts: seed % 3 == 0, ..ModelShape::default() };
        let (m, f, sp, so) = instance(seed, &shape, true);
        let c0 = zero(&m);
        let v = check_bounded(&m, &c0, &f, sp, so, Budget::depth(8)).unwrap();
        if !matches!(f, StateFormula::Coop(..)) {
            return Ok(());
        }
        match v.verdict {
            Truth::True => {
                let w = v.witness.as_ref().expect("true verdicts carry a witness");
                prop_assert_eq!(w.class, sp);
                if let Some(ok) = replay(&m, &c0, &f, w) {
                    prop_assert!(ok, "witness fails for {}: {:?}", f, w);
                }
            }
            Truth::False => {
                let trace = v.counterexample.as_ref().expect("false verdicts carry a trace");
                prop_assert!(!trace.is_empty());
                prop_assert!(replay_trace(&m, &c0, trace));
            }
            Truth::Unknown => prop_assert!(v.witness.is_none() && v.counterexample.is_none()),
        }
    }

    #[test]
    fn eventually_is_true_until_for_every_engine(seed in any::<u64>()) {
        let shape = ModelShape { guards: Guards::StateBased, ..ModelShape::default() };
        let (m, f, sp, so) = instance(seed, &shape, true);
        let inner = f.to_string();
        let coalition = m.agents()[(seed % 2) as usize].clone();
        let eventually: Formula = parse_formula(&format!("<<{coalition}>> F ({inner})")).unwrap();
        let until: Formula = parse_formula(&format!("<<{coalition}>> (true U ({inner}))")).unwrap();
        prop_assert_eq!(&eventually, &until);
        prop_assert_eq!(verdicts(&m, &eventually, sp, so), verdicts(&m, &until, sp, so));
    }

    #[test]
    fn saturated_verdicts_survive_rescaling(seed in any::<u64>(), k in 2i64..=5) {
        let (m, f, _, _) = instance(seed, &non_negative(), true);
        let c0 = zero(&m);
        let Ok(v) = check_saturated(&m, &c0, &f) else { return Ok(()) };
        let (m2, f2) = scaled(&m, &f, k);
        prop_assert_eq!(check_saturated(&m2, &c0, &f2).unwrap().verdict, v.verdict);
    }
}
