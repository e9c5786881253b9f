//! A machine step `((s,E1,E2),(s',C1,C2))` becomes two model steps: at `s`
//! the zero tests are selected, which moves to the test state `s.E1E2`;
//! there player 1 picks one of the matching rules, paying `(C1, C2)`.
//! Selections no rule matches lead to an absorbing `error` state. Final
//! states are absorbing.

use std::collections::BTreeSet;

use super::{Rule, TwoCounterMachine};
use crate::arith::{Acf, Rel, Term};
use crate::dynamics::Configuration;
use crate::logic::{parse_formula, StateFormula};
use crate::model::{Gcgmp, Profile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Each player selects the test of its own counter, guarded by that
    /// counter; the formula is `<<1>> F halt`.
    GuardBased,
    /// Guards are all `true`. Player 1 selects both tests and the formula
    /// rejects plays where a test state disagrees with the counters.
    StateBasedGuards,
}

pub struct Encoding<S> {
    pub model: Gcgmp<S>,
    pub initial: Configuration<S>,
    pub formula: StateFormula<S>,
    /// Model state of each machine state.
    pub machine_states: Vec<usize>,
    pub sink: usize,
    variant: Variant,
    /// `tests[s][2*E1+E2]`: the test state and the rules it offers.
    tests: Vec<TestStates>,
}

type TestStates = [Option<(usize, Vec<Rule>)>; 4];

const BITS: [[bool; 2]; 4] = [[false, false], [false, true], [true, false], [true, true]];

fn bit(b: bool) -> u8 {
    b as u8
}

fn fresh(name: String, taken: &mut BTreeSet<String>) -> String {
    let mut name = name;
    while taken.contains(&name) {
        name.push('_');
    }
    taken.insert(name.clone());
    name
}

fn is_zero<S: Scalar>(agent: &str) -> Acf<S> {
    Acf::atom(Term::var(agent), Rel::Eq, Term::constant(S::zero()))
}

pub fn encode<S: Scalar>(m: &TwoCounterMachine, variant: Variant) -> Encoding<S> {
    let mut names: Vec<String> = m.states().to_vec();
    let mut taken: BTreeSet<String> = names.iter().cloned().collect();
    let mut tests = Vec::new();
    for s in 0..m.states().len() {
        let mut row: [Option<(usize, Vec<Rule>)>; 4] = Default::default();
        if !m.is_final(s) {
            for (k, e) in BITS.iter().enumerate() {
                let rules: Vec<Rule> = m.rules().iter().filter(|r| r.from == s && r.nonempty == *e).copied().collect();
                if !rules.is_empty() {
                    names.push(fresh(format!("{}.{}{}", m.states()[s], bit(e[0]), bit(e[1])), &mut taken));
                    row[k] = Some((names.len() - 1, rules));
                }
            }
        }
        tests.push(row);
    }
    names.push(fresh("error".into(), &mut taken));
    let sink = names.len() - 1;
    let width = rules_width(&tests);
    let takes = (0..width).map(|j| format!("take{j}"));
    let owned = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let (one, two) = match variant {
        Variant::GuardBased => (owned(&["zero", "pos"]), owned(&["zero", "pos", "wait"])),
        Variant::StateBasedGuards => (owned(&["e00", "e01", "e10", "e11"]), owned(&["wait"])),
    };
    let select = one.len();
    let take = |j: usize| select + j;
    let wait = select + width;
    let one: Vec<String> = one.into_iter().chain(takes).chain(["wait".to_string()]).collect();
    let two_wait = two.len() - 1;
    let agents = vec!["1".to_string(), "2".to_string()];
    let mut model = Gcgmp::new(agents.clone(), names, vec![one, two]).expect("distinct names");

    let idle = |model: &mut Gcgmp<S>, s: usize| {
        model.set_available(s, 0, vec![wait]);
        model.set_available(s, 1, vec![two_wait]);
        model.set_transition(s, &[wait, two_wait], s);
    };
    for s in 0..m.states().len() {
        if m.is_final(s) {
            idle(&mut model, s);
            model.set_labels(s, ["halt".to_string()]);
            continue;
        }
        match variant {
            Variant::GuardBased => {
                for (a, agent) in agents.iter().enumerate() {
                    model.set_available(s, a, vec![0, 1]);
                    model.set_guard(a, s, 0, is_zero(agent));
                    model.set_guard(a, s, 1, is_zero(agent).not());
                }
                for (k, e) in BITS.iter().enumerate() {
                    let to = tests[s][k].as_ref().map_or(sink, |t| t.0);
                    model.set_transition(s, &[bit(e[0]) as usize, bit(e[1]) as usize], to);
                }
            }
            Variant::StateBasedGuards => {
                model.set_available(s, 0, (0..4).collect());
                model.set_available(s, 1, vec![two_wait]);
                for (k, t) in tests[s].iter().enumerate() {
                    let to = t.as_ref().map_or(sink, |t| t.0);
                    model.set_transition(s, &[k, two_wait], to);
                }
            }
        }
        for (k, e) in BITS.iter().enumerate() {
            let Some((t, rules)) = &tests[s][k] else { continue };
            model.set_available(*t, 0, (0..rules.len()).map(take).collect());
            model.set_available(*t, 1, vec![two_wait]);
            for (j, r) in rules.iter().enumerate() {
                let p = [take(j), two_wait];
                model.set_transition(*t, &p, r.to);
                model.set_payoff(*t, &p, r.update.iter().map(|&c| S::from_int(c)).collect());
            }
            let labels = (0..2).map(|i| format!("{}{}", if e[i] { "n" } else { "e" }, i + 1));
            model.set_labels(*t, labels);
        }
    }
    idle(&mut model, sink);

    let formula = match variant {
        Variant::GuardBased => "<<1>> F halt",
        Variant::StateBasedGuards => {
            "<<1>> ((v_1 >= 0 & v_2 >= 0 & !(e1 & !(v_1 = 0)) & !(e2 & !(v_2 = 0)) \
             & !(n1 & v_1 < 1) & !(n2 & v_2 < 1)) U halt)"
        }
    };
    Encoding {
        initial: Configuration::zero(m.initial(), 2),
        formula: parse_formula(formula).expect("well-formed"),
        machine_states: (0..m.states().len()).collect(),
        sink,
        model,
        variant,
        tests,
    }
}

impl<S: Scalar> Encoding<S> {
    /// The two profiles that carry out `rule` from machine state
    /// `rule.from`, or `None` if the rule is not part of the machine.
    pub fn profiles_for(&self, rule: &Rule) -> Option<[Profile; 2]> {
        let k = 2 * bit(rule.nonempty[0]) as usize + bit(rule.nonempty[1]) as usize;
        let (_, rules) = self.tests.get(rule.from)?[k].as_ref()?;
        let j = rules.iter().position(|r| r == rule)?;
        let select = match self.variant {
            Variant::GuardBased => vec![bit(rule.nonempty[0]) as usize, bit(rule.nonempty[1]) as usize],
            Variant::StateBasedGuards => vec![k, 0],
        };
        let wait = self.model.actions(1).len() - 1;
        let offset = self.model.actions(0).len() - 1 - rules_width(&self.tests);
        Some([select, vec![offset + j, wait]])
    }

    /// The test state visited between the two halves of a machine step.
    pub fn test_state(&self, from: usize, nonempty: [bool; 2]) -> Option<usize> {
        let k = 2 * bit(nonempty[0]) as usize + bit(nonempty[1]) as usize;
        self.tests.get(from)?[k].as_ref().map(|t| t.0)
    }
}

fn rules_width(tests: &[TestStates]) -> usize {
    tests.iter().flatten().flatten().map(|(_, r)| r.len()).max().unwrap_or(0)
}
