//! Two-counter machines, a bounded halting search, and their encoding as
//! two-player guarded game models in which each player's utility is one of
//! the counters.

mod encode;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use encode::{encode, Encoding, Variant};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TcmError {
    #[error("invalid machine file: {0}")]
    Json(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("machine has no states")]
    NoStates,
    #[error("transition {index}: zero test {field} = {value} is not 0 or 1")]
    Test { index: usize, field: &'static str, value: i64 },
    #[error("transition {index}: counter update {field} = {value} is not -1, 0 or 1")]
    Update { index: usize, field: &'static str, value: i64 },
    #[error("transition {index} decrements counter {counter} when it is tested empty")]
    DecrementEmpty { index: usize, counter: usize },
}

/// One transition `((from, E1, E2), (to, C1, C2))`. `nonempty[i]` is `E_i = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub from: usize,
    pub nonempty: [bool; 2],
    pub to: usize,
    pub update: [i64; 2],
}

impl Rule {
    pub fn matches(&self, c: &TcmConfiguration) -> bool {
        self.from == c.state && self.nonempty == c.tests()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCounterMachine {
    states: Vec<String>,
    initial: usize,
    finals: BTreeSet<usize>,
    rules: Vec<Rule>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineFile {
    states: Vec<String>,
    initial: String,
    #[serde(default)]
    finals: Vec<String>,
    #[serde(default)]
    transitions: Vec<RuleEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    from: String,
    e1: i64,
    e2: i64,
    to: String,
    c1: i64,
    c2: i64,
}

impl TwoCounterMachine {
    /// Builds a machine, rejecting rules that decrement a counter tested
    /// empty. Duplicate rules are merged.
    pub fn new(
        states: Vec<String>,
        initial: usize,
        finals: BTreeSet<usize>,
        rules: Vec<Rule>,
    ) -> Result<Self, TcmError> {
        if states.is_empty() {
            return Err(TcmError::NoStates);
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s) {
                return Err(TcmError::DuplicateState(s.clone()));
            }
        }
        let n = states.len();
        let bad = |i: usize| TcmError::UnknownState(i.to_string());
        if initial >= n {
            return Err(bad(initial));
        }
        if let Some(&f) = finals.iter().find(|&&f| f >= n) {
            return Err(bad(f));
        }
        for (index, r) in rules.iter().enumerate() {
            if r.from >= n || r.to >= n {
                return Err(bad(r.from.max(r.to)));
            }
            for i in 0..2 {
                let field = ["c1", "c2"][i];
                if !(-1..=1).contains(&r.update[i]) {
                    return Err(TcmError::Update { index, field, value: r.update[i] });
                }
                if !r.nonempty[i] && r.update[i] == -1 {
                    return Err(TcmError::DecrementEmpty { index, counter: i + 1 });
                }
            }
        }
        let mut rules = rules;
        rules.sort();
        rules.dedup();
        Ok(TwoCounterMachine { states, initial, finals, rules })
    }

    pub fn from_json(text: &str) -> Result<Self, TcmError> {
        let file: MachineFile = serde_json::from_str(text).map_err(|e| TcmError::Json(e.to_string()))?;
        let index: HashMap<&str, usize> = file.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| TcmError::UnknownState(s.to_string()));
        let test = |index: usize, field: &'static str, value: i64| match value {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(TcmError::Test { index, field, value }),
        };
        let mut rules = Vec::new();
        for (i, t) in file.transitions.iter().enumerate() {
            rules.push(Rule {
                from: lookup(&t.from)?,
                nonempty: [test(i, "e1", t.e1)?, test(i, "e2", t.e2)?],
                to: lookup(&t.to)?,
                update: [t.c1, t.c2],
            });
        }
        let initial = lookup(&file.initial)?;
        let finals = file.finals.iter().map(|s| lookup(s)).collect::<Result<_, _>>()?;
        TwoCounterMachine::new(file.states.clone(), initial, finals, rules)
    }

    pub fn to_json(&self) -> String {
        let file = MachineFile {
            states: self.states.clone(),
            initial: self.states[self.initial].clone(),
            finals: self.finals.iter().map(|&f| self.states[f].clone()).collect(),
            transitions: self
                .rules
                .iter()
                .map(|r| RuleEntry {
                    from: self.states[r.from].clone(),
                    e1: r.nonempty[0] as i64,
                    e2: r.nonempty[1] as i64,
                    to: self.states[r.to].clone(),
                    c1: r.update[0],
                    c2: r.update[1],
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, state: usize) -> bool {
        self.finals.contains(&state)
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    /// Sorted and free of duplicates.
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> TcmConfiguration {
        TcmConfiguration { state: self.initial, counters: [0, 0] }
    }
}

/// `(s, w1, w2)`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TcmConfiguration {
    pub state: usize,
    pub counters: [u64; 2],
}

impl TcmConfiguration {
    /// Which counters are nonempty.
    pub fn tests(&self) -> [bool; 2] {
        [self.counters[0] > 0, self.counters[1] > 0]
    }

    pub fn display<'a>(&'a self, m: &'a TwoCounterMachine) -> impl fmt::Display + 'a {
        struct D<'a>(&'a TcmConfiguration, &'a TwoCounterMachine);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let c = self.0;
                write!(f, "({}, {}, {})", self.1.states[c.state], c.counters[0], c.counters[1])
            }
        }
        D(self, m)
    }
}

fn apply(c: &TcmConfiguration, r: &Rule) -> TcmConfiguration {
    let bump = |w: u64, d: i64| w.checked_add_signed(d).expect("matched rules never decrement an empty counter");
    TcmConfiguration { state: r.to, counters: [bump(c.counters[0], r.update[0]), bump(c.counters[1], r.update[1])] }
}

/// Successors of `c` in sorted order; empty when the machine is stuck.
pub fn tcm_step(m: &TwoCounterMachine, c: &TcmConfiguration) -> Vec<TcmConfiguration> {
    let mut out: Vec<_> = m.rules.iter().filter(|r| r.matches(c)).map(|r| apply(c, r)).collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Halting {
    /// A shortest run from the start to a final state, least in
    /// lexicographic order among the shortest.
    Halts(Vec<TcmConfiguration>),
    /// No final state within the budget. `exhausted` means every reachable
    /// configuration was visited, so the machine never halts.
    NoWithinBudget { exhausted: bool },
}

impl Halting {
    /// Number of machine steps of a halting run.
    pub fn steps(&self) -> Option<usize> {
        match self {
            Halting::Halts(run) => Some(run.len() - 1),
            Halting::NoWithinBudget { .. } => None,
        }
    }

    pub fn never_halts(&self) -> bool {
        matches!(self, Halting::NoWithinBudget { exhausted: true })
    }
}

/// Breadth-first search for a final state within `budget` machine steps.
pub fn halting_search(m: &TwoCounterMachine, budget: usize) -> Halting {
    let start = m.start();
    let mut parent: HashMap<TcmConfiguration, Option<TcmConfiguration>> = HashMap::from([(start, None)]);
    let run_to = |end: TcmConfiguration, parent: &HashMap<_, Option<_>>| {
        let mut run = vec![end];
        while let Some(Some(p)) = parent.get(run.last().unwrap()) {
            run.push(*p);
        }
        run.reverse();
        Halting::Halts(run)
    };
    if m.is_final(start.state) {
        return run_to(start, &parent);
    }
    // Frontiers are kept in discovery order, which is the lexicographic
    // order of the runs leading to them.
    let mut frontier = vec![start];
    for _ in 0..budget {
        let mut next = Vec::new();
        for c in &frontier {
            for d in tcm_step(m, c) {
                if parent.contains_key(&d) {
                    continue;
                }
                parent.insert(d, Some(*c));
                if m.is_final(d.state) {
                    return run_to(d, &parent);
                }
                next.push(d);
            }
        }
        if next.is_empty() {
            return Halting::NoWithinBudget { exhausted: true };
        }
        frontier = next;
    }
    Halting::NoWithinBudget { exhausted: false }
}

/// Every rule over states `q0, q1, halt` (initial `q0`, final `halt`) that
/// changes at most one counter by one.
pub fn single_counter_rules() -> Vec<Rule> {
    let updates = [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1]];
    let mut out = Vec::new();
    for from in 0..2 {
        for nonempty in [[false, false], [false, true], [true, false], [true, true]] {
            for to in 0..3 {
                for update in updates {
                    if (0..2).all(|i| nonempty[i] || update[i] != -1) {
                        out.push(Rule { from, nonempty, to, update });
                    }
                }
            }
        }
    }
    out
}

/// All machines on states `q0, q1, halt` whose rules are at most
/// `max_rules` distinct entries of [`single_counter_rules`], in a fixed order.
pub fn small_machines(max_rules: usize) -> impl Iterator<Item = TwoCounterMachine> {
    fn subsets(n: usize, k: usize, from: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(acc.clone());
        if acc.len() == k {
            return;
        }
        for i in from..n {
            acc.push(i);
            subsets(n, k, i + 1, acc, out);
            acc.pop();
        }
    }
    let alphabet = single_counter_rules();
    let mut picks = Vec::new();
    subsets(alphabet.len(), max_rules, 0, &mut Vec::new(), &mut picks);
    let states: Vec<String> = ["q0", "q1", "halt"].map(String::from).to_vec();
    picks.into_iter().map(move |pick| {
        let rules = pick.iter().map(|&i| alphabet[i]).collect();
        TwoCounterMachine::new(states.clone(), 0, BTreeSet::from([2]), rules).expect("valid rules")
    })
}
