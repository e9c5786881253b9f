//! Small random models, formulas and strategy classes for differential
//! testing of the checkers.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::arith::{Acf, AtomicConstraint, Rel, Term};
use crate::logic::{PathFormula, StateFormula, StrategyClass};
use crate::model::{cartesian, Gcgmp};
use crate::scalar::Scalar;

/// Which guards a random model gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guards {
    /// Every action is always enabled.
    Open,
    /// Constant guards; at least one action per agent and state stays enabled.
    StateBased,
    /// Threshold guards on the agent's own utility, paired so that some
    /// action is enabled at every utility value.
    Utility,
}

/// Parameters of [`model`].
#[derive(Debug, Clone)]
pub struct ModelShape {
    pub max_states: usize,
    pub agents: usize,
    pub max_actions: usize,
    /// Inclusive payoff range.
    pub payoffs: (i64, i64),
    pub guards: Guards,
    /// Draw discounts from {1/2, 1} instead of always 1.
    pub discounts: bool,
    /// Atomic propositions, each placed on a random subset of states.
    pub labels: Vec<String>,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            max_states: 3,
            agents: 2,
            max_actions: 2,
            payoffs: (-2, 2),
            guards: Guards::Open,
            discounts: false,
            labels: vec!["p".into(), "q".into()],
        }
    }
}

fn threshold<S: Scalar>(agent: &str, rel: Rel, k: i64) -> Acf<S> {
    Acf::atom(Term::var(agent), rel, Term::constant(S::from_int(k)))
}

/// A random model whose transitions are total and whose guards always leave
/// an action enabled, so it passes validation.
pub fn model<S: Scalar>(rng: &mut impl Rng, shape: &ModelShape) -> Gcgmp<S> {
    let n = rng.gen_range(1..=shape.max_states);
    let agents: Vec<String> = (0..shape.agents).map(|i| format!("a{i}")).collect();
    let actions: Vec<Vec<String>> =
        agents.iter().map(|_| (0..rng.gen_range(1..=shape.max_actions)).map(|x| format!("x{x}")).collect()).collect();
    let states = (0..n).map(|i| format!("s{i}")).collect();
    let mut m = Gcgmp::new(agents.clone(), states, actions.clone()).expect("distinct names");
    for s in 0..n {
        for p in cartesian(&actions.iter().map(|a| (0..a.len()).collect()).collect::<Vec<_>>()) {
            m.set_transition(s, &p, rng.gen_range(0..n));
            let pay =
                (0..shape.agents).map(|_| S::from_int(rng.gen_range(shape.payoffs.0..=shape.payoffs.1))).collect();
            m.set_payoff(s, &p, pay);
        }
        let labels: Vec<String> = shape.labels.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        m.set_labels(s, labels);
        for (a, name) in agents.iter().enumerate() {
            let k = actions[a].len();
            match shape.guards {
                Guards::Open => {}
                Guards::StateBased => {
                    let keep = rng.gen_range(0..k);
                    for x in 0..k {
                        m.set_guard(a, s, x, Acf::Const(x == keep || rng.gen_bool(0.5)));
                    }
                }
                Guards::Utility if k > 1 => {
                    let t = rng.gen_range(-2..=2);
                    let rel = *[Rel::Ge, Rel::Gt, Rel::Le, Rel::Lt, Rel::Eq].choose(rng).expect("nonempty");
                    let g = threshold::<S>(name, rel, t);
                    let other = if rng.gen_bool(0.5) {
                        g.clone().not()
                    } else {
                        g.clone().not().or(threshold(name, rel.flipped(), rng.gen_range(-2..=2)))
                    };
                    m.set_guard(a, s, 0, g);
                    m.set_guard(a, s, 1, other);
                }
                Guards::Utility => {}
            }
        }
    }
    if shape.discounts {
        let half = S::one() / S::from_int(2);
        for a in 0..shape.agents {
            if rng.gen_bool(0.5) {
                m.set_discount(a, half.clone());
            }
        }
    }
    m
}

/// Parameters of [`formula`].
#[derive(Debug, Clone)]
pub struct FormulaShape {
    /// Nesting depth of coalition operators.
    pub depth: usize,
    pub agents: Vec<String>,
    pub labels: Vec<String>,
    /// Allow utility constraints `v_a ~ k`.
    pub constraints: bool,
    /// Inclusive range of constraint constants.
    pub constants: (i64, i64),
    /// Relations constraints may use.
    pub relations: Vec<Rel>,
}

impl FormulaShape {
    pub fn new(agents: &[String], labels: &[String], depth: usize, constraints: bool) -> Self {
        FormulaShape {
            depth,
            agents: agents.to_vec(),
            labels: labels.to_vec(),
            constraints,
            constants: (-2, 4),
            relations: vec![Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt],
        }
    }
}

fn leaf<S: Scalar>(rng: &mut impl Rng, shape: &FormulaShape) -> StateFormula<S> {
    let roll = rng.gen_range(0..10);
    if shape.constraints && roll < 4 {
        let a = shape.agents.choose(rng).expect("agents");
        let rel = *shape.relations.choose(rng).expect("relations");
        let k = rng.gen_range(shape.constants.0..=shape.constants.1);
        let lhs = if rng.gen_bool(0.2) && shape.agents.len() > 1 {
            let b = shape.agents.choose(rng).expect("agents");
            Term::var(a.as_str()).plus(Term::var(b.as_str()))
        } else {
            Term::var(a.as_str())
        };
        return StateFormula::Constraint(AtomicConstraint::new(lhs, rel, Term::constant(S::from_int(k))));
    }
    match shape.labels.choose(rng) {
        Some(p) if roll < 9 => StateFormula::atom(p.as_str()),
        _ => StateFormula::True,
    }
}

/// A random state formula of coalition depth at most `shape.depth` whose
/// coalition objectives are `X`, `G` or `U` over state formulas.
pub fn formula<S: Scalar>(rng: &mut impl Rng, shape: &FormulaShape) -> StateFormula<S> {
    fn go<S: Scalar>(rng: &mut impl Rng, shape: &FormulaShape, depth: usize, top: bool) -> StateFormula<S> {
        if depth == 0 || (!top && rng.gen_bool(0.4)) {
            let f = leaf(rng, shape);
            return if rng.gen_bool(0.2) { f.not() } else { f };
        }
        let mut coalition: Vec<String> = shape.agents.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        coalition.sort();
        let sub = |rng: &mut _| PathFormula::State(go(rng, shape, depth - 1, false));
        let body = match rng.gen_range(0..3) {
            0 => PathFormula::Next(Box::new(sub(rng))),
            1 => PathFormula::Always(Box::new(sub(rng))),
            _ => PathFormula::Until(Box::new(sub(rng)), Box::new(sub(rng))),
        };
        let f = StateFormula::Coop(coalition, Box::new(body));
        match rng.gen_range(0..6) {
            0 => f.not(),
            1 if !top => f.and(go(rng, shape, depth - 1, false)),
            2 if !top => f.or(go(rng, shape, depth - 1, false)),
            _ => f,
        }
    }
    go(rng, shape, shape.depth, true)
}

pub fn class(rng: &mut impl Rng) -> StrategyClass {
    *StrategyClass::ALL.choose(rng).expect("four classes")
}
