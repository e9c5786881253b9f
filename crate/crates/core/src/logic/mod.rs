//! Formulas of the strategic logic with utility constraints: abstract syntax,
//! concrete syntax, fragment classification and strategy classes.

mod parse;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{AtomicConstraint, PathConstraint};
use crate::model::Gcgmp;
use crate::scalar::Scalar;

pub use parse::{parse_formula, parse_path_formula};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateFormula<S> {
    True,
    Atom(String),
    Constraint(AtomicConstraint<S>),
    Not(Box<StateFormula<S>>),
    And(Box<StateFormula<S>>, Box<StateFormula<S>>),
    Or(Box<StateFormula<S>>, Box<StateFormula<S>>),
    /// `<<A>> body`: the coalition, in the order written, and its objective.
    Coop(Vec<String>, Box<PathFormula<S>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathFormula<S> {
    State(StateFormula<S>),
    Apc(PathConstraint<S>),
    Not(Box<PathFormula<S>>),
    And(Box<PathFormula<S>>, Box<PathFormula<S>>),
    Or(Box<PathFormula<S>>, Box<PathFormula<S>>),
    Next(Box<PathFormula<S>>),
    Always(Box<PathFormula<S>>),
    Until(Box<PathFormula<S>>, Box<PathFormula<S>>),
}

impl<S: Scalar> StateFormula<S> {
    pub fn atom(p: impl Into<String>) -> Self {
        StateFormula::Atom(p.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        StateFormula::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        StateFormula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Self) -> Self {
        StateFormula::Or(Box::new(self), Box::new(other))
    }

    pub fn coop<T: Into<String>>(agents: impl IntoIterator<Item = T>, body: PathFormula<S>) -> Self {
        StateFormula::Coop(agents.into_iter().map(Into::into).collect(), Box::new(body))
    }

    /// Conjunction of all formulas; `true` when empty.
    pub fn all(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().reduce(|a, b| a.and(b)).unwrap_or(StateFormula::True)
    }

    /// Lifts to a path formula.
    pub fn path(self) -> PathFormula<S> {
        PathFormula::State(self)
    }

    /// Every atomic constraint, in order of first occurrence.
    pub fn constraint_atoms(&self) -> Vec<AtomicConstraint<S>> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let Node::State(StateFormula::Constraint(a)) = n {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        });
        out
    }

    pub fn path_constraints(&self) -> Vec<PathConstraint<S>> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let Node::Path(PathFormula::Apc(a)) = n {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(Node<'a, S>)) {
        f(Node::State(self));
        match self {
            StateFormula::True | StateFormula::Atom(_) | StateFormula::Constraint(_) => {}
            StateFormula::Not(x) => x.walk(f),
            StateFormula::And(a, b) | StateFormula::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            StateFormula::Coop(_, body) => body.walk(f),
        }
    }

    /// The least fragment containing the formula.
    pub fn classify(&self) -> Fragment {
        let mut tag = Fragment::AtlPure;
        self.walk(&mut |n| {
            let here = match n {
                Node::State(StateFormula::Constraint(_)) => Fragment::Ngl,
                Node::State(StateFormula::Coop(_, body)) => match body.as_ref() {
                    PathFormula::Next(x) | PathFormula::Always(x) if matches!(x.as_ref(), PathFormula::State(_)) => {
                        Fragment::AtlPure
                    }
                    PathFormula::Until(a, b)
                        if matches!(a.as_ref(), PathFormula::State(_))
                            && matches!(b.as_ref(), PathFormula::State(_)) =>
                    {
                        Fragment::AtlPure
                    }
                    _ => Fragment::NglStar,
                },
                Node::Path(PathFormula::Apc(_)) => Fragment::NglStar,
                _ => Fragment::AtlPure,
            };
            tag = tag.max(here);
        });
        tag
    }

    /// Checks that every agent named in a coalition, utility variable or path
    /// constraint exists in the model.
    pub fn bind<M: Scalar>(&self, m: &Gcgmp<M>) -> Result<(), BindError> {
        let mut err = None;
        let known = |a: &str| m.agent_index(a).is_some();
        self.walk(&mut |n| {
            if err.is_some() {
                return;
            }
            let names: Vec<String> = match n {
                Node::State(StateFormula::Coop(agents, _)) => agents.clone(),
                Node::State(StateFormula::Constraint(a)) => a.vars().into_iter().collect(),
                Node::Path(PathFormula::Apc(p)) => vec![p.agent.clone()],
                _ => vec![],
            };
            if let Some(bad) = names.into_iter().find(|a| !known(a)) {
                err = Some(BindError::UnknownAgent(bad));
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Applies `f` to every constant in constraints and path constraints.
    pub fn map_constants(&self, f: &impl Fn(&S) -> S) -> Self {
        match self {
            StateFormula::True => StateFormula::True,
            StateFormula::Atom(p) => StateFormula::Atom(p.clone()),
            StateFormula::Constraint(a) => StateFormula::Constraint(a.map_constants(f)),
            StateFormula::Not(x) => x.map_constants(f).not(),
            StateFormula::And(a, b) => a.map_constants(f).and(b.map_constants(f)),
            StateFormula::Or(a, b) => a.map_constants(f).or(b.map_constants(f)),
            StateFormula::Coop(ag, body) => StateFormula::Coop(ag.clone(), Box::new(body.map_constants(f))),
        }
    }
}

impl<S: Scalar> PathFormula<S> {
    /// Negation; stays a state formula when applied to one.
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        match self {
            PathFormula::State(s) => PathFormula::State(s.not()),
            p => PathFormula::Not(Box::new(p)),
        }
    }

    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (PathFormula::State(a), PathFormula::State(b)) => PathFormula::State(a.and(b)),
            (a, b) => PathFormula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (PathFormula::State(a), PathFormula::State(b)) => PathFormula::State(a.or(b)),
            (a, b) => PathFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn next(self) -> Self {
        PathFormula::Next(Box::new(self))
    }

    pub fn always(self) -> Self {
        PathFormula::Always(Box::new(self))
    }

    pub fn until(self, other: Self) -> Self {
        PathFormula::Until(Box::new(self), Box::new(other))
    }

    /// `F x`, i.e. `true U x`.
    pub fn eventually(self) -> Self {
        PathFormula::State(StateFormula::True).until(self)
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(Node<'a, S>)) {
        f(Node::Path(self));
        match self {
            PathFormula::State(s) => s.walk(f),
            PathFormula::Apc(_) => {}
            PathFormula::Not(x) | PathFormula::Next(x) | PathFormula::Always(x) => x.walk(f),
            PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Until(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    pub fn map_constants(&self, f: &impl Fn(&S) -> S) -> Self {
        match self {
            PathFormula::State(s) => PathFormula::State(s.map_constants(f)),
            PathFormula::Apc(p) => {
                PathFormula::Apc(PathConstraint { agent: p.agent.clone(), rel: p.rel, bound: f(&p.bound) })
            }
            PathFormula::Not(x) => PathFormula::Not(Box::new(x.map_constants(f))),
            PathFormula::And(a, b) => PathFormula::And(Box::new(a.map_constants(f)), Box::new(b.map_constants(f))),
            PathFormula::Or(a, b) => PathFormula::Or(Box::new(a.map_constants(f)), Box::new(b.map_constants(f))),
            PathFormula::Next(x) => x.map_constants(f).next(),
            PathFormula::Always(x) => x.map_constants(f).always(),
            PathFormula::Until(a, b) => a.map_constants(f).until(b.map_constants(f)),
        }
    }
}

enum Node<'a, S> {
    State(&'a StateFormula<S>),
    Path(&'a PathFormula<S>),
}

/// Syntactic fragments, ordered by inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Fragment {
    /// No utility constraints, no path constraints, and every coalition
    /// objective is `X`, `G` or `U` over state formulas.
    #[serde(rename = "ATL")]
    AtlPure,
    /// As above, but utility constraints are allowed.
    #[serde(rename = "NGL")]
    Ngl,
    #[serde(rename = "NGL*")]
    NglStar,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fragment::AtlPure => "ATL",
            Fragment::Ngl => "NGL",
            Fragment::NglStar => "NGL*",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BindError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
}

// Printing. Levels: 0 until, 1 or, 2 and, 3 right operand of and, 4 operand
// of a unary operator.

fn open(f: &mut fmt::Formatter<'_>, cond: bool) -> fmt::Result {
    if cond {
        f.write_str("(")?;
    }
    Ok(())
}

fn close(f: &mut fmt::Formatter<'_>, cond: bool) -> fmt::Result {
    if cond {
        f.write_str(")")?;
    }
    Ok(())
}

fn fmt_coalition(f: &mut fmt::Formatter<'_>, agents: &[String]) -> fmt::Result {
    write!(f, "<<{}>>", agents.join(","))
}

impl<S: Scalar> StateFormula<S> {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            StateFormula::True => f.write_str("true"),
            StateFormula::Atom(p) => f.write_str(p),
            StateFormula::Constraint(a) => {
                open(f, prec >= 4)?;
                write!(f, "{a}")?;
                close(f, prec >= 4)
            }
            StateFormula::Not(x) => {
                f.write_str("!")?;
                x.fmt_prec(f, 4)
            }
            StateFormula::And(a, b) => {
                open(f, prec > 2)?;
                a.fmt_prec(f, 2)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 3)?;
                close(f, prec > 2)
            }
            StateFormula::Or(a, b) => {
                open(f, prec > 1)?;
                a.fmt_prec(f, 1)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 2)?;
                close(f, prec > 1)
            }
            StateFormula::Coop(agents, body) => {
                fmt_coalition(f, agents)?;
                f.write_str(" ")?;
                body.fmt_prec(f, 4)
            }
        }
    }
}

impl<S: Scalar> PathFormula<S> {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            PathFormula::State(s) => s.fmt_prec(f, prec),
            PathFormula::Apc(p) => {
                open(f, prec >= 4)?;
                write!(f, "{p}")?;
                close(f, prec >= 4)
            }
            PathFormula::Not(x) => {
                f.write_str("!")?;
                x.fmt_prec(f, 4)
            }
            PathFormula::And(a, b) => {
                open(f, prec > 2)?;
                a.fmt_prec(f, 2)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 3)?;
                close(f, prec > 2)
            }
            PathFormula::Or(a, b) => {
                open(f, prec > 1)?;
                a.fmt_prec(f, 1)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 2)?;
                close(f, prec > 1)
            }
            PathFormula::Next(x) => {
                f.write_str("X ")?;
                x.fmt_prec(f, 4)
            }
            PathFormula::Always(x) => {
                f.write_str("G ")?;
                x.fmt_prec(f, 4)
            }
            PathFormula::Until(a, b) if matches!(a.as_ref(), PathFormula::State(StateFormula::True)) => {
                f.write_str("F ")?;
                b.fmt_prec(f, 4)
            }
            PathFormula::Until(a, b) => {
                open(f, prec > 0)?;
                a.fmt_prec(f, 1)?;
                f.write_str(" U ")?;
                b.fmt_prec(f, 0)?;
                close(f, prec > 0)
            }
        }
    }
}

impl<S: Scalar> fmt::Display for StateFormula<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl<S: Scalar> fmt::Display for PathFormula<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// How much of the past a strategy may consult.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Memory {
    #[serde(rename = "memoryless")]
    Memoryless,
    #[serde(rename = "perfect-recall")]
    PerfectRecall,
}

/// What a strategy observes at each position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observation {
    /// Only the current state (or the sequence of states).
    #[serde(rename = "state")]
    StateBased,
    /// The state together with the accumulated utilities.
    #[serde(rename = "configuration")]
    ConfigurationBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StrategyClass {
    pub memory: Memory,
    pub observation: Observation,
}

impl StrategyClass {
    pub const ALL: [StrategyClass; 4] = [
        StrategyClass::new(Memory::Memoryless, Observation::StateBased),
        StrategyClass::new(Memory::Memoryless, Observation::ConfigurationBased),
        StrategyClass::new(Memory::PerfectRecall, Observation::StateBased),
        StrategyClass::new(Memory::PerfectRecall, Observation::ConfigurationBased),
    ];

    pub const fn new(memory: Memory, observation: Observation) -> Self {
        StrategyClass { memory, observation }
    }

    pub fn is_memoryless(&self) -> bool {
        self.memory == Memory::Memoryless
    }

    pub fn is_state_based(&self) -> bool {
        self.observation == Observation::StateBased
    }
}

impl Default for StrategyClass {
    fn default() -> Self {
        StrategyClass::new(Memory::Memoryless, Observation::ConfigurationBased)
    }
}

impl fmt::Display for StrategyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.memory {
            Memory::Memoryless => "memoryless",
            Memory::PerfectRecall => "perfect-recall",
        };
        let o = match self.observation {
            Observation::StateBased => "state",
            Observation::ConfigurationBased => "configuration",
        };
        write!(f, "{m}/{o}")
    }
}

impl FromStr for StrategyClass {
    type Err = String;

    /// Accepts `memoryless/state`, `perfect-recall/configuration` and the
    /// short forms `m/s`, `pr/c`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, o) = s.split_once('/').ok_or_else(|| format!("expected MEMORY/OBSERVATION, got `{s}`"))?;
        let memory = match m {
            "memoryless" | "m" => Memory::Memoryless,
            "perfect-recall" | "pr" => Memory::PerfectRecall,
            _ => return Err(format!("unknown memory `{m}`")),
        };
        let observation = match o {
            "state" | "s" => Observation::StateBased,
            "configuration" | "config" | "c" => Observation::ConfigurationBased,
            _ => return Err(format!("unknown observation `{o}`")),
        };
        Ok(StrategyClass::new(memory, observation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Payoff;

    fn f(text: &str) -> StateFormula<Payoff> {
        parse_formula(text).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(f("<<1>> F halt").classify(), Fragment::AtlPure);
        assert_eq!(f("<<1>> ((v_1 >= 0 & v_2 >= 0 & !(e1 & !(v_1 = 0))) U halt)").classify(), Fragment::Ngl);
        assert_eq!(f("<<I,II>> F (p3 & G (p3 & v_I + v_II > 0))").classify(), Fragment::NglStar);
        assert_eq!(f("<<a>> (w_a >= 3)").classify(), Fragment::NglStar);
        assert_eq!(f("<<a>> p").classify(), Fragment::NglStar);
        assert_eq!(f("p & v_a > 0").classify(), Fragment::Ngl);
    }

    #[test]
    fn collects_constraint_atoms() {
        let g = f("<<I,II>> F (p1 & v_I > 100 & v_II > 100) & <<I>> G (v_I = 0 | v_II > 100)");
        let atoms: Vec<String> = g.constraint_atoms().iter().map(|a| a.to_string()).collect();
        assert_eq!(atoms, ["v_I > 100", "v_II > 100", "v_I = 0"]);
        assert!(f("<<a>> X p").constraint_atoms().is_empty());
    }

    #[test]
    fn binding_reports_unknown_agents() {
        let m = crate::model::builtin_fig1();
        assert_eq!(f("<<I>> G (p1 | v_I > 0)").bind(&m), Ok(()));
        assert_eq!(f("<<III>> X p1").bind(&m), Err(BindError::UnknownAgent("III".into())));
        assert_eq!(f("<<>> X (v_Z > 0)").bind(&m), Err(BindError::UnknownAgent("Z".into())));
    }

    #[test]
    fn strategy_class_syntax() {
        for c in StrategyClass::ALL {
            assert_eq!(c.to_string().parse::<StrategyClass>(), Ok(c));
        }
        assert_eq!(
            "pr/s".parse::<StrategyClass>(),
            Ok(StrategyClass::new(Memory::PerfectRecall, Observation::StateBased))
        );
        assert!("x/y".parse::<StrategyClass>().is_err());
    }
}
