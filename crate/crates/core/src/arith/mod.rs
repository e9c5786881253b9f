//! Terms, arithmetic constraints and path constraints over agent utility
//! variables.
//!
//! A utility variable `v_a` stands for the accumulated payoff of agent `a` at
//! the current configuration; a path variable `w_a` stands for the value of a
//! whole play for `a`. Terms are sums of utility variables and constants,
//! constraints compare two terms, and constraint formulas are Boolean
//! combinations of constraints.

mod eval;
mod parse;
mod validity;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::ParseError;
use crate::scalar::Scalar;

pub use eval::{eval_acf, eval_acf_by, eval_atom, eval_atom_by, eval_term, eval_term_by, saturating_eval, Sat};
pub use parse::{parse_acf, parse_apc, parse_term};
pub(crate) use parse::{parse_apc_rest, parse_atom_at, starts_term};
pub use validity::{check_validity_single_var, Validity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("variable v_{0} is not bound by the valuation")]
    UnboundVariable(String),
    #[error("formula mentions more than one variable: {}", .0.join(", "))]
    MultiVariable(Vec<String>),
    #[error("saturation cap must be positive")]
    NonPositiveCap,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Comparison relation of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Rel {
    pub const ALL: [Rel; 5] = [Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt];

    pub fn holds<T: Ord + ?Sized>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }

    /// The relation obtained by swapping both sides.
    pub fn flipped(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Eq => Rel::Eq,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The utility variable `v_a` of an agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UtilityVar {
    pub agent: String,
}

impl UtilityVar {
    pub fn new(agent: impl Into<String>) -> Self {
        UtilityVar { agent: agent.into() }
    }
}

impl fmt::Display for UtilityVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v_{}", self.agent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Summand<S> {
    Var(UtilityVar),
    Const(S),
}

/// A nonempty sum of utility variables and constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term<S> {
    summands: Vec<Summand<S>>,
}

impl<S: Scalar> Term<S> {
    /// Builds a term from its summands. Returns `None` if `summands` is empty.
    pub fn new(summands: Vec<Summand<S>>) -> Option<Self> {
        if summands.is_empty() {
            None
        } else {
            Some(Term { summands })
        }
    }

    pub fn var(agent: impl Into<String>) -> Self {
        Term { summands: vec![Summand::Var(UtilityVar::new(agent))] }
    }

    pub fn constant(value: S) -> Self {
        Term { summands: vec![Summand::Const(value)] }
    }

    pub fn plus(mut self, other: Term<S>) -> Self {
        self.summands.extend(other.summands);
        self
    }

    pub fn summands(&self) -> &[Summand<S>] {
        &self.summands
    }

    pub fn vars(&self) -> impl Iterator<Item = &UtilityVar> {
        self.summands.iter().filter_map(|s| match s {
            Summand::Var(v) => Some(v),
            Summand::Const(_) => None,
        })
    }

    pub fn has_vars(&self) -> bool {
        self.vars().next().is_some()
    }

    /// Sum of the constant summands.
    pub fn constant_part(&self) -> S {
        self.summands
            .iter()
            .filter_map(|s| match s {
                Summand::Const(c) => Some(c.clone()),
                Summand::Var(_) => None,
            })
            .fold(S::zero(), |a, b| a + b)
    }

    pub fn map_constants(&self, f: &impl Fn(&S) -> S) -> Term<S> {
        Term {
            summands: self
                .summands
                .iter()
                .map(|s| match s {
                    Summand::Var(v) => Summand::Var(v.clone()),
                    Summand::Const(c) => Summand::Const(f(c)),
                })
                .collect(),
        }
    }
}

impl<S: Scalar> fmt::Display for Term<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.summands.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match s {
                Summand::Var(v) => write!(f, "{v}")?,
                Summand::Const(c) => write!(f, "{c}")?,
            }
        }
        Ok(())
    }
}

/// `lhs rel rhs` over two terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicConstraint<S> {
    pub lhs: Term<S>,
    pub rel: Rel,
    pub rhs: Term<S>,
}

/// An atomic constraint rewritten as `sum(coeff * v) rel constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedAtom<S> {
    /// Net coefficient per agent; zero coefficients are dropped.
    pub coeffs: BTreeMap<String, i64>,
    pub rel: Rel,
    pub constant: S,
}

impl<S: Scalar> AtomicConstraint<S> {
    pub fn new(lhs: Term<S>, rel: Rel, rhs: Term<S>) -> Self {
        AtomicConstraint { lhs, rel, rhs }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.lhs.vars().chain(self.rhs.vars()).map(|v| v.agent.clone()).collect()
    }

    /// Returns `true` when both sides mention utility variables.
    pub fn is_var_vs_var(&self) -> bool {
        self.lhs.has_vars() && self.rhs.has_vars()
    }

    pub fn normalize(&self) -> NormalizedAtom<S> {
        let mut coeffs: BTreeMap<String, i64> = BTreeMap::new();
        for v in self.lhs.vars() {
            *coeffs.entry(v.agent.clone()).or_default() += 1;
        }
        for v in self.rhs.vars() {
            *coeffs.entry(v.agent.clone()).or_default() -= 1;
        }
        coeffs.retain(|_, c| *c != 0);
        NormalizedAtom { coeffs, rel: self.rel, constant: self.rhs.constant_part() - self.lhs.constant_part() }
    }

    pub fn map_constants(&self, f: &impl Fn(&S) -> S) -> Self {
        AtomicConstraint { lhs: self.lhs.map_constants(f), rel: self.rel, rhs: self.rhs.map_constants(f) }
    }
}

impl<S: Scalar> fmt::Display for AtomicConstraint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel, self.rhs)
    }
}

/// Boolean combination of atomic constraints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Acf<S> {
    Const(bool),
    Atom(AtomicConstraint<S>),
    Not(Box<Acf<S>>),
    And(Box<Acf<S>>, Box<Acf<S>>),
    /// Stored for readability; evaluated as `!(!a & !b)`.
    Or(Box<Acf<S>>, Box<Acf<S>>),
}

impl<S: Scalar> Acf<S> {
    pub fn atom(lhs: Term<S>, rel: Rel, rhs: Term<S>) -> Self {
        Acf::Atom(AtomicConstraint::new(lhs, rel, rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Acf::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        Acf::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Self) -> Self {
        Acf::Or(Box::new(self), Box::new(other))
    }

    /// Disjunction of all formulas; `false` when empty.
    pub fn any(items: impl IntoIterator<Item = Acf<S>>) -> Self {
        items.into_iter().reduce(|a, b| a.or(b)).unwrap_or(Acf::Const(false))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.for_each_atom(&mut |a| out.extend(a.vars()));
        out
    }

    pub fn atoms(&self) -> Vec<&AtomicConstraint<S>> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a AtomicConstraint<S>>) {
        match self {
            Acf::Const(_) => {}
            Acf::Atom(a) => out.push(a),
            Acf::Not(x) => x.collect_atoms(out),
            Acf::And(a, b) | Acf::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn for_each_atom(&self, f: &mut impl FnMut(&AtomicConstraint<S>)) {
        for a in self.atoms() {
            f(a);
        }
    }

    /// Rewrites `or` nodes into `!(!a & !b)`.
    pub fn without_or(&self) -> Acf<S> {
        match self {
            Acf::Const(b) => Acf::Const(*b),
            Acf::Atom(a) => Acf::Atom(a.clone()),
            Acf::Not(x) => x.without_or().not(),
            Acf::And(a, b) => a.without_or().and(b.without_or()),
            Acf::Or(a, b) => a.without_or().not().and(b.without_or().not()).not(),
        }
    }

    /// Returns `true` if no utility variable occurs.
    pub fn is_variable_free(&self) -> bool {
        self.vars().is_empty()
    }

    /// Truth value when the formula mentions no variable.
    pub fn constant_value(&self) -> Option<bool> {
        if self.is_variable_free() {
            eval_acf(self, &BTreeMap::new()).ok()
        } else {
            None
        }
    }

    pub fn map_constants(&self, f: &impl Fn(&S) -> S) -> Acf<S> {
        match self {
            Acf::Const(b) => Acf::Const(*b),
            Acf::Atom(a) => Acf::Atom(a.map_constants(f)),
            Acf::Not(x) => x.map_constants(f).not(),
            Acf::And(a, b) => a.map_constants(f).and(b.map_constants(f)),
            Acf::Or(a, b) => a.map_constants(f).or(b.map_constants(f)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // 0: or, 1: and operand, 2: right and operand, 3: negated
        match self {
            Acf::Const(true) => f.write_str("true"),
            Acf::Const(false) => f.write_str("false"),
            Acf::Atom(a) => {
                if prec >= 3 {
                    write!(f, "({a})")
                } else {
                    write!(f, "{a}")
                }
            }
            Acf::Not(x) => {
                f.write_str("!")?;
                x.fmt_prec(f, 3)
            }
            Acf::And(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Acf::Or(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 0)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 1)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl<S: Scalar> fmt::Display for Acf<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// `w_a rel bound`: compares the value of a play for one agent to a constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathConstraint<S> {
    pub agent: String,
    pub rel: Rel,
    pub bound: S,
}

impl<S: Scalar> PathConstraint<S> {
    pub fn holds(&self, value: &S) -> bool {
        self.rel.holds(value, &self.bound)
    }
}

impl<S: Scalar> fmt::Display for PathConstraint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w_{} {} {}", self.agent, self.rel, self.bound)
    }
}

/// Assignment of values to utility variables, keyed by agent name.
pub type Valuation<S> = BTreeMap<String, S>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Payoff;

    fn q(s: &str) -> Payoff {
        Payoff::parse_rational(s).unwrap()
    }

    #[test]
    fn normalization_moves_constants_right() {
        let a: AtomicConstraint<Payoff> = AtomicConstraint::new(
            Term::var("a").plus(Term::var("a")).plus(Term::constant(q("2"))),
            Rel::Lt,
            Term::var("b").plus(Term::constant(q("7"))),
        );
        let n = a.normalize();
        assert_eq!(n.coeffs, BTreeMap::from([("a".into(), 2), ("b".into(), -1)]));
        assert_eq!(n.constant, q("5"));
        assert!(a.is_var_vs_var());
    }

    #[test]
    fn display_round_trips_through_parser() {
        for text in
            ["v_a > 0", "!(v_a = 0) & v_a + 1 <= 3/2", "v_a >= 0 | v_a < 0 & true", "(v_a > 0 | v_a < 0) & !false"]
        {
            let f: Acf<Payoff> = parse_acf(text).unwrap();
            let printed = f.to_string();
            assert_eq!(parse_acf::<Payoff>(&printed).unwrap(), f, "{text} -> {printed}");
        }
    }
}
