//! Finite game graphs shared by the fixpoint engines, and the bottom-up
//! evaluation of state formulas over them.

use std::collections::BTreeMap;

use super::fixpoint::{gfp, lfp, Groups, Mode};
use super::{CheckError, StrategyTable, Truth};
use crate::arith::AtomicConstraint;
use crate::logic::StrategyClass;
use crate::logic::{BindError, PathFormula, StateFormula};
use crate::model::{Gcgmp, Profile};
use crate::scalar::Scalar;

/// Nodes with their state and profile-labelled successors. Unexpanded nodes
/// have no successors and are never forced into anything.
#[derive(Debug, Clone, Default)]
pub(crate) struct Arena {
    pub state: Vec<usize>,
    pub expanded: Vec<bool>,
    pub edges: Vec<Vec<(Profile, usize)>>,
}

impl Arena {
    pub fn len(&self) -> usize {
        self.state.len()
    }

    /// Successors grouped by the joint action of the agents in `mask`, in
    /// lexicographic order of that joint action.
    pub fn groups_by(&self, mask: &[bool]) -> Groups {
        let mut b = Groups::builder();
        for es in &self.edges {
            let mut by: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
            for (p, to) in es {
                let key: Vec<usize> = p.iter().zip(mask).filter(|(_, &m)| m).map(|(&x, _)| x).collect();
                by.entry(key).or_default().push(*to);
            }
            for (label, members) in by {
                b.group(label, members);
            }
            b.end_node();
        }
        b.finish()
    }

    /// Keeps, at every node, only the edges accepted by `keep`, as a single
    /// group. A node left without edges gets no group at all.
    pub fn single_group(&self, keep: impl Fn(usize, &Profile) -> bool) -> Groups {
        let mut b = Groups::builder();
        for (v, es) in self.edges.iter().enumerate() {
            let members: Vec<usize> = es.iter().filter(|(p, _)| keep(v, p)).map(|(_, to)| *to).collect();
            if !members.is_empty() {
                b.group(Vec::new(), members);
            }
            b.end_node();
        }
        b.finish()
    }
}

/// Definitely-true and definitely-false node sets; they never overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Labels {
    pub t: Vec<bool>,
    pub f: Vec<bool>,
}

impl Labels {
    pub fn constant(n: usize, value: bool) -> Labels {
        Labels { t: vec![value; n], f: vec![!value; n] }
    }

    pub fn from_fn(n: usize, mut at: impl FnMut(usize) -> Truth) -> Labels {
        let mut l = Labels { t: vec![false; n], f: vec![false; n] };
        for v in 0..n {
            match at(v) {
                Truth::True => l.t[v] = true,
                Truth::False => l.f[v] = true,
                Truth::Unknown => {}
            }
        }
        l
    }

    /// Two-valued labels from a set.
    pub fn exact(t: Vec<bool>) -> Labels {
        let f = t.iter().map(|x| !x).collect();
        Labels { t, f }
    }

    pub fn at(&self, v: usize) -> Truth {
        if self.t[v] {
            Truth::True
        } else if self.f[v] {
            Truth::False
        } else {
            Truth::Unknown
        }
    }

    fn negate(self) -> Labels {
        Labels { t: self.f, f: self.t }
    }

    fn and(self, o: Labels) -> Labels {
        Labels { t: zip(&self.t, &o.t, |a, b| a && b), f: zip(&self.f, &o.f, |a, b| a || b) }
    }

    fn or(self, o: Labels) -> Labels {
        Labels { t: zip(&self.t, &o.t, |a, b| a || b), f: zip(&self.f, &o.f, |a, b| a && b) }
    }
}

pub(crate) fn zip(a: &[bool], b: &[bool], f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// The temporal body of a coalition formula with its operands evaluated.
#[derive(Debug, Clone)]
pub(crate) enum Temporal {
    Next(Labels),
    Always(Labels),
    Until(Labels, Labels),
}

/// A fixpoint objective over node sets.
#[derive(Debug, Clone)]
pub(crate) enum Goal {
    /// Reach `set` in one step.
    Next(Vec<bool>),
    /// Reach `target` moving only through `through`.
    Reach { target: Vec<bool>, through: Vec<bool> },
    /// Stay in `keep` forever, unless `exit` is reached.
    Stay { exit: Vec<bool>, keep: Vec<bool> },
}

impl Temporal {
    /// What the coalition must force for the body to be definitely true.
    pub fn proponent_goal(&self) -> Goal {
        match self {
            Temporal::Next(x) => Goal::Next(x.t.clone()),
            Temporal::Always(x) => Goal::Stay { exit: vec![false; x.t.len()], keep: x.t.clone() },
            Temporal::Until(a, b) => Goal::Reach { target: b.t.clone(), through: a.t.clone() },
        }
    }

    /// What the opponents must force for the body to be definitely false.
    pub fn opponent_goal(&self) -> Goal {
        match self {
            Temporal::Next(x) => Goal::Next(x.f.clone()),
            Temporal::Always(x) => Goal::Reach { target: x.f.clone(), through: vec![true; x.f.len()] },
            Temporal::Until(a, b) => Goal::Stay { exit: zip(&a.f, &b.f, |x, y| x && y), keep: b.f.clone() },
        }
    }
}

/// Solves `goal` under `mode`. In `ExistsAll` mode also returns, per winning
/// node, a group that makes progress towards the goal.
pub(crate) fn solve(groups: &Groups, expanded: &[bool], mode: Mode, goal: &Goal) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = groups.num_nodes();
    match goal {
        Goal::Next(set) => {
            let win: Vec<bool> = (0..n).map(|v| expanded[v] && groups.pre(v, mode, set)).collect();
            let why = (0..n)
                .map(|v| (win[v] && mode == Mode::ExistsAll).then(|| groups.forcing_group(v, set)).flatten())
                .collect();
            (win, why)
        }
        Goal::Reach { target, through } => lfp(groups, expanded, mode, target, through),
        Goal::Stay { exit, keep } => {
            let win = gfp(groups, expanded, mode, exit, keep);
            let why = (0..n)
                .map(|v| {
                    (win[v] && !exit[v] && mode == Mode::ExistsAll).then(|| groups.forcing_group(v, &win)).flatten()
                })
                .collect();
            (win, why)
        }
    }
}

/// The positional strategy encoded by `why`, restricted to nodes reachable
/// from `root` when following it. With `follow` unset only the root entry is
/// kept (one-step objectives).
#[allow(clippy::too_many_arguments)]
pub(crate) fn policy_table<S: Scalar>(
    m: &Gcgmp<S>,
    groups: &Groups,
    why: &[Option<usize>],
    root: usize,
    mask: &[bool],
    class: StrategyClass,
    follow: bool,
    render: impl Fn(usize) -> String,
) -> StrategyTable {
    let members: Vec<usize> = (0..m.num_agents()).filter(|&a| mask[a]).collect();
    let mut table: BTreeMap<String, BTreeMap<String, String>> =
        members.iter().map(|&a| (m.agents()[a].clone(), BTreeMap::new())).collect();
    let mut seen = vec![false; why.len()];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        let Some(g) = why[v] else { continue };
        let obs = render(v);
        for (k, &a) in members.iter().enumerate() {
            let act = m.actions(a)[groups.label(g)[k]].clone();
            table.get_mut(&m.agents()[a]).expect("member").insert(obs.clone(), act);
        }
        if follow {
            for &s in groups.members(g) {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
    }
    StrategyTable { class, table }
}

/// Body shapes the fixpoint engines understand.
pub(crate) enum Shape<'a, S> {
    Next(&'a StateFormula<S>),
    Always(&'a StateFormula<S>),
    Until(&'a StateFormula<S>, &'a StateFormula<S>),
}

pub(crate) fn shape<S: Scalar>(body: &PathFormula<S>) -> Result<Shape<'_, S>, CheckError> {
    fn state<S>(p: &PathFormula<S>) -> Option<&StateFormula<S>> {
        match p {
            PathFormula::State(s) => Some(s),
            _ => None,
        }
    }
    let shaped = match body {
        PathFormula::Next(x) => state(x).map(Shape::Next),
        PathFormula::Always(x) => state(x).map(Shape::Always),
        PathFormula::Until(a, b) => state(a).zip(state(b)).map(|(a, b)| Shape::Until(a, b)),
        _ => None,
    };
    shaped.ok_or_else(|| CheckError::UnsupportedBody(body.to_string()))
}

/// Coalition membership mask, in agent order.
pub(crate) fn coalition_mask<S: Scalar>(m: &Gcgmp<S>, agents: &[String]) -> Result<Vec<bool>, CheckError> {
    let mut mask = vec![false; m.num_agents()];
    for a in agents {
        let i = m.agent_index(a).ok_or_else(|| BindError::UnknownAgent(a.clone()))?;
        mask[i] = true;
    }
    Ok(mask)
}

/// Engine-specific parts of formula evaluation over an arena.
pub(crate) trait Semantics<S: Scalar> {
    fn arena(&self) -> &Arena;
    fn model(&self) -> &Gcgmp<S>;
    fn constraint(&self, node: usize, atom: &AtomicConstraint<S>) -> Result<Truth, CheckError>;
    fn coop(&mut self, mask: &[bool], body: &Temporal) -> Result<Labels, CheckError>;
}

pub(crate) fn eval<S: Scalar, E: Semantics<S>>(e: &mut E, f: &StateFormula<S>) -> Result<Labels, CheckError> {
    let n = e.arena().len();
    Ok(match f {
        StateFormula::True => Labels::constant(n, true),
        StateFormula::Atom(p) => {
            let (m, ar) = (e.model(), e.arena());
            Labels::exact((0..n).map(|v| m.has_label(ar.state[v], p)).collect())
        }
        StateFormula::Constraint(a) => {
            let mut out = Vec::with_capacity(n);
            for v in 0..n {
                out.push(e.constraint(v, a)?);
            }
            Labels::from_fn(n, |v| out[v])
        }
        StateFormula::Not(x) => eval(e, x)?.negate(),
        StateFormula::And(a, b) => eval(e, a)?.and(eval(e, b)?),
        StateFormula::Or(a, b) => eval(e, a)?.or(eval(e, b)?),
        StateFormula::Coop(agents, body) => {
            let mask = coalition_mask(e.model(), agents)?;
            let temporal = match shape(body)? {
                Shape::Next(x) => Temporal::Next(eval(e, x)?),
                Shape::Always(x) => Temporal::Always(eval(e, x)?),
                Shape::Until(a, b) => Temporal::Until(eval(e, a)?, eval(e, b)?),
            };
            e.coop(&mask, &temporal)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_by_coalition() {
        let ar = Arena {
            state: vec![0, 1, 2],
            expanded: vec![true, false, false],
            edges: vec![vec![(vec![0, 0], 1), (vec![0, 1], 2), (vec![1, 0], 2), (vec![1, 1], 2)], vec![], vec![]],
        };
        let g = ar.groups_by(&[true, false]);
        let gs: Vec<(Vec<usize>, Vec<usize>)> =
            g.groups(0).map(|i| (g.label(i).to_vec(), g.members(i).to_vec())).collect();
        assert_eq!(gs, vec![(vec![0], vec![1, 2]), (vec![1], vec![2, 2])]);
        assert_eq!(g.groups(1).len(), 0);
        let target = vec![false, false, true];
        let goal = Goal::Next(target);
        let (win, why) = solve(&g, &ar.expanded, Mode::ExistsAll, &goal);
        assert_eq!(win, vec![true, false, false]);
        assert_eq!(g.label(why[0].unwrap()), &[1]);
    }

    #[test]
    fn kleene_labels() {
        let a = Labels::from_fn(3, |v| [Truth::True, Truth::Unknown, Truth::False][v]);
        let b = Labels::constant(3, false);
        assert_eq!(a.clone().or(b.clone()).at(1), Truth::Unknown);
        assert_eq!(a.clone().and(b).at(1), Truth::False);
        assert_eq!(a.negate().at(2), Truth::True);
    }
}
