//! Exact checking for non-negative payoffs and unit discounts.
//!
//! Utilities never decrease, so once a utility exceeds every constant a
//! constraint or guard could compare it with, its exact value stops
//! mattering. Capping utilities there yields a finite graph bisimilar to the
//! configuration graph, on which the ATL fixpoints are exact.

use std::collections::HashMap;

use super::arena::{coalition_mask, eval, policy_table, Arena, Labels, Semantics, Temporal};
use super::fixpoint::{Groups, Mode};
use super::{opponent_answers_freely, CheckError, StrategyClass, Truth, Verdict};
use crate::arith::{Acf, AtomicConstraint, Rel, Sat};
use crate::dynamics::Configuration;
use crate::logic::{Fragment, Observation, StateFormula};
use crate::model::{cartesian, Gcgmp};
use crate::scalar::Scalar;

/// Whether the saturated graph decides `sp` against `so`: its positional
/// strategies see configurations, and the opponents must be able to answer
/// every move.
pub fn saturated_exact_for(sp: StrategyClass, so: StrategyClass) -> bool {
    sp.observation == Observation::ConfigurationBased && opponent_answers_freely(sp, so)
}

/// One more than the largest absolute constant of any normalized constraint
/// in the formula or the guards.
pub fn saturation_cap<S: Scalar>(m: &Gcgmp<S>, f: &StateFormula<S>) -> S {
    let mut b = S::zero();
    let mut see = |a: &AtomicConstraint<S>| {
        let c = a.normalize().constant.abs();
        if c > b {
            b = c;
        }
    };
    f.constraint_atoms().iter().for_each(&mut see);
    for_each_guard(m, |_, _, _, g| g.for_each_atom(&mut see));
    b + S::one()
}

fn for_each_guard<S: Scalar>(m: &Gcgmp<S>, mut f: impl FnMut(usize, usize, usize, &Acf<S>)) {
    for a in 0..m.num_agents() {
        for s in 0..m.num_states() {
            for &x in m.available(s, a) {
                f(a, s, x, m.guard(a, s, x));
            }
        }
    }
}

fn preconditions<S: Scalar>(m: &Gcgmp<S>, c0: &Configuration<S>, f: &StateFormula<S>) -> Result<(), CheckError> {
    let found = f.classify();
    if found > Fragment::Ngl {
        return Err(CheckError::Fragment { found, required: Fragment::Ngl });
    }
    f.bind(m)?;
    if let Some((a, d)) = m.agents().iter().zip(m.discounts()).find(|(_, d)| !d.is_one()) {
        return Err(CheckError::NotMonotone(format!("discount of `{a}` is {d}, not 1")));
    }
    for s in 0..m.num_states() {
        for p in m.available_profiles(s) {
            if let Some(x) = m.payoff(s, &p).iter().find(|x| x.is_negative()) {
                return Err(CheckError::NotMonotone(format!(
                    "payoff {x} at `{}` under {}",
                    m.states()[s],
                    m.format_profile(&p)
                )));
            }
        }
    }
    if let Some(u) = c0.utilities.iter().find(|u| u.is_negative()) {
        return Err(CheckError::NotMonotone(format!("initial utility {u} is negative")));
    }
    if let Some(a) = f.constraint_atoms().into_iter().find(|a| a.is_var_vs_var()) {
        return Err(CheckError::VariableVsVariableAtom(a.to_string()));
    }
    let mut bad = None;
    for_each_guard(m, |_, _, _, g| {
        g.for_each_atom(&mut |a| {
            if bad.is_none() && a.is_var_vs_var() {
                bad = Some(a.to_string());
            }
        })
    });
    match bad {
        Some(a) => Err(CheckError::VariableVsVariableAtom(a)),
        None => Ok(()),
    }
}

/// Truth of a constraint whose variables all sit on one side, when some
/// utilities are only known to exceed the cap.
fn sat_atom<S: Scalar>(a: &AtomicConstraint<S>, agents: &[String], u: &[Sat<S>]) -> bool {
    let n = a.normalize();
    let mut sum = S::zero();
    let mut infinite = None;
    for (agent, &c) in &n.coeffs {
        let Some(i) = agents.iter().position(|x| x == agent) else {
            return false;
        };
        match &u[i] {
            Sat::Saturated => infinite = Some(c > 0),
            Sat::Exact(x) => sum = sum + S::from_int(c) * x.clone(),
        }
    }
    match infinite {
        Some(true) => matches!(n.rel, Rel::Gt | Rel::Ge),
        Some(false) => matches!(n.rel, Rel::Lt | Rel::Le),
        None => n.rel.holds(&sum, &n.constant),
    }
}

fn sat_acf<S: Scalar>(g: &Acf<S>, atom: &impl Fn(&AtomicConstraint<S>) -> bool) -> bool {
    match g {
        Acf::Const(b) => *b,
        Acf::Atom(a) => atom(a),
        Acf::Not(x) => !sat_acf(x, atom),
        Acf::And(x, y) => sat_acf(x, atom) && sat_acf(y, atom),
        Acf::Or(x, y) => sat_acf(x, atom) || sat_acf(y, atom),
    }
}

type SatNode<S> = (usize, Vec<Sat<S>>);

struct Saturated<'m, S> {
    m: &'m Gcgmp<S>,
    nodes: Vec<SatNode<S>>,
    arena: Arena,
    last: Option<(Vec<bool>, Groups, bool, Vec<Option<usize>>)>,
}

impl<'m, S: Scalar> Saturated<'m, S> {
    fn build(m: &'m Gcgmp<S>, c0: &Configuration<S>, cap: &S) -> Self {
        let root: SatNode<S> = (c0.state, c0.utilities.iter().map(|u| Sat::capped(u.clone(), cap)).collect());
        let mut index: HashMap<SatNode<S>, usize> = HashMap::new();
        index.insert(root.clone(), 0);
        let mut nodes = vec![root];
        let mut edges = Vec::new();
        let mut i = 0;
        while i < nodes.len() {
            let (s, u) = nodes[i].clone();
            let sets: Vec<Vec<usize>> = (0..m.num_agents())
                .map(|a| {
                    m.available(s, a)
                        .iter()
                        .copied()
                        .filter(|&x| sat_acf(m.guard(a, s, x), &|atom| sat_atom(atom, m.agents(), &u)))
                        .collect()
                })
                .collect();
            let mut out = Vec::new();
            for p in cartesian(&sets) {
                let to = m.transition(s, &p).expect("transition defined for every available profile");
                let next: Vec<Sat<S>> = u
                    .iter()
                    .zip(m.payoff(s, &p))
                    .map(|(x, pay)| match x {
                        Sat::Saturated => Sat::Saturated,
                        Sat::Exact(v) => Sat::capped(v.clone() + pay.clone(), cap),
                    })
                    .collect();
                let key = (to, next);
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = nodes.len();
                        index.insert(key.clone(), id);
                        nodes.push(key);
                        id
                    }
                };
                out.push((p, id));
            }
            edges.push(out);
            i += 1;
        }
        let n = nodes.len();
        let arena = Arena { state: nodes.iter().map(|(s, _)| *s).collect(), expanded: vec![true; n], edges };
        Saturated { m, nodes, arena, last: None }
    }

    fn render(&self, v: usize, cap: &S) -> String {
        let (s, u) = &self.nodes[v];
        let us: Vec<String> = u
            .iter()
            .map(|x| match x {
                Sat::Exact(x) => x.to_string(),
                Sat::Saturated => format!(">{cap}"),
            })
            .collect();
        format!("{} | {}", self.m.states()[*s], us.join(","))
    }
}

impl<S: Scalar> Semantics<S> for Saturated<'_, S> {
    fn arena(&self) -> &Arena {
        &self.arena
    }

    fn model(&self) -> &Gcgmp<S> {
        self.m
    }

    fn constraint(&self, node: usize, atom: &AtomicConstraint<S>) -> Result<Truth, CheckError> {
        Ok(Truth::from_bool(sat_atom(atom, self.m.agents(), &self.nodes[node].1)))
    }

    fn coop(&mut self, mask: &[bool], body: &Temporal) -> Result<Labels, CheckError> {
        let groups = self.arena.groups_by(mask);
        let (win, why) = super::arena::solve(&groups, &self.arena.expanded, Mode::ExistsAll, &body.proponent_goal());
        let follow = !matches!(body, Temporal::Next(_));
        self.last = Some((mask.to_vec(), groups, follow, why));
        Ok(Labels::exact(win))
    }
}

/// Decides `f` at `c0` on the saturated configuration graph. A true
/// coalition formula comes with a positional witness over saturated
/// configurations.
pub fn check_saturated<S: Scalar>(
    m: &Gcgmp<S>,
    c0: &Configuration<S>,
    f: &StateFormula<S>,
) -> Result<Verdict, CheckError> {
    preconditions(m, c0, f)?;
    let cap = saturation_cap(m, f);
    let mut e = Saturated::build(m, c0, &cap);
    let labels = eval(&mut e, f)?;
    let mut verdict = Verdict::definite(labels.t[0]);
    if let (StateFormula::Coop(agents, _), true) = (f, labels.t[0]) {
        let (mask, groups, follow, why) = e.last.as_ref().expect("coalition evaluated last");
        debug_assert_eq!(mask, &coalition_mask(m, agents)?);
        let class = StrategyClass::default();
        verdict.witness = Some(policy_table(m, groups, why, 0, mask, class, *follow, |v| e.render(v, &cap)));
    }
    Ok(verdict)
}
