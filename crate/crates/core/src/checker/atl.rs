//! Qualitative ATL on the state graph.

use std::collections::BTreeSet;

use super::arena::{eval, Arena, Labels, Semantics, Temporal};
use super::fixpoint::Mode;
use super::{CheckError, Truth};
use crate::arith::AtomicConstraint;
use crate::logic::{Fragment, Memory, Observation, StateFormula, StrategyClass};
use crate::model::{cartesian, Gcgmp};
use crate::scalar::Scalar;

/// Satisfaction set of an ATL-pure formula over the state graph.
///
/// Guards that mention no utility variable are evaluated once and remove an
/// action when false; guards over utilities are ignored. On models whose
/// guards are all state-based this is the exact semantics whenever
/// [`atl_exact_for`] holds.
pub fn check_atl<S: Scalar>(m: &Gcgmp<S>, f: &StateFormula<S>) -> Result<BTreeSet<usize>, CheckError> {
    let found = f.classify();
    if found != Fragment::AtlPure {
        return Err(CheckError::Fragment { found, required: Fragment::AtlPure });
    }
    f.bind(m)?;
    let mut e = StateGraph { m, arena: state_arena(m) };
    let labels = eval(&mut e, f)?;
    Ok((0..m.num_states()).filter(|&s| labels.t[s]).collect())
}

/// Whether state-level fixpoints decide the classes `sp` against `so` on a
/// model with state-based guards.
///
/// A memoryless state-based proponent strategy wins against everyone or
/// loses to a state-based memoryless answer, so it is exact against any
/// opponent except a memoryless state-based one facing a proponent that can
/// tell more than states. A proponent with memory is exact only against
/// opponents with memory: a memoryless opponent can be probed and exploited.
pub fn atl_exact_for(sp: StrategyClass, so: StrategyClass) -> bool {
    match (sp.memory, so.memory) {
        (_, Memory::PerfectRecall) => true,
        (Memory::PerfectRecall, Memory::Memoryless) => false,
        (Memory::Memoryless, Memory::Memoryless) => {
            so.observation == Observation::ConfigurationBased || sp.observation == Observation::StateBased
        }
    }
}

pub(crate) fn state_arena<S: Scalar>(m: &Gcgmp<S>) -> Arena {
    let n = m.num_states();
    let mut edges = Vec::with_capacity(n);
    for s in 0..n {
        let sets: Vec<Vec<usize>> = (0..m.num_agents())
            .map(|a| {
                m.available(s, a)
                    .iter()
                    .copied()
                    .filter(|&x| m.guard(a, s, x).constant_value() != Some(false))
                    .collect()
            })
            .collect();
        edges.push(cartesian(&sets).into_iter().filter_map(|p| m.transition(s, &p).map(|t| (p, t))).collect());
    }
    Arena { state: (0..n).collect(), expanded: vec![true; n], edges }
}

struct StateGraph<'m, S> {
    m: &'m Gcgmp<S>,
    arena: Arena,
}

impl<S: Scalar> Semantics<S> for StateGraph<'_, S> {
    fn arena(&self) -> &Arena {
        &self.arena
    }

    fn model(&self) -> &Gcgmp<S> {
        self.m
    }

    fn constraint(&self, _: usize, _: &AtomicConstraint<S>) -> Result<Truth, CheckError> {
        Err(CheckError::Fragment { found: Fragment::Ngl, required: Fragment::AtlPure })
    }

    fn coop(&mut self, mask: &[bool], body: &Temporal) -> Result<Labels, CheckError> {
        let groups = self.arena.groups_by(mask);
        let (win, _) = super::arena::solve(&groups, &self.arena.expanded, Mode::ExistsAll, &body.proponent_goal());
        Ok(Labels::exact(win))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::model::builtin_fig1;
    use crate::Payoff;

    fn atl(m: &Gcgmp<Payoff>, text: &str) -> Vec<String> {
        let f = parse_formula(text).unwrap();
        check_atl(m, &f).unwrap().into_iter().map(|s| m.states()[s].clone()).collect()
    }

    #[test]
    fn fig1_state_graph() {
        let m = builtin_fig1();
        assert!(atl(&m, "<<>> G p1").is_empty());
        assert_eq!(atl(&m, "<<I,II>> X true"), ["s1", "s2", "s3"]);
        // s2 is absorbing.
        assert_eq!(atl(&m, "<<>> G p2"), ["s2"]);
        // From s1 either player can leave it by defecting.
        assert_eq!(atl(&m, "<<I>> F !p1"), ["s1", "s2", "s3"]);
        assert_eq!(atl(&m, "<<I,II>> G p1"), ["s1"]);
        // At s3 player I cannot reach s1 alone.
        assert_eq!(atl(&m, "<<I>> F p1"), ["s1"]);
        assert_eq!(atl(&m, "<<I,II>> F p1"), ["s1", "s3"]);
    }

    #[test]
    fn two_state_chain() {
        let mut m =
            Gcgmp::<Payoff>::new(vec!["a".into()], vec!["s".into(), "t".into()], vec![vec!["go".into()]]).unwrap();
        m.set_transition(0, &[0], 1);
        m.set_transition(1, &[0], 1);
        m.set_labels(1, ["q".to_string()]);
        assert_eq!(atl(&m, "<<>> F q"), ["s", "t"]);
        assert_eq!(atl(&m, "<<>> X !q"), Vec::<String>::new());
    }

    #[test]
    fn rejects_constraints() {
        let m = builtin_fig1();
        let f = parse_formula::<Payoff>("<<I>> G v_I > 0").unwrap();
        assert!(matches!(check_atl(&m, &f), Err(CheckError::Fragment { .. })));
    }

    #[test]
    fn exactness_table() {
        let exact: Vec<(String, String)> = StrategyClass::ALL
            .iter()
            .flat_map(|&sp| StrategyClass::ALL.iter().map(move |&so| (sp, so)))
            .filter(|&(sp, so)| !atl_exact_for(sp, so))
            .map(|(sp, so)| (sp.to_string(), so.to_string()))
            .collect();
        assert_eq!(
            exact,
            [
                ("memoryless/configuration", "memoryless/state"),
                ("perfect-recall/state", "memoryless/state"),
                ("perfect-recall/state", "memoryless/configuration"),
                ("perfect-recall/configuration", "memoryless/state"),
                ("perfect-recall/configuration", "memoryless/configuration"),
            ]
            .map(|(a, b)| (a.to_string(), b.to_string()))
        );
    }
}
