//! The two-player, three-state example: a Prisoners Dilemma at `s1`, a
//! Battle of the Sexes at `s2` and a coordination game at `s3`.

use super::Gcgmp;
use crate::arith::{Acf, Rel, Term};
use crate::scalar::Scalar;
use crate::Payoff;

const C: usize = 0;
const D: usize = 1;

/// `(state, action of I, action of II, successor, payoff of I, payoff of II)`
const TABLE: [(usize, usize, usize, usize, i64, i64); 12] = [
    (0, C, C, 0, 2, 2),
    (0, C, D, 1, -2, 3),
    (0, D, C, 2, 3, -4),
    (0, D, D, 1, -1, -1),
    (1, C, C, 1, 2, 1),
    (1, C, D, 1, 0, 2),
    (1, D, C, 1, -1, -2),
    (1, D, D, 1, 1, 2),
    (2, C, C, 1, 2, 2),
    (2, C, D, 2, -1, -1),
    (2, D, C, 2, -1, -1),
    (2, D, D, 0, 1, 1),
];

/// Actions of `agent` whose worst-case immediate payoff at `state` is maximal.
pub(crate) fn maximin_actions<S: Scalar>(m: &Gcgmp<S>, agent: usize, state: usize) -> Vec<usize> {
    let other = 1 - agent;
    let worst: Vec<S> = (0..m.actions(agent).len())
        .map(|own| {
            (0..m.actions(other).len())
                .map(|opp| {
                    let mut p = vec![0; 2];
                    p[agent] = own;
                    p[other] = opp;
                    m.payoff(state, &p)[agent].clone()
                })
                .min()
                .expect("nonempty action set")
        })
        .collect();
    let best = worst.iter().max().expect("nonempty action set");
    (0..worst.len()).filter(|&x| &worst[x] == best).collect()
}

/// Builds the example model. Any action may be played with positive
/// utility, only `C` at zero, and only maximin actions of the current stage
/// game when utility is negative.
pub fn builtin_fig1() -> Gcgmp<Payoff> {
    let agents = vec!["I".to_string(), "II".to_string()];
    let states = vec!["s1".to_string(), "s2".to_string(), "s3".to_string()];
    let acts = vec!["C".to_string(), "D".to_string()];
    let mut m = Gcgmp::new(agents, states, vec![acts.clone(), acts]).expect("well-formed names");
    for (s, a1, a2, to, p1, p2) in TABLE {
        m.set_transition(s, &[a1, a2], to);
        m.set_payoff(s, &[a1, a2], vec![Payoff::from_int(p1), Payoff::from_int(p2)]);
    }
    for s in 0..3 {
        m.set_labels(s, [format!("p{}", s + 1)]);
    }
    for agent in 0..2 {
        let name = m.agents()[agent].clone();
        let cmp = |rel| Acf::atom(Term::var(name.clone()), rel, Term::constant(Payoff::from_int(0)));
        for s in 0..3 {
            let maximin = maximin_actions(&m, agent, s);
            for action in [C, D] {
                let mut cases = vec![cmp(Rel::Gt)];
                if action == C {
                    cases.push(cmp(Rel::Eq));
                }
                if maximin.contains(&action) {
                    cases.push(cmp(Rel::Lt));
                }
                m.set_guard(agent, s, action, Acf::any(cases));
            }
        }
    }
    m
}
