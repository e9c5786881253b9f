//! Three-valued checking on a growing prefix of the configuration graph.
//!
//! Each coalition formula gets two fixpoint computations over the explored
//! nodes: one for where the coalition certainly wins and one for where the
//! opponents certainly win. Unexpanded nodes never certify anything, so a
//! safety objective is only won on a closed part of the graph and a
//! reachability objective is only lost on one. What counts as "certainly"
//! depends on the strategy classes; every rule below is sound for its
//! classes, and most are exact once the relevant part of the graph is
//! closed.

use std::collections::HashMap;

use serde::Serialize;

use super::arena::{eval, policy_table, solve, zip, Arena, Goal, Labels, Semantics, Temporal};
use super::fixpoint::{Groups, Mode};
use super::{opponent_answers_freely, CheckError, StrategyTable, Truth, Verdict};
use crate::arith::{eval_atom_by, AtomicConstraint};
use crate::dynamics::{step, trace_json, Bound, ConfigGraph, Configuration, History};
use crate::logic::{Fragment, PathFormula, StateFormula, StrategyClass};
use crate::model::{Gcgmp, Profile};
use crate::scalar::Scalar;

/// Limits for [`check_bounded`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Largest number of steps explored from the initial configuration.
    pub max_depth: usize,
    /// Largest number of state-based strategy tables tried per coalition.
    pub max_strategies: usize,
    /// Largest number of configuration nodes kept.
    pub max_nodes: usize,
}

impl Budget {
    pub fn depth(max_depth: usize) -> Budget {
        Budget { max_depth, ..Budget::default() }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_depth: 20, max_strategies: 4096, max_nodes: 2_000_000 }
    }
}

/// Checks `f` at `c0` (step index 1) for proponents of class `sp` against
/// opponents of class `so`, exploring depths 1, 2, 4, ... up to the budget.
///
/// A true coalition formula at the top comes with a witness table that has
/// been replayed through [`step`]; a false one comes with a trace through
/// the opponents' winning region. State-based classes need state-based
/// guards for the agents using them.
pub fn check_bounded<S: Scalar>(
    m: &Gcgmp<S>,
    c0: &Configuration<S>,
    f: &StateFormula<S>,
    sp: StrategyClass,
    so: StrategyClass,
    budget: Budget,
) -> Result<Verdict, CheckError> {
    let found = f.classify();
    if found > Fragment::Ngl {
        return Err(CheckError::Fragment { found, required: Fragment::Ngl });
    }
    f.bind(m)?;
    require_static_guards(m, f, sp, so)?;
    let mut graph = ConfigGraph::new(m, c0.clone(), 1);
    let mut depth = budget.max_depth.min(1);
    loop {
        graph.expand(m, Bound { max_steps: Some(depth), max_nodes: Some(budget.max_nodes) });
        let out_of_nodes = graph.truncated() && graph.explored_depth() < depth;
        let mut e = Bounded::new(m, &graph, sp, so, budget);
        let labels = eval(&mut e, f)?;
        let value = labels.at(0);
        if value.is_definite() || depth >= budget.max_depth || !graph.truncated() || out_of_nodes {
            let mut v = Verdict { verdict: value, witness: None, counterexample: None, bound_used: Some(depth) };
            if let (StateFormula::Coop(..), Some(last)) = (f, e.last.take()) {
                match value {
                    Truth::True => match e.witness(&last) {
                        Some(w) => v.witness = Some(w),
                        None => {
                            debug_assert!(false, "witness failed replay");
                            v.verdict = Truth::Unknown;
                        }
                    },
                    Truth::False => v.counterexample = Some(e.counter_trace(&last)),
                    Truth::Unknown => {}
                }
            }
            return Ok(v);
        }
        depth = (depth * 2).min(budget.max_depth);
    }
}

fn coalitions<S>(f: &StateFormula<S>, out: &mut Vec<Vec<String>>) {
    fn path<S>(p: &PathFormula<S>, out: &mut Vec<Vec<String>>) {
        match p {
            PathFormula::State(s) => coalitions(s, out),
            PathFormula::Apc(_) => {}
            PathFormula::Not(x) | PathFormula::Next(x) | PathFormula::Always(x) => path(x, out),
            PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Until(a, b) => {
                path(a, out);
                path(b, out);
            }
        }
    }
    match f {
        StateFormula::True | StateFormula::Atom(_) | StateFormula::Constraint(_) => {}
        StateFormula::Not(x) => coalitions(x, out),
        StateFormula::And(a, b) | StateFormula::Or(a, b) => {
            coalitions(a, out);
            coalitions(b, out);
        }
        StateFormula::Coop(agents, body) => {
            out.push(agents.clone());
            path(body, out);
        }
    }
}

/// State-based strategies cannot react to utilities, so they can only
/// respect guards that do not mention them.
pub(crate) fn require_static_guards<S: Scalar>(
    m: &Gcgmp<S>,
    f: &StateFormula<S>,
    sp: StrategyClass,
    so: StrategyClass,
) -> Result<(), CheckError> {
    let mut cs = Vec::new();
    coalitions(f, &mut cs);
    for agents in cs {
        for a in 0..m.num_agents() {
            let member = agents.contains(&m.agents()[a]);
            let class = if member { sp } else { so };
            if !class.is_state_based() {
                continue;
            }
            for s in 0..m.num_states() {
                if m.available(s, a).iter().any(|&x| !m.is_state_based_guard(a, s, x)) {
                    return Err(CheckError::StateBasedStrategyWithUtilityGuard {
                        agent: m.agents()[a].clone(),
                        state: m.states()[s].clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Actions of `agent` at `state` whose guard is not the constant false.
fn static_enabled<S: Scalar>(m: &Gcgmp<S>, agent: usize, state: usize) -> Vec<usize> {
    m.available(state, agent)
        .iter()
        .copied()
        .filter(|&x| m.guard(agent, state, x).constant_value() != Some(false))
        .collect()
}

/// All state-indexed tables for `agents`, each as `table[state][k]` = action
/// of the k-th agent. `None` if there are more than `limit`.
fn state_tables<S: Scalar>(m: &Gcgmp<S>, agents: &[usize], limit: usize) -> Option<Vec<Vec<Vec<usize>>>> {
    let choices: Vec<Vec<usize>> = (0..m.num_states())
        .flat_map(|s| agents.iter().map(move |&a| (s, a)))
        .map(|(s, a)| {
            let e = static_enabled(m, a, s);
            if e.is_empty() {
                vec![0]
            } else {
                e
            }
        })
        .collect();
    let count = choices.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()))?;
    if count > limit {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    let mut digits = vec![0usize; choices.len()];
    loop {
        let flat: Vec<usize> = digits.iter().zip(&choices).map(|(&d, c)| c[d]).collect();
        out.push(flat.chunks(agents.len().max(1)).map(|c| c.to_vec()).collect());
        if agents.is_empty() {
            return Some(vec![vec![Vec::new(); m.num_states()]]);
        }
        let mut i = digits.len();
        loop {
            if i == 0 {
                return Some(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < choices[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

enum Policy {
    Positional { groups: Groups, why: Vec<Option<usize>> },
    Table(Vec<Vec<usize>>),
}

struct LastCoop {
    mask: Vec<bool>,
    proponent: Goal,
    opponent: Goal,
    f: Vec<bool>,
    policy: Option<Policy>,
}

struct Bounded<'g, S> {
    m: &'g Gcgmp<S>,
    graph: &'g ConfigGraph<S>,
    arena: Arena,
    sp: StrategyClass,
    so: StrategyClass,
    budget: Budget,
    /// Nodes that can reach a configuration stored under two step indices;
    /// only computed for index-dependent models.
    shared_config: Option<Vec<bool>>,
    last: Option<LastCoop>,
}

impl<'g, S: Scalar> Bounded<'g, S> {
    fn new(m: &'g Gcgmp<S>, graph: &'g ConfigGraph<S>, sp: StrategyClass, so: StrategyClass, budget: Budget) -> Self {
        let n = graph.len();
        let arena = Arena {
            state: graph.nodes().iter().map(|x| x.config.state).collect(),
            expanded: (0..n).map(|v| graph.is_expanded(v)).collect(),
            edges: (0..n).map(|v| graph.edges(v).to_vec()).collect(),
        };
        let shared_config = (!m.is_index_independent()).then(|| {
            let mut count: HashMap<&Configuration<S>, usize> = HashMap::new();
            for x in graph.nodes() {
                *count.entry(&x.config).or_default() += 1;
            }
            let mut hit: Vec<bool> = graph.nodes().iter().map(|x| count[&x.config] > 1).collect();
            // Backward closure.
            let mut changed = true;
            while changed {
                changed = false;
                for v in 0..n {
                    if !hit[v] && arena.edges[v].iter().any(|(_, to)| hit[*to]) {
                        hit[v] = true;
                        changed = true;
                    }
                }
            }
            hit
        });
        Bounded { m, graph, arena, sp, so, budget, shared_config, last: None }
    }

    /// Memoryless configuration-based strategies must agree on equal
    /// configurations; positional choices per node only guarantee that when
    /// no configuration occurs under two step indices.
    fn drop_shared(&self, set: &mut [bool], class: StrategyClass) {
        if let (Some(shared), true) = (&self.shared_config, class.is_memoryless() && !class.is_state_based()) {
            for (x, s) in set.iter_mut().zip(shared) {
                *x &= !s;
            }
        }
    }

    fn members(&self, mask: &[bool], side: bool) -> Vec<usize> {
        (0..mask.len()).filter(|&a| mask[a] == side).collect()
    }

    /// Edges at `v` consistent with `table` for `agents`.
    fn table_groups(&self, agents: &[usize], table: &[Vec<usize>]) -> Groups {
        let state = &self.arena.state;
        self.arena.single_group(|v, p| agents.iter().enumerate().all(|(k, &a)| p[a] == table[state[v]][k]))
    }

    fn proponent_side(&self, mask: &[bool], goal: &Goal) -> (Vec<bool>, Option<Policy>) {
        let exp = &self.arena.expanded;
        if !self.sp.is_state_based() {
            let groups = self.arena.groups_by(mask);
            let (mut win, why) = solve(&groups, exp, Mode::ExistsAll, goal);
            self.drop_shared(&mut win, self.sp);
            let policy = win[0].then_some(Policy::Positional { groups, why });
            return (win, policy);
        }
        // Fixed state tables against unrestricted opponents.
        let members = self.members(mask, true);
        let mut win = vec![false; self.arena.len()];
        let mut policy = None;
        if let Some(tables) = state_tables(self.m, &members, self.budget.max_strategies) {
            for table in tables {
                let groups = self.table_groups(&members, &table);
                let (w, _) = solve(&groups, exp, Mode::ExistsAll, goal);
                if policy.is_none() && w[0] {
                    policy = Some(Policy::Table(table));
                }
                win = zip(&win, &w, |a, b| a || b);
            }
        }
        (win, policy)
    }

    fn opponent_side(&self, mask: &[bool], goal: &Goal) -> Vec<bool> {
        let exp = &self.arena.expanded;
        let (sp, so) = (self.sp, self.so);
        let mut lose = if opponent_answers_freely(sp, so) {
            // The opponents may answer each proponent move. Against fixed
            // memoryless state tables this is decided table by table.
            let members = self.members(mask, true);
            let tables = (sp.is_memoryless() && sp.is_state_based())
                .then(|| state_tables(self.m, &members, self.budget.max_strategies))
                .flatten();
            match tables {
                Some(tables) => {
                    let mut lose = vec![true; self.arena.len()];
                    for table in tables {
                        let groups = self.table_groups(&members, &table);
                        let (l, _) = solve(&groups, exp, Mode::AllExists, goal);
                        lose = zip(&lose, &l, |a, b| a && b);
                    }
                    lose
                }
                None => solve(&self.arena.groups_by(mask), exp, Mode::AllExists, goal).0,
            }
        } else if !so.is_state_based() {
            // Memoryless configuration-based opponents facing proponents
            // with memory: only moves that work whatever the coalition does.
            let opp: Vec<bool> = mask.iter().map(|x| !x).collect();
            solve(&self.arena.groups_by(&opp), exp, Mode::ExistsAll, goal).0
        } else if sp.is_memoryless() && sp.is_state_based() {
            // Both sides fixed tables: every coalition table has a refuting
            // opponent table, and each pair yields a single path.
            let members = self.members(mask, true);
            let opp = self.members(mask, false);
            let limit = self.budget.max_strategies;
            let mut lose = vec![false; self.arena.len()];
            if let (Some(ours), Some(theirs)) =
                (state_tables(self.m, &members, limit), state_tables(self.m, &opp, limit))
            {
                if ours.len().saturating_mul(theirs.len()) <= limit {
                    lose = vec![true; self.arena.len()];
                    for sigma in &ours {
                        let mut refuted = vec![false; self.arena.len()];
                        for tau in &theirs {
                            let state = &self.arena.state;
                            let groups = self.arena.single_group(|v, p| {
                                members.iter().enumerate().all(|(k, &a)| p[a] == sigma[state[v]][k])
                                    && opp.iter().enumerate().all(|(k, &b)| p[b] == tau[state[v]][k])
                            });
                            let (l, _) = solve(&groups, exp, Mode::ExistsAll, goal);
                            refuted = zip(&refuted, &l, |a, b| a || b);
                        }
                        lose = zip(&lose, &refuted, |a, b| a && b);
                    }
                }
            }
            lose
        } else {
            // Memoryless state-based opponents: a fixed table that defeats
            // every coalition behaviour.
            let opp = self.members(mask, false);
            let mut lose = vec![false; self.arena.len()];
            if let Some(tables) = state_tables(self.m, &opp, self.budget.max_strategies) {
                for table in tables {
                    let groups = self.table_groups(&opp, &table);
                    let (l, _) = solve(&groups, exp, Mode::ExistsAll, goal);
                    lose = zip(&lose, &l, |a, b| a || b);
                }
            }
            lose
        };
        self.drop_shared(&mut lose, so);
        lose
    }

    /// Coalition action prescribed at node `v`.
    fn prescribed(&self, policy: &Policy, v: usize) -> Option<Vec<usize>> {
        match policy {
            Policy::Positional { groups, why } => why[v].map(|g| groups.label(g).to_vec()),
            Policy::Table(t) => Some(t[self.arena.state[v]].clone()),
        }
    }

    /// Replays the policy from the root through [`step`], checking guards,
    /// that successors are the explored ones, and that the goal is met on
    /// every branch. Returns the consulted nodes.
    fn replay(&self, last: &LastCoop, policy: &Policy) -> Option<Vec<usize>> {
        let members = self.members(&last.mask, true);
        let others = self.members(&last.mask, false);
        let g = self.graph;
        let moves = |v: usize| -> Option<Vec<usize>> {
            let node = g.node(v);
            let a = self.prescribed(policy, v)?;
            let opp_sets: Vec<Vec<usize>> = others
                .iter()
                .map(|&b| crate::dynamics::enabled_actions(self.m, &node.config, b).unwrap_or_default())
                .collect();
            let mut out = Vec::new();
            for b in crate::model::cartesian(&opp_sets) {
                let mut p: Profile = vec![0; self.m.num_agents()];
                for (k, &x) in members.iter().enumerate() {
                    p[x] = a[k];
                }
                for (k, &x) in others.iter().enumerate() {
                    p[x] = b[k];
                }
                let c = step(self.m, &node.config, &p, node.index).ok()?;
                out.push(g.find(&c, node.index + 1)?);
            }
            Some(out)
        };
        let mut consulted = Vec::new();
        match &last.proponent {
            Goal::Next(set) => {
                consulted.push(0);
                moves(0)?.into_iter().all(|s| set[s]).then_some(consulted)
            }
            Goal::Stay { keep, .. } => {
                let mut seen = vec![false; g.len()];
                let mut stack = vec![0];
                seen[0] = true;
                while let Some(v) = stack.pop() {
                    if !keep[v] || !g.is_expanded(v) {
                        return None;
                    }
                    consulted.push(v);
                    for s in moves(v)? {
                        if !seen[s] {
                            seen[s] = true;
                            stack.push(s);
                        }
                    }
                }
                Some(consulted)
            }
            Goal::Reach { target, through } => {
                // Depth-first with colours: a cycle avoiding the target fails.
                let mut colour = vec![0u8; g.len()];
                let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
                let enter =
                    |v: usize, colour: &mut Vec<u8>, consulted: &mut Vec<usize>| -> Option<Option<Vec<usize>>> {
                        if target[v] {
                            colour[v] = 2;
                            return Some(None);
                        }
                        if !through[v] || !g.is_expanded(v) {
                            return None;
                        }
                        colour[v] = 1;
                        consulted.push(v);
                        Some(Some(moves(v)?))
                    };
                match enter(0, &mut colour, &mut consulted)? {
                    None => return Some(consulted),
                    Some(succ) => stack.push((0, succ)),
                }
                while let Some((v, mut rest)) = stack.pop() {
                    match rest.pop() {
                        None => colour[v] = 2,
                        Some(s) => {
                            stack.push((v, rest));
                            match colour[s] {
                                1 => return None,
                                2 => {}
                                _ => {
                                    if let Some(succ) = enter(s, &mut colour, &mut consulted)? {
                                        stack.push((s, succ));
                                    }
                                }
                            }
                        }
                    }
                }
                Some(consulted)
            }
        }
    }

    fn witness(&self, last: &LastCoop) -> Option<StrategyTable> {
        let policy = last.policy.as_ref()?;
        let consulted = self.replay(last, policy)?;
        let members = self.members(&last.mask, true);
        let m = self.m;
        Some(match policy {
            Policy::Positional { groups, why } => {
                let follow = !matches!(last.proponent, Goal::Next(_));
                // With memory the same configuration may be answered
                // differently at different times.
                let timed = !self.sp.is_memoryless() && !m.is_index_independent();
                policy_table(m, groups, why, 0, &last.mask, self.sp, follow, |v| {
                    let node = self.graph.node(v);
                    if timed {
                        format!("{} @{}", node.config.display(m), node.index)
                    } else {
                        node.config.display(m).to_string()
                    }
                })
            }
            Policy::Table(t) => {
                let mut table: std::collections::BTreeMap<String, std::collections::BTreeMap<String, String>> =
                    members.iter().map(|&a| (m.agents()[a].clone(), Default::default())).collect();
                for v in consulted {
                    let s = self.arena.state[v];
                    for (k, &a) in members.iter().enumerate() {
                        table
                            .get_mut(&m.agents()[a])
                            .expect("member")
                            .insert(m.states()[s].clone(), m.actions(a)[t[s][k]].clone());
                    }
                }
                StrategyTable { class: self.sp, table }
            }
        })
    }

    /// A path from the root inside the opponents' winning region, ending at
    /// a violation or where it starts to repeat.
    fn counter_trace(&self, last: &LastCoop) -> Vec<crate::dynamics::TraceEntry> {
        let stop: Vec<bool> = match &last.opponent {
            Goal::Next(_) => vec![false; self.arena.len()],
            Goal::Reach { target, .. } => target.clone(),
            Goal::Stay { exit, .. } => exit.clone(),
        };
        let one_step = matches!(last.opponent, Goal::Next(_));
        let mut seen = vec![false; self.arena.len()];
        let mut v = 0;
        let mut h = History::new(self.graph.node(0).config.clone(), self.graph.node(0).index);
        while !stop[v] && !seen[v] && self.graph.is_expanded(v) {
            seen[v] = true;
            let target = if one_step {
                match &last.opponent {
                    Goal::Next(set) => set,
                    _ => unreachable!(),
                }
            } else {
                &last.f
            };
            let Some((p, to)) = self.arena.edges[v].iter().find(|(_, to)| target[*to]) else {
                break;
            };
            if h.push(self.m, p.clone()).is_err() {
                break;
            }
            v = *to;
            if one_step {
                break;
            }
        }
        trace_json(self.m, &h)
    }
}

impl<S: Scalar> Semantics<S> for Bounded<'_, S> {
    fn arena(&self) -> &Arena {
        &self.arena
    }

    fn model(&self) -> &Gcgmp<S> {
        self.m
    }

    fn constraint(&self, node: usize, atom: &AtomicConstraint<S>) -> Result<Truth, CheckError> {
        let c = &self.graph.node(node).config;
        let lookup = |a: &str| self.m.agent_index(a).map(|i| &c.utilities[i]);
        Ok(Truth::from_bool(eval_atom_by(atom, &lookup).unwrap_or(false)))
    }

    fn coop(&mut self, mask: &[bool], body: &Temporal) -> Result<Labels, CheckError> {
        let proponent = body.proponent_goal();
        let opponent = body.opponent_goal();
        let (t, policy) = self.proponent_side(mask, &proponent);
        let f = self.opponent_side(mask, &opponent);
        debug_assert!(t.iter().zip(&f).all(|(a, b)| !(a & b)), "contradictory certificates");
        self.last = Some(LastCoop { mask: mask.to_vec(), proponent, opponent, f: f.clone(), policy });
        Ok(Labels { t, f })
    }
}
