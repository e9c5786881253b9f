//! Brute-force reference semantics for tiny models.
//!
//! Proponent strategies are enumerated lazily: an observation gets an action
//! the first time a play consults it, and the search takes the best choice.
//! Opponents only ever face one fixed proponent strategy and produce one
//! play, so they are searched play by play; a memoryless opponent must
//! answer equal observations on that play equally. Plays are cut at the
//! depth bound, or closed early when both sides are memoryless and a
//! configuration repeats on an index-independent model.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use super::arena::{coalition_mask, shape, Shape};
use super::bounded::require_static_guards;
use super::{CheckError, Truth, Verdict};
use crate::arith::eval_atom_by;
use crate::dynamics::{enabled_actions, step, successors, Configuration};
use crate::logic::{Fragment, StateFormula, StrategyClass};
use crate::model::{cartesian, Gcgmp};
use crate::scalar::Scalar;

pub const ORACLE_MAX_STATES: usize = 4;
pub const ORACLE_MAX_ACTIONS: usize = 2;
pub const ORACLE_MAX_DEPTH: usize = 8;
/// Search nodes visited before giving up.
const ORACLE_MAX_STEPS: usize = 2_000_000;

/// Decides `f` at `c0` (step index 1) by enumerating strategies of class
/// `sp` for each coalition against responses of class `so`, over plays of
/// at most `depth` steps from each coalition operator.
pub fn enumerate_oracle<S: Scalar>(
    m: &Gcgmp<S>,
    c0: &Configuration<S>,
    f: &StateFormula<S>,
    sp: StrategyClass,
    so: StrategyClass,
    depth: usize,
) -> Result<Verdict, CheckError> {
    if m.num_states() > ORACLE_MAX_STATES {
        return Err(CheckError::TooLarge(format!("{} states", m.num_states())));
    }
    if let Some(a) = (0..m.num_agents()).find(|&a| m.actions(a).len() > ORACLE_MAX_ACTIONS) {
        return Err(CheckError::TooLarge(format!("{} actions for {}", m.actions(a).len(), m.agents()[a])));
    }
    if depth > ORACLE_MAX_DEPTH {
        return Err(CheckError::TooLarge(format!("depth {depth}")));
    }
    let found = f.classify();
    if found > Fragment::Ngl {
        return Err(CheckError::Fragment { found, required: Fragment::Ngl });
    }
    f.bind(m)?;
    require_static_guards(m, f, sp, so)?;
    let mut o = Oracle { m, sp, so, steps: 0, memo: HashMap::new(), reach_memo: HashMap::new() };
    let verdict = o.state(f, c0, 1, depth)?;
    Ok(Verdict { verdict, witness: None, counterexample: None, bound_used: Some(depth) })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key<S> {
    States(Vec<usize>),
    Configs(Vec<Configuration<S>>),
}

#[derive(Debug, Clone)]
struct Line<S> {
    configs: Vec<Configuration<S>>,
    /// Opponent answers so far, for memoryless opponents.
    answers: Vec<(Key<S>, Vec<usize>)>,
    closed: bool,
}

impl<S: Scalar> Line<S> {
    fn key(&self, class: StrategyClass) -> Key<S> {
        let tail = if class.is_memoryless() { self.configs.len() - 1 } else { 0 };
        let seen = &self.configs[tail..];
        if class.is_state_based() {
            Key::States(seen.iter().map(|c| c.state).collect())
        } else {
            Key::Configs(seen.to_vec())
        }
    }
}

fn is_prefix<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.len() <= b.len() && a == &b[..a.len()]
}

/// Perfect-recall observations of two lines can coincide in the future
/// only if one history extends the other.
fn comparable<S: Scalar>(a: &Key<S>, b: &Key<S>) -> bool {
    match (a, b) {
        (Key::States(x), Key::States(y)) => is_prefix(x, y) || is_prefix(y, x),
        (Key::Configs(x), Key::Configs(y)) => is_prefix(x, y) || is_prefix(y, x),
        _ => true,
    }
}

struct Coop<'f, S> {
    members: Vec<usize>,
    others: Vec<usize>,
    body: Shape<'f, S>,
    start: u64,
    depth: usize,
}

struct Oracle<'m, S> {
    m: &'m Gcgmp<S>,
    sp: StrategyClass,
    so: StrategyClass,
    steps: usize,
    memo: HashMap<(usize, Configuration<S>, u64, usize), Truth>,
    reach_memo: HashMap<(Configuration<S>, u64, usize), Rc<HashSet<Key<S>>>>,
}

impl<'m, S: Scalar> Oracle<'m, S> {
    fn state(&mut self, f: &StateFormula<S>, c: &Configuration<S>, l: u64, depth: usize) -> Result<Truth, CheckError> {
        Ok(match f {
            StateFormula::True => Truth::True,
            StateFormula::Atom(p) => Truth::from_bool(self.m.has_label(c.state, p)),
            StateFormula::Constraint(a) => {
                let lookup = |x: &str| self.m.agent_index(x).map(|i| &c.utilities[i]);
                Truth::from_bool(eval_atom_by(a, &lookup).unwrap_or(false))
            }
            StateFormula::Not(x) => !self.state(x, c, l, depth)?,
            StateFormula::And(a, b) => self.state(a, c, l, depth)?.and(self.state(b, c, l, depth)?),
            StateFormula::Or(a, b) => self.state(a, c, l, depth)?.or(self.state(b, c, l, depth)?),
            StateFormula::Coop(agents, body) => {
                let id = (f as *const StateFormula<S> as usize, c.clone(), l, depth);
                if let Some(&t) = self.memo.get(&id) {
                    return Ok(t);
                }
                let mask = coalition_mask(self.m, agents)?;
                let coop = Coop {
                    members: (0..mask.len()).filter(|&a| mask[a]).collect(),
                    others: (0..mask.len()).filter(|&a| !mask[a]).collect(),
                    body: shape(body)?,
                    start: l,
                    depth,
                };
                let root = Line { configs: vec![c.clone()], answers: Vec::new(), closed: false };
                let t = self.solve(&coop, vec![root], &mut HashMap::new(), None, None)?;
                self.memo.insert(id, t);
                t
            }
        })
    }

    /// Best value over extensions of `table` of the worst line in `pending`.
    ///
    /// Alpha-beta window: a result at or below `lo`, or at or above `hi`,
    /// is only a bound, which is all the caller can use.
    fn solve(
        &mut self,
        coop: &Coop<'_, S>,
        mut pending: Vec<Line<S>>,
        table: &mut HashMap<Key<S>, Vec<usize>>,
        lo: Option<Truth>,
        hi: Option<Truth>,
    ) -> Result<Truth, CheckError> {
        self.steps += 1;
        if self.steps > ORACLE_MAX_STEPS {
            return Err(CheckError::TooLarge(format!("more than {ORACLE_MAX_STEPS} search steps")));
        }
        let cut_low = |v: Truth| lo.is_some_and(|x| v <= x);
        let cut_high = |v: Truth| hi.is_some_and(|x| v >= x);
        let tighter = |v: Truth| Some(hi.map_or(v, |x| x.min(v)));
        if pending.len() > 1 {
            let parts = self.split(coop, pending.clone(), table)?;
            if parts.len() > 1 {
                let mut worst = Truth::True;
                for part in parts {
                    worst = worst.and(self.solve(coop, part, table, lo, tighter(worst))?);
                    if cut_low(worst) {
                        break;
                    }
                }
                return Ok(worst);
            }
        }
        // Finish lines that need no new decision before branching, so that
        // refutations under the current table are found without search.
        let forced = pending.iter().rposition(|l| self.finished(coop, l) || table.contains_key(&l.key(self.sp)));
        let line = match forced {
            Some(i) => pending.swap_remove(i),
            None => match pending.pop() {
                Some(l) => l,
                None => return Ok(Truth::True),
            },
        };
        if self.finished(coop, &line) {
            let v = self.value(coop, &line)?;
            if v == Truth::False || cut_low(v) {
                return Ok(v);
            }
            return Ok(v.and(self.solve(coop, pending, table, lo, tighter(v))?));
        }
        let key = line.key(self.sp);
        if let Some(a) = table.get(&key).cloned() {
            pending.extend(self.advance(coop, &line, &a)?);
            return self.solve(coop, pending, table, lo, hi);
        }
        let c = line.configs.last().expect("nonempty line");
        let sets = coop.members.iter().map(|&a| enabled_actions(self.m, c, a)).collect::<Result<Vec<_>, _>>()?;
        let mut best: Option<Truth> = None;
        for a in cartesian(&sets) {
            let mut next = pending.clone();
            next.extend(self.advance(coop, &line, &a)?);
            table.insert(key.clone(), a);
            let floor = match (lo, best) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            };
            let r = self.solve(coop, next, table, floor, hi);
            table.remove(&key);
            let r = r?;
            best = Some(best.map_or(r, |b| b.or(r)));
            if r == Truth::True || cut_high(r) {
                break;
            }
        }
        Ok(best.unwrap_or(Truth::False))
    }

    fn finished(&self, coop: &Coop<'_, S>, line: &Line<S>) -> bool {
        line.closed || line.configs.len() > coop.depth
    }

    /// Groups lines that may still consult a common unassigned proponent
    /// observation; different groups can be solved separately.
    fn split(
        &mut self,
        coop: &Coop<'_, S>,
        lines: Vec<Line<S>>,
        table: &HashMap<Key<S>, Vec<usize>>,
    ) -> Result<Vec<Vec<Line<S>>>, CheckError> {
        let mut root: Vec<usize> = (0..lines.len()).collect();
        fn find(root: &mut [usize], mut i: usize) -> usize {
            while root[i] != i {
                root[i] = root[root[i]];
                i = root[i];
            }
            i
        }
        fn union(root: &mut [usize], i: usize, j: usize) {
            let (a, b) = (find(root, i), find(root, j));
            root[a] = b;
        }
        if self.sp.is_memoryless() {
            let mut owner: HashMap<Key<S>, usize> = HashMap::new();
            for (i, l) in lines.iter().enumerate() {
                if self.finished(coop, l) {
                    continue;
                }
                let pos = l.configs.len() - 1;
                let c = &l.configs[pos];
                let reach = self.reach(c, coop.start + pos as u64, coop.depth - pos)?;
                for k in reach.iter().filter(|k| !table.contains_key(*k)) {
                    match owner.get(k) {
                        Some(&j) => union(&mut root, i, j),
                        None => {
                            owner.insert(k.clone(), i);
                        }
                    }
                }
            }
        } else {
            // Perfect-recall observations of two lines can coincide in the
            // future only if one history extends the other.
            let keys: Vec<Key<S>> = lines.iter().map(|l| l.key(self.sp)).collect();
            for i in 0..keys.len() {
                for j in 0..i {
                    if comparable(&keys[i], &keys[j]) {
                        union(&mut root, i, j);
                    }
                }
            }
        }
        let mut parts: Vec<(usize, Vec<Line<S>>)> = Vec::new();
        for (i, l) in lines.into_iter().enumerate() {
            let r = find(&mut root, i);
            match parts.iter_mut().find(|(x, _)| *x == r) {
                Some((_, part)) => part.push(l),
                None => parts.push((r, vec![l])),
            }
        }
        Ok(parts.into_iter().map(|(_, p)| p).collect())
    }

    /// Memoryless proponent observations within `steps` steps of `c`,
    /// excluding the last position, which is never consulted.
    fn reach(&mut self, c: &Configuration<S>, index: u64, steps: usize) -> Result<Rc<HashSet<Key<S>>>, CheckError> {
        let id = (c.clone(), index, steps);
        if let Some(r) = self.reach_memo.get(&id) {
            return Ok(r.clone());
        }
        let mut out = HashSet::new();
        if steps > 0 {
            out.insert(if self.sp.is_state_based() {
                Key::States(vec![c.state])
            } else {
                Key::Configs(vec![c.clone()])
            });
            for (_, next) in successors(self.m, c, index)? {
                out.extend(self.reach(&next, index + 1, steps - 1)?.iter().cloned());
            }
        }
        let out = Rc::new(out);
        self.reach_memo.insert(id, out.clone());
        Ok(out)
    }

    /// Successor lines after the coalition plays `a`, one per opponent answer.
    fn advance(&self, coop: &Coop<'_, S>, line: &Line<S>, a: &[usize]) -> Result<Vec<Line<S>>, CheckError> {
        let m = self.m;
        let c = line.configs.last().expect("nonempty line");
        let index = coop.start + (line.configs.len() - 1) as u64;
        let memoryless = self.so.is_memoryless();
        let key = memoryless.then(|| line.key(self.so));
        let fixed = key.as_ref().and_then(|k| line.answers.iter().find(|(x, _)| x == k)).map(|(_, b)| b.clone());
        let answers = match fixed {
            Some(b) => vec![b],
            None => cartesian(&coop.others.iter().map(|&b| enabled_actions(m, c, b)).collect::<Result<Vec<_>, _>>()?),
        };
        let closes = memoryless && self.sp.is_memoryless() && m.is_index_independent();
        let mut out = Vec::with_capacity(answers.len());
        for b in answers {
            let mut p = vec![0; m.num_agents()];
            for (k, &x) in coop.members.iter().enumerate() {
                p[x] = a[k];
            }
            for (k, &x) in coop.others.iter().enumerate() {
                p[x] = b[k];
            }
            let next = step(m, c, &p, index)?;
            let mut l = line.clone();
            l.closed = closes && l.configs.contains(&next);
            l.configs.push(next);
            if let Some(k) = &key {
                if !l.answers.iter().any(|(x, _)| x == k) {
                    l.answers.push((k.clone(), b));
                }
            }
            out.push(l);
        }
        Ok(out)
    }

    /// Three-valued truth of the coalition body on a finished line.
    fn value(&mut self, coop: &Coop<'_, S>, line: &Line<S>) -> Result<Truth, CheckError> {
        // A closed line repeats its last configuration, so the positions
        // before it are all there is.
        let positions = if line.closed { line.configs.len() - 1 } else { line.configs.len() };
        let tail = if line.closed { Truth::False } else { Truth::Unknown };
        let at = |o: &mut Self, f: &StateFormula<S>, i: usize| {
            o.state(f, &line.configs[i], coop.start + i as u64, coop.depth - i)
        };
        Ok(match coop.body {
            Shape::Next(f) => {
                if line.configs.len() > 1 {
                    at(self, f, 1)?
                } else {
                    Truth::Unknown
                }
            }
            Shape::Always(f) => {
                let mut acc = if line.closed { Truth::True } else { Truth::Unknown };
                for i in 0..positions {
                    acc = acc.and(at(self, f, i)?);
                    if acc == Truth::False {
                        break;
                    }
                }
                acc
            }
            Shape::Until(f, g) => {
                let (mut acc, mut so_far) = (Truth::False, Truth::True);
                for i in 0..positions {
                    acc = acc.or(so_far.and(at(self, g, i)?));
                    so_far = so_far.and(at(self, f, i)?);
                    if acc == Truth::True || so_far == Truth::False {
                        break;
                    }
                }
                acc.or(so_far.and(tail))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::model::builtin_fig1;
    use crate::Payoff;

    fn oracle(m: &Gcgmp<Payoff>, text: &str, sp: &str, so: &str, depth: usize) -> Result<Truth, CheckError> {
        let f = parse_formula(text).unwrap();
        let c0 = Configuration::zero(0, m.num_agents());
        enumerate_oracle(m, &c0, &f, sp.parse().unwrap(), so.parse().unwrap(), depth).map(|v| v.verdict)
    }

    fn pennies() -> Gcgmp<Payoff> {
        let mut m = Gcgmp::<Payoff>::new(
            vec!["a".into(), "b".into()],
            vec!["s".into(), "goal".into()],
            vec![vec!["h".into(), "t".into()], vec!["h".into(), "t".into()]],
        )
        .unwrap();
        for (p, to) in [([0, 0], 1), ([1, 1], 1), ([0, 1], 0), ([1, 0], 0)] {
            m.set_transition(0, &p, to);
            m.set_transition(1, &p, 1);
        }
        m.set_labels(1, ["win".to_string()]);
        m
    }

    #[test]
    fn next_step_into_labelled_states() {
        let mut m =
            Gcgmp::<Payoff>::new(vec!["a".into()], vec!["s".into(), "t".into()], vec![vec!["x".into(), "y".into()]])
                .unwrap();
        for s in 0..2 {
            m.set_transition(s, &[0], 1);
            m.set_transition(s, &[1], 1);
        }
        m.set_labels(1, ["p".to_string()]);
        assert_eq!(oracle(&m, "<<a>> X p", "m/s", "m/s", 1).unwrap(), Truth::True);
        assert_eq!(oracle(&m, "<<a>> X !p", "m/s", "m/s", 3).unwrap(), Truth::False);
        assert_eq!(oracle(&m, "<<a>> X p", "m/s", "m/s", 0).unwrap(), Truth::Unknown);
    }

    #[test]
    fn memory_beats_a_fixed_opponent() {
        let m = pennies();
        assert_eq!(oracle(&m, "<<a>> F win", "m/s", "m/s", 4).unwrap(), Truth::False);
        assert_eq!(oracle(&m, "<<a>> F win", "pr/s", "m/s", 2).unwrap(), Truth::True);
        // Against an opponent with memory a probe proves nothing.
        assert_eq!(oracle(&m, "<<a>> F win", "pr/s", "pr/s", 4).unwrap(), Truth::Unknown);
        assert_eq!(oracle(&m, "<<a,b>> F win", "m/s", "m/s", 1).unwrap(), Truth::True);
    }

    #[test]
    fn fig1_small_depths() {
        let m = builtin_fig1();
        // II may only cooperate at (s1,(0,0)) but can defect once it has 2.
        for (sp, so) in [("m/c", "m/c"), ("pr/c", "pr/c"), ("m/c", "pr/c"), ("pr/c", "m/c")] {
            assert_eq!(oracle(&m, "<<I>> G p1", sp, so, 3).unwrap(), Truth::False, "{sp} vs {so}");
            assert_eq!(oracle(&m, "<<I>> G (p1 | v_I > 0)", sp, so, 4).unwrap(), Truth::Unknown, "{sp} vs {so}");
        }
        // Utilities grow along the cooperative loop, so it never closes.
        assert_eq!(oracle(&m, "<<I,II>> G p1", "m/c", "m/c", 3).unwrap(), Truth::Unknown);
        assert_eq!(oracle(&m, "<<I,II>> X p1", "m/c", "m/c", 1).unwrap(), Truth::True);
        assert_eq!(oracle(&m, "<<I,II>> F (v_I > 5)", "pr/c", "pr/c", 3).unwrap(), Truth::True);
    }

    #[test]
    fn eventually_is_true_until() {
        let m = pennies();
        for sp in ["m/s", "pr/c"] {
            assert_eq!(
                oracle(&m, "<<a,b>> F win", sp, "m/c", 3).unwrap(),
                oracle(&m, "<<a,b>> (true U win)", sp, "m/c", 3).unwrap()
            );
        }
    }

    #[test]
    fn size_limits() {
        let m = pennies();
        assert!(matches!(oracle(&m, "<<a>> F win", "m/s", "m/s", 9), Err(CheckError::TooLarge(_))));
        let big =
            Gcgmp::<Payoff>::new(vec!["a".into()], (0..5).map(|i| format!("s{i}")).collect(), vec![vec!["x".into()]])
                .unwrap();
        assert!(matches!(oracle(&big, "<<a>> X true", "m/s", "m/s", 1), Err(CheckError::TooLarge(_))));
    }
}
