//! Least and greatest fixpoints of one-step predecessor operators over
//! grouped successor lists.
//!
//! Every node owns a list of groups and every group a list of successors.
//! Grouping by the coalition's joint action gives `exists group, all
//! successors` = "the coalition can force", and `all groups, some successor`
//! = "the opponents can answer every coalition move".

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Some group has all its successors in the set.
    ExistsAll,
    /// Every group has a successor in the set.
    AllExists,
}

impl Mode {
    pub fn dual(self) -> Mode {
        match self {
            Mode::ExistsAll => Mode::AllExists,
            Mode::AllExists => Mode::ExistsAll,
        }
    }
}

/// Compressed successor groups. `label(g)` records the joint action of the
/// grouping party.
#[derive(Debug, Clone, Default)]
pub(crate) struct Groups {
    node_start: Vec<usize>,
    group_start: Vec<usize>,
    succ: Vec<usize>,
    labels: Vec<Vec<usize>>,
}

impl Groups {
    pub fn builder() -> GroupsBuilder {
        GroupsBuilder { g: Groups { node_start: vec![0], group_start: vec![0], ..Groups::default() } }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_start.len() - 1
    }

    pub fn groups(&self, node: usize) -> std::ops::Range<usize> {
        self.node_start[node]..self.node_start[node + 1]
    }

    pub fn members(&self, group: usize) -> &[usize] {
        &self.succ[self.group_start[group]..self.group_start[group + 1]]
    }

    pub fn label(&self, group: usize) -> &[usize] {
        &self.labels[group]
    }

    /// One-step predecessor test.
    pub fn pre(&self, node: usize, mode: Mode, set: &[bool]) -> bool {
        let mut gs = self.groups(node).map(|g| self.members(g));
        match mode {
            Mode::ExistsAll => gs.any(|m| m.iter().all(|&s| set[s])),
            Mode::AllExists => gs.all(|m| m.iter().any(|&s| set[s])),
        }
    }

    /// The first group whose successors all lie in `set`.
    pub fn forcing_group(&self, node: usize, set: &[bool]) -> Option<usize> {
        self.groups(node).find(|&g| self.members(g).iter().all(|&s| set[s]))
    }
}

pub(crate) struct GroupsBuilder {
    g: Groups,
}

impl GroupsBuilder {
    pub fn group(&mut self, label: Vec<usize>, members: impl IntoIterator<Item = usize>) {
        self.g.succ.extend(members);
        self.g.group_start.push(self.g.succ.len());
        self.g.labels.push(label);
    }

    /// Closes the current node.
    pub fn end_node(&mut self) {
        self.g.node_start.push(self.g.labels.len());
    }

    pub fn finish(self) -> Groups {
        self.g
    }
}

/// Least `Z` with `Z = a ∪ (b ∩ expanded ∩ pre(Z))`. Also returns, for nodes
/// added through `pre` in `ExistsAll` mode, the group that forced them in;
/// that group only leads to nodes added earlier.
pub(crate) fn lfp(
    groups: &Groups,
    expanded: &[bool],
    mode: Mode,
    a: &[bool],
    b: &[bool],
) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = groups.num_nodes();
    let mut inside = a.to_vec();
    let mut reason: Vec<Option<usize>> = vec![None; n];
    let candidate = |v: usize| !a[v] && b[v] && expanded[v];

    // Predecessor occurrences, counted per group member.
    let mut pred_count = vec![0usize; n + 1];
    for v in (0..n).filter(|&v| candidate(v)) {
        for g in groups.groups(v) {
            for &s in groups.members(g) {
                pred_count[s + 1] += 1;
            }
        }
    }
    for i in 0..n {
        pred_count[i + 1] += pred_count[i];
    }
    let mut fill = pred_count.clone();
    let mut preds = vec![(0usize, 0usize); pred_count[n]];
    for v in (0..n).filter(|&v| candidate(v)) {
        for g in groups.groups(v) {
            for &s in groups.members(g) {
                preds[fill[s]] = (v, g);
                fill[s] += 1;
            }
        }
    }

    let total_groups = groups.labels.len();
    let mut missing: Vec<usize> = (0..total_groups).map(|g| groups.members(g).len()).collect();
    let mut hit = vec![false; total_groups];
    let mut open_groups: Vec<usize> = (0..n).map(|v| groups.groups(v).len()).collect();

    let mut queue: VecDeque<usize> = (0..n).filter(|&v| inside[v]).collect();
    for v in (0..n).filter(|&v| candidate(v)) {
        let vacuous = match mode {
            Mode::ExistsAll => groups.groups(v).find(|&g| missing[g] == 0),
            Mode::AllExists => (open_groups[v] == 0).then_some(usize::MAX),
        };
        if let Some(g) = vacuous {
            inside[v] = true;
            reason[v] = (g != usize::MAX).then_some(g);
            queue.push_back(v);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &(v, g) in &preds[pred_count[s]..pred_count[s + 1]] {
            if inside[v] {
                continue;
            }
            let joins = match mode {
                Mode::ExistsAll => {
                    missing[g] -= 1;
                    missing[g] == 0
                }
                Mode::AllExists => {
                    if !hit[g] {
                        hit[g] = true;
                        open_groups[v] -= 1;
                    }
                    open_groups[v] == 0
                }
            };
            if joins {
                inside[v] = true;
                if mode == Mode::ExistsAll {
                    reason[v] = Some(g);
                }
                queue.push_back(v);
            }
        }
    }
    (inside, reason)
}

/// Greatest `Z` with `Z = a ∪ (b ∩ expanded ∩ pre(Z))`, computed as the
/// complement of a least fixpoint of the dual operator.
pub(crate) fn gfp(groups: &Groups, expanded: &[bool], mode: Mode, a: &[bool], b: &[bool]) -> Vec<bool> {
    let n = groups.num_nodes();
    let a2: Vec<bool> = (0..n).map(|v| !a[v] && (!b[v] || !expanded[v])).collect();
    let b2: Vec<bool> = (0..n).map(|v| !a[v]).collect();
    let (out, _) = lfp(groups, expanded, mode.dual(), &a2, &b2);
    out.into_iter().map(|x| !x).collect()
}
