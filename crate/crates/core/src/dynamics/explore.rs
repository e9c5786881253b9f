//! Breadth-first construction of the reachable configuration graph.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{successors, Configuration};
use crate::model::{Gcgmp, Profile};
use crate::scalar::Scalar;

/// Exploration limits. `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Bound {
    pub max_steps: Option<usize>,
    pub max_nodes: Option<usize>,
}

impl Bound {
    pub fn steps(n: usize) -> Self {
        Bound { max_steps: Some(n), max_nodes: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node<S> {
    pub config: Configuration<S>,
    /// Step index of the next transition taken from this node.
    pub index: u64,
    /// BFS distance from the root.
    pub depth: usize,
}

/// Reachable configurations with profile-labelled edges. Nodes are numbered
/// in BFS order; the root is node 0.
#[derive(Debug, Clone)]
pub struct ConfigGraph<S> {
    nodes: Vec<Node<S>>,
    edges: Vec<Vec<(Profile, usize)>>,
    lookup: HashMap<(Configuration<S>, u64), usize>,
    /// Nodes at positions `>= next` have not been expanded.
    next: usize,
    index_free: bool,
}

impl<S: Scalar> ConfigGraph<S> {
    /// A graph holding only `root`, to be grown with [`ConfigGraph::expand`].
    pub fn new(m: &Gcgmp<S>, root: Configuration<S>, start_index: u64) -> Self {
        let index_free = m.is_index_independent();
        let mut g = ConfigGraph { nodes: Vec::new(), edges: Vec::new(), lookup: HashMap::new(), next: 0, index_free };
        g.insert(root, start_index, 0);
        g
    }

    fn key(&self, c: Configuration<S>, index: u64) -> (Configuration<S>, u64) {
        (c, if self.index_free { 0 } else { index })
    }

    fn insert(&mut self, config: Configuration<S>, index: u64, depth: usize) -> usize {
        let key = self.key(config.clone(), index);
        if let Some(&id) = self.lookup.get(&key) {
            return id;
        }
        let id = self.nodes.len();
        self.lookup.insert(key, id);
        self.nodes.push(Node { config, index, depth });
        self.edges.push(Vec::new());
        id
    }

    /// Continues the breadth-first search until the bound is reached or the
    /// graph is closed. Successors of a BFS level are computed in parallel
    /// and merged in node order, so the result does not depend on scheduling.
    pub fn expand(&mut self, m: &Gcgmp<S>, bound: Bound) {
        while self.next < self.nodes.len() {
            let depth = self.nodes[self.next].depth;
            if bound.max_steps.is_some_and(|d| depth >= d) {
                return;
            }
            let level_end = self.nodes[self.next..]
                .iter()
                .position(|n| n.depth != depth)
                .map_or(self.nodes.len(), |i| self.next + i);
            let batch: Vec<Vec<(Profile, Configuration<S>)>> = self.nodes[self.next..level_end]
                .par_iter()
                .map(|n| successors(m, &n.config, n.index).expect("valid state"))
                .collect();
            for succ in batch {
                let id = self.next;
                let index = self.nodes[id].index + 1;
                if let Some(limit) = bound.max_nodes {
                    let fresh = succ
                        .iter()
                        .filter(|(_, c)| !self.lookup.contains_key(&self.key(c.clone(), index)))
                        .map(|(_, c)| c)
                        .collect::<std::collections::HashSet<_>>()
                        .len();
                    if self.nodes.len() + fresh > limit {
                        return;
                    }
                }
                let out = succ.into_iter().map(|(p, c)| (p, self.insert(c, index, depth + 1))).collect();
                self.edges[id] = out;
                self.next += 1;
            }
        }
    }

    pub fn nodes(&self) -> &[Node<S>] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node<S> {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Outgoing edges in lexicographic profile order. Empty for unexpanded
    /// nodes.
    pub fn edges(&self, id: usize) -> &[(Profile, usize)] {
        &self.edges[id]
    }

    pub fn is_expanded(&self, id: usize) -> bool {
        id < self.next
    }

    /// `true` if some node was left unexpanded because of the bound.
    pub fn truncated(&self) -> bool {
        self.next < self.nodes.len()
    }

    /// Largest depth among expanded nodes plus one, i.e. the number of steps
    /// fully explored.
    pub fn explored_depth(&self) -> usize {
        if self.truncated() {
            self.nodes[self.next].depth
        } else {
            self.nodes.iter().map(|n| n.depth).max().unwrap_or(0) + 1
        }
    }

    pub fn find(&self, c: &Configuration<S>, index: u64) -> Option<usize> {
        self.lookup.get(&self.key(c.clone(), index)).copied()
    }

    /// Graphviz rendering. Unexpanded nodes are dashed.
    pub fn to_dot(&self, m: &Gcgmp<S>) -> String {
        let mut out = String::from("digraph configurations {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let style = if self.is_expanded(i) { "" } else { ", style=dashed" };
            let _ = writeln!(out, "  n{i} [label=\"{}\"{style}];", n.config.display(m));
        }
        for (i, es) in self.edges.iter().enumerate() {
            for (p, j) in es {
                let _ = writeln!(out, "  n{i} -> n{j} [label=\"{}\"];", m.format_profile(p));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Explores the configuration graph from `root` within `bound`.
pub fn explore<S: Scalar>(m: &Gcgmp<S>, root: Configuration<S>, start_index: u64, bound: Bound) -> ConfigGraph<S> {
    let mut g = ConfigGraph::new(m, root, start_index);
    g.expand(m, bound);
    g
}
