//! Guarded concurrent game models with payoffs.
//!
//! States, agents and actions are referred to by dense indices internally;
//! the names are kept for I/O and display. An action profile is a slice with
//! one action index per agent, in agent order.

mod fig1;
mod io;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{eval_acf_by, Acf};
use crate::scalar::Scalar;

pub use fig1::builtin_fig1;
pub use io::{load_model, to_json};
pub use validate::Violation;

/// One action index per agent.
pub type Profile = Vec<usize>;

/// How the value `w_a` of an infinite play is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ValueSemantics {
    #[default]
    #[serde(rename = "total")]
    Total,
    #[serde(rename = "discounted")]
    Discounted,
    #[serde(rename = "mean")]
    MeanLimit,
}

impl fmt::Display for ValueSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueSemantics::Total => "total",
            ValueSemantics::Discounted => "discounted",
            ValueSemantics::MeanLimit => "mean",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: expected {expected}")]
    Parse { line: usize, column: usize, expected: String },
    #[error("unknown {kind} `{name}`")]
    UnknownIdentifier { kind: &'static str, name: String },
    #[error("{context}: {source}")]
    Formula { context: String, source: crate::ParseError },
    #[error("{0}")]
    Structure(String),
}

/// A concurrent game model extended with payoffs, guards and discounts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gcgmp<S> {
    agents: Vec<String>,
    states: Vec<String>,
    actions: Vec<Vec<String>>,
    /// `[state][agent]`, sorted action indices.
    available: Vec<Vec<Vec<usize>>>,
    /// `[state][profile index]`
    transitions: Vec<Vec<Option<usize>>>,
    /// `[state][profile index][agent]`
    payoffs: Vec<Vec<Vec<S>>>,
    labels: Vec<BTreeSet<String>>,
    /// `[agent][state][action]`
    guards: Vec<Vec<Vec<Acf<S>>>>,
    discounts: Vec<S>,
    value_semantics: ValueSemantics,
    strides: Vec<usize>,
    num_profiles: usize,
}

fn check_names(kind: &str, names: &[String]) -> Result<(), ModelError> {
    if names.is_empty() {
        return Err(ModelError::Structure(format!("no {kind}s declared")));
    }
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::Structure(format!("duplicate {kind} `{n}`")));
        }
    }
    Ok(())
}

impl<S: Scalar> Gcgmp<S> {
    /// Creates a model with every action available everywhere, no
    /// transitions, zero payoffs, `true` guards and unit discounts.
    pub fn new(agents: Vec<String>, states: Vec<String>, actions: Vec<Vec<String>>) -> Result<Self, ModelError> {
        check_names("agent", &agents)?;
        check_names("state", &states)?;
        if actions.len() != agents.len() {
            return Err(ModelError::Structure("one action list per agent required".into()));
        }
        for (a, acts) in agents.iter().zip(&actions) {
            check_names(&format!("action of agent {a}"), acts)?;
        }
        let k = agents.len();
        let mut strides = vec![1; k];
        for i in (0..k.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * actions[i + 1].len();
        }
        let num_profiles = strides[0] * actions[0].len();
        let n = states.len();
        Ok(Gcgmp {
            available: vec![actions.iter().map(|acts| (0..acts.len()).collect()).collect(); n],
            transitions: vec![vec![None; num_profiles]; n],
            payoffs: vec![vec![vec![S::zero(); k]; num_profiles]; n],
            labels: vec![BTreeSet::new(); n],
            guards: actions.iter().map(|acts| vec![vec![Acf::Const(true); acts.len()]; n]).collect(),
            discounts: vec![S::one(); k],
            value_semantics: ValueSemantics::Total,
            strides,
            num_profiles,
            agents,
            states,
            actions,
        })
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn actions(&self, agent: usize) -> &[String] {
        &self.actions[agent]
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_index(&self, agent: usize, name: &str) -> Option<usize> {
        self.actions[agent].iter().position(|a| a == name)
    }

    pub fn available(&self, state: usize, agent: usize) -> &[usize] {
        &self.available[state][agent]
    }

    pub fn set_available(&mut self, state: usize, agent: usize, mut acts: Vec<usize>) {
        acts.sort_unstable();
        acts.dedup();
        self.available[state][agent] = acts;
    }

    pub fn num_profiles(&self) -> usize {
        self.num_profiles
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn profile_at(&self, index: usize) -> Profile {
        self.strides.iter().zip(&self.actions).map(|(s, acts)| (index / s) % acts.len()).collect()
    }

    /// All profiles over the full action sets, in lexicographic order.
    pub fn all_profiles(&self) -> impl Iterator<Item = Profile> + '_ {
        (0..self.num_profiles).map(|i| self.profile_at(i))
    }

    /// Profiles whose components are available at `state`, lexicographically.
    pub fn available_profiles(&self, state: usize) -> Vec<Profile> {
        cartesian(&self.available[state])
    }

    pub fn transition(&self, state: usize, profile: &[usize]) -> Option<usize> {
        self.transitions[state][self.profile_index(profile)]
    }

    pub fn set_transition(&mut self, state: usize, profile: &[usize], to: usize) {
        let i = self.profile_index(profile);
        self.transitions[state][i] = Some(to);
    }

    pub fn payoff(&self, state: usize, profile: &[usize]) -> &[S] {
        &self.payoffs[state][self.profile_index(profile)]
    }

    pub fn set_payoff(&mut self, state: usize, profile: &[usize], values: Vec<S>) {
        assert_eq!(values.len(), self.agents.len(), "one payoff per agent");
        let i = self.profile_index(profile);
        self.payoffs[state][i] = values;
    }

    pub fn labels(&self, state: usize) -> &BTreeSet<String> {
        &self.labels[state]
    }

    pub fn has_label(&self, state: usize, atom: &str) -> bool {
        self.labels[state].contains(atom)
    }

    pub fn set_labels(&mut self, state: usize, labels: impl IntoIterator<Item = String>) {
        self.labels[state] = labels.into_iter().collect();
    }

    /// Every proposition occurring in some label.
    pub fn atoms(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }

    pub fn guard(&self, agent: usize, state: usize, action: usize) -> &Acf<S> {
        &self.guards[agent][state][action]
    }

    pub fn set_guard(&mut self, agent: usize, state: usize, action: usize, guard: Acf<S>) {
        self.guards[agent][state][action] = guard;
    }

    /// A guard is state-based when it mentions no utility variable.
    pub fn is_state_based_guard(&self, agent: usize, state: usize, action: usize) -> bool {
        self.guards[agent][state][action].is_variable_free()
    }

    pub fn all_guards_state_based(&self) -> bool {
        self.guards.iter().flatten().flatten().all(Acf::is_variable_free)
    }

    /// Evaluates a guard at the agent's own utility. Guards mentioning other
    /// agents' variables are rejected by validation and evaluate to `false`.
    pub fn guard_holds(&self, agent: usize, state: usize, action: usize, utility: &S) -> bool {
        let name = &self.agents[agent];
        eval_acf_by(&self.guards[agent][state][action], &|a| (a == name).then_some(utility)).unwrap_or(false)
    }

    pub fn discount(&self, agent: usize) -> &S {
        &self.discounts[agent]
    }

    pub fn discounts(&self) -> &[S] {
        &self.discounts
    }

    pub fn set_discount(&mut self, agent: usize, d: S) {
        self.discounts[agent] = d;
    }

    pub fn value_semantics(&self) -> ValueSemantics {
        self.value_semantics
    }

    pub fn set_value_semantics(&mut self, vs: ValueSemantics) {
        self.value_semantics = vs;
    }

    /// Total value semantics with some undiscounted agent: play values only
    /// exist when cycles contribute nothing, so only bounded horizons are
    /// meaningful.
    pub fn bounded_horizon_only(&self) -> bool {
        self.value_semantics == ValueSemantics::Total && self.discounts.iter().any(|d| d.is_one())
    }

    /// `true` if step results do not depend on the step index.
    pub fn is_index_independent(&self) -> bool {
        self.discounts.iter().all(|d| d.is_one() || d.is_zero())
    }

    /// Renders a profile as `(C,D)`.
    pub fn format_profile(&self, profile: &[usize]) -> String {
        let names: Vec<&str> = profile.iter().enumerate().map(|(a, &x)| self.actions[a][x].as_str()).collect();
        format!("({})", names.join(","))
    }

    pub fn profile_names(&self, profile: &[usize]) -> Vec<(String, String)> {
        profile.iter().enumerate().map(|(a, &x)| (self.agents[a].clone(), self.actions[a][x].clone())).collect()
    }

    /// Resolves a profile given as one action name per agent.
    pub fn parse_profile<T: AsRef<str>>(&self, names: &[T]) -> Result<Profile, ModelError> {
        if names.len() != self.agents.len() {
            return Err(ModelError::Structure(format!(
                "profile needs {} actions, got {}",
                self.agents.len(),
                names.len()
            )));
        }
        names
            .iter()
            .enumerate()
            .map(|(a, n)| {
                self.action_index(a, n.as_ref())
                    .ok_or_else(|| ModelError::UnknownIdentifier { kind: "action", name: n.as_ref().to_string() })
            })
            .collect()
    }
}

/// Cartesian product of per-agent choice lists, in lexicographic order.
pub fn cartesian(choices: &[Vec<usize>]) -> Vec<Profile> {
    let mut out: Vec<Profile> = vec![Vec::with_capacity(choices.len())];
    for opts in choices {
        out = out
            .into_iter()
            .flat_map(|p| {
                opts.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}
