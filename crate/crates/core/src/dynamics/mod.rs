//! Configurations and the guarded, discounted transition function.

mod explore;
mod play;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{cartesian, Gcgmp, Profile};
use crate::scalar::Scalar;

pub use explore::{explore, Bound, ConfigGraph, Node};
pub use play::{play_value, project, trace_json, History, Play, Positions, Projected, Projection, TraceEntry};

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum DynamicsError {
    #[error("no state with index {state}")]
    InvalidState { state: usize },
    #[error("action {action} of agent {agent} is not enabled")]
    GuardViolation { agent: String, action: String },
    #[error("no transition defined for this profile")]
    NoTransition,
    #[error("position {index} is outside the history")]
    IndexOutOfRange { index: usize },
    #[error("the value of the play for {agent} diverges")]
    Divergent { agent: String },
    #[error("the play has no cycle")]
    NotLasso,
    #[error("discounted value requested but the discount of {agent} is 1")]
    UndiscountedDiscounted { agent: String },
    #[error("profile has {got} actions, expected {expected}")]
    ProfileArity { got: usize, expected: usize },
}

/// A state together with one accumulated utility per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration<S> {
    pub state: usize,
    pub utilities: Vec<S>,
}

impl<S: Scalar> Configuration<S> {
    pub fn new(state: usize, utilities: Vec<S>) -> Self {
        Configuration { state, utilities }
    }

    /// The configuration at `state` with all utilities zero.
    pub fn zero(state: usize, num_agents: usize) -> Self {
        Configuration { state, utilities: vec![S::zero(); num_agents] }
    }

    /// `s1 | 2,2`
    pub fn display<'a>(&'a self, m: &'a Gcgmp<S>) -> impl fmt::Display + 'a {
        ConfigDisplay { c: self, m }
    }
}

struct ConfigDisplay<'a, S> {
    c: &'a Configuration<S>,
    m: &'a Gcgmp<S>,
}

impl<S: Scalar> fmt::Display for ConfigDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | ", self.m.states()[self.c.state])?;
        for (i, u) in self.c.utilities.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{u}")?;
        }
        Ok(())
    }
}

fn check_state<S: Scalar>(m: &Gcgmp<S>, c: &Configuration<S>) -> Result<(), DynamicsError> {
    if c.state >= m.num_states() {
        Err(DynamicsError::InvalidState { state: c.state })
    } else {
        Ok(())
    }
}

/// Available actions of `agent` whose guard holds at the agent's utility.
pub fn enabled_actions<S: Scalar>(
    m: &Gcgmp<S>,
    c: &Configuration<S>,
    agent: usize,
) -> Result<Vec<usize>, DynamicsError> {
    check_state(m, c)?;
    Ok(m.available(c.state, agent)
        .iter()
        .copied()
        .filter(|&x| m.guard_holds(agent, c.state, x, &c.utilities[agent]))
        .collect())
}

/// Enabled action sets of all agents, in agent order.
pub fn enabled_sets<S: Scalar>(m: &Gcgmp<S>, c: &Configuration<S>) -> Result<Vec<Vec<usize>>, DynamicsError> {
    (0..m.num_agents()).map(|a| enabled_actions(m, c, a)).collect()
}

/// Applies `profile` at `c`, discounting payoffs by `d^index`.
pub fn step<S: Scalar>(
    m: &Gcgmp<S>,
    c: &Configuration<S>,
    profile: &[usize],
    index: u64,
) -> Result<Configuration<S>, DynamicsError> {
    check_state(m, c)?;
    if profile.len() != m.num_agents() {
        return Err(DynamicsError::ProfileArity { got: profile.len(), expected: m.num_agents() });
    }
    let violator = (0..m.num_agents())
        .filter(|&a| {
            let x = profile[a];
            x >= m.actions(a).len()
                || !m.available(c.state, a).contains(&x)
                || !m.guard_holds(a, c.state, x, &c.utilities[a])
        })
        .min_by(|&a, &b| m.agents()[a].cmp(&m.agents()[b]));
    if let Some(a) = violator {
        return Err(DynamicsError::GuardViolation {
            agent: m.agents()[a].clone(),
            action: m.actions(a).get(profile[a]).cloned().unwrap_or_else(|| format!("#{}", profile[a])),
        });
    }
    Ok(apply(m, c, profile, index))
}

/// `step` without the enabledness check.
pub(crate) fn apply<S: Scalar>(m: &Gcgmp<S>, c: &Configuration<S>, profile: &[usize], index: u64) -> Configuration<S> {
    let to = m.transition(c.state, profile).expect("transition defined for every available profile");
    let pay = m.payoff(c.state, profile);
    let utilities = c
        .utilities
        .iter()
        .zip(pay)
        .zip(m.discounts())
        .map(|((u, p), d)| {
            if p.is_zero() {
                u.clone()
            } else if d.is_one() {
                u.clone() + p.clone()
            } else {
                u.clone() + d.pow_u(index) * p.clone()
            }
        })
        .collect();
    Configuration { state: to, utilities }
}

/// All guard-enabled profiles at `c` with their successors, in
/// lexicographic profile order.
pub fn successors<S: Scalar>(
    m: &Gcgmp<S>,
    c: &Configuration<S>,
    index: u64,
) -> Result<Vec<(Profile, Configuration<S>)>, DynamicsError> {
    let sets = enabled_sets(m, c)?;
    Ok(cartesian(&sets)
        .into_iter()
        .map(|p| {
            let next = apply(m, c, &p, index);
            (p, next)
        })
        .collect())
}
