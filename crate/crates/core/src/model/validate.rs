use std::fmt;

use serde::Serialize;

use super::Gcgmp;
use crate::arith::{check_validity_single_var, Acf, Validity};
use crate::scalar::Scalar;

/// A broken model invariant, with enough context to locate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    /// `available` is empty for some agent at some state.
    EmptyAvailable {
        agent: String,
        state: String,
    },
    /// No successor defined for an available profile.
    PartialTransition {
        state: String,
        profile: String,
    },
    /// At this utility value no available action of the agent is enabled.
    GuardTotality {
        agent: String,
        state: String,
        witness: String,
    },
    /// A guard mentions a variable other than the agent's own.
    GuardVariable {
        agent: String,
        state: String,
        action: String,
        variables: Vec<String>,
    },
    DiscountRange {
        agent: String,
        discount: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAvailable { agent, state } => {
                write!(f, "agent {agent} has no available action at {state}")
            }
            Violation::PartialTransition { state, profile } => {
                write!(f, "no transition from {state} under {profile}")
            }
            Violation::GuardTotality { agent, state, witness } => {
                write!(f, "no action of {agent} is enabled at {state} when v_{agent} = {witness}")
            }
            Violation::GuardVariable { agent, state, action, variables } => write!(
                f,
                "guard of {agent} for {action} at {state} mentions foreign variables {}",
                variables.join(", ")
            ),
            Violation::DiscountRange { agent, discount } => {
                write!(f, "discount {discount} of {agent} is outside [0,1]")
            }
        }
    }
}

impl<S: Scalar> Gcgmp<S> {
    /// Checks every structural invariant. An empty result means the model is
    /// well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (a, d) in self.discounts.iter().enumerate() {
            if d.is_negative() || *d > S::one() {
                out.push(Violation::DiscountRange { agent: self.agents[a].clone(), discount: d.to_string() });
            }
        }
        for s in 0..self.num_states() {
            let mut total = true;
            for a in 0..self.num_agents() {
                if self.available[s][a].is_empty() {
                    total = false;
                    out.push(Violation::EmptyAvailable {
                        agent: self.agents[a].clone(),
                        state: self.states[s].clone(),
                    });
                }
            }
            if total {
                for p in self.available_profiles(s) {
                    if self.transition(s, &p).is_none() {
                        out.push(Violation::PartialTransition {
                            state: self.states[s].clone(),
                            profile: self.format_profile(&p),
                        });
                    }
                }
            }
        }
        for a in 0..self.num_agents() {
            let own = &self.agents[a];
            for s in 0..self.num_states() {
                let mut clean = true;
                for (x, g) in self.guards[a][s].iter().enumerate() {
                    let foreign: Vec<String> = g.vars().into_iter().filter(|v| v != own).collect();
                    if !foreign.is_empty() {
                        clean = false;
                        out.push(Violation::GuardVariable {
                            agent: own.clone(),
                            state: self.states[s].clone(),
                            action: self.actions[a][x].clone(),
                            variables: foreign,
                        });
                    }
                }
                if !clean || self.available[s][a].is_empty() {
                    continue;
                }
                let disjunction = Acf::any(self.available[s][a].iter().map(|&x| self.guards[a][s][x].clone()));
                if let Ok(Validity::Invalid { witness, .. }) = check_validity_single_var(&disjunction) {
                    out.push(Violation::GuardTotality {
                        agent: own.clone(),
                        state: self.states[s].clone(),
                        witness: witness.to_string(),
                    });
                }
            }
        }
        out
    }
}
