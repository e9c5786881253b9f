//! Model checking engines.
//!
//! * [`check_atl`]: qualitative fixpoints on the state graph.
//! * [`check_saturated`]: exact for non-negative payoffs and unit discounts,
//!   by capping utilities once no constraint can tell them apart.
//! * [`check_bounded`]: three-valued checking on a growing prefix of the
//!   configuration graph, for any pair of strategy classes.
//! * [`enumerate_oracle`]: literal strategy enumeration for tiny instances,
//!   used to cross-check the others.

mod apc;
mod arena;
mod atl;
mod bounded;
mod fixpoint;
mod oracle;
mod saturated;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Not;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{DynamicsError, TraceEntry};
use crate::logic::{BindError, Fragment, Memory, Observation, StrategyClass};

pub use apc::check_apc_play;
pub use atl::{atl_exact_for, check_atl};
pub use bounded::{check_bounded, Budget};
pub use oracle::{enumerate_oracle, ORACLE_MAX_ACTIONS, ORACLE_MAX_DEPTH, ORACLE_MAX_STATES};
pub use saturated::{check_saturated, saturated_exact_for, saturation_cap};

/// Three-valued truth, ordered `False < Unknown < True`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Truth {
    False,
    Unknown,
    True,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn is_definite(self) -> bool {
        self != Truth::Unknown
    }

    /// Kleene conjunction.
    pub fn and(self, other: Truth) -> Truth {
        self.min(other)
    }

    /// Kleene disjunction.
    pub fn or(self, other: Truth) -> Truth {
        self.max(other)
    }
}

impl Not for Truth {
    type Output = Truth;

    fn not(self) -> Truth {
        match self {
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
            Truth::True => Truth::False,
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::False => "False",
            Truth::Unknown => "Unknown",
            Truth::True => "True",
        })
    }
}

/// A coalition strategy: for every coalition member, the action prescribed
/// at each observation. Observations are state names, rendered
/// configurations (`s1 | 2,2`), or, for saturated engines, configurations
/// whose saturated utilities print as `>cap`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyTable {
    pub class: StrategyClass,
    pub table: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub verdict: Truth,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<StrategyTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<TraceEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_used: Option<usize>,
}

impl Verdict {
    pub fn definite(value: bool) -> Verdict {
        Verdict { verdict: Truth::from_bool(value), witness: None, counterexample: None, bound_used: None }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("formula is {found} but this engine needs {required}")]
    Fragment { found: Fragment, required: Fragment },
    #[error("coalition body `{0}` is not of the form X φ, G φ or φ U ψ")]
    UnsupportedBody(String),
    #[error("payoffs or utilities are not monotone: {0}")]
    NotMonotone(String),
    #[error("atom `{0}` compares two variable terms")]
    VariableVsVariableAtom(String),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),
    #[error(
        "state-based strategies for `{agent}` need state-based guards, but its guard at `{state}` mentions utilities"
    )]
    StateBasedStrategyWithUtilityGuard { agent: String, state: String },
    #[error("{engine} engine does not decide strategy classes {sp} against {so}")]
    UnsupportedClasses { engine: &'static str, sp: StrategyClass, so: StrategyClass },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Opponents that can realise any sequence of moves along a play once the
/// proponent strategy is fixed: perfect-recall opponents of either kind, and
/// memoryless configuration-based opponents when the proponent is itself
/// memoryless (the opponent's answer then depends on the configuration only).
pub(crate) fn opponent_answers_freely(sp: StrategyClass, so: StrategyClass) -> bool {
    so.memory == Memory::PerfectRecall
        || (so.observation == Observation::ConfigurationBased && sp.memory == Memory::Memoryless)
}
