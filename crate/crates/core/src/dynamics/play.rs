//! Finite histories and ultimately periodic plays.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{step, Configuration, DynamicsError};
use crate::model::{Gcgmp, Profile, ValueSemantics};
use crate::scalar::Scalar;

/// A finite sequence of configurations linked by guard-enabled steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History<S> {
    configs: Vec<Configuration<S>>,
    profiles: Vec<Profile>,
    start_index: u64,
}

impl<S: Scalar> History<S> {
    pub fn new(start: Configuration<S>, start_index: u64) -> Self {
        History { configs: vec![start], profiles: Vec::new(), start_index }
    }

    /// Replays `profiles` from `start`, failing on the first disabled action.
    /// The error carries the position of the failing step.
    pub fn from_profiles(
        m: &Gcgmp<S>,
        start: Configuration<S>,
        start_index: u64,
        profiles: &[Profile],
    ) -> Result<Self, (usize, DynamicsError)> {
        let mut h = History::new(start, start_index);
        for (i, p) in profiles.iter().enumerate() {
            h.push(m, p.clone()).map_err(|e| (i, e))?;
        }
        Ok(h)
    }

    /// Extends the history by one step.
    pub fn push(&mut self, m: &Gcgmp<S>, profile: Profile) -> Result<(), DynamicsError> {
        let index = self.start_index + self.profiles.len() as u64;
        let next = step(m, self.last(), &profile, index)?;
        self.configs.push(next);
        self.profiles.push(profile);
        Ok(())
    }

    pub fn last(&self) -> &Configuration<S> {
        self.configs.last().expect("histories are nonempty")
    }

    pub fn configs(&self) -> &[Configuration<S>] {
        &self.configs
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An infinite play given by a finite prefix and a repeated cycle of
/// profiles. Only states must repeat at the cycle boundary; utilities may
/// keep changing from one round of the cycle to the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Play<S> {
    /// Prefix and one round of the cycle, plus the configuration after it.
    history: History<S>,
    cycle_start: usize,
}

impl<S: Scalar> Play<S> {
    pub fn lasso(
        m: &Gcgmp<S>,
        start: Configuration<S>,
        start_index: u64,
        prefix: &[Profile],
        cycle: &[Profile],
    ) -> Result<Self, (usize, DynamicsError)> {
        if cycle.is_empty() {
            return Err((prefix.len(), DynamicsError::NotLasso));
        }
        let all: Vec<Profile> = prefix.iter().chain(cycle).cloned().collect();
        let history = History::from_profiles(m, start, start_index, &all)?;
        let play = Play { history, cycle_start: prefix.len() };
        if play.history.last().state != play.history.configs[prefix.len()].state {
            return Err((all.len(), DynamicsError::NotLasso));
        }
        Ok(play)
    }

    pub fn start_index(&self) -> u64 {
        self.history.start_index
    }

    pub fn cycle_start(&self) -> usize {
        self.cycle_start
    }

    pub fn cycle_len(&self) -> usize {
        self.history.profiles.len() - self.cycle_start
    }

    /// Prefix followed by one round of the cycle.
    pub fn unrolled(&self) -> &History<S> {
        &self.history
    }

    /// `true` if the configuration, not just the state, repeats after one
    /// round, so the play visits finitely many configurations.
    pub fn is_config_periodic(&self) -> bool {
        self.history.last() == &self.history.configs[self.cycle_start]
    }

    pub fn profile_at(&self, i: usize) -> &Profile {
        let p = &self.history.profiles;
        if i < p.len() {
            &p[i]
        } else {
            let k = self.cycle_len();
            &p[self.cycle_start + (i - self.cycle_start) % k]
        }
    }

    /// The configuration at position `i`, replaying further rounds of the
    /// cycle when needed.
    pub fn config_at(&self, m: &Gcgmp<S>, i: usize) -> Result<Configuration<S>, DynamicsError> {
        let stored = &self.history.configs;
        if i < stored.len() {
            return Ok(stored[i].clone());
        }
        if self.is_config_periodic() {
            let k = self.cycle_len();
            return Ok(stored[self.cycle_start + (i - self.cycle_start) % k].clone());
        }
        let mut c = self.history.last().clone();
        for j in stored.len() - 1..i {
            c = step(m, &c, self.profile_at(j), self.start_index() + j as u64)?;
        }
        Ok(c)
    }
}

/// What to extract at a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Config,
    Utilities,
    State,
    Profile,
}

/// Value returned by [`project`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projected<S> {
    Config(Configuration<S>),
    Utilities(Vec<S>),
    State(usize),
    Profile(Profile),
}

/// Sequences that can be projected position by position.
pub trait Positions<S: Scalar> {
    fn config(&self, m: &Gcgmp<S>, i: usize) -> Result<Configuration<S>, DynamicsError>;
    fn profile(&self, i: usize) -> Result<Profile, DynamicsError>;
}

impl<S: Scalar> Positions<S> for History<S> {
    fn config(&self, _: &Gcgmp<S>, i: usize) -> Result<Configuration<S>, DynamicsError> {
        self.configs.get(i).cloned().ok_or(DynamicsError::IndexOutOfRange { index: i })
    }

    fn profile(&self, i: usize) -> Result<Profile, DynamicsError> {
        self.profiles.get(i).cloned().ok_or(DynamicsError::IndexOutOfRange { index: i })
    }
}

impl<S: Scalar> Positions<S> for Play<S> {
    fn config(&self, m: &Gcgmp<S>, i: usize) -> Result<Configuration<S>, DynamicsError> {
        self.config_at(m, i)
    }

    fn profile(&self, i: usize) -> Result<Profile, DynamicsError> {
        Ok(self.profile_at(i).clone())
    }
}

pub fn project<S: Scalar>(
    m: &Gcgmp<S>,
    seq: &impl Positions<S>,
    kind: Projection,
    i: usize,
) -> Result<Projected<S>, DynamicsError> {
    Ok(match kind {
        Projection::Config => Projected::Config(seq.config(m, i)?),
        Projection::Utilities => Projected::Utilities(seq.config(m, i)?.utilities),
        Projection::State => Projected::State(seq.config(m, i)?.state),
        Projection::Profile => Projected::Profile(seq.profile(i)?),
    })
}

/// The value `w_a` of a play under the model's value semantics.
///
/// Total and discounted values are limits of the accumulated utility, so they
/// include the starting utility. The mean value is the long-run average of
/// raw payoffs.
pub fn play_value<S: Scalar>(m: &Gcgmp<S>, play: &Play<S>, agent: usize) -> Result<S, DynamicsError> {
    let h = &play.history;
    let raw: Vec<S> = h.profiles.iter().zip(&h.configs).map(|(p, c)| m.payoff(c.state, p)[agent].clone()).collect();
    let (prefix, cycle) = raw.split_at(play.cycle_start);
    let d = m.discount(agent);
    let name = || m.agents()[agent].clone();
    let u0 = h.configs[0].utilities[agent].clone();
    let l0 = h.start_index;
    match m.value_semantics() {
        ValueSemantics::MeanLimit => {
            let sum = cycle.iter().fold(S::zero(), |a, b| a + b.clone());
            Ok(sum / S::from_int(cycle.len() as i64))
        }
        ValueSemantics::Discounted if d.is_one() => Err(DynamicsError::UndiscountedDiscounted { agent: name() }),
        ValueSemantics::Total if d.is_one() => {
            if cycle.iter().any(|x| !x.is_zero()) {
                Err(DynamicsError::Divergent { agent: name() })
            } else {
                Ok(prefix.iter().fold(u0, |a, b| a + b.clone()))
            }
        }
        ValueSemantics::Discounted | ValueSemantics::Total => {
            let mut acc = u0;
            for (i, x) in prefix.iter().enumerate() {
                acc = acc + d.pow_u(l0 + i as u64) * x.clone();
            }
            let mut round = S::zero();
            for (j, x) in cycle.iter().enumerate() {
                round = round + d.pow_u(j as u64) * x.clone();
            }
            let lead = d.pow_u(l0 + prefix.len() as u64);
            let k = cycle.len() as u64;
            Ok(acc + lead * round / (S::one() - d.pow_u(k)))
        }
    }
}

/// One row of an exported trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub state: String,
    pub utilities: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<BTreeMap<String, String>>,
}

/// Renders a history as a list of `{state, utilities, profile}` rows; the
/// last row has no profile.
pub fn trace_json<S: Scalar>(m: &Gcgmp<S>, h: &History<S>) -> Vec<TraceEntry> {
    h.configs
        .iter()
        .enumerate()
        .map(|(i, c)| TraceEntry {
            state: m.states()[c.state].clone(),
            utilities: c.utilities.iter().map(|u| u.to_string()).collect(),
            profile: h.profiles.get(i).map(|p| m.profile_names(p).into_iter().collect()),
        })
        .collect()
}
