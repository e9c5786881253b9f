//! JSON model files.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Gcgmp, ModelError, ValueSemantics};
use crate::arith::{parse_acf, Acf};
use crate::scalar::Scalar;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    agents: Vec<String>,
    states: Vec<String>,
    actions: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    available: Option<BTreeMap<String, BTreeMap<String, Vec<String>>>>,
    transitions: Vec<TransitionEntry>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    payoffs: Vec<PayoffEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    guards: Vec<GuardEntry>,
    #[serde(default)]
    discounts: BTreeMap<String, String>,
    #[serde(default)]
    value_semantics: ValueSemantics,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: String,
    profile: BTreeMap<String, String>,
    to: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PayoffEntry {
    state: String,
    profile: BTreeMap<String, String>,
    values: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GuardEntry {
    agent: String,
    state: String,
    action: String,
    formula: String,
}

/// Maps a byte offset to a 1-based line and column.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Locates the `nth` occurrence of a quoted string, for error reporting.
fn locate(text: &str, value: &str, nth: usize) -> (usize, usize) {
    let needle = format!("\"{value}\"");
    text.match_indices(&needle).nth(nth).map_or((0, 0), |(i, _)| line_col(text, i))
}

fn parse_error(text: &str, value: &str, nth: usize, expected: impl Into<String>) -> ModelError {
    let (line, column) = locate(text, value, nth);
    ModelError::Parse { line, column, expected: expected.into() }
}

fn unique(text: &str, kind: &str, names: &[String]) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(parse_error(text, n, 1, format!("distinct {kind} identifiers")));
        }
    }
    if names.is_empty() {
        return Err(ModelError::Parse { line: 1, column: 1, expected: format!("at least one {kind}") });
    }
    Ok(())
}

fn rational<S: Scalar>(text: &str, raw: &str) -> Result<S, ModelError> {
    S::parse_rational(raw).ok_or_else(|| parse_error(text, raw, 0, "a rational string \"p\" or \"p/q\""))
}

fn unknown(kind: &'static str, name: &str) -> ModelError {
    ModelError::UnknownIdentifier { kind, name: name.to_string() }
}

/// Parses a model file. The result is not validated.
pub fn load_model<S: Scalar>(text: &str) -> Result<Gcgmp<S>, ModelError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        expected: e.to_string(),
    })?;
    unique(text, "agent", &file.agents)?;
    unique(text, "state", &file.states)?;
    for key in file.actions.keys() {
        if !file.agents.contains(key) {
            return Err(unknown("agent", key));
        }
    }
    let mut actions = Vec::new();
    for a in &file.agents {
        let acts =
            file.actions.get(a).ok_or_else(|| parse_error(text, a, 0, format!("an action list for agent {a}")))?;
        unique(text, "action", acts)?;
        actions.push(acts.clone());
    }
    let mut m: Gcgmp<S> = Gcgmp::new(file.agents.clone(), file.states.clone(), actions)
        .map_err(|e| ModelError::Parse { line: 1, column: 1, expected: e.to_string() })?;

    let state = |m: &Gcgmp<S>, name: &str| m.state_index(name).ok_or_else(|| unknown("state", name));
    let agent = |m: &Gcgmp<S>, name: &str| m.agent_index(name).ok_or_else(|| unknown("agent", name));
    let profile = |m: &Gcgmp<S>, map: &BTreeMap<String, String>| -> Result<Vec<usize>, ModelError> {
        for k in map.keys() {
            agent(m, k)?;
        }
        (0..m.num_agents())
            .map(|a| {
                let name = &m.agents()[a];
                let act = map.get(name).ok_or_else(|| {
                    parse_error(text, name, 0, format!("an action for agent {name} in every profile"))
                })?;
                m.action_index(a, act).ok_or_else(|| unknown("action", act))
            })
            .collect()
    };

    if let Some(avail) = &file.available {
        for (s_name, per_agent) in avail {
            let s = state(&m, s_name)?;
            for (a_name, acts) in per_agent {
                let a = agent(&m, a_name)?;
                let idx = acts
                    .iter()
                    .map(|x| m.action_index(a, x).ok_or_else(|| unknown("action", x)))
                    .collect::<Result<Vec<_>, _>>()?;
                m.set_available(s, a, idx);
            }
        }
    }
    for t in &file.transitions {
        let from = state(&m, &t.from)?;
        let to = state(&m, &t.to)?;
        let p = profile(&m, &t.profile)?;
        m.set_transition(from, &p, to);
    }
    for (s_name, props) in &file.labels {
        let s = state(&m, s_name)?;
        m.set_labels(s, props.iter().cloned());
    }
    for entry in &file.payoffs {
        let s = state(&m, &entry.state)?;
        let p = profile(&m, &entry.profile)?;
        let mut values = m.payoff(s, &p).to_vec();
        for (a_name, raw) in &entry.values {
            let a = agent(&m, a_name)?;
            values[a] = rational(text, raw)?;
        }
        m.set_payoff(s, &p, values);
    }
    for g in &file.guards {
        let a = agent(&m, &g.agent)?;
        let s = state(&m, &g.state)?;
        let x = m.action_index(a, &g.action).ok_or_else(|| unknown("action", &g.action))?;
        let f: Acf<S> = parse_acf(&g.formula).map_err(|source| ModelError::Formula {
            context: format!("guard of {} for {} at {}", g.agent, g.action, g.state),
            source,
        })?;
        m.set_guard(a, s, x, f);
    }
    for (a_name, raw) in &file.discounts {
        let a = agent(&m, a_name)?;
        m.set_discount(a, rational(text, raw)?);
    }
    m.set_value_semantics(file.value_semantics);
    Ok(m)
}

fn named_profile<S: Scalar>(m: &Gcgmp<S>, p: &[usize]) -> BTreeMap<String, String> {
    m.profile_names(p).into_iter().collect()
}

/// Canonical JSON rendering. Loading the output yields an equal model.
pub fn to_json<S: Scalar>(m: &Gcgmp<S>) -> String {
    let full = (0..m.num_states()).all(|s| (0..m.num_agents()).all(|a| m.available(s, a).len() == m.actions(a).len()));
    let available = (!full).then(|| {
        (0..m.num_states())
            .map(|s| {
                let per_agent = (0..m.num_agents())
                    .map(|a| {
                        let acts = m.available(s, a).iter().map(|&x| m.actions(a)[x].clone()).collect();
                        (m.agents()[a].clone(), acts)
                    })
                    .collect();
                (m.states()[s].clone(), per_agent)
            })
            .collect()
    });
    let mut transitions = Vec::new();
    let mut payoffs = Vec::new();
    for s in 0..m.num_states() {
        for p in m.all_profiles() {
            if let Some(to) = m.transition(s, &p) {
                transitions.push(TransitionEntry {
                    from: m.states()[s].clone(),
                    profile: named_profile(m, &p),
                    to: m.states()[to].clone(),
                });
            }
            let values = m.payoff(s, &p);
            if values.iter().any(|v| !v.is_zero()) {
                payoffs.push(PayoffEntry {
                    state: m.states()[s].clone(),
                    profile: named_profile(m, &p),
                    values: m.agents().iter().cloned().zip(values.iter().map(|v| v.to_string())).collect(),
                });
            }
        }
    }
    let mut guards = Vec::new();
    for a in 0..m.num_agents() {
        for s in 0..m.num_states() {
            for x in 0..m.actions(a).len() {
                let g = m.guard(a, s, x);
                if *g != Acf::Const(true) {
                    guards.push(GuardEntry {
                        agent: m.agents()[a].clone(),
                        state: m.states()[s].clone(),
                        action: m.actions(a)[x].clone(),
                        formula: g.to_string(),
                    });
                }
            }
        }
    }
    let file = ModelFile {
        agents: m.agents().to_vec(),
        states: m.states().to_vec(),
        actions: (0..m.num_agents()).map(|a| (m.agents()[a].clone(), m.actions(a).to_vec())).collect(),
        available,
        transitions,
        labels: (0..m.num_states())
            .filter(|&s| !m.labels(s).is_empty())
            .map(|s| (m.states()[s].clone(), m.labels(s).iter().cloned().collect()))
            .collect(),
        payoffs,
        guards,
        discounts: (0..m.num_agents()).map(|a| (m.agents()[a].clone(), m.discount(a).to_string())).collect(),
        value_semantics: m.value_semantics(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_fig1;
    use crate::Payoff;

    const MINIMAL: &str = r#"{
        "agents": ["a"],
        "states": ["s"],
        "actions": {"a": ["x"]},
        "transitions": [{"from": "s", "profile": {"a": "x"}, "to": "s"}],
        "payoffs": [{"state": "s", "profile": {"a": "x"}, "values": {"a": "0"}}]
    }"#;

    #[test]
    fn minimal_model_loads_and_validates() {
        let m: Gcgmp<Payoff> = load_model(MINIMAL).unwrap();
        assert_eq!(m.num_states(), 1);
        assert!(m.validate().is_empty());
        assert_eq!(m.discount(0), &Payoff::from_int(1));
        assert_eq!(m.guard(0, 0, 0), &Acf::Const(true));
    }

    #[test]
    fn fig1_round_trips() {
        let m = builtin_fig1();
        let text = to_json(&m);
        let back: Gcgmp<Payoff> = load_model(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn duplicate_state_is_a_parse_error() {
        let text = MINIMAL.replace(r#"["s"]"#, r#"["s", "t", "s"]"#);
        match load_model::<Payoff>(&text) {
            Err(ModelError::Parse { line, expected, .. }) => {
                assert_eq!(line, 3);
                assert!(expected.contains("distinct state"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_identifiers() {
        let text = MINIMAL.replace(r#""agents""#, r#""colour": 1, "agents""#);
        assert!(matches!(load_model::<Payoff>(&text), Err(ModelError::Parse { .. })));
        let text = MINIMAL.replace(r#""to": "s""#, r#""to": "t""#);
        assert_eq!(
            load_model::<Payoff>(&text).unwrap_err(),
            ModelError::UnknownIdentifier { kind: "state", name: "t".into() }
        );
        assert!(load_model::<Payoff>("{ not json").is_err());
    }

    #[test]
    fn bad_rationals_are_rejected() {
        let text = MINIMAL.replace(r#""values": {"a": "0"}"#, r#""values": {"a": "1/0"}"#);
        assert!(matches!(load_model::<Payoff>(&text), Err(ModelError::Parse { .. })));
    }
}
