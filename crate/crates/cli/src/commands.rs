use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use gcgmp::checker::{
    atl_exact_for, check_atl, check_bounded, check_saturated, saturated_exact_for, Budget, CheckError, Verdict,
};
use gcgmp::dynamics::{explore, play_value, trace_json, Bound, Configuration, History, Play};
use gcgmp::logic::{parse_formula, Fragment, StateFormula};
use gcgmp::model::{to_json, Profile, ValueSemantics};
use gcgmp::tcm::{encode, TwoCounterMachine, Variant};
use gcgmp::{Model, Payoff};
use serde_json::{json, Value};

use crate::{
    init_text, initial, load, load_valid, read, write_file, CheckArgs, EncodeArgs, Engine, ExportArgs, Failure, Output,
    SimulateArgs, ValueKind, VariantArg,
};

fn report(code: i32, report: Value) -> Result<Output, Failure> {
    Ok(Output::Report { code, report })
}

pub fn validate(path: &Path) -> Result<Output, Failure> {
    let (m, hash) = load(path)?;
    let violations = m.validate();
    let code = if violations.is_empty() { 0 } else { 1 };
    report(
        code,
        json!({
            "model": path.display().to_string(),
            "model_hash": hash,
            "valid": violations.is_empty(),
            "violations": violations,
        }),
    )
}

/// Bind errors are malformed input; anything else means the engine cannot
/// take the instance.
fn engine_failure(e: CheckError) -> Failure {
    match e {
        CheckError::Bind(_) => Failure::input(e),
        _ => Failure::engine(e),
    }
}

pub fn check(a: &CheckArgs) -> Result<Output, Failure> {
    let (m, hash) = load_valid(&a.model)?;
    let f: StateFormula<Payoff> = parse_formula(&a.formula).map_err(|e| Failure::input(format!("formula: {e}")))?;
    f.bind(&m).map_err(Failure::input)?;
    let c0 = initial(&m, a.init.as_deref())?;
    let (sp, so) = (a.sp, a.so);
    let fragment = f.classify();
    let unsupported = |engine| engine_failure(CheckError::UnsupportedClasses { engine, sp, so });
    let atl = || -> Result<Verdict, Failure> {
        if !m.all_guards_state_based() {
            return Err(Failure::engine("atl engine needs guards that do not mention utilities"));
        }
        if !atl_exact_for(sp, so) {
            return Err(unsupported("atl"));
        }
        let sat = check_atl(&m, &f).map_err(engine_failure)?;
        Ok(Verdict::definite(sat.contains(&c0.state)))
    };
    let budget = Budget { max_depth: a.depth, max_strategies: a.max_strategies, max_nodes: a.max_nodes };
    let bounded = || check_bounded(&m, &c0, &f, sp, so, budget).map_err(engine_failure);
    let (engine, verdict) = match a.engine {
        Engine::Atl => ("atl", atl()?),
        Engine::Bounded => ("bounded", bounded()?),
        Engine::Saturated => {
            if !saturated_exact_for(sp, so) {
                return Err(unsupported("saturated"));
            }
            ("saturated", check_saturated(&m, &c0, &f).map_err(engine_failure)?)
        }
        Engine::Auto => {
            if fragment == Fragment::AtlPure && m.all_guards_state_based() && atl_exact_for(sp, so) {
                ("atl", atl()?)
            } else {
                match saturated_exact_for(sp, so).then(|| check_saturated(&m, &c0, &f)) {
                    Some(Ok(v)) => ("saturated", v),
                    Some(Err(e @ CheckError::Bind(_))) => return Err(Failure::input(e)),
                    _ => ("bounded", bounded()?),
                }
            }
        }
    };
    let mut out = json!({
        "model": a.model.display().to_string(),
        "model_hash": hash,
        "formula": f.to_string(),
        "fragment": fragment,
        "engine": engine,
        "sp": sp.to_string(),
        "so": so.to_string(),
        "init": init_text(&m, &c0),
    });
    if engine == "bounded" {
        out["budget"] = json!({
            "max_depth": budget.max_depth,
            "max_strategies": budget.max_strategies,
            "max_nodes": budget.max_nodes,
        });
    }
    let Value::Object(fields) = serde_json::to_value(&verdict).expect("serializable") else { unreachable!() };
    out.as_object_mut().expect("object").extend(fields);
    report(0, out)
}

fn profile_from(m: &Model, v: &Value) -> Result<Profile, Failure> {
    let names: Vec<String> = match v {
        Value::Array(xs) => xs.iter().map(|x| x.as_str().map(String::from)).collect::<Option<_>>(),
        Value::Object(map) => m.agents().iter().map(|a| map.get(a).and_then(Value::as_str).map(String::from)).collect(),
        _ => None,
    }
    .ok_or_else(|| {
        Failure::input(format!("bad profile {v}: expected a list of actions or an object agent -> action"))
    })?;
    m.parse_profile(&names).map_err(Failure::input)
}

fn script(m: &Model, a: &SimulateArgs) -> Result<Vec<Profile>, Failure> {
    if let Some(text) = &a.profiles {
        return text
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| m.parse_profile(&p.split(',').map(str::trim).collect::<Vec<_>>()).map_err(Failure::input))
            .collect();
    }
    let path = a.profile_script.as_ref().expect("one source of moves");
    let v: Value =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let Value::Array(items) = v else {
        return Err(Failure::input("a profile script is a JSON list of profiles"));
    };
    items.iter().map(|p| profile_from(m, p)).collect()
}

type Tables = BTreeMap<String, BTreeMap<String, String>>;

fn strategies(m: &Model, path: &Path) -> Result<Tables, Failure> {
    let bad = |e: String| Failure::input(format!("{}: {e}", path.display()));
    let mut v: Value = serde_json::from_str(&read(path)?).map_err(|e| bad(e.to_string()))?;
    // A whole `check` report, or just its witness.
    for key in ["witness", "table"] {
        if let Some(t) = v.get_mut(key).filter(|t| t.is_object()) {
            v = t.take();
        }
    }
    let tables: Tables = serde_json::from_value(v).map_err(|e| bad(e.to_string()))?;
    if let Some(a) = m.agents().iter().find(|a| !tables.contains_key(*a)) {
        return Err(bad(format!("no strategy for agent `{a}`")));
    }
    Ok(tables)
}

pub fn simulate(a: &SimulateArgs) -> Result<Output, Failure> {
    let (mut m, hash) = load_valid(&a.model)?;
    if let Some(v) = a.value {
        m.set_value_semantics(match v {
            ValueKind::Total => ValueSemantics::Total,
            ValueKind::Discounted => ValueSemantics::Discounted,
            ValueKind::Mean => ValueSemantics::MeanLimit,
        });
    }
    let c0 = initial(&m, a.init.as_deref())?;
    let mut h = History::new(c0.clone(), 1);
    let failed = |h: &History<Payoff>, step: usize, e: String| {
        Failure::rejected(format!("step {step}: {e}"), json!({ "step": step, "trace": trace_json(&m, h) }))
    };
    let mut lasso = None;
    if let Some(path) = &a.strategy_file {
        let tables = strategies(&m, path)?;
        // Timed observations break the link between a repeated configuration
        // and a repeating play.
        let timed = tables.values().flat_map(|t| t.keys()).any(|k| k.contains(" @"));
        // With state-keyed tables and guards that ignore utilities, the moves
        // repeat as soon as the state does.
        let by_state =
            m.all_guards_state_based() && tables.values().flat_map(|t| t.keys()).all(|k| m.state_index(k).is_some());
        let observe = |c: &Configuration<Payoff>| {
            if by_state {
                Configuration::zero(c.state, 0)
            } else {
                c.clone()
            }
        };
        let mut seen = HashMap::from([(observe(&c0), 0usize)]);
        for step in 0..a.steps.unwrap_or(10) {
            let c = h.last().clone();
            let display = c.display(&m).to_string();
            let keys = [format!("{display} @{}", step + 1), display, m.states()[c.state].clone()];
            let mut names = Vec::new();
            for agent in m.agents() {
                let table = &tables[agent];
                let name = keys
                    .iter()
                    .find_map(|k| table.get(k))
                    .ok_or_else(|| failed(&h, step, format!("no action for {agent} at `{}`", keys[1])))?;
                names.push(name.as_str());
            }
            let p = m.parse_profile(&names).map_err(|e| failed(&h, step, e.to_string()))?;
            h.push(&m, p).map_err(|e| failed(&h, step, e.to_string()))?;
            if lasso.is_none() && !timed {
                let key = observe(h.last());
                if let Some(&start) = seen.get(&key) {
                    lasso = Some((start, h.profiles().len() - start));
                }
                seen.insert(key, step + 1);
            }
        }
    } else {
        let profiles = script(&m, a)?;
        let steps = a.steps.unwrap_or(profiles.len());
        if steps > profiles.len() {
            return Err(Failure::input(format!("the script has only {} profiles", profiles.len())));
        }
        for (step, p) in profiles.into_iter().take(steps).enumerate() {
            h.push(&m, p).map_err(|e| failed(&h, step, e.to_string()))?;
        }
    }
    let mut out = json!({
        "model": a.model.display().to_string(),
        "model_hash": hash,
        "init": init_text(&m, &h.configs()[0]),
        "steps": h.profiles().len(),
        "trace": trace_json(&m, &h),
        "value_semantics": m.value_semantics(),
    });
    if let Some((start, len)) = lasso {
        let p = h.profiles();
        let play = Play::lasso(&m, h.configs()[0].clone(), 1, &p[..start], &p[start..start + len])
            .map_err(|(step, e)| failed(&h, step, e.to_string()))?;
        let values: BTreeMap<&str, Value> = m
            .agents()
            .iter()
            .enumerate()
            .map(|(i, agent)| {
                let v = match play_value(&m, &play, i) {
                    Ok(v) => json!({ "value": v.to_string() }),
                    Err(e) => json!({ "error": e.to_string() }),
                };
                (agent.as_str(), v)
            })
            .collect();
        out["lasso"] = json!({ "cycle_start": start, "cycle_length": len });
        out["values"] = json!(values);
    }
    report(0, out)
}

pub fn encode_tcm(a: &EncodeArgs) -> Result<Output, Failure> {
    let machine = TwoCounterMachine::from_json(&read(&a.machine)?).map_err(Failure::input)?;
    let variant = match a.variant {
        VariantArg::Guard => Variant::GuardBased,
        VariantArg::State => Variant::StateBasedGuards,
    };
    let e = encode::<Payoff>(&machine, variant);
    let text = to_json(&e.model);
    let Some(path) = &a.output else { return Ok(Output::Artifact(text + "\n")) };
    write_file(path, &(text + "\n"))?;
    let (_, hash) = load(path)?;
    let mut out = json!({
        "machine": a.machine.display().to_string(),
        "variant": match a.variant { VariantArg::Guard => "guard", VariantArg::State => "state" },
        "output": path.display().to_string(),
        "model_hash": hash,
        "states": e.model.num_states(),
        "init": init_text(&e.model, &e.initial),
    });
    if a.emit_formula {
        out["formula"] = json!(e.formula.to_string());
    }
    report(0, out)
}

pub fn export_graph(a: &ExportArgs) -> Result<Output, Failure> {
    let (m, hash) = load_valid(&a.model)?;
    let c0 = initial(&m, a.init.as_deref())?;
    let g = explore(&m, c0.clone(), 1, Bound { max_steps: Some(a.bound), max_nodes: a.max_nodes });
    let dot = g.to_dot(&m);
    let Some(path) = &a.output else { return Ok(Output::Artifact(dot)) };
    write_file(path, &dot)?;
    report(
        0,
        json!({
            "model": a.model.display().to_string(),
            "model_hash": hash,
            "init": init_text(&m, &c0),
            "bound": a.bound,
            "nodes": g.len(),
            "edges": (0..g.len()).map(|v| g.edges(v).len()).sum::<usize>(),
            "truncated": g.truncated(),
            "output": path.display().to_string(),
        }),
    )
}
