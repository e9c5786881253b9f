//! End-to-end runs of the `gcgmp` binary: exit codes, report contents and
//! determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/models")
}

fn model(name: &str) -> String {
    models().join(name).display().to_string()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn gcgmp_with(args: &[&str], env: &[(&str, &str)]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_gcgmp")).args(args).envs(env.iter().copied()).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn gcgmp(args: &[&str]) -> Run {
    gcgmp_with(args, &[])
}

/// Figure 1 with the guard of I's `C` at s1 narrowed to `v_I > 0`, so at
/// `v_I = 0` nothing is enabled.
fn mutant(dir: &Path) -> String {
    let mut m: Value = serde_json::from_str(&std::fs::read_to_string(model("fig1.json")).unwrap()).unwrap();
    let g = m["guards"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|g| g["agent"] == "I" && g["state"] == "s1" && g["action"] == "C");
    g.unwrap()["formula"] = "v_I > 0".into();
    let path = dir.join("mutant.json");
    std::fs::write(&path, m.to_string()).unwrap();
    path.display().to_string()
}

fn utilities(report: &Value) -> Vec<String> {
    report["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let u: Vec<&str> = e["utilities"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
            format!("{},{}", e["state"].as_str().unwrap(), u.join(","))
        })
        .collect()
}

#[test]
fn validate_accepts_figure_one() {
    let r = gcgmp(&["validate", &model("fig1.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["valid"], true);
    assert_eq!(v["exit_code"], 0);
    assert!(v["model_hash"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn validate_rejects_a_guard_gap_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let r = gcgmp(&["validate", &mutant(dir.path())]);
    assert_eq!(r.code, 1);
    let v = r.json();
    assert_eq!(v["valid"], false);
    let violation = &v["violations"][0];
    assert_eq!(violation["kind"], "GuardTotality");
    assert_eq!(violation["agent"], "I");
    assert_eq!(violation["witness"], "0");
}

#[test]
fn other_commands_refuse_invalid_models() {
    let dir = tempfile::tempdir().unwrap();
    let path = mutant(dir.path());
    let r = gcgmp(&["check", &path, "<<I>> X p1"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("not well formed"));
    assert_eq!(r.json()["violations"][0]["kind"], "GuardTotality");
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    let broken = broken.display().to_string();
    let fig1 = model("fig1.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["validate", &broken],
        vec!["validate", "/nonexistent/model.json"],
        vec!["check", &fig1, "<<I>> X"],
        vec!["check", &fig1, "<<nobody>> X p1"],
        vec!["check", &fig1, "<<I>> X p1", "--init", "s9"],
        vec!["check", &fig1, "<<I>> X p1", "--init", "s1:0"],
        vec!["check", &fig1, "<<I>> X p1", "--sp", "sometimes"],
        vec!["simulate", &fig1, "--profiles", "C,X"],
        vec!["simulate", &fig1],
        vec!["frobnicate"],
    ];
    for args in cases {
        let r = gcgmp(&args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stdout);
        assert!(!r.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn engine_limits_exit_with_three() {
    let fig1 = model("fig1.json");
    let cases: Vec<Vec<&str>> = vec![
        // Guards mention utilities.
        vec!["check", &fig1, "<<I>> X p1", "--engine", "atl"],
        // Negative payoffs.
        vec!["check", &fig1, "<<I>> X p1", "--engine", "saturated"],
        // Path operators nested inside a coalition.
        vec!["check", &fig1, "<<I,II>> X X p2", "--engine", "bounded"],
        // Play values under a coalition.
        vec!["check", &fig1, "<<I>> (w_I >= 3)"],
        vec!["check", &fig1, "<<I>> X p1", "--sp", "m/s"],
    ];
    for args in cases {
        let r = gcgmp(&args);
        assert_eq!(r.code, 3, "{args:?}: {}", r.stdout);
        assert!(r.json()["error"].is_string());
    }
}

#[test]
fn check_reports_verdicts_with_evidence() {
    let r = gcgmp(&["check", &model("fig1.json"), "<<I>> G (p1 | v_I > 0)", "--engine", "bounded"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["verdict"], "False");
    assert_eq!(v["fragment"], "NGL");
    assert_eq!(v["init"], "s1:0,0");
    assert!(v["counterexample"].as_array().is_some_and(|t| !t.is_empty()));
    assert!(v["wall_time_ms"].is_u64());

    let r = gcgmp(&["check", &model("counter.json"), "<<a>> G (v_a <= 2)"]);
    let v = r.json();
    assert_eq!(v["engine"], "saturated");
    assert_eq!(v["verdict"], "True");
    assert_eq!(v["witness"]["table"]["a"]["s | 2"], "skip");
}

#[test]
fn witnesses_replay_through_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let r = gcgmp(&["check", &model("counter.json"), "<<a>> G (v_a <= 2)"]);
    // The whole report works as a strategy file.
    let witness = dir.path().join("witness.json");
    std::fs::write(&witness, &r.stdout).unwrap();
    let r = gcgmp(&["simulate", &model("counter.json"), "--strategy-file", witness.to_str().unwrap(), "--steps", "5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(utilities(&v), ["s,0", "s,1", "s,2", "s,2", "s,2", "s,2"]);
    assert_eq!(v["lasso"]["cycle_start"], 2);
    assert_eq!(v["values"]["a"]["value"], "2");
}

#[test]
fn simulate_reproduces_the_example_plays() {
    let fig1 = model("fig1.json");
    let r = gcgmp(&["simulate", &fig1, "--profiles", "C,C;C,C"]);
    assert_eq!(utilities(&r.json()), ["s1,0,0", "s1,2,2", "s1,4,4"]);

    let r = gcgmp(&["simulate", &fig1, "--profiles", "C,C;D,D;D,C;C,D;C,D;C,D"]);
    assert_eq!(utilities(&r.json()), ["s1,0,0", "s1,2,2", "s2,1,1", "s2,0,-1", "s2,0,1", "s2,0,3", "s2,0,5"]);

    let r = gcgmp(&["simulate", &fig1, "--profiles", "C,C;D,C;C,D;D,C;C,D;D,C;C,D;C,D"]);
    assert_eq!(
        utilities(&r.json()),
        ["s1,0,0", "s1,2,2", "s3,5,-2", "s3,4,-3", "s3,3,-4", "s3,2,-5", "s3,1,-6", "s3,0,-7", "s3,-1,-8"]
    );
}

#[test]
fn simulate_rejects_disabled_moves() {
    // At (s1, 0, 0) only C is enabled.
    let r = gcgmp(&["simulate", &model("fig1.json"), "--profiles", "D,C"]);
    assert_eq!(r.code, 1);
    let v = r.json();
    assert_eq!(v["step"], 0);
    assert_eq!(utilities(&v), ["s1,0,0"]);

    let dir = tempfile::tempdir().unwrap();
    let partial = dir.path().join("partial.json");
    std::fs::write(&partial, r#"{"I": {"s1": "C"}, "II": {"s1": "D"}}"#).unwrap();
    let r = gcgmp(&["simulate", &model("fig1.json"), "--strategy-file", partial.to_str().unwrap()]);
    assert_eq!(r.code, 1, "{}", r.stdout);
}

#[test]
fn simulate_values_lassos() {
    let dir = tempfile::tempdir().unwrap();
    let always = dir.path().join("inc.json");
    std::fs::write(&always, r#"{"a": {"s": "inc"}}"#).unwrap();
    let run = |value: &str| {
        gcgmp(&["simulate", &model("counter.json"), "--strategy-file", always.to_str().unwrap(), "--value", value])
            .json()
    };
    let mean = run("mean");
    assert_eq!(mean["lasso"]["cycle_length"], 1);
    assert_eq!(mean["values"]["a"]["value"], "1");
    assert!(run("total")["values"]["a"]["error"].as_str().unwrap().contains("diverges"));
}

#[test]
fn encoded_machines_check_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let encode = |machine: &str, variant: &str| {
        let out = dir.path().join(format!("{machine}.{variant}.json"));
        let r = gcgmp(&[
            "encode-tcm",
            &model(&format!("{machine}.tcm.json")),
            "--variant",
            variant,
            "-o",
            out.to_str().unwrap(),
            "--emit-formula",
        ]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let v = r.json();
        (out.display().to_string(), v["formula"].as_str().unwrap().to_owned(), v["init"].as_str().unwrap().to_owned())
    };
    let check = |path: &str, formula: &str, init: &str, depth: &str| {
        let r = gcgmp(&["check", path, formula, "--init", init, "--engine", "bounded", "--depth", depth]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        r.json()["verdict"].as_str().unwrap().to_owned()
    };

    let (path, formula, init) = encode("halt_in_one", "guard");
    assert_eq!(formula, "<<1>> F halt");
    assert_eq!(init, "init:0,0");
    assert_eq!(check(&path, &formula, &init, "20"), "True");
    let (path, formula, init) = encode("halt_in_one", "state");
    assert!(formula.ends_with("U halt)"));
    assert_eq!(check(&path, &formula, &init, "20"), "True");

    let (path, formula, init) = encode("up_and_down", "guard");
    assert_eq!(check(&path, &formula, &init, "18"), "True");

    // The counter grows forever, so no depth settles the question.
    let (path, formula, init) = encode("climb", "guard");
    assert_eq!(check(&path, &formula, &init, "1000"), "Unknown");
    // The self loop revisits its configurations, which proves it never halts.
    let (path, formula, init) = encode("spin", "guard");
    assert_eq!(check(&path, &formula, &init, "1000"), "False");
}

#[test]
fn encode_prints_the_model_without_an_output_file() {
    let r = gcgmp(&["encode-tcm", &model("halt_in_one.tcm.json")]);
    assert_eq!(r.code, 0);
    let m = gcgmp::model::load_model::<gcgmp::Payoff>(&r.stdout).unwrap();
    assert!(m.validate().is_empty());
    assert_eq!(m.agents(), ["1", "2"]);
}

#[test]
fn export_graph_of_figure_one() {
    let r = gcgmp(&["export-graph", &model("fig1.json"), "--bound", "1"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.matches("[label=\"s").count(), 2);

    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("fig1.dot");
    let r = gcgmp(&["export-graph", &model("fig1.json"), "--init", "s1", "--bound", "2", "-o", dot.to_str().unwrap()]);
    let v = r.json();
    assert_eq!(v["nodes"], 6);
    assert_eq!(v["edges"], 5);
    assert_eq!(v["truncated"], true);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    for node in ["s1 | 0,0", "s1 | 2,2", "s1 | 4,4", "s2 | 0,5", "s3 | 5,-2", "s2 | 1,1"] {
        assert!(text.contains(&format!("label=\"{node}\"")), "{node}");
    }
    assert_eq!(text.matches("style=dashed").count(), 4);
}

#[test]
fn reports_are_deterministic() {
    let strip = |r: Run| {
        let mut v = r.json();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    let fig1 = model("fig1.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["check", &fig1, "<<I,II>> F (p1 & v_I > 5 & v_II > 5)", "--engine", "bounded"],
        vec!["check", &fig1, "<<I>> G (p1 | v_I > 0)"],
        vec!["simulate", &fig1, "--profiles", "C,C;D,D;D,C"],
        vec!["validate", &fig1],
    ];
    for args in runs {
        let a = strip(gcgmp(&args));
        let b = strip(gcgmp_with(&args, &[("GCGMP_THREADS", "1")]));
        let c = strip(gcgmp_with(&args, &[("GCGMP_THREADS", "3")]));
        assert_eq!(a, b, "{args:?}");
        assert_eq!(a, c, "{args:?}");
    }
    // Equal models hash equally however they are formatted.
    let dir = tempfile::tempdir().unwrap();
    let compact = dir.path().join("compact.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&fig1).unwrap()).unwrap();
    std::fs::write(&compact, v.to_string()).unwrap();
    let hash = |p: &str| gcgmp(&["validate", p]).json()["model_hash"].clone();
    assert_eq!(hash(&fig1), hash(compact.to_str().unwrap()));
}

#[test]
fn bad_thread_counts_are_input_errors() {
    for bad in ["0", "many", "-2"] {
        let r = gcgmp_with(&["validate", &model("fig1.json")], &[("GCGMP_THREADS", bad)]);
        assert_eq!(r.code, 2, "{bad}");
        assert!(r.stderr.contains("GCGMP_THREADS"));
    }
}

#[test]
fn help_and_version_succeed() {
    for flag in ["--help", "--version"] {
        let r = gcgmp(&[flag]);
        assert_eq!(r.code, 0);
        assert!(!r.stdout.is_empty());
    }
}
