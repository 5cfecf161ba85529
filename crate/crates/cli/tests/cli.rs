use std::fs;
use std::path::{Path, PathBuf};

use cidkit::{analyze, builtin_example, builtin_graph, IncentiveReport};
use cidkit_cli::run_cli;
use tempfile::TempDir;

const FIXTURE: &str = "\
cid fixture
node S chance
node D decision
node U utility
edge S -> D
edge S -> U
edge D -> U
domain S -1 1
domain D -1 1
domain U -1 1
cpt S
  : 0.5 0.5
cpt U
  -1 -1 : 0 1
  -1 1 : 1 0
  1 -1 : 1 0
  1 1 : 0 1
";

const TWO_DECISIONS: &str = "\
cid twodecisions
node A decision
node B decision
node U utility
edge A -> B
edge B -> U
";

fn cid(args: &[&str]) -> (i32, String, String) {
    run_cli(std::iter::once("cid").chain(args.iter().copied()))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_json_reports_estwalk() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fitness.cid", &builtin_example("fitness-int", None).unwrap());
    let (code, out, err) = cid(&["analyze", s(&f), "--json"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        v["nodes"]["EstWalk"],
        serde_json::json!({"observation": "no", "requisite": "no", "intervention": "none"})
    );
    let back: IncentiveReport = serde_json::from_str(&out).unwrap();
    assert_eq!(back, analyze(&builtin_graph("fitness-int").unwrap()).unwrap());
}

#[test]
fn analyze_formats() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fitness.cid", &builtin_example("fitness-obs", None).unwrap());
    let (code, out, _) = cid(&["analyze", s(&f)]);
    assert_eq!(code, 0);
    assert!(out.starts_with("graph fitness-obs\ndecision D\n"));
    assert!(out.lines().any(|l| l.split_whitespace().eq(["StepCount", "yes", "yes", "indirect"])));
    let (_, text, _) = cid(&["analyze", s(&f), "--text"]);
    assert_eq!(text, out);

    let (code, out, _) = cid(&["analyze", s(&f), "--text", "--node", "EstWalk"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);

    let (code, out, _) = cid(&["analyze", s(&f), "--dot"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph "));
    assert!(out.contains("fillcolor"));

    let (code, _, err) = cid(&["analyze", s(&f), "--node", "Nope"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[UnknownNode]"), "{err}");
}

#[test]
fn analyze_rejects_two_decisions() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "twodecisions.cid", TWO_DECISIONS);
    let (code, out, err) = cid(&["analyze", s(&f)]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("exactly one decision"), "{err}");
}

#[test]
fn voi_voc_and_solve_on_fixture() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fixture.cidm", FIXTURE);
    assert_eq!(
        cid(&["voi", s(&f), "--node", "S"]),
        (0, "VoI(S) = 1.000000000\n".to_string(), String::new())
    );
    // the optimal policy already reaches the best utility
    assert_eq!(cid(&["voc", s(&f), "--node", "S"]).1, "VoC(S) = 0.000000000\n");
    let (code, out, _) = cid(&["solve", s(&f)]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "optimal value = 1.000000000\npolicy for D given (S):\n  S=-1 -> D=-1\n  S=1 -> D=1\n"
    );
    let (code, _, err) = cid(&["voc", s(&f), "--node", "D"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[IsDecisionNode]"));
    let (code, _, err) = cid(&["voi", s(&f), "--node", "U"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[NodeDescendsFromDecision]"));
}

#[test]
fn model_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.cidm", &FIXTURE.replace("  : 0.5 0.5", "  : 0.5 0.6"));
    let (code, _, err) = cid(&["solve", s(&bad)]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[RowNotNormalized]"), "{err}");

    let missing = dir.path().join("missing.cidm");
    let (code, _, err) = cid(&["solve", s(&missing)]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[Io]"));

    let wide = write(
        &dir,
        "wide.cidm",
        &FIXTURE
            .replace("domain S -1 1", "domain S -1 0 1")
            .replace("  : 0.5 0.5", "  : 0.5 0.25 0.25")
            .replace("  1 1 : 0 1\n", "  1 1 : 0 1\n  0 -1 : 1 0\n  0 1 : 1 0\n"),
    );
    assert_eq!(cid(&["solve", s(&wide)]).0, 0);
    let (code, _, err) = cid(&["--max-domain", "2", "solve", s(&wide)]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cid(&[]).0, 2);
    assert_eq!(cid(&["frobnicate"]).0, 2);
    assert_eq!(cid(&["voi", "x.cidm"]).0, 2);
    assert_eq!(cid(&["analyze", "x.cid", "--json", "--dot"]).0, 2);
    assert_eq!(cid(&["construct", "x.cid", "--node", "A", "--mode", "both"]).0, 2);
    assert_eq!(cid(&["fuzz", "--max-nodes", "1", "--trials", "1", "--seed", "0"]).0, 2);
    let (code, out, _) = cid(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("analyze"));
}

#[test]
fn render_writes_dot() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "qa.cid", &builtin_example("qa-standard", None).unwrap());
    let plain = dir.path().join("plain.dot");
    let annotated = dir.path().join("annotated.dot");
    assert_eq!(cid(&["render", s(&f), "-o", s(&plain)]).0, 0);
    assert_eq!(cid(&["render", s(&f), "-o", s(&annotated), "--annotate"]).0, 0);
    let plain = fs::read_to_string(plain).unwrap();
    let annotated = fs::read_to_string(annotated).unwrap();
    assert!(plain.starts_with("digraph "));
    assert!(!plain.contains("fillcolor"));
    assert!(annotated.contains("fillcolor"));
}

#[test]
fn examples_print_and_parse() {
    let (code, out, _) = cid(&["example"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 10);
    for name in out.lines() {
        let (code, text, err) = cid(&["example", name]);
        assert_eq!(code, 0, "{name}: {err}");
        assert_eq!(text, builtin_example(name, None).unwrap());
    }
    assert_eq!(cid(&["example", "nope"]).0, 1);
    assert_eq!(cid(&["example", "qa-read", "--horizon", "3"]).0, 1);
    let (code, out, _) = cid(&["example", "mdp-theta", "--horizon", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("node D_3 decision"));
    assert_eq!(cid(&["example", "mdp-theta", "--horizon", "0"]).0, 1);
}

#[test]
fn frozen_mdp_flags_theta() {
    let dir = TempDir::new().unwrap();
    let (_, text, _) = cid(&["example", "mdp-theta", "--horizon", "2", "--keep-decision", "1"]);
    assert!(text.contains("node D_2 chance"));
    let f = write(&dir, "mdp.cid", &text);
    let (code, out, err) = cid(&["analyze", s(&f), "--json", "--node", "Theta"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["nodes"]["Theta"]["observation"], "yes");
    let (code, _, err) = cid(&["analyze", s(&f.with_file_name("missing.cid"))]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn constructions_round_trip_through_the_solver() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fitness.cid", &builtin_example("fitness-int", None).unwrap());
    let (code, model, err) = cid(&["construct", s(&f), "--node", "StepCount"]);
    assert_eq!(code, 0, "{err}");
    let m = write(&dir, "obs.cidm", &model);
    let (code, out, err) = cid(&["--max-domain", "64", "voi", s(&m), "--node", "StepCount"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, "VoI(StepCount) = 1.000000000\n");

    let (code, model, err) = cid(&["construct", s(&f), "--node", "TrackerFirmware", "--mode", "int"]);
    assert_eq!(code, 0, "{err}");
    let m = write(&dir, "int.cidm", &model);
    let (code, out, err) = cid(&["--max-domain", "64", "voc", s(&m), "--node", "TrackerFirmware"]);
    assert_eq!(code, 0, "{err}");
    let v: f64 = out.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(v > 0.1, "{out}");

    let (code, _, err) = cid(&["construct", s(&f), "--node", "EstWalk"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[NoIncentive]"), "{err}");
}

#[test]
fn fuzz_runs_clean() {
    let (code, out, err) = cid(&["fuzz", "--max-nodes", "5", "--trials", "40", "--seed", "3"]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("violations: 0"));
    assert!(out.starts_with("graphs: 40 "));
    let (code, _, _) = cid(&[
        "fuzz", "--max-nodes", "4", "--trials", "5", "--seed", "1", "--edge-prob", "1.5",
    ]);
    assert_eq!(code, 1);
}
