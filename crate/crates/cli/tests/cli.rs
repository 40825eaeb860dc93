use std::path::{Path, PathBuf};
use std::process::Command;

use msc_deadlock::{build_report, emit_json, run_cli, REPORT_SCHEMA};
use msc_deadlock_core::testkit::{random_scenario, Envelope};
use msc_deadlock_core::{analyze, build_graph, validate, Reachability};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.msc"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(std::iter::once("msc-deadlock").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn analyze_fixture(name: &str, extra: &[&str]) -> (i32, String, String) {
    let path = fixture(name);
    let mut args = vec!["analyze", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn validator() -> jsonschema::Validator {
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_schema_valid(json: &str) -> serde_json::Value {
    let doc: serde_json::Value = serde_json::from_str(json).unwrap();
    let errors: Vec<String> = validator().iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{json}");
    doc
}

#[test]
fn swiss_text_names_the_deadlock() {
    let (code, out, _) = analyze_fixture("swiss", &[]);
    assert_eq!(code, 2);
    assert!(out.contains("verdict: DEADLOCK at (2,2)"), "{out}");
    assert!(out.contains("T1: done 1 event, holds a, blocked at lock b (held by T2)"));
}

#[test]
fn broken_reports_position() {
    let (code, out, err) = analyze_fixture("broken", &[]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("broken.msc: error[unlock-without-lock] 4:13:"), "{err}");
}

#[test]
fn syntax_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.msc");
    std::fs::write(&path, "scenario typo\nprocess T1\nresource a\nT1: lok a; unlock a\n").unwrap();
    let (code, _, err) = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("error[syntax] 4:5:"), "{err}");
}

#[test]
fn missing_file_is_an_error() {
    let (code, _, err) = run(&["analyze", "/nonexistent/nothing.msc"]);
    assert_eq!(code, 1);
    assert!(err.contains("nothing.msc"));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(run(&["analyze"]).0, 1);
    assert_eq!(run(&["analyze", "x.msc", "--report", "yaml"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    let (code, _, help) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(help.contains("analyze"));
}

#[test]
fn fail_on_deadlock_promotes_unreachable_only() {
    assert_eq!(analyze_fixture("hidden", &[]).0, 3);
    assert_eq!(analyze_fixture("hidden", &["--fail-on-deadlock"]).0, 2);
    assert_eq!(analyze_fixture("ordered", &["--fail-on-deadlock"]).0, 0);
}

#[test]
fn oracle_modes_agree_on_fixtures() {
    for name in ["swiss", "philosophers", "ordered", "hidden", "cascade", "disjoint"] {
        let plain = analyze_fixture(name, &[]).0;
        for mode in ["check", "reachability"] {
            let (code, out, err) = analyze_fixture(name, &["--oracle", mode]);
            assert_eq!(code, plain, "{name} --oracle {mode}: {err}");
            assert!(out.contains("states agree"), "{out}");
        }
    }
}

#[test]
fn oracle_check_json_agreement() {
    let (_, json, _) = analyze_fixture("swiss", &["--report", "json", "--oracle", "check"]);
    let doc = assert_schema_valid(&json);
    assert_eq!(doc["oracle"]["agreement"], "25/25");
    assert_eq!(doc["oracle"]["mismatches"], serde_json::json!([]));
}

#[test]
fn budget_is_enforced() {
    let (code, _, err) = analyze_fixture("philosophers", &["--oracle", "check", "--max-states", "100"]);
    assert_eq!(code, 1);
    assert!(err.contains("125") && err.contains("100"), "{err}");
}

#[test]
fn disjoint_json_has_empty_regions() {
    let (code, json, _) = analyze_fixture("disjoint", &["--report", "json"]);
    assert_eq!(code, 0);
    let doc = assert_schema_valid(&json);
    for key in ["forbidden", "unsafe", "unreachable", "deadlocks"] {
        assert_eq!(doc[key], serde_json::json!([]), "{key}");
    }
}

#[test]
fn hidden_json_marks_deadlock_unreachable() {
    let (_, json, _) = analyze_fixture("hidden", &["--report", "json"]);
    let doc = assert_schema_valid(&json);
    assert_eq!(doc["deadlocks"][0]["point"], serde_json::json!([4, 5]));
    assert_eq!(doc["deadlocks"][0]["reachable"], false);
}

#[test]
fn svg_written_for_two_processes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("swiss.svg");
    let (code, _, _) = analyze_fixture("swiss", &["--svg", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(!svg.contains("href"), "no external references");
    assert_eq!(svg.matches("class=\"deadlock\"").count(), 1);
}

#[test]
fn svg_for_disjoint_has_only_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.svg");
    assert_eq!(analyze_fixture("disjoint", &["--svg", out.to_str().unwrap()]).0, 0);
    let svg = std::fs::read_to_string(&out).unwrap();
    for class in ["forbidden", "unsafe", "unreachable"] {
        assert!(!svg.contains(&format!("<rect class=\"{class}\"")), "{class}");
    }
    assert!(svg.contains(">(0,0)</text>") && svg.contains(">(1,1)</text>"));
}

#[test]
fn svg_rejects_three_processes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.svg");
    let (code, _, err) = analyze_fixture("philosophers", &["--svg", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("exactly 2 processes"), "{err}");
    assert!(!out.exists());
}

fn copy_fixtures(dir: &Path, names: &[&str]) {
    for n in names {
        std::fs::copy(fixture(n), dir.join(format!("{n}.msc"))).unwrap();
    }
}

#[test]
fn batch_mode_orders_output_and_ranks_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixtures(dir.path(), &["swiss", "ordered", "hidden", "philosophers"]);
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let svgs = dir.path().join("svg");
    std::fs::create_dir(&svgs).unwrap();

    let (code, out, err) = run(&["analyze", dir.path().to_str().unwrap(), "--svg", svgs.to_str().unwrap()]);
    assert_eq!(code, 2);
    let headers: Vec<&str> = out.lines().filter(|l| l.starts_with("== ")).collect();
    assert_eq!(headers.len(), 4);
    let order: Vec<bool> = ["hidden", "ordered", "philosophers", "swiss"]
        .windows(2)
        .map(|w| out.find(&format!("{}.msc", w[0])) < out.find(&format!("{}.msc", w[1])))
        .collect();
    assert!(order.iter().all(|&b| b), "{out}");
    assert!(err.contains("no SVG for 3 processes"), "{err}");
    assert!(svgs.join("swiss.svg").exists() && !svgs.join("philosophers.svg").exists());

    let (_, json, _) = run(&["analyze", dir.path().to_str().unwrap(), "--report", "json"]);
    let docs: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    assert_eq!(docs.len(), 4);
    let v = validator();
    assert!(docs.iter().all(|d| v.is_valid(d)));

    copy_fixtures(dir.path(), &["broken"]);
    assert_eq!(run(&["analyze", dir.path().to_str().unwrap()]).0, 1);
}

#[test]
fn batch_unreachable_only() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixtures(dir.path(), &["ordered", "hidden"]);
    assert_eq!(run(&["analyze", dir.path().to_str().unwrap()]).0, 3);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for flags in [&["--semantics"][..], &["--report", "json", "--oracle", "reachability"]] {
        let a = analyze_fixture("cascade", flags);
        let b = analyze_fixture("cascade", flags);
        assert_eq!(a, b);
    }
    let (one, two) = (dir.path().join("1.svg"), dir.path().join("2.svg"));
    analyze_fixture("swiss", &["--svg", one.to_str().unwrap()]);
    analyze_fixture("swiss", &["--svg", two.to_str().unwrap()]);
    assert_eq!(std::fs::read(one).unwrap(), std::fs::read(two).unwrap());
}

#[test]
fn random_reports_are_schema_valid() {
    let v = validator();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let env = Envelope::default();
    for _ in 0..200 {
        let s = random_scenario(&mut rng, &env);
        let g = build_graph(&validate(&s).unwrap());
        let r = analyze(&g, Reachability::Geometric);
        let doc: serde_json::Value = serde_json::from_str(&emit_json(&build_report(&g, &r, None))).unwrap();
        assert!(v.is_valid(&doc), "{s}");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_msc-deadlock");
    for (name, want) in [("ordered", 0), ("broken", 1), ("swiss", 2), ("hidden", 3)] {
        let status = Command::new(bin).arg("analyze").arg(fixture(name)).output().unwrap().status;
        assert_eq!(status.code(), Some(want), "{name}");
    }
}
