//! End-to-end tests of the binary: report reproducibility, formats, the
//! negative verification paths, and cache behavior. Everything here runs at
//! weight 2 so the whole file finishes in seconds.

use std::path::Path;
use std::process::{Command, Output};

use sympder_core::{select_coordinates, selected_profile, SamplingBudget, Spider};
use sympder_linalg::default_primes;
use sympder_pipeline::CocycleVector;

fn sympder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn text_mode_prints_the_bare_dimension() {
    let out = sympder(&[
        "--genus", "2", "--weight", "2", "--seed", "5", "--format", "text", "dim-invariants",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "1");
}

#[test]
fn json_reports_are_reproducible_modulo_timings() {
    let run = || {
        let out = sympder(&["--genus", "2", "--weight", "2", "--seed", "5", "dim-invariants"]);
        assert!(out.status.success(), "{}", stderr(&out));
        serde_json::from_str::<serde_json::Value>(&stdout(&out)).unwrap()
    };
    let mut a = run();
    let mut b = run();
    let hash_a = a["report_hash"].as_str().unwrap().to_string();
    let hash_b = b["report_hash"].as_str().unwrap().to_string();
    assert_eq!(hash_a, hash_b);
    a.as_object_mut().unwrap().remove("timings_ms");
    b.as_object_mut().unwrap().remove("timings_ms");
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn csv_reports_carry_the_ranks() {
    let out = sympder(&[
        "--genus", "2", "--weight", "2", "--seed", "5", "--format", "csv", "bracket-rank",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("invariant_dim,1"), "{text}");
    assert!(text.contains("bracket_rank,1"), "{text}");
    assert!(text.contains("corank,0"), "{text}");
    assert!(text.contains("report_hash,"), "{text}");
}

#[test]
fn invalid_configs_fail_with_structured_errors() {
    for args in [
        vec!["--weight", "3", "dim-invariants"],
        vec!["--weight", "14", "dim-invariants"],
        vec!["--genus", "0", "dim-invariants"],
        vec!["--primes", "4,6", "dim-invariants"],
        vec!["--threads", "0", "dim-invariants"],
    ] {
        let out = sympder(&args);
        assert!(!out.status.success(), "args {args:?} should fail");
        // The failure object is the last stderr line (warnings may precede it).
        let text = stderr(&out);
        let last = text.lines().rev().find(|l| !l.trim().is_empty()).unwrap();
        let err: serde_json::Value = serde_json::from_str(last)
            .unwrap_or_else(|_| panic!("stderr not JSON for {args:?}: {text}"));
        assert!(err["error"].is_string());
        assert_eq!(err["command"], "dim-invariants");
    }
}

#[test]
fn cache_directory_makes_the_second_run_a_hit() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let run = || {
        let out = sympder(&[
            "--genus", "2", "--weight", "2", "--seed", "5", "--cache-dir", cache, "dim-invariants",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        serde_json::from_str::<serde_json::Value>(&stdout(&out)).unwrap()
    };
    let first = run();
    assert_eq!(first["cache_hits"]["coordinates"], false);
    let second = run();
    assert_eq!(second["cache_hits"]["coordinates"], true);
    assert_eq!(first["artifacts"]["coordinates"], second["artifacts"]["coordinates"]);
    assert_eq!(first["report_hash"], second["report_hash"]);
}

/// A hand-built weight-2 "cocycle" file. No true cocycle exists at weight 2
/// (brackets span the whole line), so this artifact doubles as the corrupted
/// input for the negative verification paths while still being internally
/// consistent enough for eval.
fn synthetic_weight_two_cocycle(path: &Path) -> (String, i64) {
    let cs = select_coordinates(
        sympder_core::Genus::new(2).unwrap(),
        2,
        5,
        &SamplingBudget::default(),
        default_primes(),
    )
    .unwrap();
    assert_eq!(cs.rank, 1);
    let sel = cs.selected().unwrap();
    let witness = "S(a1,b1,a1,b1)";
    let spider: Spider = witness.parse().unwrap();
    let profile = selected_profile(&spider.expand(), &sel).unwrap();
    let raw = profile[0];
    assert_ne!(raw, 0, "witness must pair nontrivially");
    let artifact = CocycleVector {
        genus: 2,
        weight: 2,
        seed: 5,
        primes_used: default_primes().to_vec(),
        witness: witness.to_string(),
        raw_witness_value: raw.to_string(),
        integer_kernel: vec!["1".to_string()],
        coefficients: vec![format!("5832/{raw}")],
    };
    artifact.save(path).unwrap();
    (witness.to_string(), raw)
}

#[test]
fn eval_prints_the_normalized_witness_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let (witness, _) = synthetic_weight_two_cocycle(&path);
    let out = sympder(&[
        "--weight", "2", "--format", "text", "eval",
        "--cocycle", path.to_str().unwrap(), &witness,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "5832");
}

#[test]
fn eval_rejects_a_spider_of_the_wrong_degree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    synthetic_weight_two_cocycle(&path);
    let out = sympder(&[
        "--weight", "2", "eval", "--cocycle", path.to_str().unwrap(), "S(a1,b1,a1,b1,a1,b1)",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("degree"), "{}", stderr(&out));
}

#[test]
fn numeric_verify_names_the_first_failing_bracket() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    synthetic_weight_two_cocycle(&path);
    let out = sympder(&[
        "--weight", "2", "verify", "--mode", "numeric",
        "--cocycle", path.to_str().unwrap(), "--count", "40",
    ]);
    assert!(!out.status.success(), "a weight-2 functional cannot kill all brackets");
    let err = stderr(&out);
    assert!(err.contains("holdout bracket"), "{err}");
    assert!(err.contains("[S("), "error should include the bracket text: {err}");
}

#[test]
fn symbolic_verify_rejects_a_nonzero_functional() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    synthetic_weight_two_cocycle(&path);
    let out = sympder(&[
        "--weight", "2", "verify", "--mode", "symbolic", "--cocycle", path.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("nonzero at split 1"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn es_rank_reports_class_counts_at_weight_two() {
    let out = sympder(&[
        "--genus", "2", "--weight", "2", "--seed", "5", "--format", "csv", "es",
        "--check", "rank",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    // Two points carry a single chord class, and its rotation-summed
    // functional cancels, so both ranks are zero.
    assert!(text.contains("classes,1"), "{text}");
    assert!(text.contains("trace_rank,0"), "{text}");
    assert!(text.contains("chord_span,0"), "{text}");
    assert!(text.contains("certified,true"), "{text}");
}

#[test]
fn find_cocycle_refuses_when_the_corank_is_not_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = sympder(&[
        "--genus", "2", "--weight", "2", "--seed", "5", "find-cocycle",
        "--out", dir.path().join("c.json").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("corank 0"), "{}", stderr(&out));
}
