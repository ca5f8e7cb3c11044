//! End-to-end tests of the `opineq` binary: flag parsing, config merging,
//! exit codes, report shape, CSV output, and determinism.

use std::collections::BTreeMap;
use std::process::{Command, Output};

use opineq::checks::{check_refined_kantorovich, Tolerance};
use opineq::gen::{instantiate, InstanceRecipe, MapStyle, SpectrumStyle};
use opineq::hermitian::SpectrumBounds;

use opineq_cli::config::CampaignConfig;
use opineq_cli::report::{CampaignSummary, FailingCase, Report, TheoremStats, TIGHTNESS_HEADER};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opineq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn verify_writes_a_versioned_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "--theorem",
        "refined",
        "--trials",
        "6",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("refined"));

    let report: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.version, 1);
    assert_eq!(report.results.len(), 6);
    assert_eq!(report.config.trials, 6);
    let stats = &report.summary.per_theorem["refined"];
    assert_eq!(stats.instances, 6);
    assert_eq!(stats.failures, 0);
    assert_eq!(stats.passes + stats.failures + stats.inconclusive, stats.instances);
    assert!(report.summary.failing.is_empty());
    for chain in &report.results {
        assert_eq!(chain.name, "refined-kantorovich");
        assert_ne!(chain.instance.seed, 0, "campaign must stamp instance seeds");
    }
}

#[test]
fn verify_honors_the_dimension_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "verify", "--theorem", "refined", "--trials", "4", "--dim", "3..3", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(report.results.iter().all(|r| r.instance.dim == 3));
}

#[test]
fn verify_rejects_exponents_outside_the_theorem_range() {
    let out = run(&["verify", "--theorem", "squared", "--p", "1.5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("exponent"));

    let out = run(&["verify", "--theorem", "all", "--p", "0.5"]);
    assert_eq!(code(&out), 2);

    let out = run(&["verify", "--theorem", "refined", "--p", "2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("does not take exponents"));
}

#[test]
fn verify_rejects_unknown_theorems_and_half_bounds() {
    let out = run(&["verify", "--theorem", "bogus"]);
    assert_eq!(code(&out), 2);

    let out = run(&["verify", "--theorem", "refined", "--m", "1.0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--m and --M"));
}

#[test]
fn verify_rejects_functions_unfit_for_the_checker() {
    // t^3 is convex on the positive axis but not log-convex.
    let out = run(&["verify", "--theorem", "logconvex", "--f", "pow(3)"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("log-convex"));

    // exp(-t) is not operator convex.
    let out = run(&["verify", "--theorem", "cdj", "--f", "exp-neg"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_fields_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"theorem": "kantorovich", "trials": 9, "seed": 11, "dims": "2..4"}"#,
    )
    .unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "--config",
        cfg_path.to_str().unwrap(),
        "--trials",
        "2",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: Report =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.config.trials, 2, "flag beats file");
    assert_eq!(report.config.seed, 11, "file beats default");
    assert_eq!(report.results.len(), 2);
    assert!(report.results.iter().all(|r| r.instance.dim <= 4));
}

#[test]
fn config_file_typos_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, r#"{"trails": 5}"#).unwrap();
    let out = run(&["verify", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("trails"));
}

#[test]
fn constants_reproduce_the_closed_forms() {
    let out = run(&["constants", "--m", "1", "--M", "2", "--p", "-1", "--f", "inv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("K(1, 2, -1) = 1.125"), "got:\n{text}");
    assert!(text.contains("mu(1, 2, inv) = 1.125"), "got:\n{text}");

    let out = run(&[
        "constants", "--m", "1", "--M", "4", "--p", "-1", "--f", "inv", "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["classical"], 1.5625);
    assert_eq!(v["k"][0]["value"], 1.5625);
    let mu = v["mu"][0]["value"].as_f64().unwrap();
    assert!((mu - 1.5625).abs() <= 1e-8);
}

#[test]
fn constants_reject_the_excluded_exponents() {
    for p in ["0", "1"] {
        let out = run(&["constants", "--m", "1", "--M", "2", "--p", p]);
        assert_eq!(code(&out), 2, "p = {p} must be rejected");
    }
    let out = run(&["constants", "--m", "2", "--M", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn equality_cases_pass_and_report_every_chain() {
    let out = run(&["equality-cases"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for chain in ["refined-kantorovich", "chord-sum", "squared-chain"] {
        assert!(text.contains(chain), "missing {chain} in:\n{text}");
    }
    assert!(!text.contains("FAIL"));

    let out = run(&["equality-cases", "--json"]);
    let cases: Vec<serde_json::Value> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cases.len(), 12, "2 bands x 2 dims x 3 chains");
    assert!(cases.iter().all(|c| c["ok"].as_bool().unwrap()));
}

#[test]
fn tightness_emits_the_documented_csv_and_refinement_dominates() {
    let out = run(&["tightness", "--trials", "40", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TIGHTNESS_HEADER);
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 40);
    for row in &rows {
        assert_eq!(row.len(), 9);
        let index: usize = row[0].parse().unwrap();
        let link1: f64 = row[6].parse().unwrap();
        let link2: f64 = row[7].parse().unwrap();
        let classical: f64 = row[8].parse().unwrap();
        assert!(
            link2 <= classical + 1e-9,
            "row {index}: refinement worse than classical ({link2} > {classical})"
        );
        // Index stream rotates spectrum styles; offset 1 is the two-point
        // style, where the chord link is exact.
        if index % 4 == 1 {
            assert!(link1.abs() <= 1e-9, "two-point row {index} has link1 {link1}");
        }
    }
}

#[test]
fn tightness_json_format_round_trips() {
    let out = run(&["tightness", "--trials", "7", "--seed", "2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let rows: Vec<opineq_cli::report::TightnessRow> =
        serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().enumerate().all(|(i, r)| r.index == i));
}

#[test]
fn identical_seeds_give_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&p1, &p2] {
        let out = run(&[
            "verify", "--theorem", "chord-sum", "--trials", "12", "--seed", "99", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let mut a: Report = serde_json::from_str(&std::fs::read_to_string(&p1).unwrap()).unwrap();
    let mut b: Report = serde_json::from_str(&std::fs::read_to_string(&p2).unwrap()).unwrap();
    a.summary.wall_time_seconds = 0.0;
    b.summary.wall_time_seconds = 0.0;
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn replay_reruns_recorded_cases_through_the_same_pipeline() {
    // Build a report whose failing list points at a case that actually holds;
    // replay must reconstruct the instance from the recipe and report it green.
    let recipe = InstanceRecipe {
        dim: 3,
        bounds: SpectrumBounds::new(1.0, 2.0).unwrap(),
        spectrum_style: SpectrumStyle::TwoPoint,
        map_style: MapStyle::Kraus(2),
        seed: 12345,
    };
    let inst = instantiate(&recipe).unwrap();
    let mut chain =
        check_refined_kantorovich(&inst.matrix, &inst.map, &recipe.bounds, Tolerance::default())
            .unwrap();
    chain.instance.seed = recipe.seed;
    assert!(chain.all_hold);

    let mut per_theorem = BTreeMap::new();
    per_theorem.insert(
        "refined".to_string(),
        TheoremStats {
            instances: 1,
            passes: 0,
            failures: 1,
            inconclusive: 0,
            min_gap: chain.min_gap(),
            median_gap: chain.min_gap(),
            max_gap: chain.min_gap(),
        },
    );
    let report = Report {
        version: 1,
        config: CampaignConfig::default(),
        results: vec![chain.clone()],
        summary: CampaignSummary {
            per_theorem,
            wall_time_seconds: 0.0,
            failing: vec![FailingCase {
                theorem: "refined".to_string(),
                instance: chain.instance.clone(),
                recipe: Some(recipe),
                band: None,
            }],
        },
    };

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("crafted.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap()).unwrap();

    let out = run(&["verify", "--replay", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("now holds"), "got:\n{text}");
    assert!(text.contains("reproduced 0 of 1"), "got:\n{text}");
}

#[test]
fn replay_conflicts_with_campaign_flags() {
    let out = run(&["verify", "--replay", "x.json", "--trials", "3"]);
    assert_eq!(code(&out), 2);
}
