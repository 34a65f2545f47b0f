use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn record(name: &str) -> PathBuf {
    fixtures().join("benchmark").join(name)
}

fn forge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scenario-forge"))
        .current_dir(dir)
        .env_remove("SCENARIO_FORGE_LLM_ENDPOINT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn mocks() -> String {
    fixtures().join("mock_responses").display().to_string()
}

#[test]
fn compose_writes_scenario_and_merge_report() {
    let tmp = tempfile::tempdir().unwrap();
    let r = record("rainy_straight");
    let out = forge(
        tmp.path(),
        &["compose", s(&r.join("description.txt")), s(&r.join("detections.json")), "--mock-responses", &mocks()],
    );
    ok(&out);
    let ir = fs::read_to_string(tmp.path().join("out.scn.yaml")).unwrap();
    assert!(ir.contains("lane_number: 3"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("merge-report.json")).unwrap()).unwrap();
    assert_eq!(report["pairs"].as_array().unwrap().len(), 2);
}

#[test]
fn compose_equals_the_manual_chain() {
    for name in ["rainy_straight", "red_intersection", "highway_lane_change"] {
        let tmp = tempfile::tempdir().unwrap();
        let r = record(name);
        let (desc, det) = (r.join("description.txt"), r.join("detections.json"));
        let m = mocks();
        ok(&forge(tmp.path(), &["--out-dir", "a", "compose", s(&desc), s(&det), "--mock-responses", &m]));
        ok(&forge(tmp.path(), &["--out-dir", "b", "extract-text", s(&desc), "--mock-responses", &m]));
        ok(&forge(tmp.path(), &["--out-dir", "b", "extract-vision", s(&det)]));
        ok(&forge(
            tmp.path(),
            &["--out-dir", "b", "align", "b/description.text.scn.yaml", "b/detections.visual.scn.yaml"],
        ));
        for f in ["out.scn.yaml", "merge-report.json"] {
            let a = fs::read(tmp.path().join("a").join(f)).unwrap();
            let b = fs::read(tmp.path().join("b").join(f)).unwrap();
            assert_eq!(a, b, "{name}: {f}");
        }
    }
}

#[test]
fn exit_codes_follow_the_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(forge(tmp.path(), &["codegen", "missing.scn.yaml"]).status.code(), Some(2));
    assert_eq!(forge(tmp.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(forge(tmp.path(), &["codegen", "x.scn.yaml", "--target", "gazebo"]).status.code(), Some(1));
    assert_eq!(forge(tmp.path(), &["--help"]).status.code(), Some(0));

    let r = record("rainy_straight");
    // No provider anywhere.
    assert_eq!(forge(tmp.path(), &["extract-text", s(&r.join("description.txt"))]).status.code(), Some(1));
    // Provider present but no canned response for this prompt.
    fs::write(tmp.path().join("d.txt"), "A lone bus.").unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(forge(tmp.path(), &["extract-text", "d.txt", "--mock-responses", s(&empty)]).status.code(), Some(3));
    // Malformed detections.
    fs::write(tmp.path().join("bad.json"), "{\"boxes\": 3}").unwrap();
    assert_eq!(forge(tmp.path(), &["extract-vision", "bad.json"]).status.code(), Some(2));
    // A road type the built-in catalog lacks.
    let gt = record("highway_lane_change").join("ground_truth.scn.yaml");
    assert_eq!(forge(tmp.path(), &["codegen", s(&gt)]).status.code(), Some(3));
}

#[test]
fn codegen_is_reproducible_for_every_target() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = record("rainy_straight").join("ground_truth.scn.yaml");
    for target in ["carla", "lgsvl", "minisim"] {
        ok(&forge(tmp.path(), &["--out-dir", "x", "codegen", s(&gt), "--target", target]));
        ok(&forge(tmp.path(), &["--out-dir", "y", "codegen", s(&gt), "--target", target]));
    }
    for f in ["ground_truth.carla.py.txt", "ground_truth.lgsvl.py.txt", "ground_truth.minisim.json"] {
        let a = fs::read(tmp.path().join("x").join(f)).unwrap();
        assert_eq!(a, fs::read(tmp.path().join("y").join(f)).unwrap(), "{f}");
    }
    ok(&forge(tmp.path(), &["--out-dir", "z", "--seed", "7", "codegen", s(&gt)]));
    ok(&forge(tmp.path(), &["simulate", "z/ground_truth.minisim.json"]));
}

#[test]
fn simulate_reports_the_rear_end_collision() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = fixtures().join("minisim/rear_end.minisim.json");
    let out = forge(tmp.path(), &["simulate", s(&sc), "--agent", "noop"]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("5.0s collision|car+ego|1 (ego, npc_1)"));
    let bugs: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("rear_end.bugs.json")).unwrap()).unwrap();
    assert_eq!(bugs[0]["kind"], "collision");
    assert!(tmp.path().join("rear_end.trace.json").exists());
}

#[test]
fn fuzz_writes_stats_and_timeline() {
    let tmp = tempfile::tempdir().unwrap();
    let seeds = fixtures().join("fuzz/multi");
    ok(&forge(tmp.path(), &["--jobs", "2", "fuzz", "--seeds", s(&seeds), "--iters", "60"]));
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("fuzz-stats.json")).unwrap()).unwrap();
    assert_eq!(stats["iterations"], 60);
    assert_eq!(stats["seed"], 20240513);
    let csv = fs::read_to_string(tmp.path().join("fuzz-timeline.csv")).unwrap();
    assert_eq!(csv.lines().count() as u64, stats["distinct_bugs"].as_u64().unwrap() + 1);

    let bad = fixtures().join("fuzz/colliding");
    assert_eq!(forge(tmp.path(), &["fuzz", "--seeds", s(&bad), "--iters", "5"]).status.code(), Some(3));
}

#[test]
fn evaluate_reports_a_three_run_margin() {
    let tmp = tempfile::tempdir().unwrap();
    let bench = fixtures().join("benchmark");
    let out = forge(tmp.path(), &["evaluate", "--benchmark", s(&bench), "--reps", "3", "--mock-responses", &mocks()]);
    ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("eval-report.json")).unwrap()).unwrap();
    assert_eq!(report["repetitions"], 3);
    assert_eq!(report["margin_of_error"], 0.0);
    let expected = (25.0 / 29.0 + 27.0 / 28.0 + 26.0 / 28.0) / 3.0;
    assert!((report["mean_accuracy"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&out.stdout).contains("rainy_straight"));

    ok(&forge(tmp.path(), &["evaluate", "--benchmark", s(&bench), "--reps", "1", "--mock-responses", &mocks()]));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("eval-report.json")).unwrap()).unwrap();
    assert!(report["margin_of_error"].is_null());
}

#[test]
fn config_file_supplies_provider_seed_and_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("forge.toml"),
        format!("seed = 11\nout_dir = \"results\"\n\n[provider]\nkind = \"mock\"\ndir = \"{}\"\n", mocks()),
    )
    .unwrap();
    let bench = fixtures().join("benchmark");
    ok(&forge(tmp.path(), &["--config", "forge.toml", "evaluate", "--benchmark", s(&bench), "--reps", "1"]));
    assert!(tmp.path().join("results/eval-report.json").exists());

    fs::write(tmp.path().join("bad.toml"), "colour = \"blue\"\n").unwrap();
    assert_eq!(forge(tmp.path(), &["--config", "bad.toml", "evaluate", "--benchmark", "x"]).status.code(), Some(2));
}

#[test]
fn inject_corrupts_files_and_sweeps_benchmarks() {
    let tmp = tempfile::tempdir().unwrap();
    let r = record("rainy_straight");
    ok(&forge(tmp.path(), &["inject", "--kind", "text", "--rate", "0.1", s(&r.join("ground_truth.scn.yaml"))]));
    let corrupted = fs::read_to_string(tmp.path().join("ground_truth.injected.scn.yaml")).unwrap();
    assert_ne!(corrupted, fs::read_to_string(r.join("ground_truth.scn.yaml")).unwrap());

    ok(&forge(tmp.path(), &["inject", "--kind", "detect", "--rate", "0.5", s(&r.join("detections.json"))]));
    let ds: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("detections.injected.json")).unwrap()).unwrap();
    assert_eq!(ds["boxes"].as_array().unwrap().len(), 1);

    let sweep = fixtures().join("sweep");
    ok(&forge(
        tmp.path(),
        &[
            "--jobs", "4", "inject", "--kind", "detect", "--rate", "0.02,0.06,0.10", "--benchmark", s(&sweep), "--reps",
            "1", "--mock-responses", &mocks(),
        ],
    ));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("injection-sweep.json")).unwrap()).unwrap();
    assert!(doc["spearman_rho"].as_f64().unwrap() < 0.0);

    let bad_rate = forge(tmp.path(), &["inject", "--kind", "text", "--rate", "1.5", s(&r.join("ground_truth.scn.yaml"))]);
    assert_eq!(bad_rate.status.code(), Some(3));
}
