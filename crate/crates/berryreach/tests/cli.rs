use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_berryreach"));
    c.env_remove("BERRYREACH_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_scene_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = run(&["gen-scene", "--scenario", "hanging_vine", "--seed", "9", "--trial", "3", "--out", s(p)]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        assert!(text(&o.stdout).contains("berries"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let c = dir.path().join("c.json");
    run(&["gen-scene", "--scenario", "hanging_vine", "--seed", "9", "--trial", "4", "--out", s(&c)]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn row_spacing_sets_corridor_width() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tunnel.json");
    let o = run(&["gen-scene", "--scenario", "high_tunnel", "--row-spacing", "1.0", "--out", s(&p)]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&p).unwrap()).unwrap();
    assert_eq!(v["scene"]["corridor_width"], serde_json::json!(1.0));

    let o = run(&["gen-scene", "--scenario", "baseline", "--row-spacing", "1.0", "--out", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_scenario_lists_valid_names() {
    let o = run(&["gen-scene", "--scenario", "greenhouse", "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    for name in ["baseline", "depth_only", "lighting_20x", "high_tunnel"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn bundled_suite_writes_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["run-suite", "--trials", "3", "--jobs", "2", "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 9, "{summary}");
    assert!(summary.lines().nth(1).unwrap().starts_with("depth_only,"));
    let trials = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 8 * 3);
    assert_eq!(std::fs::read_dir(out.join("trials")).unwrap().count(), 8 * 3);
    assert!(text(&o.stdout).contains("Base VS on Artificial Plant"));
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-env");
    let o = bin()
        .args(["run-suite", "--trials", "1", "--no-logs"])
        .env("BERRYREACH_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(out.join("summary.csv").exists());
}

#[test]
fn unwritable_out_dir_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let o = run(&["run-suite", "--trials", "1", "--out-dir", s(&file.join("sub"))]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o.stderr));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "schema_version = 1\nmaster_seed = 1\ntrials = 2\n[[scenario]]\nkind = \"baseline\"\n\
         [scenario.overrides]\npipeline.servo.nonsense = 1\n",
    )
    .unwrap();
    let o = run(&["run-suite", "--config", s(&cfg), "--out-dir", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("nonsense"));

    let o = run(&["validate", "--config", s(&dir.path().join("missing.toml"))]);
    assert_eq!(o.status.code(), Some(3));
}

fn reached_log(dir: &Path) -> PathBuf {
    let log = dir.join("trial.jsonl");
    let o = run(&["run-trial", "--scenario", "baseline", "--seed", "3", "--log", s(&log)]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("reached in"), "{}", text(&o.stdout));
    log
}

#[test]
fn replay_ends_in_reached() {
    let dir = tempfile::tempdir().unwrap();
    let log = reached_log(dir.path());
    let o = run(&["replay", "--trial-log", s(&log)]);
    assert!(o.status.success());
    let out = text(&o.stdout);
    assert_eq!(out.lines().last(), Some("terminal: Reached"));
    assert!(o.stderr.is_empty(), "{}", text(&o.stderr));

    let brief = run(&["replay", "--trial-log", s(&log), "--brief"]);
    assert!(text(&brief.stdout).lines().count() < out.lines().count());
}

#[test]
fn replay_warns_on_illegal_transition() {
    let dir = tempfile::tempdir().unwrap();
    let log = reached_log(dir.path());
    let body = std::fs::read_to_string(&log).unwrap();
    let corrupted = body.replacen(r#"{"state":"compute_pose"}"#, r#"{"state":"approach"}"#, 1);
    assert_ne!(body, corrupted);
    std::fs::write(&log, corrupted).unwrap();
    let o = run(&["replay", "--trial-log", s(&log)]);
    assert_eq!(o.status.code(), Some(0));
    let err = text(&o.stderr);
    assert!(err.starts_with("warning:"), "{err}");
    assert!(err.contains("ScanBase") && err.contains("Approach"), "{err}");
}

#[test]
fn replay_rejects_empty_and_foreign_logs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(run(&["replay", "--trial-log", s(&empty)]).status.code(), Some(4));

    let log = reached_log(dir.path());
    let body = std::fs::read_to_string(&log).unwrap().replace(r#""schema":1"#, r#""schema":7"#);
    std::fs::write(&log, body).unwrap();
    assert_eq!(run(&["replay", "--trial-log", s(&log)]).status.code(), Some(4));
}

#[test]
fn validate_accepts_bundled_config_and_generated_scene() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(&cfg, berryreach::config::BUNDLED_SUITE).unwrap();
    let scene = dir.path().join("scene.json");
    run(&["gen-scene", "--scenario", "baseline", "--out", s(&scene)]);
    let o = run(&["validate", "--config", s(&cfg), "--scene", s(&scene)]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    assert!(out.contains("high_tunnel") && out.contains("berries"), "{out}");

    let body = std::fs::read_to_string(&scene).unwrap().replace(r#""schema_version": 1"#, r#""schema_version": 2"#);
    std::fs::write(&scene, body).unwrap();
    assert_eq!(run(&["validate", "--scene", s(&scene)]).status.code(), Some(4));
    assert_eq!(run(&["validate"]).status.code(), Some(2));
}

#[test]
fn run_trial_on_a_scene_file_matches_generated() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    run(&["gen-scene", "--scenario", "lighting_13x", "--seed", "5", "--trial", "2", "--out", s(&scene)]);
    let a = run(&["run-trial", "--scenario", "lighting_13x", "--seed", "5", "--trial", "2"]);
    let b = run(&["run-trial", "--scenario", "lighting_13x", "--seed", "5", "--trial", "2", "--scene", s(&scene)]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

/// Help text is compared against files under tests/golden. Set
/// `BERRYREACH_BLESS=1` to rewrite them.
#[test]
fn help_matches_golden() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("BERRYREACH_BLESS").is_some();
    let mut stale = Vec::new();
    for sub in ["", "gen-scene", "run-trial", "run-suite", "replay", "validate"] {
        let mut args: Vec<&str> = Vec::new();
        if !sub.is_empty() {
            args.push(sub);
        }
        args.push("--help");
        let o = run(&args);
        assert!(o.status.success());
        let name = if sub.is_empty() { "help.txt".to_string() } else { format!("help-{sub}.txt") };
        let path = golden.join(&name);
        if bless {
            std::fs::create_dir_all(&golden).unwrap();
            std::fs::write(&path, &o.stdout).unwrap();
        } else if std::fs::read(&path).ok().as_deref() != Some(&o.stdout[..]) {
            stale.push(name);
        }
    }
    assert!(stale.is_empty(), "help output changed: {stale:?}");
}
