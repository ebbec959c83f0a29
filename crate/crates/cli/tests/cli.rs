use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rangewalk_cli::config::{parse, ExperimentConfig};
use rangewalk_cli::store::RunManifest;

const SMALL: &str = r#"
grid = [128, 256]
seeds = 3
process_n = 16
process_envs = 20
heat_kernel_n = 8
heat_kernel_envs = 2
heat_kernel_replicas = 200
exit_radii = [2, 4]
exit_envs = 4
exit_max_steps = 100000
cover_radii = [2.0, 4.0]
cover_envs = 2
two_sided_m = 16
two_sided_pairs = 200
bootstrap_resamples = 50
verify_seeds = 2
verify_horizon = 400
walk_trace_steps = 50
"#;

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("config.toml"), config).unwrap();
        Self { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str], out: &str) -> Output {
        Command::new(env!("CARGO_BIN_EXE_rangewalk"))
            .args(args)
            .arg("--config")
            .arg(self.path("config.toml"))
            .arg("--out")
            .arg(self.path(out))
            .env("RANGEWALK_CACHE_DIR", self.path("cache"))
            .output()
            .unwrap()
    }
}

fn manifest(out: &Path) -> RunManifest {
    RunManifest::load(out).unwrap().expect("manifest written")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn full_run_records_every_stage_and_file() {
    let sb = Sandbox::new(SMALL);
    let o = sb.run(&["run"], "out");
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&sb.path("out"));
    let stages: Vec<&str> = m.stages.iter().map(|s| s.stage.as_str()).collect();
    assert_eq!(stages, ["generate", "graph", "cuts", "metrics", "walk", "estimate", "report"]);
    assert!(m.stages.iter().all(|s| s.status == "ok"));
    assert!(m.files.len() >= 4);
    for rel in ["report.json", "estimate.json", "walk/process.json", "trajectories/env_0000.rwr", "metrics/env_0002.csv"] {
        assert!(m.files.iter().any(|f| f.path == rel), "{rel} missing from manifest");
    }
    assert!(!m.files.iter().any(|f| f.path == "manifest.json"));
    for f in &m.files {
        let bytes = std::fs::read(sb.path("out").join(&f.path)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes, "{}", f.path);
        assert_eq!(rangewalk_cli::store::sha256(&bytes), f.sha256, "{}", f.path);
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(sb.path("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["master_seed"], 1);
    assert_eq!(report["tables"]["n"], serde_json::json!([128, 256]));
}

#[test]
fn rerun_reproduces_report_bytes_and_hits_cache() {
    let sb = Sandbox::new(SMALL);
    assert!(sb.run(&["run"], "a").status.success());
    assert!(sb.run(&["run"], "b").status.success());
    let a = std::fs::read(sb.path("a/report.json")).unwrap();
    let b = std::fs::read(sb.path("b/report.json")).unwrap();
    assert_eq!(a, b);
    let m = manifest(&sb.path("b"));
    let generate = m.stages.iter().find(|s| s.stage == "generate").unwrap();
    assert_eq!((generate.cache_hits, generate.cache_misses), (3, 0));
}

#[test]
fn seed_flag_changes_the_run() {
    let sb = Sandbox::new(SMALL);
    assert!(sb.run(&["run", "--stage", "metrics"], "a").status.success());
    assert!(sb.run(&["run", "--stage", "metrics", "--seed", "2"], "b").status.success());
    let a = std::fs::read(sb.path("a/trajectories/env_0000.rwr")).unwrap();
    let b = std::fs::read(sb.path("b/trajectories/env_0000.rwr")).unwrap();
    assert_ne!(a, b);
    assert!(!sb.path("b/report.json").exists());
    assert!(!manifest(&sb.path("b")).defaults_applied.contains(&"master_seed".to_string()));
}

#[test]
fn corrupted_cache_entry_is_named_and_fails() {
    let sb = Sandbox::new(SMALL);
    assert!(sb.run(&["generate"], "out").status.success());
    let victim = std::fs::read_dir(sb.path("cache"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "rwr"))
        .unwrap();
    let mut bytes = std::fs::read(&victim).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    std::fs::write(&victim, bytes).unwrap();
    let o = sb.run(&["generate"], "out");
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("checksum mismatch"), "{err}");
    assert!(err.contains(victim.file_name().unwrap().to_str().unwrap()), "{err}");
    let m = manifest(&sb.path("out"));
    assert_eq!(m.stages.iter().find(|s| s.stage == "generate").unwrap().status, "failed");
}

#[test]
fn corrupted_output_file_is_caught_downstream() {
    let sb = Sandbox::new(SMALL);
    assert!(sb.run(&["run", "--stage", "walk"], "out").status.success());
    std::fs::write(sb.path("out/walk/process.json"), b"{}").unwrap();
    let o = sb.run(&["estimate"], "out");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("process.json"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_two() {
    for bad in ["seeds = 0", "grid = [512, 256]", "nonsense = 1", "dimension = \"four\"", "heat_kernel_x = [0.0, 9.0]"] {
        let sb = Sandbox::new(bad);
        let o = sb.run(&["generate"], "out");
        assert_eq!(o.status.code(), Some(2), "{bad}: {}", stderr(&o));
        assert!(stderr(&o).contains("config error"));
    }
    let sb = Sandbox::new("");
    let o = Command::new(env!("CARGO_BIN_EXE_rangewalk"))
        .args(["generate", "--config"])
        .arg(sb.path("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = sb.run(&["run", "--stage", "bogus"], "out");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_config_lists_every_default() {
    let loaded = parse("").unwrap();
    assert_eq!(loaded.config, ExperimentConfig::default());
    assert_eq!(loaded.defaults_applied.len(), 34);
    let loaded = parse("seeds = 5\ngrid = [64]").unwrap();
    assert!(!loaded.defaults_applied.contains(&"seeds".to_string()));
    assert!(loaded.defaults_applied.contains(&"dimension".to_string()));
    assert_eq!(loaded.config.horizon(), 128);

    let sb = Sandbox::new("grid = [64]\nseeds = 1");
    assert!(sb.run(&["generate"], "out").status.success());
    let m = manifest(&sb.path("out"));
    assert!(m.defaults_applied.contains(&"dimension".to_string()));
    assert!(!m.defaults_applied.contains(&"grid".to_string()));
    assert!(!m.defaults_applied.contains(&"out".to_string()));
}

#[test]
fn config_hash_ignores_output_directory() {
    let a = ExperimentConfig::default();
    let b = ExperimentConfig { out: "elsewhere".into(), ..a.clone() };
    let c = ExperimentConfig { seeds: 31, ..a.clone() };
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
}

fn verify_json(sb: &Sandbox) -> serde_json::Value {
    let o = sb.run(&["verify"], "out");
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&std::fs::read(sb.path("out/verify.json")).unwrap()).unwrap()
}

fn find<'a>(v: &'a serde_json::Value, name: &str) -> &'a serde_json::Value {
    v["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn verify_passes_at_default_tolerances() {
    let sb = Sandbox::new(SMALL);
    let v = verify_json(&sb);
    assert_eq!(v["passed"], true, "{v:#}");
    assert_eq!(v["checks"].as_array().unwrap().len(), 7);
    let status = manifest(&sb.path("out")).stages.into_iter().find(|s| s.stage == "verify").unwrap();
    assert_eq!(status.status, "ok");
}

#[test]
fn verify_reports_a_loose_solver() {
    let sb = Sandbox::new(&format!("{SMALL}\nsolver_tolerance = 1e-2\ndense_max = 0\n"));
    let v = verify_json(&sb);
    assert_eq!(v["passed"], false);
    let r = find(&v, "resistance_oracle");
    assert_eq!(r["passed"], false);
    assert!(r["measured"].as_f64().unwrap() > 1e-8);
    assert_eq!(find(&v, "cut_oracle")["passed"], true);
    let status = manifest(&sb.path("out")).stages.into_iter().find(|s| s.stage == "verify").unwrap();
    assert_eq!(status.status, "checks_failed");
}
