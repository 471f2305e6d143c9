use std::path::PathBuf;
use std::process::{Command, Output};

use pidspace::schema::{AnalysisDoc, RegionMapDoc, TfDoc};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pidspace"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR")))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn discretize_integrator() {
    let dir = tempfile::tempdir().unwrap();
    let plant = dir.path().join("p.json");
    std::fs::write(&plant, r#"{"domain":"continuous","num":[1],"den":[1,0]}"#).unwrap();
    let o = run(&["discretize", "--plant", plant.to_str().unwrap(), "--sample-time", "0.01"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let tf: TfDoc = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(tf.sample_time, Some(0.01));
    assert!((tf.num[0] - 0.01).abs() < 1e-15 && tf.num.len() == 1);
    assert_eq!(tf.den, vec![1.0, -1.0]);
    assert!(stderr(&o).contains("exp(s T)"));
}

#[test]
fn discretize_improper_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let plant = dir.path().join("p.json");
    std::fs::write(&plant, r#"{"domain":"continuous","num":[1,0,0],"den":[1,1]}"#).unwrap();
    let o = run(&["discretize", "--plant", plant.to_str().unwrap(), "--sample-time", "0.01"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("improper"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let text = std::fs::read_to_string(config("double_pole_pi.json")).unwrap();
    std::fs::write(&cfg, text.replacen('{', r#"{"grid_size": 3,"#, 1)).unwrap();
    let o = run(&["region", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid_size"));
}

#[test]
fn empty_region_still_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.json");
    let svg = dir.path().join("map.svg");
    let o = run(&[
        "region",
        "--config",
        config("steering_pd.json").to_str().unwrap(),
        "--pm-min",
        "179",
        "--pm-max",
        "none",
        "--nx",
        "21",
        "--ny",
        "21",
        "--out",
        out.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("empty region"));
    let doc: RegionMapDoc = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.member_count, 0);
    assert_eq!(doc.to_map().unwrap().member_count(), 0);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn analyze_design_point() {
    let o = run(&["analyze", "--config", config("steering_pd.json").to_str().unwrap(), "--kp", "0.2", "--kd", "0.07"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: AnalysisDoc = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc.flags.all_pass);
    assert!(doc.flags.stable.pass && doc.flags.pm.unwrap().pass && doc.flags.ms.unwrap().pass);
}

#[test]
fn analyze_zero_pi_is_unstable_and_simulation_needs_force() {
    let cfg = config("double_pole_pi.json");
    let o = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let doc: AnalysisDoc = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!doc.flags.stable.pass);

    let o = run(&["analyze", "--config", cfg.to_str().unwrap(), "--kp", "1.5", "--simulate", "step", "50"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = run(&["analyze", "--config", cfg.to_str().unwrap(), "--kp", "1.5", "--simulate", "step", "50", "--force"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["simulation"]["diverging"], true);
    assert_eq!(v["simulation"]["time"].as_array().unwrap().len(), 50);
}

#[test]
fn analyze_accepts_negative_gains() {
    let o = run(&["analyze", "--config", config("double_pole_pi.json").to_str().unwrap(), "--kp", "-0.1", "--ki", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: AnalysisDoc = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc.gains.kp, -0.1);
}

#[test]
fn bad_threads_env_is_a_config_error() {
    let o = bin()
        .env("PIDSPACE_THREADS", "many")
        .args(["analyze", "--config", config("double_pole_pi.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sim.csv");
    let o = run(&[
        "simulate",
        "--config",
        config("steering_pd.json").to_str().unwrap(),
        "--kp",
        "0.2",
        "--kd",
        "0.07",
        "--steps",
        "100",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("time,reference,output,error,control\n"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn export_writes_figure_set() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "export",
        "--config",
        config("steering_pd.json").to_str().unwrap(),
        "--nx",
        "31",
        "--ny",
        "31",
        "--dir",
        dir.path().to_str().unwrap(),
        "--kp",
        "0.2",
        "--kd",
        "0.07",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "region.json",
        "region.svg",
        "members.csv",
        "boundaries.csv",
        "analysis.json",
        "bode.svg",
        "robust_performance.svg",
        "step.json",
        "step.csv",
        "step.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let again = tempfile::tempdir().unwrap();
    let o = run(&[
        "export",
        "--map",
        dir.path().join("region.json").to_str().unwrap(),
        "--dir",
        again.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(dir.path().join("region.svg")).unwrap(),
        std::fs::read(again.path().join("region.svg")).unwrap()
    );
}

#[test]
fn region_output_is_deterministic_across_thread_counts() {
    let args = ["region", "--config", config("double_pole_pi.json").to_str().unwrap().to_owned().leak(), "--nx", "41", "--ny", "41"];
    let one = bin().env("PIDSPACE_THREADS", "1").args(args).output().unwrap();
    let four = bin().env("PIDSPACE_THREADS", "4").args(args).output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}
