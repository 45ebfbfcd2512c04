use std::path::Path;
use std::process::{Command, Output};

fn chase_lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chase-lab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const CONFIG: &str = r#"{
  "name": "cli",
  "instance": {"source": "dracc", "params": {"horizon": 10, "capacity": [1, 2], "lifetime": [1, 3],
    "valuation": {"family": "kdemand", "k": [1, 2], "weight": [0, 1], "density": 1.0}}},
  "learner": {"kind": "lbpp"},
  "policies": {"kind": "uniform", "levels": [0.3, 0.6]},
  "horizons": [50, 100, 200],
  "seeds": 2,
  "master_seed": 11
}"#;

#[test]
fn run_writes_outputs_and_repeats_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), CONFIG).unwrap();
    let a = chase_lab(&["run", "cfg.json", "--out", "a"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = chase_lab(&["run", "cfg.json", "--out", "b"], dir.path());
    assert!(b.status.success());
    for f in ["trials.csv", "curve.csv", "summary.json"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
    let trials = std::fs::read_to_string(dir.path().join("a/trials.csv")).unwrap();
    assert_eq!(trials.lines().next().unwrap(), "trial_id,seed,T,learner,regret,external_regret,switches,episodes,wall_ms");
    assert_eq!(trials.lines().count(), 1 + 6);
}

#[test]
fn bad_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"instance\": 3,\n}").unwrap();
    let o = chase_lab(&["run", "bad.json"], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:2:"), "{err}");
}

#[test]
fn verify_prints_json_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = chase_lab(&["verify", "lower-bounds"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["suite"], "lower-bounds");
    assert_eq!(v["passed"], true);
    assert!(!chase_lab(&["verify", "no-such-suite"], dir.path()).status.success());
}

#[test]
fn generated_instances_simulate_and_chase() {
    let dir = tempfile::tempdir().unwrap();
    let params = r#"{"jobs": 40, "jobs_per_slot": 2, "bandwidth": [1, 2], "span": [1, 3], "length": [1, 2], "value": [0, 1]}"#;
    assert!(chase_lab(&["gen-instance", "ojs", "--params", params, "--seed", "5", "-o", "ojs.json"], dir.path()).status.success());
    let family = r#"{"kind": "uniform", "levels": [0.5]}"#;
    let sim = chase_lab(&["simulate-policy", "ojs", "ojs.json", "--policy", "uniform:0.5", "--family", family], dir.path());
    assert!(sim.status.success());
    assert_eq!(stdout(&sim).lines().count(), 41);

    let ch = chase_lab(
        &["chase", "ojs", "ojs.json", "--policy", "uniform:0.5", "--family", family, "--oracle", "ojs", "--t-init", "7", "-o", "d.csv"],
        dir.path(),
    );
    assert!(ch.status.success(), "{}", String::from_utf8_lossy(&ch.stderr));
    let summary: serde_json::Value = serde_json::from_str(stdout(&ch).trim()).unwrap();
    assert_eq!(summary["t_init"], 7);
    let diag = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert!(diag.starts_with("t,phi,good_size,bad_size,explored,missing,reward_oracle,reward_policy"));
    assert_eq!(diag.lines().count(), 1 + 34);
}

#[test]
fn explicit_generators_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = chase_lab(&["gen-instance", "trap", "--params", r#"{"T": 5}"#], dir.path());
    assert!(o.status.success());
    let file: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(file["T"], 5);
    assert_eq!(file["initial"], "s");

    std::fs::write(dir.path().join("loop.json"), {
        let g = chase_lab(&["gen-instance", "external", "--params", r#"{"m": 4, "T": 12}"#], dir.path());
        stdout(&g)
    })
    .unwrap();
    let sim = chase_lab(&["simulate-policy", "explicit", "loop.json", "--policy", "const:forward"], dir.path());
    assert!(sim.status.success());
    assert_eq!(stdout(&sim).lines().last().unwrap(), "12,0.5,4.5");

    let cw = chase_lab(&["gen-instance", "cw-pair", "--params", r#"{"C": 5, "W": 2, "eps": 0.1, "which": "second"}"#], dir.path());
    assert!(cw.status.success());
    let file: serde_json::Value = serde_json::from_str(&stdout(&cw)).unwrap();
    assert_eq!(file["T"], 20);
    assert!(file["policy_family"].is_object());
}
