use std::path::Path;
use std::process::{Command, Output};

use rydberg_source::dsl;
use rydberg_source::protocols::bell_schedule;
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydberg-source")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_bell_writes_result_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    let o = bin(&["run", "--protocol", "bell", "--mode", "branch", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["duration_s"].as_f64().unwrap() - 4.2e-6).abs() < 1e-18);
}

#[test]
fn dump_state_uses_configuration_strings() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("state.json");
    let o = bin(&["run", "--protocol", "bell", "--dump-state", path_str(&dump)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    let b = &v["branches"][0];
    assert_eq!(b["levels"], 4);
    assert_eq!(b["modes"], 2);
    let rl = b["amplitudes"]["0000|RL"].as_array().unwrap();
    assert!((rl[0].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!(b["amplitudes"]["0000|LR"].is_array());
}

#[test]
fn bad_schedule_file_exits_2_with_spans() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.pulse");
    std::fs::write(&f, "levels 2\nload 1\nload 7\nwobble\n").unwrap();
    let o = bin(&["run", "--schedule", path_str(&f)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("3:6: level out of range"), "{err}");
    assert!(err.contains("4:1: unknown keyword"), "{err}");
    assert!(err.contains("^"));
}

#[test]
fn blockade_violation_exits_2_with_index() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("twice.pulse");
    std::fs::write(&f, "levels 2\nload 1\nload 1\n").unwrap();
    let o = bin(&["run", "--schedule", path_str(&f)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("instruction 1"), "{err}");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(bin(&["run"]).status.code(), Some(1));
    assert_eq!(bin(&["run", "--protocol", "nope"]).status.code(), Some(1));
    assert_eq!(bin(&["run", "--protocol", "ghz", "--mode", "trajectory"]).status.code(), Some(1));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_commands() {
    let bell = bin(&["verify", "--protocol", "bell"]);
    assert_eq!(bell.status.code(), Some(0));
    let v = json(&bell);
    assert_eq!(v["pass"], true);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let c = bin(&["verify", "--protocol", "cluster1d", "--photons", "4"]);
    assert_eq!(c.status.code(), Some(0));
    let v = json(&c);
    for s in v["stabilizers"].as_array().unwrap() {
        assert!(s.as_f64().unwrap() >= 1.0 - 1e-10);
    }
    assert_eq!(v["corrections"].as_array().unwrap().len(), 3);

    let t = bin(&["verify", "--protocol", "trine", "--slot", "2"]);
    assert_eq!(t.status.code(), Some(0));
    assert!(json(&t)["trace_distance"].as_f64().unwrap() < 1e-12);
}

#[test]
fn verify_schedule_against_target() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bell.pulse");
    std::fs::write(&f, dsl::serialize(&bell_schedule())).unwrap();
    let ok = bin(&["verify", "--schedule", path_str(&f), "--target", "bell"]);
    assert_eq!(ok.status.code(), Some(0));
    // wrong mode count for the target
    let bad = bin(&["verify", "--schedule", path_str(&f), "--target", "trine"]);
    assert_eq!(bad.status.code(), Some(2));
    // polarization output cannot be compared with a number-encoded target
    let mismatch = bin(&["verify", "--schedule", path_str(&f), "--target", "ghz"]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(mismatch.stdout.is_empty());
    // an unbalanced rotation produces a report that fails
    let skewed = dir.path().join("skewed.pulse");
    let text = dsl::serialize(&bell_schedule()).replacen("theta=pi/2", "theta=pi/3", 1);
    std::fs::write(&skewed, text).unwrap();
    let fail = bin(&["verify", "--schedule", path_str(&skewed), "--target", "bell"]);
    assert_eq!(fail.status.code(), Some(2));
    let v = json(&fail);
    assert_eq!(v["pass"], false);
    assert!(v["fidelity"].as_f64().unwrap() < 0.99);
    // schedule without target is a usage error
    assert_eq!(bin(&["verify", "--schedule", path_str(&f)]).status.code(), Some(1));
}

#[test]
fn emission_summary_and_csv() {
    let o = bin(&["emission", "--atoms", "1000", "--diameter", "10", "--seed", "1", "--grid", "24"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["peak_value"].as_f64().unwrap(), 1000.0);
    let ratio = v["peak_to_background"].as_f64().unwrap();
    assert!(ratio > 1000.0 / 3.0 && ratio < 3000.0);

    let one = json(&bin(&["emission", "--atoms", "1", "--grid", "16"]));
    assert!((one["peak_to_background"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let csv = bin(&["emission", "--atoms", "10", "--grid", "8", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("theta,phi,probability\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 8);

    assert_eq!(bin(&["emission", "--diameter", "12"]).status.code(), Some(2));
    assert_eq!(bin(&["emission", "--atoms", "0"]).status.code(), Some(2));
}

#[test]
fn emission_cloud_output() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cloud.csv");
    let o = bin(&["emission", "--atoms", "50", "--grid", "8", "--cloud-out", path_str(&cloud)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(cloud).unwrap();
    assert!(text.starts_with("x,y,z\n"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn parse_lints_and_emits_dsl() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.pulse");
    std::fs::write(&good, "levels 4\n# Bell\nload 2\nraman 2 3 theta=1.5707963267948966\n").unwrap();
    let canon = dir.path().join("canon.pulse");
    let o = bin(&["parse", path_str(&good), "--emit-dsl", path_str(&canon)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["valid"], true);
    assert_eq!(std::fs::read_to_string(canon).unwrap(), "levels 4\nload 2\nraman 2 3 theta=pi/2\n");

    let bad = dir.path().join("bad.pulse");
    std::fs::write(&bad, "levels 4\nload 5\nemit 1:R 1:L\n").unwrap();
    let o = bin(&["parse", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["valid"], false);
    assert_eq!(v["errors"].as_array().unwrap().len(), 2);
    assert_eq!(v["errors"][1]["line"], 3);
}

#[test]
fn builtin_schedule_exports_to_dsl() {
    let o = bin(&["run", "--protocol", "cluster1d", "--photons", "3", "--emit-dsl", "-", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let dsl_part: String = text.lines().take_while(|l| !l.starts_with("branch,")).map(|l| format!("{l}\n")).collect();
    assert!(dsl_part.contains("measure last basis=RL"));
    let parsed = dsl::parse(&dsl_part).unwrap();
    assert_eq!(parsed, rydberg_source::protocols::cluster1d_schedule(3).unwrap());
}
