use std::f64::consts::LN_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const HEADER: &str = "model,L,p,beta,gamma,chi,seed_base,n_traj,t,observable,cut,value,stderr,n_samples";

fn mipt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mipt")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mipt(args);
    assert!(out.status.success(), "mipt {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn clifford_run(dir: &Path, name: &str, l: usize, extra: &[&str]) -> String {
    let path = dir.join(name);
    let l = l.to_string();
    let mut args = vec![
        "simulate", "--model", "clifford-dual", "--L", &l, "--p", "0.5", "--gamma", "1", "--t-max", "32", "--traj", "4",
        "--seed", "7", "--observables", "ee,pe", "--out", path.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    ok(&args);
    fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_writes_the_fixed_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let text = clifford_run(dir.path(), "r.csv", 16, &[]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 1 + 33 * 2);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&first[..9], ["clifford-dual", "16", "0.5", "", "1.0", "", "7", "4", "0"]);
    assert!(!text.contains('\r'));
}

#[test]
fn thread_count_does_not_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = clifford_run(dir.path(), "a.csv", 16, &["--threads", "1"]);
    let b = clifford_run(dir.path(), "b.csv", 16, &["--threads", "4"]);
    assert_eq!(a, b);
}

#[test]
fn json_output_follows_the_extension() {
    let dir = tempfile::tempdir().unwrap();
    let text = clifford_run(dir.path(), "r.json", 8, &[]);
    let rows: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 66);
    assert_eq!(rows[0]["L"], 8);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"model": "clifford-dual", "L": 16, "p": 0.5, "gamma": 1.0, "t-max": 4, "traj": 2, "observables": "ee"}"#,
    )
    .unwrap();
    let from_file = ok(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(from_file.lines().nth(1).unwrap().starts_with("clifford-dual,16,"));
    let overridden = ok(&["simulate", "--config", cfg.to_str().unwrap(), "--L", "8", "--t-max", "2"]);
    let lines: Vec<&str> = overridden.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("clifford-dual,8,"));

    fs::write(&cfg, r#"{"model": "qa", "colour": "blue"}"#).unwrap();
    assert!(!mipt(&["simulate", "--config", cfg.to_str().unwrap()]).status.success());
}

#[test]
fn explicit_record_times() {
    let out = ok(&[
        "simulate", "--model", "qa", "--L", "8", "--p", "0.138", "--times", "0,3,10", "--observables", "pe",
    ]);
    let times: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(8).unwrap()).collect();
    assert_eq!(times, ["0", "3", "10"]);
}

#[test]
fn invalid_configurations_are_rejected() {
    for args in [
        &["simulate", "--model", "selfdual", "--L", "16", "--p", "0.5", "--beta", "0.8", "--t-max", "2"][..],
        &["simulate", "--model", "clifford-dual", "--L", "16", "--p", "0.5", "--t-max", "2"],
        &["simulate", "--model", "random-clifford", "--L", "16", "--p", "0.16", "--t-max", "2", "--backend", "mps"],
        &["simulate", "--model", "qa", "--L", "16", "--p", "1.5", "--t-max", "2"],
    ] {
        let out = mipt(args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn fit_reads_simulate_output() {
    let dir = tempfile::tempdir().unwrap();
    clifford_run(dir.path(), "r.csv", 32, &[]);
    let path = dir.path().join("r.csv");
    let out = ok(&["fit", "--in", path.to_str().unwrap(), "--kind", "logslope"]);
    let v: Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["table"]["L"], 32);
    assert_eq!(v["table"]["observable"], "ee");
    let slope = v["fit"]["slope"].as_f64().unwrap();
    assert!(slope > 0.0 && slope < 2.0, "slope {slope}");
    assert_eq!(v["fit"]["window"][0], 4.0);
}

#[test]
fn collapse_scans_every_table_in_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let small = clifford_run(dir.path(), "a.csv", 16, &[]);
    let large = clifford_run(dir.path(), "b.csv", 32, &[]);
    let merged = dir.path().join("both.csv");
    fs::write(&merged, format!("{small}{}", large.split_once('\n').unwrap().1)).unwrap();
    let out = ok(&["fit", "--in", merged.to_str().unwrap(), "--kind", "collapse", "--z-grid", "0.5:2:0.05"]);
    let v: Value = serde_json::from_str(out.trim()).unwrap();
    let z = v["best_z"].as_f64().unwrap();
    assert!((0.5..=2.0).contains(&z));
    assert_eq!(v["observable"], "pe");
}

#[test]
fn oracle_product_and_bell_states() {
    let v: Value = serde_json::from_str(&ok(&["oracle", "--state", "0+"])).unwrap();
    let e = &v["entropies"];
    assert!(e["ee"].as_f64().unwrap().abs() < 1e-12);
    assert!((e["pe_z"].as_f64().unwrap() - LN_2).abs() < 1e-12);
    assert!((e["pe_x"].as_f64().unwrap() - LN_2).abs() < 1e-12);
    assert!(e["sre"].as_f64().unwrap().abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let amps = dir.path().join("bell.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    fs::write(&amps, format!("[[{h}, 0], [0, 0], [0, 0], [{h}, 0]]")).unwrap();
    let v: Value = serde_json::from_str(&ok(&["oracle", "--amplitudes", amps.to_str().unwrap()])).unwrap();
    let e = &v["entropies"];
    for key in ["ee", "pe_z", "bpmi"] {
        assert!((e[key].as_f64().unwrap() - LN_2).abs() < 1e-12, "{key}");
    }
    assert!(e["sre"].as_f64().unwrap().abs() < 1e-12);
    assert!(!mipt(&["oracle", "--state", "0x"]).status.success());
}
