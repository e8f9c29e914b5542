use std::fs;
use std::path::Path;
use std::process::Command;

use featurespace_harness::{run, Params, EXPERIMENTS};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_featurespace"))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn order_chain_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["order-chain", "--kernel", "szego", "--nmax", "4", "--points", "disk:40:r0.9", "--seed", "7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("chain.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "n,min_eig,verdict");
    assert_eq!(rows.len(), 5);
    assert!(rows[1..].iter().all(|r| r.ends_with(",holds")));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], Value::Bool(true));
    assert_eq!(summary["seeds"]["points"], 7);
    assert!(summary["tolerances"]["psd"].is_number());
    assert!(summary["truncations"]["chain"].is_number());
}

#[test]
fn ifs_figure_emits_six_panels() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["ifs-figure", "--depths", "0..5", "--grid", "2187", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    for n in 0..=5 {
        let csv = fs::read_to_string(dir.path().join(format!("f1_depth{n}.csv"))).unwrap();
        let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(values.len(), 2188);
        // support splits: the number of nonzero runs doubles per depth
        let runs = values.windows(2).filter(|w| w[0] == 0.0 && w[1] != 0.0).count() + usize::from(values[0] != 0.0);
        assert_eq!(runs, 1 << n);
    }
}

#[test]
fn zero_samples_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["gaussian-mc", "--kernel", "szego", "--M", "0", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("M must be >= 1"));
}

#[test]
fn failing_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["multiplier", "--phi", "scale:2", "--expect", "contractive", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL expected contractive"));
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["order-chain", "--kernel", "gauss"],
        vec!["order-chain", "--points", "cube:3"],
        vec!["ifs-figure", "--depths", "5..2"],
        vec!["no-such-experiment"],
    ] {
        let out = bin().args(&args).arg("--out").arg(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "[1, 2]").unwrap();
    let out = bin().args(["gram", "--config"]).arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    fs::write(&bad, r#"{"kernal": "szego"}"#).unwrap();
    let out = bin().args(["gram", "--config"]).arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "x").unwrap();
    let out = bin().args(["gram", "--out"]).arg(file.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"kernel": "bergman", "points": "interval:4:-0.5:0.5", "nmax": 2}"#).unwrap();
    let out_dir = dir.path().join("out");
    let st = bin()
        .args(["order-chain", "--nmax", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(st.status.success());
    let summary: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["parameters"]["kernel"], "bergman");
    assert_eq!(summary["parameters"]["nmax"], 3);
    assert_eq!(summary["assertions"].as_array().unwrap().len(), 3);
}

#[test]
fn every_experiment_is_deterministic() {
    let root = tempfile::tempdir().unwrap();
    for name in EXPERIMENTS {
        let params = match *name {
            "gaussian-mc" => {
                let mut p = Params::new();
                p.set("M", Value::from(2000)).unwrap();
                p.set("seed", Value::from(11)).unwrap();
                p
            }
            "ktransform-roundtrip" | "delta-expand" => {
                let mut p = Params::new();
                p.set("trials", Value::from(5)).unwrap();
                p
            }
            "ifs-kernel" => {
                let mut p = Params::new();
                p.set("grid", Value::from(20)).unwrap();
                p
            }
            _ => Params::new(),
        };
        let a = root.path().join(format!("{name}-a"));
        let b = root.path().join(format!("{name}-b"));
        let sa = run(name, &params, &a).unwrap();
        run(name, &params, &b).unwrap();
        assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b), "{name}");
        assert!(!sa.assertions.is_empty(), "{name}");
        if *name != "gaussian-mc" {
            assert!(sa.passed, "{name}: {:?}", sa.assertions);
        }
    }
}

#[test]
fn monotone_limit_flags_powers() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["monotone-limit", "--family", "powers", "--kernel", "szego", "--points", "explicit:[0.6]", "--nterms", "30", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let d: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("divergence.json")).unwrap()).unwrap();
    assert!(d["terms"].as_u64().unwrap() <= 30);
}
