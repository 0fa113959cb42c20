use std::path::Path;
use std::process::Command;

use cutforge::cli::run;
use serde_json::Value;

fn cutforge(args: &[&str]) -> i32 {
    run(std::iter::once("cutforge").chain(args.iter().copied()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_writes_a_tree_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let out_s = out.to_str().unwrap();
    assert_eq!(
        cutforge(&["gen", "--model", "uniform", "--n", "2", "--seed", "7", "--out", out_s]),
        0
    );
    let v = read_json(&out);
    assert_eq!(v["n"], 2);
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let tree = dir.path().join(format!("t{k}.json"));
        let ct = dir.path().join(format!("c{k}.json"));
        let (t, c) = (tree.to_str().unwrap(), ct.to_str().unwrap());
        assert_eq!(
            cutforge(&["gen", "--model", "cgw-geom", "--n", "50", "--seed", "3", "--out", t]),
            0
        );
        assert_eq!(
            cutforge(&["cuttree", "--tree", t, "--seed", "4", "--out", c]),
            0
        );
        outputs.push((std::fs::read(&tree).unwrap(), std::fs::read(&ct).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn pipeline_recovers_the_tree() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.json");
    let ct = dir.path().join("c.json");
    let inv = dir.path().join("inv.json");
    let frag = dir.path().join("frag.csv");
    let (t, c, i, f) = (
        tree.to_str().unwrap(),
        ct.to_str().unwrap(),
        inv.to_str().unwrap(),
        frag.to_str().unwrap(),
    );
    assert_eq!(
        cutforge(&["gen", "--model", "uniform", "--n", "40", "--scaled", "--out", t]),
        0
    );
    assert_eq!(
        cutforge(&["frag", "--tree", t, "--probe-times", "0,0.5,2", "--out", f]),
        0
    );
    let csv = std::fs::read_to_string(&frag).unwrap();
    assert!(csv.starts_with("time,rank,mass\n"));
    let at_zero: f64 = csv
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("0,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((at_zero - 1.0).abs() < 1e-12);

    assert_eq!(cutforge(&["cuttree", "--tree", t, "--out", c]), 0);
    assert_eq!(
        cutforge(&[
            "invert",
            "--cuttree",
            c,
            "--tree",
            t,
            "--mode",
            "discrete",
            "--out",
            i
        ]),
        0
    );
    let v = read_json(&inv);
    assert_eq!(v["experiment"], "invert");
    assert_eq!(v["statistics"]["edge_set_matches"], 1.0);
    let pairs = v["data"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 40 * 39 / 2);
    for p in pairs {
        let (tau, t_true) = (p["tau"].as_f64().unwrap(), p["t_true"].as_f64().unwrap());
        assert!((tau - t_true).abs() <= 1e-9 * (1.0 + t_true));
    }
    assert_eq!(v["config"]["command"]["invert"]["mode"], "discrete");
}

#[test]
fn rde_with_zero_steps_reports_the_initial_pool() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rde.json");
    let o = out.to_str().unwrap();
    assert_eq!(
        cutforge(&["rde", "--beta", "0.5", "--pool", "2000", "--steps", "0", "--out", o]),
        0
    );
    let v = read_json(&out);
    assert_eq!(v["statistics"]["generation"], 0.0);
    assert_eq!(v["tests"][0]["test"], "moment_summary");
}

#[test]
fn aggregate_writes_one_row_per_draw() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("agg.csv");
    let o = out.to_str().unwrap();
    assert_eq!(
        cutforge(&[
            "aggregate",
            "--reps",
            "25",
            "--stat",
            "distance",
            "--condition-k",
            "6",
            "--out",
            o
        ]),
        0
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 26);
    assert!(csv.starts_with("experiment,rep,k,scaled_distance\n"));
}

#[test]
fn error_exit_codes() {
    assert_eq!(cutforge(&["gen", "--model", "nonsense", "--n", "5"]), 2);
    assert_eq!(cutforge(&["frobnicate"]), 2);
    assert_eq!(
        cutforge(&["cuttree", "--tree", "/nonexistent/tree.json"]),
        3
    );
    assert_eq!(cutforge(&["rde", "--beta", "0.3", "--init", "rayleigh"]), 2);
}

#[test]
fn quick_acceptance_passes() {
    assert_eq!(cutforge(&["accept", "--quick", "--seed", "5"]), 0);
}

#[test]
fn binary_honours_the_thread_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_cutforge"))
        .args([
            "gen",
            "--model",
            "cgw-poisson",
            "--n",
            "10",
            "--format",
            "csv",
        ])
        .env("CUTFORGE_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("vertex,parent,edge_len,mass"));
    assert_eq!(text.lines().count(), 11);
}
