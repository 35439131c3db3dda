use std::fs;
use std::path::Path;
use std::process::Command;

use lsi_update::ingest::write_matrix_market;
use lsi_update::synthetic::InstanceRng;
use lsi_update_cli::{run_experiment, ExperimentConfig, Preset, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lsi-update"))
}

/// Writes a small collection with two queries and returns the three paths as
/// flag arguments.
fn write_collection(dir: &Path) -> Vec<String> {
    let mut g = InstanceRng::new(9);
    let a = g.sparse(30, 24, 0.25);
    write_matrix_market(&a, dir.join("a.mtx")).unwrap();
    fs::write(dir.join("q.txt"), "1 2 3 4\n5 6:2 7\n").unwrap();
    fs::write(dir.join("qrels.txt"), "1 0 1 1\n1 0 13 1\n1 0 20 1\n2 0 2 1\n2 0 22 1\n").unwrap();
    let arg = |name: &str, file: &str| [format!("--{name}"), dir.join(file).display().to_string()];
    [arg("matrix", "a.mtx"), arg("queries", "q.txt"), arg("qrels", "qrels.txt")]
        .concat()
}

fn synthetic(policies: &[&str]) -> ExperimentConfig {
    let mut c = Preset::Synthetic.config();
    c.clear_policies();
    for p in policies {
        c.set("policy", p).unwrap();
    }
    c.deterministic = true;
    c
}

#[test]
fn synthetic_preset_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--preset", "synthetic", "--deterministic", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert!(csv.lines().count() > 1);
    assert!(dir.path().join("map.dat").exists());
    assert!(dir.path().join("time.dat").exists());
}

#[test]
fn bad_arguments_fail() {
    for args in [
        vec!["--preset", "nope"],
        vec!["--preset", "synthetic", "--policy", "sv:l=0x"],
        vec!["--preset", "synthetic", "--alpha", "2"],
        vec!["--matrix", "/nonexistent.mtx", "--queries", "/x", "--qrels", "/y"],
        vec!["--bogus-flag"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn file_collection_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(write_collection(dir.path()))
        .args(["--k", "3", "--t", "10", "--p", "4", "--policy", "zs", "--policy", "gkl:l=2"])
        .args(["--deterministic", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    // 14 documents after the initial 10 in groups of 4: 4 steps, 2 policies
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[1], "24");
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str], out: &str| {
        let o = bin()
            .args(["--preset", "synthetic", "--deterministic"])
            .args(extra)
            .arg("--out")
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(dir.path().join(out).join("results.csv")).unwrap()
    };
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# tuned\nk = 3\np = 4\npolicy = zs, sv:l=2\n").unwrap();
    let from_file = run(&["--config", cfg.to_str().unwrap()], "a");
    let from_flags = run(&["--k", "3", "--p", "4", "--policy", "zs", "--policy", "sv:l=2"], "b");
    assert_eq!(from_file, from_flags);

    let round = synthetic(&["ob", "gkl:l=3"]);
    let mut back = ExperimentConfig::default();
    back.apply_file(&round.to_file_string()).unwrap();
    assert_eq!(back.to_file_string(), round.to_file_string());
}

#[test]
fn policies_do_not_influence_each_other() {
    let alone = run_experiment(&synthetic(&["zs"])).unwrap();
    let together = run_experiment(&synthetic(&["ob", "zs", "gkl:l=3"])).unwrap();
    assert_eq!(alone.records.len(), together.records.len());
    for (a, b) in alone.records.iter().zip(&together.records) {
        let zs = b.policies.iter().find(|p| p.policy == "zs").unwrap();
        assert_eq!(a.policies[0].map, zs.map);
        assert_eq!((a.policies[0].h_rows, a.policies[0].h_cols), (zs.h_rows, zs.h_cols));
    }
}

#[test]
fn full_singular_vectors_track_exact_update() {
    let c = synthetic(&["zs", "sv:l=5"]);
    assert_eq!(c.p, 5);
    let out = run_experiment(&c).unwrap();
    for r in &out.records {
        let (zs, sv) = (&r.policies[0], &r.policies[1]);
        assert!((zs.map - sv.map).abs() <= 1e-10, "step {}: {} vs {}", r.step, zs.map, sv.map);
    }
}

#[test]
fn records_are_ordered() {
    let mut c = synthetic(&["zs", "sv:l=2", "ob"]);
    c.deterministic = false;
    let out = run_experiment(&c).unwrap();
    assert!(out.records.windows(2).all(|w| w[0].n_docs < w[1].n_docs && w[0].step + 1 == w[1].step));
    for i in 0..3 {
        let times: Vec<_> = out.records.iter().map(|r| r.policies[i].cum_time).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }
    assert!(out.records.iter().all(|r| r.policies.iter().all(|p| (0.0..=1.0).contains(&p.map))));
}
