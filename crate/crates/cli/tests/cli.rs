use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn entdim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entdim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn entdim")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn json(dir: &Path, file: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(file)).unwrap()).unwrap()
}

/// `e = [2,3,2]`, `r = [1,2,1]`, one insertion at stage 2 with `h* = 2`.
fn insertion_toy(dir: &Path) {
    let o = entdim(dir, &["schedule", "--toy", "e=2,3,2", "r=1,2,1", "--insertions", "2:1:2", "--out", "toy.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = entdim(dir, &["build", "--schedule", "toy.json", "--out", "toy_ladder.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

/// Last H_n column of a profile csv.
fn last_h(dir: &Path, file: &str) -> f64 {
    let mut rdr = csv::Reader::from_path(dir.join(file)).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    rows.last().unwrap()[2].parse().unwrap()
}

#[test]
fn schedule_reports_c_tau() {
    let d = TempDir::new().unwrap();
    let o = entdim(d.path(), &["schedule", "--tau", "1/2", "--depth", "4", "--out", "s.json"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["c_tau"], 3);
    assert!(d.path().join("s.json").exists());
}

#[test]
fn toy_schedule_file() {
    let d = TempDir::new().unwrap();
    let o = entdim(d.path(), &["schedule", "--toy", "e=2,2", "r=1,2", "--out", "t.json"]);
    assert_eq!(code(&o), 0);
    assert!(json(d.path(), "t.json").is_object());
}

#[test]
fn schedule_parse_errors_exit_1() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&entdim(d.path(), &["schedule", "--tau", "1/x"])), 1);
    assert_eq!(code(&entdim(d.path(), &["schedule", "--toy", "q=2"])), 1);
    assert_eq!(code(&entdim(d.path(), &["frobnicate"])), 1);
    assert_eq!(code(&entdim(d.path(), &["--help"])), 0);
}

#[test]
fn degenerate_schedule_exits_2() {
    let d = TempDir::new().unwrap();
    let o = entdim(d.path(), &["schedule", "--tau", "1/10", "--depth", "4", "--out", "s.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degeneracy"));
}

#[test]
fn toy_build_dumps_all_binary_names() {
    let d = TempDir::new().unwrap();
    entdim(d.path(), &["schedule", "--toy", "e=2,2", "r=1,2", "--out", "t.json"]);
    let o = entdim(d.path(), &["build", "--schedule", "t.json", "--dump-names", "--out", "l.json"]);
    assert_eq!(code(&o), 0);
    let doc = std::fs::read_to_string(d.path().join("l.json")).unwrap();
    for name in ["\"00\"", "\"01\"", "\"10\"", "\"11\""] {
        assert!(doc.contains(name), "missing {name}");
    }
}

#[test]
fn paper_build_counts_only() {
    let d = TempDir::new().unwrap();
    entdim(d.path(), &["schedule", "--tau", "1/2", "--depth", "2", "--out", "s.json"]);
    let o = entdim(d.path(), &["build", "--schedule", "s.json", "--out", "l.json"]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("W2"));
    // asking for a name table past the budget is refused
    entdim(d.path(), &["schedule", "--tau", "1/2", "--depth", "4", "--out", "s4.json"]);
    let o = entdim(d.path(), &["build", "--schedule", "s4.json", "--dump-names", "--out", "x.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn overdrawn_pool_exits_3() {
    let d = TempDir::new().unwrap();
    insertion_toy(d.path());
    let o = entdim(d.path(), &["build", "--schedule", "toy.json", "--xi", "1", "--out", "x.json"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn exact_and_sampled_entropy_agree() {
    let d = TempDir::new().unwrap();
    insertion_toy(d.path());
    let base = ["entropy", "--tower", "toy_ladder.json@W3", "--partition", "levels:W1:0,3", "--seq", "nat", "--nmax", "4"];
    let o = entdim(d.path(), &[&base[..], &["--mode", "exact", "--out", "e.csv"]].concat());
    assert_eq!(code(&o), 0);
    let o = entdim(d.path(), &[&base[..], &["--mode", "sample", "--samples", "20000", "--seed", "3", "--out", "s.csv"]].concat());
    assert_eq!(code(&o), 0);
    let (he, hs) = (last_h(d.path(), "e.csv"), last_h(d.path(), "s.csv"));
    assert!((he - hs).abs() < 0.05, "exact {he} sample {hs}");
}

#[test]
fn sampling_is_deterministic_across_workers() {
    let d = TempDir::new().unwrap();
    insertion_toy(d.path());
    let run = |workers: &str, out: &str| {
        let o = entdim(
            d.path(),
            &["--workers", workers, "entropy", "--tower", "toy_ladder.json@W3", "--partition", "symbol", "--seq", "nat", "--nmax", "5", "--mode", "sample", "--samples", "5000", "--seed", "9", "--out", out],
        );
        assert_eq!(code(&o), 0);
        std::fs::read_to_string(d.path().join(out)).unwrap()
    };
    assert_eq!(run("1", "a.csv"), run("4", "b.csv"));
}

#[test]
fn entropy_usage_and_shallow_errors() {
    let d = TempDir::new().unwrap();
    insertion_toy(d.path());
    let o = entdim(d.path(), &["entropy", "--tower", "toy_ladder.json@W3", "--seq", "nat", "--nmax", "4", "--out", "x.csv"]);
    assert_eq!(code(&o), 1, "missing partition");
    let o = entdim(d.path(), &["entropy", "--tower", "toy_ladder.json@W3", "--partition", "symbol", "--seq", "nat", "--nmax", "4", "--mode", "sample", "--out", "x.csv"]);
    assert_eq!(code(&o), 1, "sampling without a seed");
    let o = entdim(d.path(), &["entropy", "--tower", "toy_ladder.json@W1", "--partition", "symbol", "--seq", "nat", "--nmax", "50", "--out", "x.csv"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn ft_sequence_on_paper_tower() {
    let d = TempDir::new().unwrap();
    entdim(d.path(), &["schedule", "--tau", "1/2", "--depth", "4", "--out", "s.json"]);
    assert_eq!(code(&entdim(d.path(), &["build", "--schedule", "s.json", "--out", "l.json"])), 0);
    let o = entdim(
        d.path(),
        &["entropy", "--tower", "l.json@W4", "--partition", "levels:W1:0", "--seq", "ft:s.json:1", "--nmax", "5", "--mode", "sample", "--samples", "2000", "--seed", "1", "--out", "f.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(d.path().join("f.csv")).unwrap();
    let s: Vec<u64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    // offsets of F^1_0: multiples of w_3 = 35004
    assert_eq!(s, vec![0, 35004, 70008, 105012, 140016]);
}

#[test]
fn verify_suites() {
    let d = TempDir::new().unwrap();
    for suite in ["measures", "names", "seqcalc"] {
        let o = entdim(d.path(), &["verify", "--suite", suite, "--out", "v.json"]);
        assert_eq!(code(&o), 0, "{suite}: {}", String::from_utf8_lossy(&o.stdout));
        let v = json(d.path(), "v.json");
        assert_eq!(v["pass"], true);
    }
    assert_eq!(code(&entdim(d.path(), &["verify", "--suite", "nope"])), 1);
}

#[test]
fn dims_of_squares() {
    let d = TempDir::new().unwrap();
    let o = entdim(d.path(), &["dims", "--seq", "squares", "--nmax", "100000", "--out", "d.json"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(d.path().join("d.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let upper = find_key(&v, "upper").expect("upper in dims.json");
    assert!((upper - 0.5).abs() < 0.01, "{upper}");
    assert_eq!(code(&entdim(d.path(), &["dims", "--seq", "bogus", "--nmax", "10"])), 1);
}

fn find_key(v: &serde_json::Value, key: &str) -> Option<f64> {
    match v {
        serde_json::Value::Object(m) => m.get(key).and_then(|x| x.as_f64()).or_else(|| m.values().find_map(|x| find_key(x, key))),
        serde_json::Value::Array(a) => a.iter().find_map(|x| find_key(x, key)),
        _ => None,
    }
}
