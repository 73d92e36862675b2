use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twistmoments"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).env("MM_CACHE_DIR", out.join("cache")).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = scratch("bogus");
    assert_eq!(run(&["verify", "bogus"], &out).status.code(), Some(2));
    assert_eq!(run(&["experiment", "lvalues", "--dmax", "x"], &out).status.code(), Some(2));
    assert_eq!(run(&["experiment", "density", "--n", "2"], &out).status.code(), Some(2));
    assert_eq!(run(&["experiment", "petersson", "--weight2k", "14"], &out).status.code(), Some(2));
}

#[test]
fn verify_charsum_writes_sorted_manifest() {
    let out = scratch("charsum");
    let o = run(&["verify", "charsum"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let path = out.join("verify-charsum.json");
    let m = json(&path);
    assert_eq!(m["passed"], true);
    let names: Vec<&str> = m["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"twisted Kloosterman closed form"));
    assert_eq!(m["config"]["charsum-tol"], "0.00000001");
    let text = std::fs::read_to_string(&path).unwrap();
    let keys: Vec<usize> = ["\"checks\"", "\"command_line\"", "\"config\"", "\"library_version\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn verify_hecke_lists_table_entries() {
    let out = scratch("hecke");
    assert_eq!(run(&["verify", "hecke"], &out).status.code(), Some(0));
    let m = json(&out.join("verify-hecke.json"));
    let table = m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("table h_"))
        .count();
    assert_eq!(table, 10);
}

#[test]
fn petersson_failure_exits_one() {
    let out = scratch("petersson");
    assert_eq!(run(&["experiment", "petersson"], &out).status.code(), Some(1));
    let m = json(&out.join("petersson.json"));
    assert_eq!(m["passed"], false);
    assert_eq!(m["config"]["cmax"], "64");
    assert_eq!(
        run(&["experiment", "petersson", "--cmax", "128"], &out).status.code(),
        Some(0)
    );
    let csv = std::fs::read_to_string(out.join("petersson.csv")).unwrap();
    assert!(csv.starts_with("m,n,lhs,rhs,residual,tail_bound\n"));
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn lvalues_are_deterministic_across_thread_counts() {
    let a = scratch("lv-a");
    let b = scratch("lv-b");
    let o = run(&["experiment", "lvalues", "--dmax", "200", "--threads", "1"], &a);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(run(&["experiment", "lvalues", "--dmax", "200", "--threads", "3"], &b).status.code(), Some(0));
    let ca = std::fs::read(a.join("lvalues.csv")).unwrap();
    let cb = std::fs::read(b.join("lvalues.csv")).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("d,L,trunc_err,terms\n1,"));
    let m = json(&a.join("lvalues.json"));
    assert_eq!(m["config"]["threads"], "1");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 1);
}

#[test]
fn density_report_and_config_file() {
    let out = scratch("density");
    let conf = out.join("run.conf");
    std::fs::write(&conf, "x = 20000, 40000\nn = 3\nu = 3\n").unwrap();
    let o = bin()
        .args(["experiment", "density", "--u", "3", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(out.join("density.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "X,n,u,lhs,fitC,dev_pi2_9,dev_4_pi2");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("20000,3,3,"));
    let fit: f64 = lines[2].split(',').nth(4).unwrap().parse().unwrap();
    assert!((fit - 4.0 / std::f64::consts::PI.powi(2)).abs() < 0.01, "{fit}");
}

#[test]
fn sample_is_reproducible() {
    let a = scratch("sample-a");
    let b = scratch("sample-b");
    for dir in [&a, &b] {
        let o = run(&["experiment", "sample", "--seed", "5", "--pmax", "500", "--samples", "20000"], dir);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["sample.csv", "sample-moments.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let m = json(&a.join("sample.json"));
    assert_eq!(m["seed"], 5);
}

#[test]
fn remaining_experiments_pass() {
    let out = scratch("rest");
    for args in [
        vec!["experiment", "signchange", "--windows", "50"],
        vec!["experiment", "moment2"],
        vec!["experiment", "bessel-average", "--t", "1,5"],
    ] {
        let o = run(&args, &out);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
    }
    let csv = std::fs::read_to_string(out.join("bessel-average.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}
