use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_rational::BigRational;
use qgeom::classical::ClassicalHyperboloid;
use qgeom_cli::cache::{TableCache, TableKey, CACHE_ENV};
use serde_json::Value;
use tempfile::{tempdir, TempDir};

fn verify(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify"))
        .env(CACHE_ENV, cache)
        .args(args)
        .output()
        .expect("verify runs")
}

struct Run {
    _dir: TempDir,
    cache: PathBuf,
    out: PathBuf,
}

impl Run {
    fn new() -> Self {
        let dir = tempdir().unwrap();
        let cache = dir.path().join("cache");
        let out = dir.path().join("report.json");
        Run { _dir: dir, cache, out }
    }

    fn exec(&self, args: &[&str]) -> Output {
        let mut full: Vec<&str> = args.to_vec();
        let out = self.out.to_str().unwrap();
        full.extend(["--out", out]);
        verify(&self.cache, &full)
    }

    fn report(&self) -> Value {
        serde_json::from_str(&fs::read_to_string(&self.out).unwrap()).unwrap()
    }
}

fn check<'a>(report: &'a Value, suite: &str, name: &str) -> &'a Value {
    report["suites"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == suite)
        .and_then(|s| s["checks"].as_array().unwrap().iter().find(|c| c["name"] == name))
        .unwrap_or_else(|| panic!("no check {suite}/{name}"))
}

fn schema_valid(report: &Value) -> bool {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&schema).unwrap().is_valid(report)
}

#[test]
fn derham_at_three_halves_has_cohomology_one_zero_one() {
    let run = Run::new();
    let out = run.exec(&["derham", "--q", "3/2", "--c", "1", "--degree", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = run.report();
    assert_eq!(check(&report, "derham", "cohomology")["payload"]["cohomology"], serde_json::json!([1, 0, 1]));
    assert_eq!(report["summary"]["status"], "pass");
    assert!(schema_valid(&report));
}

#[test]
fn excluded_and_malformed_flags_are_config_errors() {
    let run = Run::new();
    for args in [
        vec!["flatness", "--q", "0"],
        vec!["flatness", "--q", "1"],
        vec!["flatness", "--q", "-1"],
        vec!["flatness", "--q", "2/0"],
        vec!["flatness", "--q", "x"],
        vec!["flatness", "--q", "3/2", "--degree", "1"],
        vec!["derham", "--q", "3/2", "--degree", "5", "--spin-cutoff", "5"],
        vec!["koszul", "--q", "3/2", "--n", "1"],
        vec!["koszul", "--q", "3/2", "--seed", "4"],
        vec!["flatness", "--bogus"],
    ] {
        let out = run.exec(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!run.out.exists(), "{args:?} wrote a report");
    }
}

#[test]
fn koszul_suite_passes_poincare_identity() {
    let run = Run::new();
    let out = run.exec(&["koszul", "--n", "2", "--degree", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = run.report();
    let p = check(&report, "koszul", "poincare_identity");
    assert_eq!(p["status"], "pass");
    assert_eq!(p["payload"]["minus"], serde_json::json!([1, 2, 1, 0, 0, 0]));
    assert_eq!(p["payload"]["plus"], serde_json::json!([1, 2, 3, 4, 5, 6]));
}

#[test]
fn identical_configs_give_identical_reports() {
    let a = Run::new();
    let b = Run::new();
    let args = ["all", "--q", "random", "--seed", "11", "--degree", "3"];
    assert_eq!(a.exec(&args).status.code(), Some(0));
    assert_eq!(b.exec(&args).status.code(), Some(0));
    // second run in `a` reads its tables from the cache
    let first = fs::read(&a.out).unwrap();
    assert_eq!(a.exec(&args).status.code(), Some(0));
    assert_eq!(first, fs::read(&a.out).unwrap());
    assert_eq!(first, fs::read(&b.out).unwrap());
    let report = a.report();
    assert_eq!(report["config"]["q_mode"], "random");
    assert_eq!(report["config"]["seed"], 11);
    assert!(schema_valid(&report));
}

#[test]
fn timings_are_opt_in() {
    let run = Run::new();
    run.exec(&["koszul", "--q", "2", "--degree", "3", "--timings"]);
    let report = run.report();
    assert!(check(&report, "koszul", "hecke_symmetry")["wall_ms"].is_number());
    assert!(schema_valid(&report));
    run.exec(&["koszul", "--q", "2", "--degree", "3"]);
    assert!(check(&run.report(), "koszul", "hecke_symmetry").get("wall_ms").is_none());
}

#[test]
fn csv_rows_are_split_per_spin() {
    let run = Run::new();
    let out = run.exec(&["derham", "--q", "3/2", "--degree", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&run.out).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap(), vec!["suite", "check", "status", "spin", "key", "value"]);
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    let spins: std::collections::BTreeSet<&str> = records
        .iter()
        .filter(|r| &r[4] == "sectors.cohomology")
        .map(|r| r.get(3).unwrap())
        .collect();
    assert_eq!(spins.into_iter().collect::<Vec<_>>(), vec!["0", "1", "2"]);
}

#[test]
fn hbar_dependent_suites_are_skipped_not_failed() {
    let run = Run::new();
    let out = run.exec(&["derham", "--q", "3/2", "--hbar", "1", "--degree", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = run.report();
    assert_eq!(check(&report, "derham", "suite")["status"], "skipped");
    assert_eq!(report["summary"]["skipped"], 1);
}

#[test]
fn cache_lifecycle() {
    let run = Run::new();
    let cache = run.cache.clone();
    let out = verify(&cache, &["cache", "clear"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("removed 0 entries"));

    assert_eq!(run.exec(&["derham", "--q", "3/2", "--degree", "4"]).status.code(), Some(0));
    let listed = String::from_utf8(verify(&cache, &["cache", "list"]).stdout).unwrap();
    let entries: Vec<Value> = listed.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(entries.iter().any(|e| e["key"]
        == serde_json::json!({"q": "3/2", "c": "1", "hbar": "0", "degree": 4})));

    let victim = cache.join(entries[0]["file"].as_str().unwrap());
    fs::write(&victim, "{ not a table").unwrap();
    let inspected = String::from_utf8(verify(&cache, &["cache", "inspect"]).stdout).unwrap();
    assert!(inspected.contains("\"status\":\"quarantined\""));
    assert!(!victim.exists());
    assert!(cache.join("quarantine").join(victim.file_name().unwrap()).exists());

    let out = verify(&cache, &["cache", "clear"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(cache.join("quarantine").join(victim.file_name().unwrap()).exists());
}

#[test]
fn inconsistent_cached_table_is_a_check_failure_with_report() {
    let run = Run::new();
    // a well-formed entry for q = 3/2 that actually holds the q = 1 table
    let cache = TableCache::open(run.cache.clone()).unwrap();
    let one = BigRational::from_integer(1.into());
    let zero = BigRational::from_integer(0.into());
    let table = ClassicalHyperboloid::new(one.clone(), 4).product_table();
    cache.store(&TableKey::new("3/2", &one, &zero, 4), &table).unwrap();
    let out = run.exec(&["derham", "--q", "3/2", "--degree", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let report = run.report();
    assert_eq!(report["summary"]["status"], "fail");
    assert!(schema_valid(&report));
}
