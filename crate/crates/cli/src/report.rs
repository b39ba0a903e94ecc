use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub payload: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
}

/// Collects the checks of one suite, timing each.
pub struct Recorder {
    timings: bool,
    name: String,
    checks: Vec<Check>,
}

impl Recorder {
    pub fn new(name: &str, timings: bool) -> Self {
        Recorder {
            timings,
            name: name.to_string(),
            checks: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, f: impl FnOnce() -> (bool, Value)) {
        let start = Instant::now();
        let (ok, payload) = f();
        self.push(name, if ok { Status::Pass } else { Status::Fail }, payload, start);
    }

    pub fn skip(&mut self, name: &str, reason: &str) {
        self.push(name, Status::Skipped, json!({ "reason": reason }), Instant::now());
    }

    fn push(&mut self, name: &str, status: Status, payload: Value, start: Instant) {
        let wall_ms = self.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
        self.checks.push(Check {
            name: name.to_string(),
            status,
            payload,
            wall_ms,
        });
    }

    pub fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            checks: self.checks,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: Tool,
    pub config: Value,
    pub suites: Vec<SuiteReport>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: Value, suites: Vec<SuiteReport>) -> Self {
        let count = |s: Status| {
            suites
                .iter()
                .flat_map(|r| &r.checks)
                .filter(|c| c.status == s)
                .count()
        };
        let (passed, failed, skipped) = (count(Status::Pass), count(Status::Fail), count(Status::Skipped));
        Report {
            tool: Tool {
                name: "verify",
                version: env!("CARGO_PKG_VERSION"),
            },
            config,
            suites,
            summary: Summary {
                passed,
                failed,
                skipped,
                status: if failed == 0 { Status::Pass } else { Status::Fail },
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per leaf value; arrays of per-spin objects give one row per
    /// spin.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "check", "status", "spin", "key", "value"])
            .expect("in-memory csv");
        for suite in &self.suites {
            for check in &suite.checks {
                let status = serde_json::to_value(check.status).expect("status serializes");
                let status = status.as_str().unwrap_or_default();
                let mut rows = Vec::new();
                flatten(&check.payload, "", None, &mut rows);
                if let Some(ms) = check.wall_ms {
                    rows.push((None, "wall_ms".to_string(), format!("{ms:.3}")));
                }
                if rows.is_empty() {
                    rows.push((None, String::new(), String::new()));
                }
                for (spin, key, value) in rows {
                    let spin = spin.map(|s| s.to_string()).unwrap_or_default();
                    w.write_record([suite.name.as_str(), &check.name, status, &spin, &key, &value])
                        .expect("in-memory csv");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

fn flatten(v: &Value, prefix: &str, spin: Option<u64>, out: &mut Vec<(Option<u64>, String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            let spin = m.get("spin").and_then(Value::as_u64).or(spin);
            for (k, x) in m {
                if k != "spin" {
                    flatten(x, &join(k), spin, out);
                }
            }
        }
        Value::Array(xs) if xs.iter().all(|x| x.get("spin").is_some()) && !xs.is_empty() => {
            for x in xs {
                flatten(x, prefix, spin, out);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(x, &join(&i.to_string()), spin, out);
            }
        }
        Value::String(s) => out.push((spin, prefix.to_string(), s.clone())),
        other => out.push((spin, prefix.to_string(), other.to_string())),
    }
}
