//! Check reports shared between the library checkers and the command-line
//! front end. One record per check; the text rendering derives from the
//! same records as the machine output. Byte-identical inputs produce
//! byte-identical reports.

use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Result of a single named check. Failures always carry a concrete
/// counterexample in `witness`; inconclusive records arise only from
/// exhausted searches.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub fuel_used: u64,
}

impl CheckRecord {
    pub fn pass(name: impl Into<String>, fuel_used: u64) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Pass,
            witness: None,
            fuel_used,
        }
    }

    pub fn pass_with(name: impl Into<String>, witness: impl Into<String>, fuel_used: u64) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Pass,
            witness: Some(witness.into()),
            fuel_used,
        }
    }

    pub fn fail(name: impl Into<String>, counterexample: impl Into<String>, fuel_used: u64) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Fail,
            witness: Some(counterexample.into()),
            fuel_used,
        }
    }

    pub fn inconclusive(name: impl Into<String>, note: impl Into<String>, fuel_used: u64) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Inconclusive,
            witness: Some(note.into()),
            fuel_used,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfigEcho {
    pub seed: u64,
    pub fuel: u64,
    pub samples: u64,
    pub instance: String,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Summary {
    pub pass: u64,
    pub fail: u64,
    pub inconclusive: u64,
}

/// A full command report. Checks are kept sorted by name so output ordering
/// is independent of evaluation order.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub command: String,
    pub config: RunConfigEcho,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: impl Into<String>, config: RunConfigEcho) -> Self {
        Report {
            report_version: REPORT_VERSION,
            command: command.into(),
            config,
            checks: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = CheckRecord>) {
        self.checks.extend(records);
    }

    /// Sort records and recompute the summary. Call once after all checks ran.
    pub fn finalize(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        let mut summary = Summary::default();
        for c in &self.checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Inconclusive => summary.inconclusive += 1,
            }
        }
        self.summary = summary;
    }

    /// Process exit code: 0 all pass, 1 any fail, 3 inconclusive-only.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            1
        } else if self.summary.inconclusive > 0 {
            3
        } else {
            0
        }
    }

    /// Human-readable rendering, derived from the same records.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{} (report v{})", self.command, self.report_version);
        let _ = writeln!(
            out,
            "config: instance={} seed={} fuel={} samples={}",
            self.config.instance, self.config.seed, self.config.fuel, self.config.samples
        );
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Inconclusive => "inconclusive",
            };
            match &c.witness {
                Some(w) => {
                    let _ = writeln!(out, "  [{status}] {} (fuel {}): {w}", c.name, c.fuel_used);
                }
                None => {
                    let _ = writeln!(out, "  [{status}] {} (fuel {})", c.name, c.fuel_used);
                }
            }
        }
        let _ = writeln!(
            out,
            "summary: {} pass, {} fail, {} inconclusive",
            self.summary.pass, self.summary.fail, self.summary.inconclusive
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_status() {
        let cfg = RunConfigEcho {
            seed: 1,
            fuel: 10,
            samples: 2,
            instance: "reals".into(),
        };
        let mut r = Report::new("check", cfg.clone());
        r.push(CheckRecord::pass("b", 5));
        r.finalize();
        assert_eq!(r.exit_code(), 0);
        r.push(CheckRecord::inconclusive("c", "ran out", 10));
        r.finalize();
        assert_eq!(r.exit_code(), 3);
        r.push(CheckRecord::fail("a", "bad", 10));
        r.finalize();
        assert_eq!(r.exit_code(), 1);
        // Records are ordered by name regardless of insertion order.
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["a", "b", "c"]);
        assert!(r.render_text().contains("[FAIL] a"));
    }
}
