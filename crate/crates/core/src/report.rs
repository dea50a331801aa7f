//! Structured pass/fail records shared by every verification routine.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `true` when the check is `value ≥ tolerance` rather than `value ≤ tolerance`.
    pub lower_bound: bool,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        VerificationReport { name: name.into(), passed: true, checks: Vec::new(), notes: Vec::new() }
    }

    /// Records `value ≤ tolerance`. NaN always fails.
    pub fn check(&mut self, name: impl Into<String>, value: f64, tolerance: f64, witness: Option<String>) -> bool {
        let passed = value <= tolerance;
        self.push(name.into(), value, tolerance, false, passed, witness)
    }

    /// Records `value ≥ floor`.
    pub fn check_min(&mut self, name: impl Into<String>, value: f64, floor: f64, witness: Option<String>) -> bool {
        let passed = value >= floor;
        self.push(name.into(), value, floor, true, passed, witness)
    }

    fn push(&mut self, name: String, value: f64, tolerance: f64, lower_bound: bool, passed: bool, witness: Option<String>) -> bool {
        self.passed &= passed;
        self.checks.push(CheckRecord { name, value, tolerance, lower_bound, passed, witness });
        passed
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn merge(&mut self, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{}: {}", other.name, c.name);
            self.passed &= c.passed;
            self.checks.push(c);
        }
        self.notes.extend(other.notes.into_iter().map(|n| format!("{}: {n}", other.name)));
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} [{}]\n", self.name, if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let op = if c.lower_bound { ">=" } else { "<=" };
            let _ = write!(s, "  {} {}: {:.3e} {op} {:.3e}", if c.passed { "ok " } else { "BAD" }, c.name, c.value, c.tolerance);
            if let Some(w) = &c.witness {
                let _ = write!(s, " ({w})");
            }
            s.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails_and_merge_propagates() {
        let mut a = VerificationReport::new("a");
        assert!(a.check("x", 1e-9, 1e-6, None));
        assert!(a.passed);
        let mut b = VerificationReport::new("b");
        assert!(!b.check("y", f64::NAN, 1.0, None));
        assert!(!b.check_min("z", f64::NAN, 0.0, None));
        a.merge(b);
        assert!(!a.passed);
        assert_eq!(a.checks.len(), 3);
        assert!(a.summary().contains("b: y"));
    }
}
