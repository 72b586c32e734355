//! Structured verification outcomes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    /// Reported for context only.
    Info,
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Within { target: f64, tol: f64 },
    InRange { lo: f64, hi: f64 },
    /// Value is `1.0` for true, `0.0` for false.
    IsTrue,
}

impl Bound {
    pub fn holds(&self, value: f64) -> bool {
        match *self {
            Bound::Info => true,
            Bound::AtMost { limit } => value <= limit,
            Bound::AtLeast { limit } => value >= limit,
            Bound::Within { target, tol } => (value - target).abs() <= tol,
            Bound::InRange { lo, hi } => (lo..=hi).contains(&value),
            Bound::IsTrue => value == 1.0,
        }
    }

    /// Single number for the CSV `tolerance` column.
    pub fn tolerance(&self) -> Option<f64> {
        match *self {
            Bound::Info | Bound::IsTrue => None,
            Bound::AtMost { limit } | Bound::AtLeast { limit } => Some(limit),
            Bound::Within { tol, .. } => Some(tol),
            Bound::InRange { hi, .. } => Some(hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Result of one check. The verdict is pass iff every metric holds and every
/// sub-report passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check_name: String,
    pub inputs: BTreeMap<String, String>,
    pub metrics: Vec<Metric>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Report>,
    pub verdict: Verdict,
    pub tolerance_used: f64,
}

impl Report {
    pub fn new(check_name: impl Into<String>, tolerance_used: f64) -> Self {
        Self {
            check_name: check_name.into(),
            inputs: BTreeMap::new(),
            metrics: Vec::new(),
            notes: Vec::new(),
            children: Vec::new(),
            verdict: Verdict::Pass,
            tolerance_used,
        }
    }

    pub fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push_input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    pub fn metric(&mut self, name: &str, value: f64, bound: Bound) -> bool {
        let pass = bound.holds(value);
        self.metrics.push(Metric { name: name.to_string(), value, bound, pass });
        self.refresh();
        pass
    }

    pub fn info(&mut self, name: &str, value: f64) {
        self.metric(name, value, Bound::Info);
    }

    pub fn flag(&mut self, name: &str, value: bool) -> bool {
        self.metric(name, if value { 1.0 } else { 0.0 }, Bound::IsTrue)
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Records a failure that has no numeric face.
    pub fn fail(&mut self, name: &str, reason: impl Into<String>) {
        self.note(format!("{name}: {}", reason.into()));
        self.flag(name, false);
    }

    pub fn child(&mut self, report: Report) {
        self.children.push(report);
        self.refresh();
    }

    fn refresh(&mut self) {
        let ok = self.metrics.iter().all(|m| m.pass) && self.children.iter().all(Report::passed);
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn get(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|m| m.value)
    }

    /// Name of the first metric that does not hold, searching children after
    /// the report's own metrics.
    pub fn first_failure(&self) -> Option<&str> {
        self.metrics
            .iter()
            .find(|m| !m.pass)
            .map(|m| m.name.as_str())
            .or_else(|| self.children.iter().find_map(Report::first_failure))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// `check,metric,value,tolerance,verdict` rows, children flattened after
    /// their parent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,metric,value,tolerance,verdict\n");
        self.write_csv_rows(&mut out);
        out
    }

    fn write_csv_rows(&self, out: &mut String) {
        for m in &self.metrics {
            let tol = m.bound.tolerance().map(|t| format!("{t:e}")).unwrap_or_default();
            let verdict = if m.pass { "pass" } else { "fail" };
            let _ = writeln!(out, "{},{},{:e},{},{}", self.check_name, m.name, m.value, tol, verdict);
        }
        for c in &self.children {
            c.write_csv_rows(out);
        }
    }

    /// One line per child plus a total, for terminals.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let width = self.children.iter().map(|c| c.check_name.len()).max().unwrap_or(0).max(5);
        for c in &self.children {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            let why = c.first_failure().map(|f| format!("  ({f})")).unwrap_or_default();
            let line = format!("{status}  {:<width$}{why}", c.check_name);
            let _ = writeln!(out, "{}", line.trim_end());
        }
        let passed = self.children.iter().filter(|c| c.passed()).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.children.len());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_metrics() {
        let mut r = Report::new("demo", 1e-10);
        assert!(r.passed());
        r.metric("defect", 1e-12, Bound::AtMost { limit: 1e-10 });
        r.info("norm", 3.0);
        assert!(r.passed());
        r.metric("gap", 0.01, Bound::AtLeast { limit: 0.1 });
        assert!(!r.passed());
        assert_eq!(r.first_failure(), Some("gap"));
    }

    #[test]
    fn children_propagate_failure() {
        let mut parent = Report::new("suite", 0.0);
        let mut child = Report::new("inner", 0.0);
        child.flag("ok", false);
        parent.child(child);
        assert!(!parent.passed());
        assert_eq!(parent.first_failure(), Some("ok"));
        assert_eq!(parent.summary_table(), "FAIL  inner  (ok)\n0/1 checks passed\n");
    }

    #[test]
    fn bounds() {
        assert!(Bound::Within { target: 3.0, tol: 1e-8 }.holds(3.0 + 1e-9));
        assert!(!Bound::InRange { lo: 0.1, hi: 0.5 }.holds(0.6));
        assert!(!Bound::IsTrue.holds(0.0));
        assert!(!Bound::AtMost { limit: 1.0 }.holds(f64::NAN));
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new("norm", 1e-8);
        r.metric("estimate", 3.0, Bound::Within { target: 3.0, tol: 1e-8 });
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("check,metric,value,tolerance,verdict"));
        assert_eq!(lines.next(), Some("norm,estimate,3e0,1e-8,pass"));
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("x", 1e-6).input("space", "hardy");
        r.metric("a", 0.5, Bound::InRange { lo: 0.0, hi: 1.0 });
        r.note("hello");
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
