//! Verification reports and number formatting.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::io;

/// Doubles printed so that they read back bit-for-bit.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub fixture: String,
    pub tableau: String,
    pub h: f64,
    pub quantity: String,
    pub value: f64,
    pub verdict: Verdict,
    /// Empty for PASS; a short machine-readable tag otherwise.
    pub reason: String,
}

impl Row {
    pub fn judged(fixture: &str, tableau: &str, h: f64, quantity: impl Into<String>, value: f64, ok: bool, reason: &str) -> Self {
        Row {
            fixture: fixture.into(),
            tableau: tableau.into(),
            h,
            quantity: quantity.into(),
            value,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            reason: if ok { String::new() } else { reason.into() },
        }
    }

    pub fn skip(fixture: &str, tableau: &str, h: f64, quantity: impl Into<String>, reason: &str) -> Self {
        Row {
            fixture: fixture.into(),
            tableau: tableau.into(),
            h,
            quantity: quantity.into(),
            value: f64::NAN,
            verdict: Verdict::Skip,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub rows: Vec<Row>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    /// Seconds since the Unix epoch when the run started.
    pub started: u64,
}

impl ExperimentReport {
    pub fn new(seed: u64) -> Self {
        let started = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        ExperimentReport { rows: vec![], seed, tolerances: BTreeMap::new(), started }
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == v).count()
    }

    pub fn failed(&self) -> bool {
        self.count(Verdict::Fail) > 0
    }

    /// Rows only, so that output depends on inputs and seed alone.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["fixture", "tableau", "h", "quantity", "value", "verdict", "reason"])?;
        for r in &self.rows {
            out.write_record([
                r.fixture.as_str(),
                r.tableau.as_str(),
                &fmt17(r.h),
                r.quantity.as_str(),
                &fmt17(r.value),
                r.verdict.as_str(),
                r.reason.as_str(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# seed {} started {}", self.seed, self.started);
        for (k, v) in &self.tolerances {
            let _ = writeln!(s, "# tol {k} = {v:e}");
        }
        for r in &self.rows {
            let _ = write!(
                s,
                "{:<4} {:<16} {:<20} h={:<9e} {:<28} {}",
                r.verdict.as_str(),
                r.fixture,
                r.tableau,
                r.h,
                r.quantity,
                if r.value.is_nan() { "-".to_string() } else { fmt17(r.value) }
            );
            if !r.reason.is_empty() {
                let _ = write!(s, "  ({})", r.reason);
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "{} passed, {} failed, {} skipped",
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Skip)
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trippable_floats() {
        for v in [0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_has_reason_column() {
        let mut r = ExperimentReport::new(3);
        r.rows.push(Row::judged("lv2", "heun", 0.01, "drift", 1e-14, true, "drift"));
        r.rows.push(Row::skip("lv2", "heun", 0.01, "pade", "no quadratic invariant"));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("fixture,tableau,h,quantity,value,verdict,reason\n"));
        assert!(text.contains("SKIP,no quadratic invariant"));
        assert!(!r.failed());
    }
}
