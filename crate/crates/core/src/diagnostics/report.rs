use std::fmt;
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported, not asserted.
    Info,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "true",
            Verdict::Fail => "false",
            Verdict::Info => "info",
        })
    }
}

/// One line of `check,quantity,tau_or_t_or_k,value,bound,pass`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub check: String,
    pub quantity: String,
    pub at: Option<f64>,
    pub value: f64,
    pub bound: Option<f64>,
    pub verdict: Verdict,
}

impl ReportRow {
    pub fn new(check: &str, quantity: &str, at: Option<f64>, value: f64, bound: Option<f64>, verdict: Verdict) -> Self {
        ReportRow {
            check: check.to_string(),
            quantity: quantity.to_string(),
            at,
            value,
            bound,
            verdict,
        }
    }

    pub fn info(check: &str, quantity: &str, at: Option<f64>, value: f64) -> Self {
        Self::new(check, quantity, at, value, None, Verdict::Info)
    }
}

pub const REPORT_HEADER: &str = "check,quantity,tau_or_t_or_k,value,bound,pass";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ReportRow>) {
        self.rows.extend(rows);
    }

    /// No row failed.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{REPORT_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:e},{},{}",
                r.check,
                r.quantity,
                opt(r.at),
                r.value,
                opt(r.bound),
                r.verdict
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut rep = Report::default();
        rep.push(ReportRow::new("bounds", "undershoot", None, 0.0, Some(1e-8), Verdict::Pass));
        rep.push(ReportRow::info("mass", "drift", Some(0.5), 0.25));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "check,quantity,tau_or_t_or_k,value,bound,pass\nbounds,undershoot,,0e0,1e-8,true\nmass,drift,5e-1,2.5e-1,,info\n"
        );
        assert!(rep.all_pass());
    }
}
