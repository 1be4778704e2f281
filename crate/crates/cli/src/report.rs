//! Report files: the CSV, its JSON mirror, the timings sidecar and the
//! human-readable summary of an existing CSV.

use std::fmt::Write as _;

use acmcf_core::verify::CSV_HEADER;
use acmcf_core::{ReportRow, Sided, VerificationReport};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("report CSV has header {found:?}, expected {CSV_HEADER:?}")]
    Header { found: String },
    #[error("line {line}: {msg}")]
    Row { line: usize, msg: String },
}

#[derive(Serialize)]
struct JsonRow<'a> {
    scenario: &'a str,
    epsilon: Option<f64>,
    check: &'a str,
    value: f64,
    target: f64,
    tolerance: f64,
    sided: &'static str,
    pass: bool,
    must_detect: bool,
    seconds: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    metadata: std::collections::BTreeMap<&'a str, &'a str>,
    rows: Vec<JsonRow<'a>>,
    all_pass: bool,
}

/// JSON mirror of the CSV plus metadata; non-finite values become `null`.
pub fn to_json(report: &VerificationReport) -> String {
    let doc = JsonReport {
        metadata: report.metadata.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
        rows: report
            .rows
            .iter()
            .map(|r| JsonRow {
                scenario: &r.scenario,
                epsilon: r.eps,
                check: &r.check,
                value: r.value,
                target: r.target,
                tolerance: r.tolerance,
                sided: r.sided.name(),
                pass: r.pass,
                must_detect: r.must_detect,
                seconds: r.seconds,
            })
            .collect(),
        all_pass: report.all_pass(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report rows serialize");
    s.push('\n');
    s
}

/// Wall-clock timings; kept out of the CSV so the CSV is reproducible.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub scenario: String,
    pub threads: usize,
    pub runs: Vec<RunTiming>,
    pub checks: Vec<CheckTiming>,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunTiming {
    pub epsilon: f64,
    pub resolution: usize,
    pub steps: usize,
    pub dt: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckTiming {
    pub check: String,
    pub seconds: f64,
}

/// Rows of a CSV written by [`VerificationReport::to_csv`]; check names
/// ending in `_detect` are must-detect rows.
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>, CsvError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != CSV_HEADER {
        return Err(CsvError::Header {
            found: header.to_string(),
        });
    }
    let num = |s: &str, line: usize, what: &str| -> Result<f64, CsvError> {
        s.parse::<f64>().map_err(|_| CsvError::Row {
            line,
            msg: format!("{what} {s:?} is not a number"),
        })
    };
    let mut rows = Vec::new();
    for (k, l) in lines.enumerate() {
        let line = k + 2;
        if l.is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 9 {
            return Err(CsvError::Row {
                line,
                msg: format!("{} columns, expected 9", f.len()),
            });
        }
        let eps = if f[1] == "-" {
            None
        } else {
            Some(num(f[1], line, "epsilon")?)
        };
        let sided = Sided::parse(f[6]).ok_or_else(|| CsvError::Row {
            line,
            msg: format!("unknown sidedness {:?}", f[6]),
        })?;
        let pass = match f[7] {
            "true" => true,
            "false" => false,
            other => {
                return Err(CsvError::Row {
                    line,
                    msg: format!("pass column {other:?}"),
                })
            }
        };
        let mut row = ReportRow::new(
            f[0],
            eps,
            f[2],
            num(f[3], line, "value")?,
            num(f[4], line, "target")?,
            num(f[5], line, "tolerance")?,
            sided,
            num(f[8], line, "seconds")?,
        );
        row.pass = pass;
        row.must_detect = f[2].ends_with("_detect");
        rows.push(row);
    }
    Ok(rows)
}

/// Per-scenario counts followed by every failing row.
pub fn summary(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    let mut scenarios: Vec<&str> = rows.iter().map(|r| r.scenario.as_str()).collect();
    scenarios.dedup();
    for s in scenarios {
        let of: Vec<&ReportRow> = rows.iter().filter(|r| r.scenario == s).collect();
        let passed = of.iter().filter(|r| r.pass).count();
        let detect = of.iter().filter(|r| r.must_detect).count();
        let _ = writeln!(out, "{s}: {passed}/{} rows pass ({detect} must-detect)", of.len());
    }
    let failing: Vec<&ReportRow> = rows.iter().filter(|r| !r.pass).collect();
    if failing.is_empty() {
        out.push_str("all checks pass\n");
    } else {
        let _ = writeln!(out, "{} failing rows:", failing.len());
        for r in failing {
            let eps = r.eps.map_or("-".to_string(), |e| e.to_string());
            let what = if r.must_detect { "not detected" } else { "failed" };
            let _ = writeln!(
                out,
                "  {} eps={} {} {}: value {} vs target {} ({} tol {})",
                r.scenario,
                eps,
                r.check,
                what,
                r.value,
                r.target,
                r.sided.name(),
                r.tolerance
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut r = VerificationReport::new();
        r.push(ReportRow::new(
            "s",
            Some(0.02),
            "brakke_a",
            -1e-4,
            0.0,
            0.05,
            Sided::Upper,
            0.02,
        ));
        r.push(ReportRow::new("s", None, "bv_jump_detect", 1.25, 1.2501, 0.0125, Sided::TwoSided, 0.1).detect());
        r.push(ReportRow::refused("s", Some(0.01), "mfp_lsc"));
        r.sort();
        r
    }

    #[test]
    fn csv_round_trips_through_the_parser() {
        let r = sample();
        let rows = parse_csv(&r.to_csv()).unwrap();
        assert_eq!(rows.len(), 3);
        for (a, b) in rows.iter().zip(&r.rows) {
            assert_eq!(a.check, b.check);
            assert_eq!(a.pass, b.pass);
            assert_eq!(a.must_detect, b.must_detect);
            assert!(a.value.to_bits() == b.value.to_bits() || (a.value.is_nan() && b.value.is_nan()));
        }
        let mut again = VerificationReport::new();
        again.extend(rows);
        assert_eq!(again.to_csv(), r.to_csv());
    }

    #[test]
    fn summary_lists_failures() {
        let s = summary(&sample().rows);
        assert!(s.contains("s: 2/3 rows pass (1 must-detect)"), "{s}");
        assert!(s.contains("mfp_lsc failed"));
    }

    #[test]
    fn bad_csv_is_rejected() {
        assert!(matches!(parse_csv("a,b\n"), Err(CsvError::Header { .. })));
        let text = format!("{CSV_HEADER}\ns,-,x,1,2,3,upper,maybe,0\n");
        assert!(matches!(parse_csv(&text), Err(CsvError::Row { line: 2, .. })));
    }

    #[test]
    fn json_mirror_holds_every_row() {
        let v: serde_json::Value = serde_json::from_str(&to_json(&sample())).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        assert_eq!(v["all_pass"], false);
        assert!(v["rows"][2]["value"].is_null());
    }
}
