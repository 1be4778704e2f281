use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

/// How a measured value is compared with its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sided {
    /// `value ≤ target + tolerance`.
    Upper,
    /// `value < target`.
    UpperStrict,
    /// `value ≥ target − tolerance`.
    Lower,
    /// `|value − target| ≤ tolerance`.
    TwoSided,
}

impl Sided {
    pub fn name(&self) -> &'static str {
        match self {
            Sided::Upper => "upper",
            Sided::UpperStrict => "upper-strict",
            Sided::Lower => "lower",
            Sided::TwoSided => "two-sided",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "upper" => Sided::Upper,
            "upper-strict" => Sided::UpperStrict,
            "lower" => Sided::Lower,
            "two-sided" => Sided::TwoSided,
            _ => return None,
        })
    }

    pub fn holds(&self, value: f64, target: f64, tolerance: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match self {
            Sided::Upper => value <= target + tolerance,
            Sided::UpperStrict => value < target,
            Sided::Lower => value >= target - tolerance,
            Sided::TwoSided => libm::fabs(value - target) <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    /// `None` for analytic or sweep-level rows.
    pub eps: Option<f64>,
    pub check: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub sided: Sided,
    pub pass: bool,
    /// Simulated time span the row covers.
    pub seconds: f64,
    /// The row records an expected violation; passing means it was detected.
    pub must_detect: bool,
}

impl ReportRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scenario: &str,
        eps: Option<f64>,
        check: &str,
        value: f64,
        target: f64,
        tolerance: f64,
        sided: Sided,
        seconds: f64,
    ) -> Self {
        Self {
            scenario: scenario.into(),
            eps,
            check: check.into(),
            value,
            target,
            tolerance,
            sided,
            pass: sided.holds(value, target, tolerance),
            seconds,
            must_detect: false,
        }
    }

    pub fn detect(mut self) -> Self {
        self.must_detect = true;
        self
    }

    /// A row recording that a check was refused or could not be evaluated.
    pub fn refused(scenario: &str, eps: Option<f64>, check: &str) -> Self {
        Self {
            scenario: scenario.into(),
            eps,
            check: check.into(),
            value: f64::NAN,
            target: f64::NAN,
            tolerance: f64::NAN,
            sided: Sided::TwoSided,
            pass: false,
            seconds: 0.0,
            must_detect: false,
        }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.scenario
            .cmp(&other.scenario)
            .then_with(|| match (self.eps, other.eps) {
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (Some(a), Some(b)) => b.total_cmp(&a),
            })
            .then_with(|| self.check.cmp(&other.check))
    }
}

/// Rows sorted by `(scenario, ε descending, check)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub rows: Vec<ReportRow>,
    /// Free-form `key=value` metadata (ε list, grid, scheme, caps).
    pub metadata: Vec<(String, String)>,
}

pub const CSV_HEADER: &str = "scenario,epsilon,check,value,target,tolerance,sided,pass,seconds";

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ReportRow>) {
        self.rows.extend(rows);
    }

    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.key_cmp(b));
    }

    /// Every ordinary row passes and every must-detect row detected.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn find(&self, scenario: &str, eps: Option<f64>, check: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.eps == eps && r.check == check)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let eps = match r.eps {
                Some(e) => format!("{e}"),
                None => String::from("-"),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.scenario,
                eps,
                r.check,
                r.value,
                r.target,
                r.tolerance,
                r.sided.name(),
                if r.pass { "true" } else { "false" },
                r.seconds
            );
        }
        out
    }
}
