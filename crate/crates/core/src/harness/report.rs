use serde::{Deserialize, Serialize};

use super::campaign::Cell;
use super::checks::{Check, Inputs};
use crate::tol::Tolerances;

pub const REPORT_SCHEMA: &str = "relent-report/1";
pub const WITNESS_SCHEMA: &str = "relent-witness/1";

/// Everything needed to re-run one check instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    pub schema: String,
    pub check: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<Cell>,
    pub sample: usize,
    pub seed: u64,
    /// Campaign overrides in force when the instance ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    pub inputs: Inputs,
}

impl Witness {
    pub fn new(check: Check, cell: Option<Cell>, sample: usize, seed: u64, inputs: Inputs) -> Self {
        Witness { schema: WITNESS_SCHEMA.into(), check: check.name().into(), cell, sample, seed, tolerances: None, inputs }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub sample: usize,
    /// Absent only when the sampler itself failed before producing inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CellReport {
    pub cell: Option<Cell>,
    pub pass_count: usize,
    pub fail_count: usize,
    pub worst_defect: f64,
    pub failures: Vec<Failure>,
}

impl CellReport {
    pub fn new(cell: Option<Cell>) -> Self {
        CellReport { cell, worst_defect: f64::NEG_INFINITY, ..Default::default() }
    }

    pub fn record(&mut self, defect: f64, failure: Option<Failure>) {
        self.worst_defect = self.worst_defect.max(defect);
        match failure {
            None => self.pass_count += 1,
            Some(f) => {
                self.fail_count += 1;
                self.failures.push(f);
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub pass_count: usize,
    pub fail_count: usize,
    pub worst_defect: f64,
    /// Fraction of instances exhibiting a violation, for checks that look for one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation_rate: Option<f64>,
    pub cells: Vec<CellReport>,
}

impl CheckReport {
    pub fn from_cells(check: Check, cells: Vec<CellReport>) -> Self {
        let pass_count = cells.iter().map(|c| c.pass_count).sum();
        let fail_count = cells.iter().map(|c| c.fail_count).sum();
        let worst_defect = cells.iter().map(|c| c.worst_defect).fold(f64::NEG_INFINITY, f64::max);
        let total = pass_count + fail_count;
        let violation_rate = (check.is_fixed() && total > 0).then(|| pass_count as f64 / total as f64);
        CheckReport { name: check.name().into(), pass_count, fail_count, worst_defect, violation_rate, cells }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: String,
    pub seed: u64,
    pub checks: Vec<CheckReport>,
    pub total_pass: usize,
    pub total_fail: usize,
}

impl Report {
    pub fn new(seed: u64, checks: Vec<CheckReport>) -> Self {
        let total_pass = checks.iter().map(|c| c.pass_count).sum();
        let total_fail = checks.iter().map(|c| c.fail_count).sum();
        Report { schema: REPORT_SCHEMA.into(), seed, checks, total_pass, total_fail }
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
