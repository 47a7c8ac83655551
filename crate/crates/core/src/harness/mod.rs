//! Seeded verification campaigns over dimension and rank grids.

pub mod campaign;
pub mod checks;
pub mod report;

use rayon::prelude::*;
use serde::Serialize;

pub use campaign::{Campaign, Cell, RankClass};
pub use checks::{Check, Inputs, Outcome};
pub use report::{CellReport, CheckReport, Failure, Report, Witness, REPORT_SCHEMA, WITNESS_SCHEMA};

use crate::tol::{Tolerances, DEFAULT};
use crate::{rng, Error, Result};

/// Substream of one sample: check index in bits 40.., cell index in bits 24..40, sample below.
pub fn stream_id(check: Check, cell_idx: usize, sample: usize) -> u64 {
    (check.index() << 40) | ((cell_idx as u64) << 24) | sample as u64
}

/// Regenerate the inputs of one instance of a campaign, failing or not.
pub fn witness(c: &Campaign, check: Check, cell_idx: usize, sample: usize) -> Result<Witness> {
    if check.is_fixed() {
        let inputs = checks::fixed_instances(check)
            .into_iter()
            .nth(sample)
            .ok_or_else(|| Error::InvalidArgument(format!("sample {sample} is out of range")))?;
        return Ok(Witness { tolerances: c.tolerances, ..Witness::new(check, None, sample, c.seed, inputs) });
    }
    let cell = *c.cells().get(cell_idx).ok_or_else(|| Error::InvalidArgument(format!("no cell {cell_idx}")))?;
    let mut g = rng::stream(c.seed, stream_id(check, cell_idx, sample));
    let inputs = checks::generate(check, &cell, &mut g)?;
    Ok(Witness { tolerances: c.tolerances, ..Witness::new(check, Some(cell), sample, c.seed, inputs) })
}

fn run_one(w: Witness, check: Check, tol: &Tolerances) -> (f64, Option<Failure>) {
    match checks::evaluate(check, w.cell.as_ref(), &w.inputs, tol) {
        Ok(o) if o.holds => (o.defect, None),
        Ok(o) => (o.defect, Some(Failure { sample: w.sample, witness: Some(w), defect: o.defect, error: None })),
        Err(e) => (f64::MAX, Some(Failure { sample: w.sample, witness: Some(w), defect: f64::MAX, error: Some(e.to_string()) })),
    }
}

fn run_cell(c: &Campaign, check: Check, cell_idx: usize, tol: &Tolerances) -> CellReport {
    let cells = c.cells();
    let (cell, n) = if check.is_fixed() {
        (None, checks::fixed_instances(check).len())
    } else {
        (Some(cells[cell_idx]), c.samples)
    };
    let results: Vec<(f64, Option<Failure>)> = (0..n)
        .into_par_iter()
        .map(|s| match witness(c, check, cell_idx, s) {
            Ok(w) => run_one(w, check, tol),
            Err(e) => (f64::MAX, Some(Failure { witness: None, sample: s, defect: f64::MAX, error: Some(e.to_string()) })),
        })
        .collect();
    let mut rep = CellReport::new(cell);
    for (d, f) in results {
        rep.record(d, f);
    }
    rep
}

/// Run every selected check over the campaign grid. The report depends only on
/// the campaign, not on `jobs` or scheduling.
pub fn run_campaign(c: &Campaign, jobs: Option<usize>) -> Result<Report> {
    c.validate()?;
    let tol = c.tolerances.unwrap_or(DEFAULT);
    let selected = c.selected_checks()?;
    let cells = c.cells();
    let body = || -> Vec<CheckReport> {
        selected
            .iter()
            .map(|&check| {
                let idxs: Vec<usize> = if check.is_fixed() {
                    vec![0]
                } else {
                    (0..cells.len())
                        .filter(|&i| !(check.full_rank_only() && cells[i].rank == RankClass::Deficient))
                        .collect()
                };
                let reps: Vec<CellReport> = idxs.par_iter().map(|&i| run_cell(c, check, i, &tol)).collect();
                CheckReport::from_cells(check, reps)
            })
            .collect()
    };
    let checks = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(body),
        None => body(),
    };
    Ok(Report::new(c.seed, checks))
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayResult {
    pub check: String,
    pub cell: Option<Cell>,
    pub sample: usize,
    pub defect: f64,
    pub holds: bool,
    pub details: serde_json::Value,
}

/// Re-run the single instance described by a serialized [`Witness`], under the
/// witness's own tolerance overrides when it carries them.
pub fn replay_witness(text: &str, tol: &Tolerances) -> Result<ReplayResult> {
    let w: Witness = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if w.schema != WITNESS_SCHEMA {
        return Err(Error::Schema(format!("unsupported schema `{}`", w.schema)));
    }
    let check: Check = w.check.parse()?;
    let tol = w.tolerances.as_ref().unwrap_or(tol);
    let o = checks::evaluate(check, w.cell.as_ref(), &w.inputs, tol)?;
    Ok(ReplayResult { check: w.check, cell: w.cell, sample: w.sample, defect: o.defect, holds: o.holds, details: o.details })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Campaign {
        Campaign { samples: 2, ..Campaign::default() }
    }

    #[test]
    fn empty_check_set_gives_empty_report() {
        let r = run_campaign(&Campaign { checks: vec![], ..small() }, None).unwrap();
        assert!(r.checks.is_empty());
        assert_eq!(r.total_pass + r.total_fail, 0);
    }

    #[test]
    fn deterministic_across_job_counts() {
        let c = Campaign { checks: vec!["dpi".into(), "equivalence".into(), "pullback".into()], ..small() };
        let a = run_campaign(&c, Some(1)).unwrap().to_json();
        let b = run_campaign(&c, Some(4)).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn counterexample_rate_is_total() {
        let c = Campaign { checks: vec!["counterexample".into()], ..small() };
        let r = run_campaign(&c, None).unwrap();
        let ce = r.check("counterexample").unwrap();
        assert_eq!(ce.violation_rate, Some(1.0));
        assert_eq!(ce.pass_count, 200);
    }

    #[test]
    fn replay_matches_and_rejects_garbage() {
        let c = small();
        let w = witness(&c, Check::Dpi, 1, 0).unwrap();
        let r = replay_witness(&serde_json::to_string(&w).unwrap(), &DEFAULT).unwrap();
        assert!(r.holds);
        assert!(matches!(replay_witness("{\"schema\": 3}", &DEFAULT), Err(Error::Schema(_))));
        let mut bad = serde_json::to_value(&w).unwrap();
        bad["schema"] = "other/9".into();
        assert!(matches!(replay_witness(&bad.to_string(), &DEFAULT), Err(Error::Schema(_))));
    }

    #[test]
    fn forced_failure_replays_to_failure() {
        let tight = Tolerances { recovery: -1.0, ..DEFAULT };
        let c = Campaign { checks: vec!["recovery".into()], tolerances: Some(tight), ..small() };
        let r = run_campaign(&c, None).unwrap();
        let f = &r.checks[0].cells[0].failures[0];
        let f = f.witness.as_ref().unwrap();
        let replay = replay_witness(&serde_json::to_string(f).unwrap(), &DEFAULT).unwrap();
        assert!(!replay.holds);
    }
}
