//! Result table shared by every scoring command: one row per
//! `(task, method, K, seed)`, so comparisons across runs are joins.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub task: String,
    pub method: String,
    /// Requested step count.
    pub k: usize,
    pub seed: u64,
    /// Step count actually localized.
    pub k_pred: usize,
    pub f1: f64,
    /// Error bar: lowest and highest F1 among the rounded iterates visited
    /// after the best one, or across folds.
    pub f1_min: f64,
    pub f1_max: f64,
    pub precision: f64,
    pub recall: f64,
}

pub const HEADER: &str = "task,method,k,seed,k_pred,f1,f1_min,f1_max,precision,recall";

pub fn format_results(rows: &[ResultRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.task, r.method, r.k, r.seed, r.k_pred, r.f1, r.f1_min, r.f1_max, r.precision, r.recall
        );
    }
    out
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    std::fs::write(path, format_results(rows)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_precision_rows() {
        let row = ResultRow {
            task: "t".into(),
            method: "full".into(),
            k: 3,
            seed: 7,
            k_pred: 2,
            f1: 4.0 / 7.0,
            f1_min: 0.5,
            f1_max: 0.6,
            precision: 0.5,
            recall: 2.0 / 3.0,
        };
        assert_eq!(
            format_results(&[row]),
            format!("{HEADER}\nt,full,3,7,2,0.571429,0.500000,0.600000,0.500000,0.666667\n")
        );
    }
}
