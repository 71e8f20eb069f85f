use serde::Serialize;

use super::features::FeatureStream;
use super::oracle::{first_infeasible_step, StepWindow};
use crate::error::{Error, Result};
use crate::textalign::{StepAssignment, TokenSequence};

/// Default widening of caption spans, in seconds.
pub const DEFAULT_BEFORE_S: f64 = 0.0;
pub const DEFAULT_AFTER_S: f64 = 10.0;

/// For every item, which intervals each narrated token may refer to:
/// `marks[n][s][t]` is set iff interval `t` overlaps the caption span of
/// token `s` widened by `before_s` on the left and `after_s` on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintWindows {
    pub before_s: f64,
    pub after_s: f64,
    pub item_ids: Vec<String>,
    pub marks: Vec<Vec<Vec<bool>>>,
}

/// Windows for every sequence, joined to its feature stream by item id.
/// Items follow the order of `streams`; a stream without narration gets no
/// token rows.
pub fn build_constraint_windows(
    sequences: &[TokenSequence],
    streams: &[FeatureStream],
    before_s: f64,
    after_s: f64,
) -> Result<ConstraintWindows> {
    if !(before_s >= 0.0 && after_s >= 0.0 && before_s.is_finite() && after_s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "window widening must be finite and non-negative, got ({before_s}, {after_s})"
        )));
    }
    if let Some(seq) = sequences
        .iter()
        .find(|seq| !streams.iter().any(|s| s.item_id == seq.item_id))
    {
        return Err(Error::UnknownItem(format!("{} (narrated but has no features)", seq.item_id)));
    }
    let marks = streams
        .iter()
        .map(|stream| {
            let Some(seq) = sequences.iter().find(|q| q.item_id == stream.item_id) else {
                return Vec::new();
            };
            seq.spans
                .iter()
                .map(|span| {
                    let ws = span.start_s - before_s;
                    let we = span.end_s + after_s;
                    (0..stream.num_intervals())
                        .map(|t| {
                            let (is, ie) = stream.interval_span(t);
                            if ws < we {
                                is < we && ws < ie
                            } else {
                                is <= ws && ws < ie
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(ConstraintWindows {
        before_s,
        after_s,
        item_ids: streams.iter().map(|s| s.item_id.clone()).collect(),
        marks,
    })
}

/// Per-item step windows derived from token windows and step assignments,
/// after the infeasibility policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepConstraints {
    pub windows: Vec<Vec<StepWindow>>,
    /// Human-readable notes about dropped constraints, one per affected item.
    pub warnings: Vec<String>,
}

/// Step `k` of item `n` must fall inside the union of the windows of the
/// item's tokens assigned to `k`; a step without tokens is unconstrained.
/// Items are matched by id and follow the order of `windows`.
///
/// When an item's constraints cannot all hold under the ordering, steps
/// are constrained one by one in decreasing order of support (the number
/// of tokens aligned to them across the corpus), and a step whose window
/// would make the item infeasible is left unconstrained with a warning.
pub fn step_constraints(windows: &ConstraintWindows, steps: &StepAssignment) -> Result<StepConstraints> {
    let k_len = steps.num_steps;
    let mut order: Vec<usize> = (0..k_len).collect();
    order.sort_by(|&a, &b| steps.support[b].cmp(&steps.support[a]));

    let mut out = Vec::with_capacity(windows.item_ids.len());
    let mut warnings = Vec::new();
    for (item_id, marks) in windows.item_ids.iter().zip(&windows.marks) {
        let num_intervals = marks.first().map(Vec::len);
        let mut wanted: Vec<StepWindow> = vec![None; k_len];
        if let Some(n) = steps.item_index(item_id) {
            let rows = &steps.assignments[n];
            if rows.len() != marks.len() {
                return Err(Error::Inconsistent(format!(
                    "item `{item_id}` has {} tokens in the step file and {} in the narration",
                    rows.len(),
                    marks.len()
                )));
            }
            for (row, step) in marks.iter().zip(rows) {
                if let Some(k) = *step {
                    let w = wanted[k].get_or_insert_with(|| vec![false; row.len()]);
                    for (acc, &m) in w.iter_mut().zip(row) {
                        *acc |= m;
                    }
                }
            }
        }
        let Some(num_intervals) = num_intervals else {
            out.push(wanted);
            continue;
        };
        let (kept, warning) = enforce_feasible(item_id, num_intervals, wanted, &order);
        warnings.extend(warning);
        out.push(kept);
    }
    Ok(StepConstraints {
        windows: out,
        warnings,
    })
}

/// Keeps `wanted` when it admits an ordered placement. Otherwise windows
/// are added back one step at a time following `priority`, skipping any
/// that would make the item infeasible; the skipped steps are reported.
pub(crate) fn enforce_feasible(
    item_id: &str,
    num_intervals: usize,
    mut wanted: Vec<StepWindow>,
    priority: &[usize],
) -> (Vec<StepWindow>, Option<String>) {
    if first_infeasible_step(num_intervals, &wanted).is_none() {
        return (wanted, None);
    }
    let mut kept: Vec<StepWindow> = vec![None; wanted.len()];
    let mut dropped = Vec::new();
    for &k in priority {
        if wanted[k].is_none() {
            continue;
        }
        kept[k] = wanted[k].take();
        if first_infeasible_step(num_intervals, &kept).is_some() {
            kept[k] = None;
            dropped.push(k);
        }
    }
    dropped.sort_unstable();
    let msg = format!("item `{item_id}`: constraints dropped for steps {dropped:?}");
    log::debug!("{msg}");
    (kept, Some(msg))
}
