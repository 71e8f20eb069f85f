//! Linear minimization over ordered step placements.
//!
//! A placement puts each of the `K` steps on exactly one of the `T`
//! intervals, with intervals strictly increasing in step order. Minimizing
//! a linear cost over placements is a monotone path problem on a
//! `(T + 1) x (2K + 1)` grid: step columns are interleaved with zero-cost
//! dummy columns and a zero row is appended at the bottom. The path runs
//! from the top-left to the bottom-right cell. It may wait in a dummy
//! column, enters a step column from the dummy on its left and leaves it
//! diagonally, so it occupies exactly one cell of each step column; that
//! cell's row is the interval of the step.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Admissible intervals of one step; `None` leaves the step unconstrained.
pub type StepWindow = Option<Vec<bool>>;

fn allowed(window: &StepWindow, t: usize) -> bool {
    window.as_ref().is_none_or(|w| w[t])
}

/// First step that cannot be placed when every step takes its earliest
/// admissible interval after the previous one. Earliest placement is
/// optimal for feasibility, so `None` means a placement exists.
pub fn first_infeasible_step(num_intervals: usize, windows: &[StepWindow]) -> Option<usize> {
    let mut next = 0;
    for (k, w) in windows.iter().enumerate() {
        match (next..num_intervals).find(|&t| allowed(w, t)) {
            Some(t) => next = t + 1,
            None => return Some(k),
        }
    }
    None
}

/// Cheapest ordered placement under `costs` (`T x K`). `windows` holds one
/// entry per step, or is empty for no constraints. Among optimal
/// placements, steps take their earliest intervals.
pub fn ordered_oracle(costs: &DMatrix<f64>, windows: &[StepWindow]) -> Result<Vec<usize>> {
    let (t_len, k_len) = costs.shape();
    if !windows.is_empty() && windows.len() != k_len {
        return Err(Error::Inconsistent(format!(
            "{} step windows for {k_len} steps",
            windows.len()
        )));
    }
    if let Some(w) = windows.iter().flatten().find(|w| w.len() != t_len) {
        return Err(Error::Inconsistent(format!(
            "step window covers {} intervals, costs have {t_len}",
            w.len()
        )));
    }
    if costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("placement costs must be finite".into()));
    }
    let unconstrained = vec![None; k_len];
    let windows = if windows.is_empty() { &unconstrained[..] } else { windows };
    if let Some(step) = first_infeasible_step(t_len, windows) {
        return Err(Error::Infeasible {
            item: String::new(),
            step,
        });
    }
    if k_len == 0 {
        return Ok(Vec::new());
    }

    let floor = costs.min();
    let cols = 2 * k_len + 1;
    let rows = t_len + 1;
    let cell = |t: usize, c: usize| -> f64 {
        if c % 2 == 0 {
            0.0
        } else if t == t_len || !allowed(&windows[c / 2], t) {
            f64::INFINITY
        } else {
            costs[(t, c / 2)] - floor
        }
    };

    // best[t][c]: cheapest path from (0, 0) to cell (t, c), inclusive. A
    // dummy cell is entered from above (waiting) or diagonally from the
    // previous step column; a step cell only from the dummy on its left in
    // the same row, and is left diagonally, so it holds exactly one row.
    let mut best = vec![f64::INFINITY; rows * cols];
    for t in 0..rows {
        for c in 0..cols {
            let here = cell(t, c);
            if here.is_infinite() {
                continue;
            }
            let from = if c % 2 == 1 {
                best[t * cols + c - 1]
            } else if t == 0 {
                if c == 0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                let wait = best[(t - 1) * cols + c];
                let diag = if c > 0 { best[(t - 1) * cols + c - 1] } else { f64::INFINITY };
                wait.min(diag)
            };
            best[t * cols + c] = from + here;
        }
    }
    debug_assert!(best[rows * cols - 1].is_finite());

    let mut placement = vec![0; k_len];
    let (mut t, mut c) = (rows - 1, cols - 1);
    while t > 0 || c > 0 {
        if c % 2 == 1 {
            placement[c / 2] = t;
            c -= 1;
            continue;
        }
        // Waiting while walking back moves the remaining steps earlier.
        let wait = c == 0 || best[(t - 1) * cols + c] <= best[(t - 1) * cols + c - 1];
        if !wait {
            c -= 1;
        }
        t -= 1;
    }
    Ok(placement)
}

/// Total cost of a placement.
pub fn placement_cost(costs: &DMatrix<f64>, placement: &[usize]) -> f64 {
    placement.iter().enumerate().map(|(k, &t)| costs[(t, k)]).sum()
}

/// Binary `T x K` matrix of a placement.
pub fn placement_matrix(num_intervals: usize, placement: &[usize]) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(num_intervals, placement.len());
    for (k, &t) in placement.iter().enumerate() {
        z[(t, k)] = 1.0;
    }
    z
}

/// Checks ordering and window membership of a placement.
pub fn is_valid_placement(num_intervals: usize, placement: &[usize], windows: &[StepWindow]) -> bool {
    placement.windows(2).all(|w| w[0] < w[1])
        && placement.iter().all(|&t| t < num_intervals)
        && (windows.is_empty()
            || (windows.len() == placement.len()
                && placement.iter().zip(windows).all(|(&t, w)| allowed(w, t))))
}
