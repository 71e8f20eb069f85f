//! Maximum-weight one-to-one matching (Hungarian algorithm).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Matches rows to columns maximizing the total score. Rectangular inputs
/// are padded with zero scores, so `matching[r]` is `None` for rows left
/// without a real column.
pub fn hungarian_match(scores: &DMatrix<f64>) -> Result<Vec<Option<usize>>> {
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("matching scores must be finite".into()));
    }
    let (rows, cols) = scores.shape();
    let n = rows.max(cols);
    if n == 0 {
        return Ok(vec![None; rows]);
    }
    let top = scores.iter().copied().fold(0.0, f64::max);
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            top - scores[(i, j)]
        } else {
            top
        }
    };

    // Shortest augmenting paths with potentials; index 0 is a sentinel.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut matching = vec![None; rows];
    for j in 1..=n {
        let i = owner[j] - 1;
        if i < rows && j - 1 < cols {
            matching[i] = Some(j - 1);
        }
    }
    Ok(matching)
}

/// Total score of a matching.
pub fn matched_total(scores: &DMatrix<f64>, matching: &[Option<usize>]) -> f64 {
    matching
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| scores[(r, c)]))
        .sum()
}
