//! Exhaustive solvers for instances small enough to enumerate.

use crate::error::{Error, Result};
use crate::textalign::{sum_of_pairs_cost, GlobalAlignment, TokenCostMatrix, TokenSequence};
use crate::vidcluster::{is_valid_placement, ResidualKernel, StepWindow};

/// Largest (sequences, sequence length, template length) enumerated.
pub const MSA_CAPS: (usize, usize, usize) = (3, 4, 6);
/// Largest (items, intervals per item, steps) enumerated.
pub const LOCALIZE_CAPS: (usize, usize, usize) = (3, 8, 3);

/// Every strictly increasing `k`-subset of `0..n`, in lexicographic order.
pub fn increasing_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let from = current.last().map_or(0, |&l| l + 1);
        let remaining = k - current.len();
        for v in from..=n.saturating_sub(remaining) {
            if v + remaining > n {
                break;
            }
            current.push(v);
            extend(n, k, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        extend(n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    choices.iter().fold(vec![Vec::new()], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect()
    })
}

/// The minimum sum-of-pairs alignment into `num_slots` slots, by trying
/// every joint monotone remapping. Ties keep the first in lexicographic
/// order.
pub fn brute_force_msa(
    sequences: &[TokenSequence],
    cost: &TokenCostMatrix,
    num_slots: usize,
) -> Result<(GlobalAlignment, f64)> {
    let (max_n, max_len, max_slots) = MSA_CAPS;
    let longest = sequences.iter().map(TokenSequence::len).max().unwrap_or(0);
    if sequences.len() > max_n || longest > max_len || num_slots > max_slots {
        return Err(Error::CapExceeded(format!(
            "{} sequences up to length {longest} in {num_slots} slots (caps {max_n}, {max_len}, {max_slots})",
            sequences.len()
        )));
    }
    if sequences.is_empty() {
        return Err(Error::EmptyInput("no sequences to align".into()));
    }
    if num_slots < longest {
        return Err(Error::TooFewSlots {
            len: longest,
            slots: num_slots,
        });
    }
    let choices: Vec<Vec<Vec<usize>>> = sequences
        .iter()
        .map(|s| increasing_subsets(num_slots, s.len()))
        .collect();
    let mut best: Option<(GlobalAlignment, f64)> = None;
    for slots in cartesian(&choices) {
        let alignment = GlobalAlignment { num_slots, slots };
        let value = sum_of_pairs_cost(&alignment, sequences, cost)?;
        if best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((alignment, value));
        }
    }
    Ok(best.expect("at least one remapping exists"))
}

/// The minimum clustering cost placement, by trying every ordered placement
/// of `num_steps` steps admitted by the windows. `lengths` gives the
/// intervals of each item, stacked in the kernel in that order.
pub fn brute_force_localize(
    kernel: &ResidualKernel,
    lengths: &[usize],
    windows: &[Vec<StepWindow>],
    num_steps: usize,
) -> Result<(Vec<Vec<usize>>, f64)> {
    let (max_n, max_len, max_k) = LOCALIZE_CAPS;
    let longest = lengths.iter().copied().max().unwrap_or(0);
    if lengths.len() > max_n || longest > max_len || num_steps > max_k {
        return Err(Error::CapExceeded(format!(
            "{} items up to {longest} intervals with {num_steps} steps (caps {max_n}, {max_len}, {max_k})",
            lengths.len()
        )));
    }
    let total: usize = lengths.iter().sum();
    if total != kernel.num_intervals() {
        return Err(Error::Inconsistent(format!(
            "items cover {total} intervals, kernel has {}",
            kernel.num_intervals()
        )));
    }
    if !windows.is_empty() && windows.len() != lengths.len() {
        return Err(Error::Inconsistent("one window list per item is required".into()));
    }
    let b = kernel.matrix();
    let mut offset = 0;
    let mut choices = Vec::with_capacity(lengths.len());
    for (n, &len) in lengths.iter().enumerate() {
        let w = windows.get(n).map(Vec::as_slice).unwrap_or(&[]);
        let feasible: Vec<Vec<usize>> = increasing_subsets(len, num_steps)
            .into_iter()
            .filter(|p| is_valid_placement(len, p, w))
            .collect();
        if feasible.is_empty() {
            return Err(Error::Infeasible {
                item: format!("#{n}"),
                step: 0,
            });
        }
        choices.push((offset, feasible));
        offset += len;
    }
    let offsets: Vec<usize> = choices.iter().map(|c| c.0).collect();
    let options: Vec<Vec<Vec<usize>>> = choices.into_iter().map(|c| c.1).collect();
    let mut best: Option<(Vec<Vec<usize>>, f64)> = None;
    for joint in cartesian(&options) {
        // Z^T B Z summed over step columns; each column has one 1 per item.
        let mut value = 0.0;
        for k in 0..num_steps {
            for (i, p) in joint.iter().enumerate() {
                for (j, q) in joint.iter().enumerate() {
                    value += b[(offsets[i] + p[k], offsets[j] + q[k])];
                }
            }
        }
        value /= 2.0 * total as f64;
        if best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((joint, value));
        }
    }
    Ok(best.expect("feasible placements exist"))
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::textalign::{build_token_cost, Token};

    fn seq(id: &str, labels: &[&str]) -> TokenSequence {
        TokenSequence::untimed(id, labels.iter().map(|l| Token::new("do", *l).unwrap()).collect())
    }

    #[test]
    fn subsets_are_binomial() {
        assert_eq!(increasing_subsets(5, 3).len(), 10);
        assert_eq!(increasing_subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(increasing_subsets(2, 3).is_empty());
        assert_eq!(increasing_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn identical_pair_optimum() {
        let seqs = vec![seq("a", &["x", "y"]), seq("b", &["x", "y"])];
        let cost = build_token_cost(&seqs, -1.0, 100.0).unwrap();
        assert_eq!(brute_force_msa(&seqs, &cost, 4).unwrap().1, -2.0);
        let single = vec![seq("a", &["x", "y"])];
        assert_eq!(brute_force_msa(&single, &cost, 3).unwrap().1, 0.0);
    }

    #[test]
    fn caps_are_enforced() {
        let seqs = vec![seq("a", &["x"; 5])];
        let cost = build_token_cost(&seqs, -1.0, 100.0).unwrap();
        assert!(matches!(brute_force_msa(&seqs, &cost, 6), Err(Error::CapExceeded(_))));
        let kernel = ResidualKernel::new(DMatrix::zeros(9, 1), 1.0).unwrap();
        assert!(matches!(
            brute_force_localize(&kernel, &[9], &[], 1),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn singleton_feasible_set() {
        let kernel = ResidualKernel::new(DMatrix::from_fn(4, 2, |i, j| (i + j) as f64), 0.5).unwrap();
        let w = vec![vec![Some(vec![false, false, true, false])]];
        let (p, _) = brute_force_localize(&kernel, &[4], &w, 1).unwrap();
        assert_eq!(p, vec![vec![2]]);
    }
}
