use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::token::{TokenCostMatrix, TokenSequence};
use crate::error::{Error, Result};

/// A monotone remapping of every sequence into a shared template of
/// `num_slots` slots. `slots[n][s]` is the template slot of token `s` of
/// sequence `n`; slot indices strictly increase along each sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalAlignment {
    pub num_slots: usize,
    pub slots: Vec<Vec<usize>>,
}

impl GlobalAlignment {
    pub fn new(num_slots: usize, slots: Vec<Vec<usize>>) -> Result<Self> {
        let a = GlobalAlignment { num_slots, slots };
        a.validate()?;
        Ok(a)
    }

    /// Token `s` of every sequence in slot `s`.
    pub fn identity(lengths: &[usize], num_slots: usize) -> Result<Self> {
        GlobalAlignment::new(
            num_slots,
            lengths.iter().map(|&len| (0..len).collect()).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (n, row) in self.slots.iter().enumerate() {
            if row.len() > self.num_slots {
                return Err(Error::TooFewSlots {
                    len: row.len(),
                    slots: self.num_slots,
                });
            }
            if let Some(&last) = row.last() {
                if last >= self.num_slots {
                    return Err(Error::Inconsistent(format!(
                        "sequence {n} maps to slot {last} of {}",
                        self.num_slots
                    )));
                }
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Inconsistent(format!(
                    "sequence {n} is not mapped strictly increasingly"
                )));
            }
        }
        Ok(())
    }

    pub fn num_sequences(&self) -> usize {
        self.slots.len()
    }

    /// The binary `S_n x L` remapping matrix of sequence `n`.
    pub fn remapping_matrix(&self, n: usize) -> DMatrix<f64> {
        let row = &self.slots[n];
        let mut u = DMatrix::zeros(row.len(), self.num_slots);
        for (s, &l) in row.iter().enumerate() {
            u[(s, l)] = 1.0;
        }
        u
    }

    /// All remappings stacked into one `S x L` matrix.
    pub fn stacked_matrix(&self) -> DMatrix<f64> {
        let total: usize = self.slots.iter().map(Vec::len).sum();
        let mut u = DMatrix::zeros(total, self.num_slots);
        let mut offset = 0;
        for row in &self.slots {
            for (s, &l) in row.iter().enumerate() {
                u[(offset + s, l)] = 1.0;
            }
            offset += row.len();
        }
        u
    }

    /// Number of tokens mapped to each slot.
    pub fn slot_support(&self) -> Vec<usize> {
        let mut support = vec![0; self.num_slots];
        for &l in self.slots.iter().flatten() {
            support[l] += 1;
        }
        support
    }

    pub(crate) fn check_against(&self, sequences: &[TokenSequence]) -> Result<()> {
        if self.slots.len() != sequences.len() {
            return Err(Error::Inconsistent(format!(
                "alignment covers {} sequences, corpus has {}",
                self.slots.len(),
                sequences.len()
            )));
        }
        for (row, seq) in self.slots.iter().zip(sequences) {
            if row.len() != seq.len() {
                return Err(Error::Inconsistent(format!(
                    "item `{}` has {} tokens but {} slot assignments",
                    seq.item_id,
                    seq.len(),
                    row.len()
                )));
            }
        }
        Ok(())
    }
}

/// Sum over unordered sequence pairs of the cost of tokens sharing a slot.
/// Empty slots contribute nothing.
pub fn sum_of_pairs_cost(
    alignment: &GlobalAlignment,
    sequences: &[TokenSequence],
    cost: &TokenCostMatrix,
) -> Result<f64> {
    alignment.check_against(sequences)?;
    let ids = cost.encode(sequences)?;
    Ok(encoded_sum_of_pairs(alignment, &ids, cost))
}

pub(crate) fn encoded_sum_of_pairs(
    alignment: &GlobalAlignment,
    ids: &[Vec<usize>],
    cost: &TokenCostMatrix,
) -> f64 {
    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); alignment.num_slots];
    for (row, seq_ids) in alignment.slots.iter().zip(ids) {
        for (&l, &id) in row.iter().zip(seq_ids) {
            columns[l].push(id);
        }
    }
    let mut total = 0.0;
    for col in &columns {
        for (i, &a) in col.iter().enumerate() {
            for &b in &col[i + 1..] {
                total += cost.cost(a, b);
            }
        }
    }
    total
}

/// The same objective written blockwise as `sum_{n<m} Tr(U_n^T P_nm U_m)`,
/// where `P` is the token pair cost matrix (sequences stacked in order).
pub fn trace_form_cost(alignment: &GlobalAlignment, pair_cost: &DMatrix<f64>) -> Result<f64> {
    let lengths: Vec<usize> = alignment.slots.iter().map(Vec::len).collect();
    let total: usize = lengths.iter().sum();
    if pair_cost.nrows() != total || pair_cost.ncols() != total {
        return Err(Error::Inconsistent(format!(
            "pair cost matrix is {}x{}, alignment has {total} tokens",
            pair_cost.nrows(),
            pair_cost.ncols()
        )));
    }
    let offsets = offsets(&lengths);
    let mut value = 0.0;
    for n in 0..lengths.len() {
        let un = alignment.remapping_matrix(n);
        for m in (n + 1)..lengths.len() {
            let um = alignment.remapping_matrix(m);
            let block = pair_cost.view((offsets[n], offsets[m]), (lengths[n], lengths[m]));
            value += (un.transpose() * block * um).trace();
        }
    }
    Ok(value)
}

pub(crate) fn offsets(lengths: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    lengths
        .iter()
        .map(|&len| {
            let o = acc;
            acc += len;
            o
        })
        .collect()
}

/// Minimizes `<gradient, U>` over strictly increasing remappings of the
/// `S_n` tokens (rows) into the `L` slots (columns). Returns the slot of
/// each token; among optimal remappings, later tokens take the smallest
/// slot available.
pub fn msa_linear_oracle(gradient: &DMatrix<f64>) -> Result<Vec<usize>> {
    let (tokens, slots) = gradient.shape();
    if slots < tokens {
        return Err(Error::TooFewSlots {
            len: tokens,
            slots,
        });
    }
    // best[s][l]: cheapest placement of the first s tokens into the first l slots.
    let width = slots + 1;
    let mut best = vec![0.0f64; (tokens + 1) * width];
    for s in 1..=tokens {
        best[s * width + s - 1] = f64::INFINITY;
        for l in s..=slots {
            let skip = if l > s {
                best[s * width + l - 1]
            } else {
                f64::INFINITY
            };
            let take = best[(s - 1) * width + l - 1] + gradient[(s - 1, l - 1)];
            best[s * width + l] = skip.min(take);
        }
    }
    let mut placement = vec![0; tokens];
    let mut l = slots;
    for s in (1..=tokens).rev() {
        // Walk left while skipping the slot keeps the optimum.
        while l > s && best[s * width + l - 1] <= best[s * width + l] {
            l -= 1;
        }
        placement[s - 1] = l - 1;
        l -= 1;
    }
    Ok(placement)
}

/// Value of `<gradient, U>` for the remapping given as slot indices.
pub fn remapping_score(gradient: &DMatrix<f64>, placement: &[usize]) -> f64 {
    placement
        .iter()
        .enumerate()
        .map(|(s, &l)| gradient[(s, l)])
        .sum()
}
