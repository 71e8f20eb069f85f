use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::alignment::GlobalAlignment;
use super::token::{Token, TokenSequence};
use crate::error::{Error, Result};

/// The `k` main steps picked from an alignment and the tokens assigned to
/// them. `assignments[n][s]` is the step of token `s` of item `n`, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepAssignment {
    pub num_steps: usize,
    /// Template slot of each step, increasing.
    pub slots: Vec<usize>,
    /// Number of tokens aligned to each step's slot.
    pub support: Vec<usize>,
    /// Most frequent token of each step's slot.
    pub labels: Vec<Token>,
    pub item_ids: Vec<String>,
    pub assignments: Vec<Vec<Option<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl StepAssignment {
    /// The binary `S_n x k` assignment matrix of item `n`.
    pub fn assignment_matrix(&self, n: usize) -> DMatrix<f64> {
        let rows = &self.assignments[n];
        let mut r = DMatrix::zeros(rows.len(), self.num_steps);
        for (s, step) in rows.iter().enumerate() {
            if let Some(k) = step {
                r[(s, *k)] = 1.0;
            }
        }
        r
    }

    /// Non-zero entries of all assignment matrices as (item, token, step).
    pub fn triplets(&self) -> Vec<(usize, usize, usize)> {
        self.assignments
            .iter()
            .enumerate()
            .flat_map(|(n, row)| {
                row.iter()
                    .enumerate()
                    .filter_map(move |(s, k)| k.map(|k| (n, s, k)))
            })
            .collect()
    }

    pub fn item_index(&self, item_id: &str) -> Option<usize> {
        self.item_ids.iter().position(|id| id == item_id)
    }
}

/// Number of steps kept out of `supports` (sorted in decreasing order) when
/// at most `max_steps` are requested: a group of equally supported entries
/// is never split, so the cut falls before any tie straddling `max_steps`.
pub fn adaptive_step_count(sorted_supports: &[usize], max_steps: usize) -> usize {
    if max_steps == 0 {
        return 0;
    }
    if max_steps >= sorted_supports.len() {
        return sorted_supports.len();
    }
    let boundary = sorted_supports[max_steps - 1];
    if sorted_supports[max_steps] != boundary {
        return max_steps;
    }
    sorted_supports.iter().take_while(|&&s| s > boundary).count()
}

pub fn extract_main_steps(
    alignment: &GlobalAlignment,
    sequences: &[TokenSequence],
    max_steps: usize,
) -> Result<StepAssignment> {
    if max_steps < 1 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    alignment.check_against(sequences)?;
    let support = alignment.slot_support();

    let mut ranked: Vec<usize> = (0..alignment.num_slots).filter(|&l| support[l] > 0).collect();
    // Stable: equal supports stay in template order.
    ranked.sort_by(|&a, &b| support[b].cmp(&support[a]));
    let sorted: Vec<usize> = ranked.iter().map(|&l| support[l]).collect();
    let k = adaptive_step_count(&sorted, max_steps);

    let mut chosen: Vec<usize> = ranked[..k].to_vec();
    chosen.sort_unstable();

    let mut step_of_slot = vec![None; alignment.num_slots];
    for (j, &l) in chosen.iter().enumerate() {
        step_of_slot[l] = Some(j);
    }
    let mut counts: Vec<BTreeMap<&Token, usize>> = vec![BTreeMap::new(); k];
    let assignments: Vec<Vec<Option<usize>>> = alignment
        .slots
        .iter()
        .zip(sequences)
        .map(|(row, seq)| {
            row.iter()
                .zip(&seq.tokens)
                .map(|(&l, tok)| {
                    let step = step_of_slot[l];
                    if let Some(j) = step {
                        *counts[j].entry(tok).or_default() += 1;
                    }
                    step
                })
                .collect()
        })
        .collect();
    // BTreeMap iterates in token order, so the first maximum wins ties.
    let labels = counts
        .iter()
        .map(|c| {
            let top = c.values().copied().max().unwrap_or(0);
            c.iter()
                .find(|(_, &n)| n == top)
                .map(|(t, _)| (*t).clone())
                .expect("selected slots are non-empty")
        })
        .collect();

    let warning = if k == 0 {
        let msg = if ranked.is_empty() {
            "alignment has no occupied slots; no steps extracted".to_string()
        } else {
            format!(
                "support ties at the cut-off exclude every slot (K = {max_steps}); no steps extracted"
            )
        };
        log::debug!("{msg}");
        Some(msg)
    } else {
        None
    };

    Ok(StepAssignment {
        num_steps: k,
        support: chosen.iter().map(|&l| support[l]).collect(),
        slots: chosen,
        labels,
        item_ids: sequences.iter().map(|s| s.item_id.clone()).collect(),
        assignments,
        warning,
    })
}
