//! Progressive alignment baseline: sequences are folded one at a time, in
//! input order, into a growing linear template. Each fold is an exact
//! pairwise alignment of the new sequence against the template profile with
//! zero gap cost, scoring a token against a slot by its summed cost against
//! every token already in the slot.

use super::alignment::GlobalAlignment;
use super::token::{TokenCostMatrix, TokenSequence};
use crate::error::{Error, Result};

#[derive(Clone, Copy)]
enum Move {
    Match,
    SkipSlot,
    NewSlot,
}

pub fn progressive_align(
    sequences: &[TokenSequence],
    cost: &TokenCostMatrix,
) -> Result<GlobalAlignment> {
    if sequences.is_empty() {
        return Err(Error::EmptyInput("no sequences to align".into()));
    }
    let ids = cost.encode(sequences)?;
    Ok(progressive_encoded(&ids, cost))
}

pub(crate) fn progressive_encoded(ids: &[Vec<usize>], cost: &TokenCostMatrix) -> GlobalAlignment {
    // Template columns hold the vocabulary ids currently aligned there.
    let mut template: Vec<Vec<usize>> = ids[0].iter().map(|&id| vec![id]).collect();
    let mut slots: Vec<Vec<usize>> = vec![(0..ids[0].len()).collect()];

    for seq in &ids[1..] {
        let moves = align_to_profile(seq, &template, cost);

        let mut merged: Vec<Vec<usize>> = Vec::with_capacity(template.len() + seq.len());
        let mut old_to_new = vec![0; template.len()];
        let mut placement = Vec::with_capacity(seq.len());
        let (mut i, mut j) = (0, 0);
        for mv in moves {
            match mv {
                Move::Match => {
                    let mut col = std::mem::take(&mut template[j]);
                    col.push(seq[i]);
                    old_to_new[j] = merged.len();
                    placement.push(merged.len());
                    merged.push(col);
                    i += 1;
                    j += 1;
                }
                Move::SkipSlot => {
                    old_to_new[j] = merged.len();
                    merged.push(std::mem::take(&mut template[j]));
                    j += 1;
                }
                Move::NewSlot => {
                    placement.push(merged.len());
                    merged.push(vec![seq[i]]);
                    i += 1;
                }
            }
        }
        for row in &mut slots {
            for l in row.iter_mut() {
                *l = old_to_new[*l];
            }
        }
        slots.push(placement);
        template = merged;
    }

    GlobalAlignment {
        num_slots: template.len(),
        slots,
    }
}

fn align_to_profile(seq: &[usize], template: &[Vec<usize>], cost: &TokenCostMatrix) -> Vec<Move> {
    let (m, p) = (seq.len(), template.len());
    let width = p + 1;
    let mut table = vec![0.0f64; (m + 1) * width];
    let score = |i: usize, j: usize| -> f64 { template[j].iter().map(|&b| cost.cost(seq[i], b)).sum() };
    for i in 0..=m {
        for j in 0..=p {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            if i > 0 && j > 0 {
                best = best.min(table[(i - 1) * width + j - 1] + score(i - 1, j - 1));
            }
            if j > 0 {
                best = best.min(table[i * width + j - 1]);
            }
            if i > 0 {
                best = best.min(table[(i - 1) * width + j]);
            }
            table[i * width + j] = best;
        }
    }

    let mut moves = Vec::with_capacity(m + p);
    let (mut i, mut j) = (m, p);
    while i > 0 || j > 0 {
        let here = table[i * width + j];
        if i > 0 && j > 0 && table[(i - 1) * width + j - 1] + score(i - 1, j - 1) == here {
            moves.push(Move::Match);
            i -= 1;
            j -= 1;
        } else if j > 0 && table[i * width + j - 1] == here {
            moves.push(Move::SkipSlot);
            j -= 1;
        } else {
            moves.push(Move::NewSlot);
            i -= 1;
        }
    }
    moves.reverse();
    moves
}
