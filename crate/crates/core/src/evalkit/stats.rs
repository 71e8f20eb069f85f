use serde::Serialize;

use super::annotation::CorpusAnnotation;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemStats {
    pub item_id: String,
    /// Longest common subsequence of the deduplicated steps with the script.
    pub lcs: usize,
    /// Distinct steps.
    pub unique: usize,
    /// Events.
    pub events: usize,
}

/// Order error, missing-step and repetition fractions. Order error and
/// repetition are undefined (`None`) when no item shows any step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub order_error: Option<f64>,
    pub missing: f64,
    pub repetition: Option<f64>,
    pub items: Vec<ItemStats>,
}

pub fn longest_common_subsequence<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    let width = b.len() + 1;
    let mut table = vec![0usize; (a.len() + 1) * width];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            table[i * width + j] = if a[i] == b[j] {
                table[(i + 1) * width + j + 1] + 1
            } else {
                table[(i + 1) * width + j].max(table[i * width + j + 1])
            };
        }
    }
    let mut pairs = Vec::with_capacity(table[0]);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[(i + 1) * width + j] >= table[i * width + j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// Repeated steps count once, at their first occurrence, when comparing
/// an item's order with the script.
pub fn corpus_stats(annotation: &CorpusAnnotation) -> Result<CorpusStats> {
    annotation.validate()?;
    let k = annotation.num_gt_steps;
    let script: Vec<usize> = (0..k).collect();
    let items: Vec<ItemStats> = annotation
        .items
        .iter()
        .map(|item| {
            let mut seen = vec![false; k];
            let mut firsts = Vec::new();
            for e in &item.events {
                if !std::mem::replace(&mut seen[e.step], true) {
                    firsts.push(e.step);
                }
            }
            ItemStats {
                item_id: item.item_id.clone(),
                lcs: longest_common_subsequence(&firsts, &script).len(),
                unique: firsts.len(),
                events: item.events.len(),
            }
        })
        .collect();
    let l: usize = items.iter().map(|s| s.lcs).sum();
    let u: usize = items.iter().map(|s| s.unique).sum();
    let g: usize = items.iter().map(|s| s.events).sum();
    let n = items.len().max(1);
    let (order_error, repetition) = if u == 0 {
        (None, None)
    } else {
        (Some(1.0 - l as f64 / u as f64), Some(1.0 - u as f64 / g as f64))
    };
    Ok(CorpusStats {
        order_error,
        missing: 1.0 - u as f64 / (k * n) as f64,
        repetition,
        items,
    })
}
