use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::annotation::CorpusAnnotation;
use super::matching::hungarian_match;
use super::stats::longest_common_subsequence;
use crate::error::{Error, Result};
use crate::vidcluster::StepLocalization;

/// How predicted steps are paired with ground-truth steps.
#[derive(Debug, Clone, PartialEq)]
pub enum Matching {
    /// The corpus-wide one-to-one matching maximizing correct detections.
    Hungarian,
    /// `mapping[j]` is the ground-truth step of predicted step `j`.
    Given(Vec<Option<usize>>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemScore {
    pub item_id: String,
    /// Whether each predicted step hit its matched ground-truth step.
    pub hits: Vec<bool>,
    /// Distinct ground-truth steps shown in the item.
    pub present: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub correct: usize,
    /// Number of items times predicted steps.
    pub predictions: usize,
    /// Ground-truth step occurrences over all scored items.
    pub gt_occurrences: usize,
    pub matching: Vec<Option<usize>>,
    pub items: Vec<ItemScore>,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// A detection is correct when the midpoint of its interval lies inside an
/// annotated event of the ground-truth step it is matched to.
pub fn localization_f1(
    localization: &StepLocalization,
    annotation: &CorpusAnnotation,
    matching: &Matching,
) -> Result<ScoreReport> {
    annotation.validate()?;
    let k_pred = localization.num_steps;
    let k_gt = annotation.num_gt_steps;

    // hit[n][j][g]: predicted step j of item n lies inside an event of g.
    let mut hit = Vec::with_capacity(localization.items.len());
    let mut present = Vec::with_capacity(localization.items.len());
    for item in &localization.items {
        let gt = annotation
            .item(&item.item_id)
            .ok_or_else(|| Error::UnknownItem(format!("{} (localized but not annotated)", item.item_id)))?;
        let mut shown = vec![false; k_gt];
        for e in &gt.events {
            shown[e.step] = true;
        }
        present.push(shown.iter().filter(|&&s| s).count());
        hit.push(
            item.steps
                .iter()
                .map(|s| {
                    let mid = 0.5 * (s.start_s + s.end_s);
                    let mut row = vec![false; k_gt];
                    for e in &gt.events {
                        row[e.step] |= e.start_s <= mid && mid <= e.end_s;
                    }
                    row
                })
                .collect::<Vec<_>>(),
        );
    }

    let matching = match matching {
        Matching::Hungarian => {
            let mut counts = DMatrix::zeros(k_pred, k_gt);
            for rows in &hit {
                for (j, row) in rows.iter().enumerate() {
                    for (g, &h) in row.iter().enumerate() {
                        counts[(j, g)] += h as u8 as f64;
                    }
                }
            }
            hungarian_match(&counts)?
        }
        Matching::Given(mapping) => {
            if mapping.len() != k_pred {
                return Err(Error::InvalidParameter(format!(
                    "mapping covers {} steps, localization has {k_pred}",
                    mapping.len()
                )));
            }
            let mut used = vec![false; k_gt];
            for g in mapping.iter().flatten() {
                if *g >= k_gt || std::mem::replace(&mut used[*g], true) {
                    return Err(Error::InvalidParameter(format!(
                        "mapping references unknown or repeated ground-truth step {g}"
                    )));
                }
            }
            mapping.clone()
        }
    };

    let items: Vec<ItemScore> = localization
        .items
        .iter()
        .zip(&hit)
        .zip(&present)
        .map(|((item, rows), &present)| ItemScore {
            item_id: item.item_id.clone(),
            hits: rows
                .iter()
                .zip(&matching)
                .map(|(row, g)| g.is_some_and(|g| row[g]))
                .collect(),
            present,
        })
        .collect();
    let correct = items.iter().flat_map(|i| &i.hits).filter(|&&h| h).count();
    let predictions = localization.items.len() * k_pred;
    let gt_occurrences: usize = present.iter().sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(correct, predictions);
    let recall = ratio(correct, gt_occurrences);
    Ok(ScoreReport {
        precision,
        recall,
        f1: f1_score(precision, recall),
        correct,
        predictions,
        gt_occurrences,
        matching,
        items,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScriptScore {
    pub precision: f64,
    pub recall: f64,
    /// Recovered steps matching the script in order.
    pub in_order: usize,
}

/// Precision is the fraction of recovered steps that appear in the script
/// in the right order; recall is the fraction of script steps recovered in
/// that order. Recovered labels are translated through `equivalence` when
/// given (labels absent from it match nothing), and compared verbatim
/// otherwise.
pub fn script_precision_recall(
    recovered: &[String],
    script: &[String],
    equivalence: Option<&BTreeMap<String, String>>,
) -> ScriptScore {
    let mapped: Vec<Option<&str>> = recovered
        .iter()
        .map(|label| match equivalence {
            Some(map) => map.get(label).map(String::as_str),
            None => Some(label.as_str()),
        })
        .collect();
    let script: Vec<Option<&str>> = script.iter().map(|s| Some(s.as_str())).collect();
    // Unmapped labels never equal a script entry.
    let keyed: Vec<Option<&str>> = mapped.iter().map(|m| m.or(Some("\u{0}unmapped"))).collect();
    let pairs = longest_common_subsequence(&keyed, &script);
    let mut distinct: Vec<&str> = pairs.iter().filter_map(|&(_, j)| script[j]).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let mut script_distinct: Vec<&str> = script.iter().flatten().copied().collect();
    script_distinct.sort_unstable();
    script_distinct.dedup();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    ScriptScore {
        precision: ratio(pairs.len(), recovered.len()),
        recall: ratio(distinct.len(), script_distinct.len()),
        in_order: pairs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::{AnnotatedEvent, AnnotatedItem};
    use crate::vidcluster::{ItemLocalization, PlacedStep};

    fn loc(items: &[&[usize]], k: usize) -> StepLocalization {
        StepLocalization {
            num_steps: k,
            lambda: None,
            objective: None,
            items: items
                .iter()
                .enumerate()
                .map(|(n, p)| ItemLocalization {
                    item_id: format!("v{n}"),
                    steps: p
                        .iter()
                        .enumerate()
                        .map(|(step, &t)| PlacedStep {
                            step,
                            interval: t,
                            start_s: t as f64,
                            end_s: t as f64 + 1.0,
                        })
                        .collect(),
                })
                .collect(),
            warnings: vec![],
            classifier: None,
        }
    }

    fn ann(k: usize, items: &[&[(usize, f64, f64)]]) -> CorpusAnnotation {
        CorpusAnnotation {
            num_gt_steps: k,
            items: items
                .iter()
                .enumerate()
                .map(|(n, ev)| AnnotatedItem {
                    item_id: format!("v{n}"),
                    events: ev
                        .iter()
                        .map(|&(step, start_s, end_s)| AnnotatedEvent { step, start_s, end_s })
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn worked_example() {
        // Item 0 shows both steps, item 1 only step 1; two detections hit.
        let a = ann(2, &[&[(0, 0.0, 2.0), (1, 5.0, 7.0)], &[(1, 3.0, 4.0)]]);
        let l = loc(&[&[1, 6], &[0, 8]], 2);
        let r = localization_f1(&l, &a, &Matching::Hungarian).unwrap();
        assert_eq!((r.correct, r.predictions, r.gt_occurrences), (2, 4, 3));
        assert_eq!(r.recall, 2.0 / 3.0);
        assert_eq!(r.precision, 0.5);
        assert!((r.f1 - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn zero_hits_give_zero_f1() {
        let a = ann(1, &[&[(0, 0.0, 1.0)]]);
        let r = localization_f1(&loc(&[&[5]], 1), &a, &Matching::Hungarian).unwrap();
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn given_mapping_is_checked() {
        let a = ann(2, &[&[(0, 0.0, 1.0), (1, 2.0, 3.0)]]);
        let l = loc(&[&[0, 2]], 2);
        let r = localization_f1(&l, &a, &Matching::Given(vec![Some(1), Some(0)])).unwrap();
        assert_eq!(r.correct, 0);
        assert!(localization_f1(&l, &a, &Matching::Given(vec![Some(0), Some(0)])).is_err());
        assert!(localization_f1(&l, &a, &Matching::Given(vec![Some(2), None])).is_err());
    }

    fn labels(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn script_scores() {
        let gt = labels(&["a", "b", "c"]);
        let same = script_precision_recall(&gt, &gt, None);
        assert_eq!((same.precision, same.recall), (1.0, 1.0));
        let swapped = script_precision_recall(&labels(&["a", "c", "b"]), &gt, None);
        assert_eq!((swapped.precision, swapped.recall), (2.0 / 3.0, 2.0 / 3.0));
        let map: BTreeMap<String, String> = [("x", "a"), ("y", "c")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let mapped = script_precision_recall(&labels(&["x", "z", "y"]), &gt, Some(&map));
        assert_eq!((mapped.precision, mapped.recall), (2.0 / 3.0, 2.0 / 3.0));
    }
}
