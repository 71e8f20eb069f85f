use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::features::FeatureStream;
use super::oracle::{is_valid_placement, ordered_oracle, placement_matrix, StepWindow};
use crate::error::{Error, Result};
use crate::textalign::io::{read_json, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedStep {
    pub step: usize,
    pub interval: usize,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemLocalization {
    pub item_id: String,
    pub steps: Vec<PlacedStep>,
}

/// One interval per step per item, increasing in step order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepLocalization {
    pub num_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Clustering cost of the placement, when it comes from the solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    pub items: Vec<ItemLocalization>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Shared `d x K` classifier fit to the placement, when available.
    #[serde(skip)]
    pub classifier: Option<DMatrix<f64>>,
}

impl StepLocalization {
    pub fn from_placements(streams: &[FeatureStream], placements: &[Vec<usize>], num_steps: usize) -> Result<Self> {
        if streams.len() != placements.len() {
            return Err(Error::Inconsistent(format!(
                "{} placements for {} items",
                placements.len(),
                streams.len()
            )));
        }
        let items = streams
            .iter()
            .zip(placements)
            .map(|(stream, placement)| {
                if placement.len() != num_steps || !is_valid_placement(stream.num_intervals(), placement, &[]) {
                    return Err(Error::Inconsistent(format!(
                        "item `{}`: {placement:?} is not an ordered placement of {num_steps} steps",
                        stream.item_id
                    )));
                }
                Ok(ItemLocalization {
                    item_id: stream.item_id.clone(),
                    steps: placement
                        .iter()
                        .enumerate()
                        .map(|(step, &interval)| {
                            let (start_s, end_s) = stream.interval_span(interval);
                            PlacedStep {
                                step,
                                interval,
                                start_s,
                                end_s,
                            }
                        })
                        .collect(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(StepLocalization {
            num_steps,
            lambda: None,
            objective: None,
            items,
            warnings: Vec::new(),
            classifier: None,
        })
    }

    pub fn placements(&self) -> Vec<Vec<usize>> {
        self.items
            .iter()
            .map(|item| item.steps.iter().map(|s| s.interval).collect())
            .collect()
    }

    /// The binary `T x K` assignment of item `n`.
    pub fn assignment_matrix(&self, n: usize, num_intervals: usize) -> DMatrix<f64> {
        placement_matrix(num_intervals, &self.placements()[n])
    }
}

pub fn read_localization(path: &Path) -> Result<StepLocalization> {
    let loc: StepLocalization = read_json(path)?;
    for item in &loc.items {
        let ok = item.steps.len() == loc.num_steps
            && item.steps.iter().enumerate().all(|(k, s)| s.step == k)
            && item.steps.windows(2).all(|w| w[0].interval < w[1].interval);
        if !ok {
            return Err(Error::schema(
                path,
                format!("item `{}` is not an ordered placement of {} steps", item.item_id, loc.num_steps),
            ));
        }
    }
    Ok(loc)
}

pub fn write_localization(path: &Path, localization: &StepLocalization) -> Result<()> {
    write_json(path, localization)
}

/// Spreads `num_steps` steps evenly: step `j` at interval
/// `floor((j + 0.5) T / K)`.
pub fn uniform_baseline(num_intervals: usize, num_steps: usize) -> Result<Vec<usize>> {
    if num_intervals < num_steps {
        return Err(Error::Infeasible {
            item: String::new(),
            step: num_intervals,
        });
    }
    let mut placement: Vec<usize> = Vec::with_capacity(num_steps);
    for j in 0..num_steps {
        let mut t = ((j as f64 + 0.5) * num_intervals as f64 / num_steps as f64).floor() as usize;
        if let Some(&prev) = placement.last() {
            t = t.max(prev + 1);
        }
        placement.push(t.min(num_intervals - (num_steps - j)));
    }
    Ok(placement)
}

/// Places each step as close as possible to the middle of its caption
/// window, ignoring the features. Steps without a window aim at their
/// uniform position. The placement keeps the step order and the windows.
pub fn narration_baseline(num_intervals: usize, windows: &[StepWindow], num_steps: usize) -> Result<Vec<usize>> {
    if !windows.is_empty() && windows.len() != num_steps {
        return Err(Error::Inconsistent(format!(
            "{} step windows for {num_steps} steps",
            windows.len()
        )));
    }
    let costs = DMatrix::from_fn(num_intervals, num_steps, |t, k| {
        let marked: Vec<usize> = match windows.get(k) {
            Some(Some(w)) => w.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect(),
            _ => Vec::new(),
        };
        let target = if marked.is_empty() {
            ((k as f64 + 0.5) * num_intervals as f64 / num_steps as f64).floor()
        } else {
            marked.iter().sum::<usize>() as f64 / marked.len() as f64
        };
        (t as f64 - target).powi(2)
    });
    ordered_oracle(&costs, windows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn narration_baseline_centers_on_windows() {
        let mut w = vec![false; 10];
        w[6] = true;
        w[7] = true;
        w[8] = true;
        assert_eq!(narration_baseline(10, &[None, Some(w)], 2).unwrap(), vec![2, 7]);
        assert_eq!(narration_baseline(10, &[], 2).unwrap(), uniform_baseline(10, 2).unwrap());
    }

    #[test]
    fn uniform_midpoints() {
        assert_eq!(uniform_baseline(10, 2).unwrap(), vec![2, 7]);
        assert_eq!(uniform_baseline(4, 4).unwrap(), vec![0, 1, 2, 3]);
        assert!(uniform_baseline(2, 3).is_err());
        for t in 1..30 {
            for k in 0..=t {
                let p = uniform_baseline(t, k).unwrap();
                assert!(is_valid_placement(t, &p, &[]), "{t} {k} {p:?}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let streams = vec![FeatureStream::new("v", DMatrix::zeros(6, 1), 2.0).unwrap()];
        let loc = StepLocalization::from_placements(&streams, &[vec![1, 4]], 2).unwrap();
        assert_eq!(loc.items[0].steps[1].start_s, 8.0);
        let path = std::env::temp_dir().join(format!("loc-{}.json", std::process::id()));
        write_localization(&path, &loc).unwrap();
        assert_eq!(read_localization(&path).unwrap(), loc);
        std::fs::remove_file(&path).unwrap();
        assert!(StepLocalization::from_placements(&streams, &[vec![4, 1]], 2).is_err());
    }
}
