//! Training the step classifier from annotated intervals, and ordered
//! least-squares prediction on new items.

use nalgebra::DMatrix;

use super::features::FeatureStream;
use super::fw::{fw_localize, LocalizeOptions};
use super::oracle::{ordered_oracle, StepWindow};
use super::windows::enforce_feasible;
use crate::error::{Error, Result};
use crate::evalkit::CorpusAnnotation;

#[derive(Debug, Clone)]
pub struct SupervisedModel {
    /// `d x K` classifier, one column per annotated step.
    pub classifier: DMatrix<f64>,
    pub lambda: f64,
    pub warnings: Vec<String>,
}

/// Step windows from annotated events: step `k` of an item must fall on an
/// interval overlapping one of its annotated events. Steps an item does not
/// show are unconstrained. Conflicting windows are relaxed as for textual
/// constraints, favoring steps annotated in more items.
pub fn annotation_windows(
    streams: &[FeatureStream],
    annotation: &CorpusAnnotation,
) -> Result<(Vec<Vec<StepWindow>>, Vec<String>)> {
    let k_len = annotation.num_gt_steps;
    let mut presence = vec![0usize; k_len];
    for item in &annotation.items {
        let mut seen = vec![false; k_len];
        for e in &item.events {
            seen[e.step] = true;
        }
        for (p, s) in presence.iter_mut().zip(seen) {
            *p += s as usize;
        }
    }
    let mut order: Vec<usize> = (0..k_len).collect();
    order.sort_by(|&a, &b| presence[b].cmp(&presence[a]));

    let mut warnings = Vec::new();
    let windows = streams
        .iter()
        .map(|stream| {
            let mut wanted: Vec<StepWindow> = vec![None; k_len];
            if let Some(item) = annotation.items.iter().find(|i| i.item_id == stream.item_id) {
                for e in &item.events {
                    let w = wanted[e.step].get_or_insert_with(|| vec![false; stream.num_intervals()]);
                    for (t, mark) in w.iter_mut().enumerate() {
                        let (is, ie) = stream.interval_span(t);
                        *mark |= if e.start_s < e.end_s {
                            is < e.end_s && e.start_s < ie
                        } else {
                            is <= e.start_s && e.start_s < ie
                        };
                    }
                }
            }
            let (kept, warning) = enforce_feasible(&stream.item_id, stream.num_intervals(), wanted, &order);
            warnings.extend(warning);
            kept
        })
        .collect();
    Ok((windows, warnings))
}

/// Localizes the annotated steps under ground-truth windows and returns the
/// ridge classifier of the resulting placement.
pub fn train_supervised(
    streams: &[FeatureStream],
    annotation: &CorpusAnnotation,
    options: &LocalizeOptions,
) -> Result<SupervisedModel> {
    annotation.validate()?;
    let (windows, warnings) = annotation_windows(streams, annotation)?;
    let sol = fw_localize(streams, &windows, annotation.num_gt_steps, options)?;
    Ok(SupervisedModel {
        classifier: sol.classifier,
        lambda: sol.lambda,
        warnings,
    })
}

/// The ordered placement closest in least squares to the classifier's
/// predictions `X W`.
pub fn predict_ordered(classifier: &DMatrix<f64>, stream: &FeatureStream) -> Result<Vec<usize>> {
    if classifier.nrows() != stream.dim() {
        return Err(Error::Inconsistent(format!(
            "classifier expects {} features, item `{}` has {}",
            classifier.nrows(),
            stream.item_id,
            stream.dim()
        )));
    }
    let costs = (&stream.features * classifier) * -2.0;
    ordered_oracle(&costs, &[]).map_err(|e| e.for_item(&stream.item_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::{AnnotatedEvent, AnnotatedItem};

    fn stream(id: &str, t: usize) -> FeatureStream {
        let x = DMatrix::from_fn(t, 3, |i, j| ((i * 3 + j * 5) % 4) as f64 - 1.5);
        FeatureStream::new(id, x, 1.0).unwrap()
    }

    fn annotated(id: &str, events: &[(usize, f64, f64)]) -> AnnotatedItem {
        AnnotatedItem {
            item_id: id.into(),
            events: events
                .iter()
                .map(|&(step, start_s, end_s)| AnnotatedEvent { step, start_s, end_s })
                .collect(),
        }
    }

    #[test]
    fn pinned_annotation_gives_closed_form_fit() {
        let streams = vec![stream("a", 6), stream("b", 5)];
        let ann = CorpusAnnotation {
            num_gt_steps: 2,
            items: vec![
                annotated("a", &[(0, 1.0, 2.0), (1, 4.0, 5.0)]),
                annotated("b", &[(0, 0.0, 1.0), (1, 3.0, 4.0)]),
            ],
        };
        let opts = LocalizeOptions {
            lambda: Some(0.1),
            ..LocalizeOptions::default()
        };
        let model = train_supervised(&streams, &ann, &opts).unwrap();
        let x = crate::vidcluster::stack_features(&streams).unwrap();
        let mut z = DMatrix::zeros(11, 2);
        for (r, c) in [(1, 0), (4, 1), (6, 0), (9, 1)] {
            z[(r, c)] = 1.0;
        }
        let kernel = crate::vidcluster::ResidualKernel::new(x, 0.1).unwrap();
        assert!((model.classifier - kernel.classifier(&z)).amax() < 1e-12);
    }

    #[test]
    fn prediction_for_one_step_is_argmax() {
        let s = stream("a", 7);
        let w = DMatrix::from_column_slice(3, 1, &[0.2, -1.0, 0.5]);
        let scores = &s.features * &w;
        assert_eq!(predict_ordered(&w, &s).unwrap(), vec![scores.column(0).imax()]);
        let square = stream("b", 3);
        let w3 = DMatrix::from_element(3, 3, 1.0);
        assert_eq!(predict_ordered(&w3, &square).unwrap(), vec![0, 1, 2]);
    }
}
