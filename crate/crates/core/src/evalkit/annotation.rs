use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textalign::io::{read_json, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedEvent {
    pub step: usize,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedItem {
    pub item_id: String,
    /// Events in temporal order.
    pub events: Vec<AnnotatedEvent>,
}

/// Ground-truth step events of every item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusAnnotation {
    pub num_gt_steps: usize,
    pub items: Vec<AnnotatedItem>,
}

impl CorpusAnnotation {
    pub fn validate(&self) -> Result<()> {
        if self.num_gt_steps < 1 {
            return Err(Error::InvalidParameter("annotation needs at least one ground-truth step".into()));
        }
        let mut ids = HashSet::new();
        for item in &self.items {
            if !ids.insert(item.item_id.as_str()) {
                return Err(Error::Inconsistent(format!("duplicate item_id `{}`", item.item_id)));
            }
            for e in &item.events {
                if e.step >= self.num_gt_steps {
                    return Err(Error::Inconsistent(format!(
                        "item `{}`: step {} out of range 0..{}",
                        item.item_id, e.step, self.num_gt_steps
                    )));
                }
                if !(e.start_s.is_finite() && e.end_s.is_finite() && e.start_s <= e.end_s) {
                    return Err(Error::Inconsistent(format!(
                        "item `{}`: event [{}, {}] is not a valid interval",
                        item.item_id, e.start_s, e.end_s
                    )));
                }
            }
            if item.events.windows(2).any(|w| w[1].start_s < w[0].start_s) {
                return Err(Error::Inconsistent(format!(
                    "item `{}`: events are not in temporal order",
                    item.item_id
                )));
            }
        }
        Ok(())
    }

    pub fn item(&self, item_id: &str) -> Option<&AnnotatedItem> {
        self.items.iter().find(|i| i.item_id == item_id)
    }
}

pub fn read_annotation(path: &Path) -> Result<CorpusAnnotation> {
    let ann: CorpusAnnotation = read_json(path)?;
    ann.validate().map_err(|e| Error::schema(path, e))?;
    Ok(ann)
}

pub fn write_annotation(path: &Path, annotation: &CorpusAnnotation) -> Result<()> {
    write_json(path, annotation)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok = CorpusAnnotation {
            num_gt_steps: 2,
            items: vec![AnnotatedItem {
                item_id: "a".into(),
                events: vec![
                    AnnotatedEvent { step: 1, start_s: 0.0, end_s: 2.0 },
                    AnnotatedEvent { step: 0, start_s: 3.0, end_s: 3.0 },
                ],
            }],
        };
        ok.validate().unwrap();
        let mut bad = ok.clone();
        bad.items[0].events[0].step = 2;
        assert!(bad.validate().is_err());
        let mut unordered = ok.clone();
        unordered.items[0].events.reverse();
        assert!(unordered.validate().is_err());
        let mut dup = ok.clone();
        dup.items.push(ok.items[0].clone());
        assert!(dup.validate().is_err());
    }
}
