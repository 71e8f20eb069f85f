//! JSON and CSV formats for token sequences, alignments and step assignments.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::alignment::GlobalAlignment;
use super::steps::StepAssignment;
use super::token::{Span, Token, TokenCostMatrix, TokenSequence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenRecord {
    pub verb: String,
    pub object: String,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemRecord {
    pub item_id: String,
    pub tokens: Vec<TokenRecord>,
}

pub fn sequences_to_records(sequences: &[TokenSequence]) -> Vec<ItemRecord> {
    sequences
        .iter()
        .map(|seq| ItemRecord {
            item_id: seq.item_id.clone(),
            tokens: seq
                .tokens
                .iter()
                .zip(&seq.spans)
                .map(|(t, s)| TokenRecord {
                    verb: t.verb.clone(),
                    object: t.object.clone(),
                    start_s: s.start_s,
                    end_s: s.end_s,
                })
                .collect(),
        })
        .collect()
}

pub fn sequences_from_records(records: Vec<ItemRecord>) -> Result<Vec<TokenSequence>> {
    records
        .into_iter()
        .map(|item| {
            let mut tokens = Vec::with_capacity(item.tokens.len());
            let mut spans = Vec::with_capacity(item.tokens.len());
            for t in item.tokens {
                tokens.push(Token::new(t.verb, t.object)?);
                spans.push(Span {
                    start_s: t.start_s,
                    end_s: t.end_s,
                });
            }
            TokenSequence::new(item.item_id, tokens, spans)
        })
        .collect()
}

/// Reads the token file: a JSON list of `{item_id, tokens: [{verb, object, start_s, end_s}]}`.
/// A file without any token is a schema error.
pub fn read_sequences(path: &Path) -> Result<Vec<TokenSequence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records: Vec<ItemRecord> =
        serde_json::from_str(&text).map_err(|e| Error::schema(path, e))?;
    let sequences = sequences_from_records(records).map_err(|e| Error::schema(path, e))?;
    if sequences.iter().all(TokenSequence::is_empty) {
        return Err(Error::schema(path, "no tokens in file"));
    }
    let mut ids: Vec<&str> = sequences.iter().map(|s| s.item_id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::schema(path, format!("duplicate item_id `{}`", w[0])));
    }
    Ok(sequences)
}

pub fn write_sequences(path: &Path, sequences: &[TokenSequence]) -> Result<()> {
    write_json(path, &sequences_to_records(sequences))
}

/// Reads an external cost matrix: a header row of `verb object` labels, then
/// one row of numbers per vocabulary entry.
pub fn read_cost_csv(path: &Path) -> Result<TokenCostMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::schema(path, e))?;
    let vocabulary = reader
        .headers()
        .map_err(|e| Error::schema(path, e))?
        .iter()
        .map(Token::parse)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::schema(path, e))?;
    let d = vocabulary.len();
    let mut values = Vec::with_capacity(d * d);
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::schema(path, e))?;
        if record.len() != d {
            return Err(Error::schema(
                path,
                format!("line {}: expected {d} values, found {}", r + 2, record.len()),
            ));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::schema(path, format!("line {}: bad number `{field}`", r + 2)))?;
            values.push(v);
        }
    }
    if values.len() != d * d {
        return Err(Error::schema(
            path,
            format!("expected {d} rows, found {}", values.len() / d.max(1)),
        ));
    }
    let cost = DMatrix::from_row_slice(d, d, &values);
    TokenCostMatrix::from_parts(vocabulary, cost).map_err(|e| Error::schema(path, e))
}

pub fn write_cost_csv(path: &Path, cost: &TokenCostMatrix) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::schema(path, e))?;
    let header: Vec<String> = cost.vocabulary().iter().map(Token::to_string).collect();
    writer.write_record(&header).map_err(|e| Error::schema(path, e))?;
    for i in 0..cost.len() {
        let row: Vec<String> = (0..cost.len()).map(|j| cost.cost(i, j).to_string()).collect();
        writer.write_record(&row).map_err(|e| Error::schema(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRecord {
    pub num_slots: usize,
    pub objective: Option<f64>,
    pub items: Vec<AlignedItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedItem {
    pub item_id: String,
    pub slots: Vec<usize>,
}

impl AlignmentRecord {
    pub fn new(alignment: &GlobalAlignment, sequences: &[TokenSequence], objective: Option<f64>) -> Self {
        AlignmentRecord {
            num_slots: alignment.num_slots,
            objective,
            items: alignment
                .slots
                .iter()
                .zip(sequences)
                .map(|(slots, seq)| AlignedItem {
                    item_id: seq.item_id.clone(),
                    slots: slots.clone(),
                })
                .collect(),
        }
    }

    pub fn to_alignment(&self) -> Result<GlobalAlignment> {
        GlobalAlignment::new(
            self.num_slots,
            self.items.iter().map(|i| i.slots.clone()).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub slot: usize,
    pub support: usize,
    pub label: String,
}

/// Step assignment file: the steps plus the assignment matrices as sparse
/// `[item_index, token_index, step]` triplets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepsFile {
    pub num_steps: usize,
    pub steps: Vec<StepRecord>,
    pub item_ids: Vec<String>,
    pub tokens_per_item: Vec<usize>,
    pub assignments: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl StepsFile {
    pub fn new(steps: &StepAssignment) -> Self {
        StepsFile {
            num_steps: steps.num_steps,
            steps: (0..steps.num_steps)
                .map(|k| StepRecord {
                    step: k,
                    slot: steps.slots[k],
                    support: steps.support[k],
                    label: steps.labels[k].to_string(),
                })
                .collect(),
            item_ids: steps.item_ids.clone(),
            tokens_per_item: steps.assignments.iter().map(Vec::len).collect(),
            assignments: steps
                .triplets()
                .into_iter()
                .map(|(n, s, k)| [n, s, k])
                .collect(),
            warning: steps.warning.clone(),
        }
    }

    pub fn to_assignment(&self) -> Result<StepAssignment> {
        if self.steps.len() != self.num_steps || self.item_ids.len() != self.tokens_per_item.len() {
            return Err(Error::Inconsistent("step file counts disagree".into()));
        }
        let mut assignments: Vec<Vec<Option<usize>>> =
            self.tokens_per_item.iter().map(|&len| vec![None; len]).collect();
        for &[n, s, k] in &self.assignments {
            if k >= self.num_steps {
                return Err(Error::Inconsistent(format!("assignment to unknown step {k}")));
            }
            let slot = assignments
                .get_mut(n)
                .and_then(|row| row.get_mut(s))
                .ok_or_else(|| Error::Inconsistent(format!("assignment ({n}, {s}) out of range")))?;
            *slot = Some(k);
        }
        Ok(StepAssignment {
            num_steps: self.num_steps,
            slots: self.steps.iter().map(|s| s.slot).collect(),
            support: self.steps.iter().map(|s| s.support).collect(),
            labels: self
                .steps
                .iter()
                .map(|s| Token::parse(&s.label))
                .collect::<Result<_>>()?,
            item_ids: self.item_ids.clone(),
            assignments,
            warning: self.warning.clone(),
        })
    }
}

pub fn read_steps(path: &Path) -> Result<StepAssignment> {
    let file: StepsFile = read_json(path)?;
    file.to_assignment().map_err(|e| Error::schema(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::schema(path, e))
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::schema(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
