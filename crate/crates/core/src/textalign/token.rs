use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cost of aligning two identical tokens.
pub const DEFAULT_MATCH_REWARD: f64 = -1.0;
/// Cost of aligning two different tokens.
pub const DEFAULT_MISMATCH_PENALTY: f64 = 100.0;

/// A (verb, object) relation extracted from narration, e.g. `loosen nut`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Token {
    pub verb: String,
    pub object: String,
}

impl Token {
    pub fn new(verb: impl Into<String>, object: impl Into<String>) -> Result<Self> {
        let verb = verb.into();
        let object = object.into();
        if verb.is_empty() || object.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "token fields must be non-empty (verb `{verb}`, object `{object}`)"
            )));
        }
        Ok(Token { verb, object })
    }

    /// Parses the `verb object` form used in CSV headers and label files.
    pub fn parse(label: &str) -> Result<Self> {
        let mut parts = label.trim().splitn(2, char::is_whitespace);
        let verb = parts.next().unwrap_or_default();
        let object = parts.next().unwrap_or_default().trim();
        Token::new(verb, object)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.verb, self.object)
    }
}

/// Caption time interval of one token, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start_s: f64,
    pub end_s: f64,
}

/// The ordered tokens narrated in one item, with their caption timing.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub item_id: String,
    pub tokens: Vec<Token>,
    pub spans: Vec<Span>,
}

impl TokenSequence {
    pub fn new(item_id: impl Into<String>, tokens: Vec<Token>, spans: Vec<Span>) -> Result<Self> {
        let item_id = item_id.into();
        if tokens.len() != spans.len() {
            return Err(Error::Inconsistent(format!(
                "item `{item_id}`: {} tokens but {} spans",
                tokens.len(),
                spans.len()
            )));
        }
        if let Some(bad) = spans
            .iter()
            .find(|s| !(s.start_s <= s.end_s) || !s.start_s.is_finite() || !s.end_s.is_finite())
        {
            return Err(Error::Inconsistent(format!(
                "item `{item_id}`: caption span [{}, {}] is not a valid interval",
                bad.start_s, bad.end_s
            )));
        }
        Ok(TokenSequence {
            item_id,
            tokens,
            spans,
        })
    }

    /// A sequence without timing, every span set to zero.
    pub fn untimed(item_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        let spans = vec![
            Span {
                start_s: 0.0,
                end_s: 0.0
            };
            tokens.len()
        ];
        TokenSequence {
            item_id: item_id.into(),
            tokens,
            spans,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Pairwise alignment costs over the corpus vocabulary. Gaps are not stored:
/// aligning a token against an empty slot always costs zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenCostMatrix {
    vocabulary: Vec<Token>,
    index: HashMap<Token, usize>,
    cost: DMatrix<f64>,
}

impl TokenCostMatrix {
    /// Wraps an externally computed cost matrix. The matrix must be square,
    /// symmetric and finite.
    pub fn from_parts(vocabulary: Vec<Token>, cost: DMatrix<f64>) -> Result<Self> {
        let n = vocabulary.len();
        if n == 0 {
            return Err(Error::EmptyInput("cost matrix vocabulary is empty".into()));
        }
        if cost.nrows() != n || cost.ncols() != n {
            return Err(Error::Inconsistent(format!(
                "vocabulary has {n} tokens but cost matrix is {}x{}",
                cost.nrows(),
                cost.ncols()
            )));
        }
        if cost.iter().any(|c| !c.is_finite()) {
            return Err(Error::Inconsistent("cost matrix has non-finite entries".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if cost[(i, j)] != cost[(j, i)] {
                    return Err(Error::Inconsistent(format!(
                        "cost matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut index = HashMap::with_capacity(n);
        for (i, tok) in vocabulary.iter().enumerate() {
            if index.insert(tok.clone(), i).is_some() {
                return Err(Error::Inconsistent(format!(
                    "token `{tok}` appears twice in the vocabulary"
                )));
            }
        }
        Ok(TokenCostMatrix {
            vocabulary,
            index,
            cost,
        })
    }

    pub fn vocabulary(&self) -> &[Token] {
        &self.vocabulary
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.cost
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn index_of(&self, token: &Token) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn cost(&self, a: usize, b: usize) -> f64 {
        self.cost[(a, b)]
    }

    /// Vocabulary indices of every token of every sequence, per sequence.
    pub fn encode(&self, sequences: &[TokenSequence]) -> Result<Vec<Vec<usize>>> {
        sequences
            .iter()
            .map(|seq| {
                seq.tokens
                    .iter()
                    .map(|tok| {
                        self.index_of(tok).ok_or_else(|| {
                            Error::Inconsistent(format!(
                                "token `{tok}` of item `{}` is not in the cost vocabulary",
                                seq.item_id
                            ))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Exact-match costs over the deduplicated corpus vocabulary, in order of
/// first appearance.
pub fn build_token_cost(
    sequences: &[TokenSequence],
    match_reward: f64,
    mismatch_penalty: f64,
) -> Result<TokenCostMatrix> {
    if !match_reward.is_finite() || !mismatch_penalty.is_finite() {
        return Err(Error::InvalidParameter("token costs must be finite".into()));
    }
    let mut vocabulary = Vec::new();
    let mut seen = HashMap::new();
    for tok in sequences.iter().flat_map(|s| &s.tokens) {
        if !seen.contains_key(tok) {
            seen.insert(tok.clone(), vocabulary.len());
            vocabulary.push(tok.clone());
        }
    }
    if vocabulary.is_empty() {
        return Err(Error::EmptyInput("no tokens in the corpus".into()));
    }
    let n = vocabulary.len();
    let cost = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            match_reward
        } else {
            mismatch_penalty
        }
    });
    Ok(TokenCostMatrix {
        vocabulary,
        index: seen,
        cost,
    })
}

/// Token-level cost of aligning every corpus token with every other token,
/// sequences stacked in input order.
pub fn token_pair_cost_matrix(
    sequences: &[TokenSequence],
    cost: &TokenCostMatrix,
) -> Result<DMatrix<f64>> {
    let ids: Vec<usize> = cost.encode(sequences)?.into_iter().flatten().collect();
    let s = ids.len();
    Ok(DMatrix::from_fn(s, s, |a, b| cost.cost(ids[a], ids[b])))
}
