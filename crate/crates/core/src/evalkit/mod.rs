//! Scoring of recovered scripts and step localizations, and corpus
//! statistics of annotated step sequences.

mod annotation;
mod matching;
mod score;
mod stats;

pub use annotation::{read_annotation, write_annotation, AnnotatedEvent, AnnotatedItem, CorpusAnnotation};
pub use matching::{hungarian_match, matched_total};
pub use score::{
    localization_f1, script_precision_recall, ItemScore, Matching, ScoreReport, ScriptScore,
};
pub use stats::{corpus_stats, longest_common_subsequence, CorpusStats, ItemStats};
