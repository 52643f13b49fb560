//! Dictionary-based style analysis: category rates, self-reference during
//! spikes, linguistic style matching and delta TF-IDF distinctive terms.

mod analysis;
mod lexicon;
mod tfidf;

use thiserror::Error;

use crate::stats::StatsError;

pub use analysis::{
    lsm_score, lsm_score_with, self_reference_shift, style_matching_test, SelfReferenceResult,
    SelfReferenceRow, StyleMatchingResult, DEFAULT_LSM_CATEGORIES, LSM_EPSILON, SELF_REFERENCE_CATEGORIES,
};
pub use lexicon::{category_rates, tokenize, Lexicon, StyleProfile};
pub use tfidf::{delta_tfidf, delta_tfidf_tokens, term_deltas, DistinctiveTerms, TermWeight, MIN_TERM_FREQUENCY};

#[derive(Debug, Error)]
pub enum StyleError {
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("lexicon has no category {0:?}")]
    MissingCategory(String),
    #[error("document class {0} is empty")]
    EmptyClass(&'static str),
    #[error("{group} group has {got} pairs; at least {needed} required")]
    TooFewPairs { group: &'static str, needed: usize, got: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("writing terms: {0}")]
    Csv(#[from] csv::Error),
}
