//! Dialogue data model, ingestion, score masking, spike detection, turn
//! pairing and the emotion scorer client.

mod io;
mod model;
mod ops;
pub mod scorer;

use std::path::PathBuf;

use thiserror::Error;

pub use io::{load_corpus, merge_response_labels, parse_corpus, save_corpus, CorpusFormat};
pub use model::{
    Corpus, Dialogue, Emotion, EmotionVector, Harm, HarmVector, Rejection, ResponseType, Speaker,
    SpikeEvent, Turn, TurnPair,
};
pub use ops::{
    detect_spikes, dominant_emotion, extract_turn_pairs, filter_salient, mask_corpus, mask_scores,
    unscored_user_turns, DEFAULT_MASK, DEFAULT_SPIKE_THRESHOLD,
};
pub use scorer::{fetch_scores, ScorerConfig, ScorerError, ScorerMode, SCORER_URL_ENV};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus contains no valid dialogues ({rejected} records rejected)")]
    Empty { rejected: usize },
    #[error("malformed corpus: {0}")]
    Malformed(String),
    #[error("score for {channel} is {value}, outside [0, 1]")]
    ScoreOutOfRange { channel: String, value: f64 },
    #[error("turn {index}: {reason}")]
    InvalidTurn { index: usize, reason: String },
    #[error("{0}")]
    InvalidDialogue(String),
}
