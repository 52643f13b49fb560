//! Measurement of emotional dynamics in two-party human–chatbot dialogue corpora.
//!
//! The crate is organised by analysis level:
//!
//! * [`corpus`] – data model, ingestion, score masking, spikes, turn pairing and
//!   the pluggable emotion scorer.
//! * [`stats`] – the statistics kernel (rank tests, permutation tests, effect
//!   sizes, contingency analysis, OLS, Bonferroni correction).
//! * [`dynamics`] – dialogue-level alignment (mean comparison, DTW against a
//!   shuffled null), turn-level coupling (dominant-emotion association,
//!   regression) and post-spike response analysis.
//! * [`style`] – dictionary-based category rates, self-reference shift,
//!   linguistic style matching and delta TF-IDF.
//! * [`harm`] – explicit-content prevalence, emotion/harm correlation and
//!   chatbot response-type distributions.
//! * [`psychosocial`] – co-engagement graph, node2vec embeddings, seed-pair
//!   axes and group comparisons.
//! * [`topics`] – DP-Means clustering and TF-IDF / NPMI cluster keywords.
//! * [`pipeline`] – run configuration, orchestration, report emission and
//!   synthetic fixture generation.

pub mod corpus;
pub mod dynamics;
pub mod harm;
pub mod pipeline;
pub mod psychosocial;
pub mod stats;
pub mod style;
pub mod topics;
mod warning;

pub use corpus::{
    Corpus, Dialogue, Emotion, EmotionVector, Harm, HarmVector, ResponseType, Speaker, Turn,
};
pub use stats::TestResult;
pub use warning::Warning;
