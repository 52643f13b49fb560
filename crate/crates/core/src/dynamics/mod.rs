//! Emotional dynamics at three levels: dialogue (mean comparison, DTW
//! against a shuffled null), turn (dominant-emotion association, coupling
//! regression) and post-spike response.

mod dialogue;
mod series;
mod spike;
mod turn;

use thiserror::Error;

use crate::stats::StatsError;

pub use dialogue::{
    dialogue_mean_comparison, dtw_null_test, paired_series, DialogueMeanResult, DtwNullResult,
    EmotionDifferenceRow, DEFAULT_NULL_RESAMPLES,
};
pub use series::{cosine_distance, dtw, dtw_with, DtwResult, EmotionSeries};
pub use spike::{
    post_spike_analysis, post_spike_elevation, spike_responses, ElevationRow, SpikeAnalysisResult,
    SpikeEmotionRow, SpikeResponse, DEFAULT_PERMUTATION_RESAMPLES,
};
pub use turn::{
    coupling_regression, dominant_emotion_association, fit_coupling, AssociationResult, CouplingMatrix,
    MIN_COUPLING_PAIRS,
};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("need at least {needed} dialogues with both speakers scored, got {got}")]
    TooFewDialogues { needed: usize, got: usize },
    #[error("need at least {needed} scored turn pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },
    #[error("no pair has a dominant emotion on both sides")]
    EmptyTable,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
