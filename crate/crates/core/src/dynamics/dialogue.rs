use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::series::{dtw, EmotionSeries};
use super::DynamicsError;
use crate::corpus::{Corpus, Emotion, Speaker};
use crate::stats::{cliffs_delta, cohens_d, mann_whitney_u, mean, wilcoxon_signed_rank, TestResult};
use crate::Warning;

/// Resample rounds of the shuffled-pairing null.
pub const DEFAULT_NULL_RESAMPLES: usize = 1000;

/// Both speakers' series of every dialogue that has them; the rest are
/// reported as warnings.
pub fn paired_series(c: &Corpus) -> (Vec<(EmotionSeries, EmotionSeries)>, Vec<Warning>) {
    let mut kept = Vec::new();
    let mut warnings = Vec::new();
    for d in &c.dialogues {
        match (EmotionSeries::from_dialogue(d, Speaker::User), EmotionSeries::from_dialogue(d, Speaker::Chatbot)) {
            (Some(u), Some(b)) => kept.push((u, b)),
            (None, _) => warnings.push(Warning::new(&d.id, "missing_speaker", "no scored user turn")),
            (_, None) => warnings.push(Warning::new(&d.id, "missing_speaker", "no scored chatbot turn")),
        }
    }
    (kept, warnings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionDifferenceRow {
    pub emotion: Emotion,
    pub user_mean: f64,
    pub bot_mean: f64,
    /// `bot_mean − user_mean`.
    pub mean_diff: f64,
    /// Wilcoxon signed-rank on (bot, user) dialogue means, effect Cliff's
    /// delta of user means against bot means.
    pub test: Option<TestResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueMeanResult {
    pub rows: Vec<EmotionDifferenceRow>,
    pub dialogues: usize,
    pub warnings: Vec<Warning>,
}

/// Per-emotion comparison of user and chatbot dialogue means.
pub fn dialogue_mean_comparison(c: &Corpus) -> Result<DialogueMeanResult, DynamicsError> {
    let (series, warnings) = paired_series(c);
    if series.is_empty() {
        return Err(DynamicsError::TooFewDialogues { needed: 1, got: 0 });
    }
    let means: Vec<([f64; 8], [f64; 8])> = series.iter().map(|(u, b)| (u.mean(), b.mean())).collect();
    let rows = Emotion::ALL
        .iter()
        .map(|&e| {
            let k = e.index();
            let user: Vec<f64> = means.iter().map(|m| m.0[k]).collect();
            let bot: Vec<f64> = means.iter().map(|m| m.1[k]).collect();
            let (user_mean, bot_mean) = (mean(&user), mean(&bot));
            let (test, note) = match wilcoxon_signed_rank(&bot, &user) {
                Ok(t) => (Some(t.with_effect("cliffs_delta", cliffs_delta(&user, &bot)?)), None),
                Err(err) => (None, Some(err.to_string())),
            };
            Ok(EmotionDifferenceRow { emotion: e, user_mean, bot_mean, mean_diff: bot_mean - user_mean, test, note })
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(DialogueMeanResult { rows, dialogues: series.len(), warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtwNullResult {
    /// Mann-Whitney U of null against real normalized costs; effect is
    /// Cohen's d of null minus real.
    pub test: TestResult,
    pub real_mean: f64,
    pub null_mean: f64,
    pub dialogues: usize,
    pub resamples: usize,
    pub warnings: Vec<Warning>,
}

/// Uniform random permutation of `0..n` without fixed points.
fn derangement(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        p.shuffle(rng);
        if p.iter().enumerate().all(|(i, &j)| i != j) {
            return p;
        }
    }
}

/// Normalized DTW cost of every dialogue's own user/chatbot series against
/// `resamples` rounds of cross-dialogue pairings (user of `i` with chatbot
/// of `π(i)`, `π` a random derangement).
pub fn dtw_null_test(c: &Corpus, resamples: usize, seed: u64) -> Result<DtwNullResult, DynamicsError> {
    let (series, warnings) = paired_series(c);
    let n = series.len();
    if n < 2 {
        return Err(DynamicsError::TooFewDialogues { needed: 2, got: n });
    }
    if resamples == 0 {
        return Err(DynamicsError::InvalidArgument("resamples must be positive".into()));
    }
    let real: Vec<f64> = series.par_iter().map(|(u, b)| dtw(&u.values, &b.values).normalized_cost).collect();
    let null: Vec<f64> = (0..resamples)
        .into_par_iter()
        .flat_map_iter(|round| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(round as u64);
            let perm = derangement(n, &mut rng);
            let series = &series;
            perm.into_iter()
                .enumerate()
                .map(move |(i, j)| dtw(&series[i].0.values, &series[j].1.values).normalized_cost)
        })
        .collect();
    let d = cohens_d(&null, &real).unwrap_or(0.0);
    let test = mann_whitney_u(&null, &real)?.with_effect("cohens_d", d);
    Ok(DtwNullResult { test, real_mean: mean(&real), null_mean: mean(&null), dialogues: n, resamples, warnings })
}
