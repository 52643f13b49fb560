use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tokenize, Lexicon, StyleError, StyleProfile};
use crate::corpus::{extract_turn_pairs, Corpus, Turn};
use crate::stats::{mean, paired_t, welch_t, StatsError, TestResult};
use crate::Warning;

/// Function-word categories compared by LSM.
pub const DEFAULT_LSM_CATEGORIES: [&str; 8] =
    ["pronoun", "article", "prep", "auxverb", "adverb", "conj", "negate", "quant"];

/// Keeps LSM defined when both rates are zero.
pub const LSM_EPSILON: f64 = 0.0001;

/// First-person singular and personal pronouns.
pub const SELF_REFERENCE_CATEGORIES: [&str; 2] = ["i", "ppron"];

/// LSM over [`DEFAULT_LSM_CATEGORIES`].
pub fn lsm_score(a: &StyleProfile, b: &StyleProfile) -> f64 {
    lsm_score_with(a, b, &DEFAULT_LSM_CATEGORIES)
}

/// Mean over `categories` of `1 − |a_c − b_c| / (a_c + b_c + ε)`.
pub fn lsm_score_with(a: &StyleProfile, b: &StyleProfile, categories: &[&str]) -> f64 {
    if categories.is_empty() {
        return 1.0;
    }
    categories
        .iter()
        .map(|c| {
            let (x, y) = (a.rate(c), b.rate(c));
            1.0 - (x - y).abs() / (x + y + LSM_EPSILON)
        })
        .sum::<f64>()
        / categories.len() as f64
}

fn require_categories(lex: &Lexicon, cats: &[&str]) -> Result<(), StyleError> {
    match cats.iter().find(|c| !lex.has_category(c)) {
        Some(c) => Err(StyleError::MissingCategory(c.to_string())),
        None => Ok(()),
    }
}

fn is_spike(turn: &Turn, t: f64) -> Option<bool> {
    turn.emotions.as_ref().map(|v| v.max_score() > t)
}

fn profile(turn: &Turn, lex: &Lexicon) -> Option<StyleProfile> {
    turn.text.as_deref().map(|s| StyleProfile::from_tokens(&tokenize(s), lex))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfReferenceRow {
    pub category: String,
    /// Mean over dialogues of the spike-turn rate, in percent.
    pub spike_rate: f64,
    pub baseline_rate: f64,
    /// `spike_rate − baseline_rate` in percentage points.
    pub diff_pp: f64,
    pub test: Option<TestResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfReferenceResult {
    pub rows: Vec<SelfReferenceRow>,
    pub dialogues: usize,
    pub warnings: Vec<Warning>,
}

/// Per dialogue, compares the mean rate over spiking user turns with the
/// mean over the remaining scored user turns, then runs a paired t-test
/// across dialogues for the `i` and `ppron` categories.
///
/// Dialogues without a text-bearing spike turn or baseline turn are left
/// out with a warning.
pub fn self_reference_shift(c: &Corpus, lex: &Lexicon, t: f64) -> Result<SelfReferenceResult, StyleError> {
    require_categories(lex, &SELF_REFERENCE_CATEGORIES)?;
    let per_dialogue: Vec<Result<[(f64, f64); 2], Warning>> = c
        .dialogues
        .par_iter()
        .map(|d| {
            let (mut spike, mut base): (Vec<StyleProfile>, Vec<StyleProfile>) = (Vec::new(), Vec::new());
            for turn in d.user_turns() {
                let (Some(flag), Some(p)) = (is_spike(turn, t), profile(turn, lex)) else { continue };
                if flag { spike.push(p) } else { base.push(p) }
            }
            if spike.is_empty() {
                return Err(Warning::new(&d.id, "no_spike_text", "no spiking user turn with text"));
            }
            if base.is_empty() {
                return Err(Warning::new(&d.id, "no_baseline_turn", "no non-spike user turn with text"));
            }
            let avg = |ps: &[StyleProfile], cat: &str| mean(&ps.iter().map(|p| p.rate(cat)).collect::<Vec<_>>());
            Ok(SELF_REFERENCE_CATEGORIES.map(|cat| (avg(&spike, cat), avg(&base, cat))))
        })
        .collect();

    let mut warnings = Vec::new();
    let mut kept = Vec::new();
    for r in per_dialogue {
        match r {
            Ok(v) => kept.push(v),
            Err(w) => warnings.push(w),
        }
    }
    let rows = SELF_REFERENCE_CATEGORIES
        .iter()
        .enumerate()
        .map(|(k, cat)| {
            let spike: Vec<f64> = kept.iter().map(|v| v[k].0).collect();
            let base: Vec<f64> = kept.iter().map(|v| v[k].1).collect();
            let (spike_rate, baseline_rate) =
                if kept.is_empty() { (0.0, 0.0) } else { (mean(&spike), mean(&base)) };
            let (test, note) = match paired_t(&spike, &base) {
                Ok(r) => (Some(r), None),
                Err(StatsError::ZeroVariance) if spike == base => (
                    Some(TestResult::new("paired_t", 0.0, 1.0, vec![kept.len()]).with_effect("cohens_dz", 0.0)),
                    Some("all paired differences are zero".to_string()),
                ),
                Err(e) => (None, Some(e.to_string())),
            };
            SelfReferenceRow {
                category: cat.to_string(),
                spike_rate,
                baseline_rate,
                diff_pp: spike_rate - baseline_rate,
                test,
                note,
            }
        })
        .collect();
    Ok(SelfReferenceResult { rows, dialogues: kept.len(), warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleMatchingResult {
    pub test: TestResult,
    pub spike_pairs: usize,
    pub baseline_pairs: usize,
    pub spike_mean_lsm: f64,
    pub baseline_mean_lsm: f64,
}

/// Welch t-test of per-pair LSM: pairs whose user turn spikes against all
/// other scored pairs. Both turns of a pair need text.
pub fn style_matching_test(c: &Corpus, lex: &Lexicon, t: f64) -> Result<StyleMatchingResult, StyleError> {
    require_categories(lex, &DEFAULT_LSM_CATEGORIES)?;
    let scored: Vec<Vec<(bool, f64)>> = c
        .dialogues
        .par_iter()
        .map(|d| {
            extract_turn_pairs(d)
                .into_iter()
                .filter_map(|p| {
                    let flag = is_spike(p.user_turn, t)?;
                    let (a, b) = (profile(p.user_turn, lex)?, profile(p.bot_turn, lex)?);
                    Some((flag, lsm_score(&a, &b)))
                })
                .collect()
        })
        .collect();
    let (mut spike, mut base) = (Vec::new(), Vec::new());
    for (flag, lsm) in scored.into_iter().flatten() {
        if flag { spike.push(lsm) } else { base.push(lsm) }
    }
    for (group, v) in [("spike", &spike), ("baseline", &base)] {
        if v.len() < 3 {
            return Err(StyleError::TooFewPairs { group, needed: 3, got: v.len() });
        }
    }
    let test = match welch_t(&spike, &base) {
        Err(StatsError::ZeroVariance) => TestResult::new("welch_t", 0.0, 1.0, vec![spike.len(), base.len()]),
        other => other?,
    };
    Ok(StyleMatchingResult {
        test,
        spike_pairs: spike.len(),
        baseline_pairs: base.len(),
        spike_mean_lsm: mean(&spike),
        baseline_mean_lsm: mean(&base),
    })
}
