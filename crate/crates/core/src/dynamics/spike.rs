use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::corpus::{detect_spikes, Corpus, Dialogue, Emotion, Speaker};
use crate::stats::{
    bonferroni_alpha, mann_whitney_u, mean, one_sample_t, paired_sign_flip_permutation, StatsError,
    TestResult,
};
use crate::Warning;

/// Sign-flip resamples used when the exact distribution is too large.
pub const DEFAULT_PERMUTATION_RESAMPLES: usize = 10_000;

/// Chatbot reaction to one spiked channel of one user turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeResponse {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub emotion: Emotion,
    pub is_first_spike: bool,
    pub response: [f64; 8],
    /// Mean of the dialogue's other scored chatbot turns.
    pub baseline: [f64; 8],
}

impl SpikeResponse {
    pub fn deltas(&self) -> [f64; 8] {
        std::array::from_fn(|k| self.response[k] - self.baseline[k])
    }

    pub fn matched_delta(&self) -> f64 {
        self.response[self.emotion.index()] - self.baseline[self.emotion.index()]
    }

    /// Deltas of the seven other channels, in channel order.
    pub fn nonmatched_deltas(&self) -> Vec<f64> {
        let d = self.deltas();
        (0..Emotion::COUNT).filter(|&k| k != self.emotion.index()).map(|k| d[k]).collect()
    }
}

fn dialogue_responses(d: &Dialogue, t: f64) -> (Vec<SpikeResponse>, Vec<Warning>) {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    let mut last_turn = None;
    for ev in detect_spikes(d, t) {
        let pos = d.turns.iter().position(|x| x.index == ev.turn_index).expect("spike turn exists");
        let next = d.turns.get(pos + 1).filter(|b| b.speaker == Speaker::Chatbot && b.index == ev.turn_index + 1);
        let Some((bot_index, response)) = next.and_then(|b| b.emotions.map(|v| (b.index, v))) else {
            if last_turn != Some(ev.turn_index) {
                warnings.push(Warning::new(&d.id, "no_response", format!("spike at turn {} has no scored chatbot reply", ev.turn_index)));
            }
            last_turn = Some(ev.turn_index);
            continue;
        };
        let others: Vec<&[f64; 8]> = d
            .turns
            .iter()
            .filter(|x| x.speaker == Speaker::Chatbot && x.index != bot_index)
            .filter_map(|x| x.emotions.as_ref().map(|v| v.as_array()))
            .collect();
        if others.is_empty() {
            if last_turn != Some(ev.turn_index) {
                warnings.push(Warning::new(&d.id, "no_baseline", format!("spike at turn {}: no other chatbot turn", ev.turn_index)));
            }
            last_turn = Some(ev.turn_index);
            continue;
        }
        last_turn = Some(ev.turn_index);
        let baseline = std::array::from_fn(|k| others.iter().map(|v| v[k]).sum::<f64>() / others.len() as f64);
        out.push(SpikeResponse {
            dialogue_id: d.id.clone(),
            turn_index: ev.turn_index,
            emotion: ev.emotion,
            is_first_spike: ev.is_first_spike,
            response: *response.as_array(),
            baseline,
        });
    }
    (out, warnings)
}

/// Every (spike, chatbot reply) with a usable baseline, in dialogue order.
pub fn spike_responses(c: &Corpus, t: f64) -> (Vec<SpikeResponse>, Vec<Warning>) {
    let parts: Vec<_> = c.dialogues.par_iter().map(|d| dialogue_responses(d, t)).collect();
    let mut responses = Vec::new();
    let mut warnings = Vec::new();
    for (r, w) in parts {
        responses.extend(r);
        warnings.extend(w);
    }
    (responses, warnings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeEmotionRow {
    pub emotion: Emotion,
    pub n: usize,
    pub matched_delta: f64,
    pub nonmatched_delta: f64,
    /// `matched_delta − nonmatched_delta`.
    pub contrast: f64,
    /// Sign-flip permutation test of the matched deltas.
    pub baseline_test: Option<TestResult>,
    /// Mann-Whitney of matched deltas against the pooled non-matched deltas.
    pub contrast_test: Option<TestResult>,
    pub baseline_significant: bool,
    pub contrast_significant: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeAnalysisResult {
    pub rows: Vec<SpikeEmotionRow>,
    pub alpha: f64,
    pub events: usize,
    pub warnings: Vec<Warning>,
}

/// Dual-baseline analysis over all spike events.
pub fn post_spike_analysis(c: &Corpus, t: f64, resamples: usize, seed: u64) -> Result<SpikeAnalysisResult, DynamicsError> {
    let (responses, warnings) = spike_responses(c, t);
    let alpha = bonferroni_alpha(0.05, Emotion::COUNT)?;
    let rows = Emotion::ALL
        .iter()
        .map(|&e| {
            let mine: Vec<&SpikeResponse> = responses.iter().filter(|r| r.emotion == e).collect();
            let matched: Vec<f64> = mine.iter().map(|r| r.matched_delta()).collect();
            let nonmatched: Vec<f64> = mine.iter().flat_map(|r| r.nonmatched_deltas()).collect();
            let mut notes = Vec::new();
            let mut keep = |r: Result<TestResult, StatsError>, what: &str| match r {
                Ok(t) => Some(t),
                Err(err) => {
                    notes.push(format!("{what}: {err}"));
                    None
                }
            };
            let baseline_test = keep(paired_sign_flip_permutation(&matched, resamples, seed ^ e.index() as u64), "baseline");
            let contrast_test = keep(mann_whitney_u(&matched, &nonmatched), "contrast");
            let (md, nd) = (
                if matched.is_empty() { 0.0 } else { mean(&matched) },
                if nonmatched.is_empty() { 0.0 } else { mean(&nonmatched) },
            );
            SpikeEmotionRow {
                emotion: e,
                n: matched.len(),
                matched_delta: md,
                nonmatched_delta: nd,
                contrast: md - nd,
                baseline_significant: baseline_test.as_ref().is_some_and(|t| t.p_value < alpha),
                contrast_significant: contrast_test.as_ref().is_some_and(|t| t.p_value < alpha),
                baseline_test,
                contrast_test,
                notes,
            }
        })
        .collect();
    Ok(SpikeAnalysisResult { rows, alpha, events: responses.len(), warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElevationRow {
    pub emotion: Emotion,
    pub n: usize,
    pub mean_delta: f64,
    /// One-sample t of matched deltas against 0; `None` with fewer than 3.
    pub test: Option<TestResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One-sample t-tests of the matched delta at each dialogue's first spike.
pub fn post_spike_elevation(c: &Corpus, t: f64) -> (Vec<ElevationRow>, Vec<Warning>) {
    let (responses, warnings) = spike_responses(c, t);
    let rows = Emotion::ALL
        .iter()
        .map(|&e| {
            let d: Vec<f64> =
                responses.iter().filter(|r| r.is_first_spike && r.emotion == e).map(|r| r.matched_delta()).collect();
            let (test, note) = if d.len() < 3 {
                (None, Some(format!("insufficient data: {} deltas", d.len())))
            } else {
                match one_sample_t(&d, 0.0) {
                    Ok(t) => (Some(t), None),
                    Err(err) => (None, Some(err.to_string())),
                }
            };
            ElevationRow { emotion: e, n: d.len(), mean_delta: if d.is_empty() { 0.0 } else { mean(&d) }, test, note }
        })
        .collect();
    (rows, warnings)
}
