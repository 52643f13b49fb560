//! Emotion/harm scoring front-end.
//!
//! Scoring models are external. Three modes are supported: scores already
//! present in the corpus, a JSON-over-HTTP scoring service, and a small
//! bundled affect lexicon for offline runs and tests.

use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{Emotion, EmotionVector, Harm, HarmVector, Turn};
use super::ops::{mask_scores, DEFAULT_MASK};
use crate::style::{tokenize, Lexicon};

/// Overrides the configured scoring service endpoint.
pub const SCORER_URL_ENV: &str = "AFFECTDYN_SCORER_URL";

const AFFECT_LEXICON: &str = include_str!("../../data/affect.lex");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScorerMode {
    #[default]
    Precomputed,
    RemoteService,
    Lexicon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    pub mode: ScorerMode,
    pub endpoint: Option<String>,
    pub batch_size: usize,
    pub timeout_ms: u64,
    pub max_retries: u32,
    /// Also fill harm vectors.
    pub with_harms: bool,
    /// Masking threshold applied after scoring.
    pub mask: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            mode: ScorerMode::Precomputed,
            endpoint: None,
            batch_size: 32,
            timeout_ms: 30_000,
            max_retries: 3,
            with_harms: false,
            mask: DEFAULT_MASK,
        }
    }
}

impl ScorerConfig {
    /// The endpoint to use, with the environment variable taking priority.
    pub fn resolved_endpoint(&self) -> Option<String> {
        std::env::var(SCORER_URL_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .or_else(|| self.endpoint.clone())
    }

    pub fn validate(&self) -> Result<(), ScorerError> {
        if self.batch_size == 0 {
            return Err(ScorerError::Config("batch_size must be positive".into()));
        }
        if !(self.mask > 0.0 && self.mask < 1.0) {
            return Err(ScorerError::Config(format!("mask {} outside (0, 1)", self.mask)));
        }
        match (self.mode, self.endpoint.is_some()) {
            (ScorerMode::RemoteService, _) if self.resolved_endpoint().is_none() => Err(
                ScorerError::Config(format!("remote_service mode needs an endpoint or {SCORER_URL_ENV}")),
            ),
            (ScorerMode::Precomputed | ScorerMode::Lexicon, true) => {
                Err(ScorerError::Config("endpoint is only valid in remote_service mode".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("invalid scorer config: {0}")]
    Config(String),
    #[error("turn {0} has no emotion scores")]
    MissingScores(usize),
    #[error("turn {0} has no text to score")]
    MissingText(usize),
    #[error("scoring service failed after {attempts} attempts: {message}")]
    Service { attempts: u32, message: String },
    #[error("malformed scoring service reply ({reason}): {excerpt}")]
    MalformedReply { reason: String, excerpt: String },
    #[error("remote scoring support was not compiled in")]
    RemoteUnavailable,
}

/// Returns copies of `turns` with emotions (and harms when requested) filled
/// in and masked at `cfg.mask`.
pub fn fetch_scores(turns: &[Turn], cfg: &ScorerConfig) -> Result<Vec<Turn>, ScorerError> {
    cfg.validate()?;
    let mut out = turns.to_vec();
    match cfg.mode {
        ScorerMode::Precomputed => {
            if let Some(t) = out.iter().find(|t| t.emotions.is_none()) {
                return Err(ScorerError::MissingScores(t.index));
            }
        }
        ScorerMode::Lexicon => {
            for t in &mut out {
                let text = t.text.as_deref().ok_or(ScorerError::MissingText(t.index))?;
                let (emotions, harms) = lexicon_scores(text);
                t.emotions = Some(emotions);
                if cfg.with_harms {
                    t.harms = Some(harms);
                }
            }
        }
        ScorerMode::RemoteService => {
            if let Some(t) = out.iter().find(|t| t.text.is_none()) {
                return Err(ScorerError::MissingText(t.index));
            }
            let endpoint = cfg.resolved_endpoint().expect("validated");
            for chunk in out.chunks_mut(cfg.batch_size) {
                let texts: Vec<&str> = chunk.iter().map(|t| t.text.as_deref().unwrap()).collect();
                let reply = remote::score_batch(&endpoint, &texts, cfg)?;
                apply_reply(chunk, reply, cfg.with_harms)?;
            }
        }
    }
    for t in &mut out {
        if let Some(v) = t.emotions.as_mut() {
            *v = mask_scores(v, cfg.mask);
        }
    }
    Ok(out)
}

fn affect_lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon::parse("affect", AFFECT_LEXICON).expect("bundled affect lexicon"))
}

/// Lexicon stand-in scorer: channel score = 1 − exp(−4 · hits / tokens).
pub fn lexicon_scores(text: &str) -> (EmotionVector, HarmVector) {
    let lex = affect_lexicon();
    let tokens = tokenize(text);
    let score = |category: &str| {
        if tokens.is_empty() {
            return 0.0;
        }
        let hits = lex.count_matches(category, &tokens) as f64;
        1.0 - (-4.0 * hits / tokens.len() as f64).exp()
    };
    let emotions = EmotionVector::clamped(Emotion::ALL.map(|e| score(e.name())));
    let harms = HarmVector::clamped(Harm::ALL.map(|h| score(h.name())));
    (emotions, harms)
}

#[derive(Debug, Serialize)]
struct ScoreRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Debug, Deserialize)]
struct ScoreReply {
    emotions: Vec<Vec<f64>>,
    #[serde(default)]
    harms: Option<Vec<Vec<f64>>>,
}

fn excerpt(s: &str) -> String {
    s.chars().take(200).collect()
}

fn apply_reply(chunk: &mut [Turn], reply_body: String, with_harms: bool) -> Result<(), ScorerError> {
    let malformed = |reason: String| ScorerError::MalformedReply { reason, excerpt: excerpt(&reply_body) };
    let reply: ScoreReply = serde_json::from_str(&reply_body).map_err(|e| malformed(e.to_string()))?;
    if reply.emotions.len() != chunk.len() {
        return Err(malformed(format!(
            "expected {} emotion vectors, got {}",
            chunk.len(),
            reply.emotions.len()
        )));
    }
    let harms = match (with_harms, reply.harms) {
        (false, _) => None,
        (true, Some(h)) if h.len() == chunk.len() => Some(h),
        (true, Some(h)) => {
            return Err(malformed(format!("expected {} harm vectors, got {}", chunk.len(), h.len())))
        }
        (true, None) => return Err(malformed("harms requested but missing".into())),
    };
    for (i, t) in chunk.iter_mut().enumerate() {
        let e: [f64; 8] = reply.emotions[i]
            .as_slice()
            .try_into()
            .map_err(|_| malformed(format!("emotion vector {i} does not have 8 values")))?;
        t.emotions = Some(EmotionVector::new(e).map_err(|err| malformed(err.to_string()))?);
        if let Some(h) = &harms {
            let h: [f64; 4] = h[i]
                .as_slice()
                .try_into()
                .map_err(|_| malformed(format!("harm vector {i} does not have 4 values")))?;
            t.harms = Some(HarmVector::new(h).map_err(|err| malformed(err.to_string()))?);
        }
    }
    Ok(())
}

#[cfg(feature = "remote-scorer")]
mod remote {
    use super::*;

    pub(super) fn score_batch(
        endpoint: &str,
        texts: &[&str],
        cfg: &ScorerConfig,
    ) -> Result<String, ScorerError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        let attempts = cfg.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(50u64 << attempt.min(6)));
            }
            match agent.post(endpoint).send_json(ScoreRequest { texts }) {
                Ok(mut resp) if resp.status() == 200 => {
                    return resp.body_mut().read_to_string().map_err(|e| {
                        ScorerError::MalformedReply { reason: e.to_string(), excerpt: String::new() }
                    });
                }
                Ok(mut resp) => {
                    let body = resp.body_mut().read_to_string().unwrap_or_default();
                    last = format!("HTTP {}: {}", resp.status(), excerpt(&body));
                }
                Err(e) => last = e.to_string(),
            }
            log::warn!("scoring request attempt {} failed: {last}", attempt + 1);
        }
        Err(ScorerError::Service { attempts, message: last })
    }
}

#[cfg(not(feature = "remote-scorer"))]
mod remote {
    use super::*;

    pub(super) fn score_batch(_: &str, _: &[&str], _: &ScorerConfig) -> Result<String, ScorerError> {
        let _ = (ScoreRequest { texts: &[] }, Duration::ZERO);
        Err(ScorerError::RemoteUnavailable)
    }
}
