use log::warn;

use super::model::{Corpus, Dialogue, Emotion, EmotionVector, Speaker, SpikeEvent, TurnPair};

/// Scores below this are zeroed at ingest.
pub const DEFAULT_MASK: f64 = 0.05;
/// A channel spikes when its score is strictly above this.
pub const DEFAULT_SPIKE_THRESHOLD: f64 = 0.5;

/// Zeroes every channel below `m`; channels `>= m` are kept unchanged.
pub fn mask_scores(v: &EmotionVector, m: f64) -> EmotionVector {
    EmotionVector::clamped(v.as_array().map(|x| if x < m { 0.0 } else { x }))
}

/// Applies [`mask_scores`] to every scored turn of the corpus.
pub fn mask_corpus(corpus: &mut Corpus, m: f64) {
    for t in corpus.dialogues.iter_mut().flat_map(|d| d.turns.iter_mut()) {
        if let Some(v) = t.emotions.as_mut() {
            *v = mask_scores(v, m);
        }
    }
}

/// Argmax channel; ties resolve to the earliest channel in [`Emotion::ALL`].
/// `None` when every channel is zero.
pub fn dominant_emotion(v: &EmotionVector) -> Option<Emotion> {
    let mut best: Option<(Emotion, f64)> = None;
    for e in Emotion::ALL {
        let x = v.get(e);
        if x > 0.0 && best.is_none_or(|(_, b)| x > b) {
            best = Some((e, x));
        }
    }
    best.map(|(e, _)| e)
}

/// Indices of user turns without emotion scores.
pub fn unscored_user_turns(d: &Dialogue) -> Vec<usize> {
    d.user_turns().filter(|t| t.emotions.is_none()).map(|t| t.index).collect()
}

/// One event per (user turn, channel) whose score is strictly above `t`.
/// Every event at the earliest spiking turn is flagged `is_first_spike`.
pub fn detect_spikes(d: &Dialogue, t: f64) -> Vec<SpikeEvent> {
    let mut events = Vec::new();
    let mut first_turn = None;
    for turn in d.user_turns() {
        let Some(v) = turn.emotions.as_ref() else {
            warn!("dialogue {}: user turn {} has no emotion scores, skipped", d.id, turn.index);
            continue;
        };
        for e in Emotion::ALL {
            let value = v.get(e);
            if value > t {
                let first = *first_turn.get_or_insert(turn.index) == turn.index;
                events.push(SpikeEvent {
                    dialogue_id: d.id.clone(),
                    turn_index: turn.index,
                    emotion: e,
                    value,
                    is_first_spike: first,
                });
            }
        }
    }
    events
}

/// Adjacent (user, chatbot) turns with consecutive indices, in turn order.
pub fn extract_turn_pairs(d: &Dialogue) -> Vec<TurnPair<'_>> {
    d.turns
        .windows(2)
        .filter(|w| {
            w[0].speaker == Speaker::User
                && w[1].speaker == Speaker::Chatbot
                && w[1].index == w[0].index + 1
        })
        .map(|w| TurnPair { dialogue_id: &d.id, user_turn: &w[0], bot_turn: &w[1] })
        .collect()
}

/// Keeps the dialogues with at least one user spike above `t`.
pub fn filter_salient(c: &Corpus, t: f64) -> Corpus {
    Corpus {
        dialogues: c
            .dialogues
            .iter()
            .filter(|d| {
                d.user_turns()
                    .filter_map(|turn| turn.emotions.as_ref())
                    .any(|v| v.max_score() > t)
            })
            .cloned()
            .collect(),
        rejects: c.rejects.clone(),
    }
}
