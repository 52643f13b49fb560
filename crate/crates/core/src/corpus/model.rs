use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// The eight emotion channels, in the fixed order used for tie-breaking,
/// matrix layout and CSV export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Sadness,
    Surprise,
    Joy,
    Optimism,
    Love,
}

impl Emotion {
    pub const COUNT: usize = 8;

    pub const ALL: [Emotion; 8] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Joy,
        Emotion::Optimism,
        Emotion::Love,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Emotion> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Joy => "joy",
            Emotion::Optimism => "optimism",
            Emotion::Love => "love",
        }
    }

    pub fn from_name(name: &str) -> Option<Emotion> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Moderation categories carried on user turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Harm {
    Harassment,
    SelfHarm,
    Sexual,
    Violence,
}

impl Harm {
    pub const COUNT: usize = 4;

    pub const ALL: [Harm; 4] = [Harm::Harassment, Harm::SelfHarm, Harm::Sexual, Harm::Violence];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Harm::Harassment => "harassment",
            Harm::SelfHarm => "self_harm",
            Harm::Sexual => "sexual",
            Harm::Violence => "violence",
        }
    }

    pub fn from_name(name: &str) -> Option<Harm> {
        Self::ALL.into_iter().find(|h| h.name() == name)
    }
}

impl fmt::Display for Harm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_unit(name: &str, v: f64) -> Result<(), CorpusError> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(CorpusError::ScoreOutOfRange { channel: name.to_string(), value: v })
    }
}

/// Eight-channel emotion score vector, every channel in `[0, 1]`.
///
/// Serialized as an object keyed by channel name.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "EmotionFields", into = "EmotionFields")]
pub struct EmotionVector([f64; 8]);

impl EmotionVector {
    pub const ZERO: EmotionVector = EmotionVector([0.0; 8]);

    pub fn new(values: [f64; 8]) -> Result<Self, CorpusError> {
        for (e, v) in Emotion::ALL.iter().zip(values) {
            check_unit(e.name(), v)?;
        }
        Ok(EmotionVector(values))
    }

    /// Builds a vector by clamping each value into `[0, 1]`; NaN becomes 0.
    pub fn clamped(values: [f64; 8]) -> Self {
        EmotionVector(values.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }))
    }

    pub fn with(mut self, e: Emotion, v: f64) -> Result<Self, CorpusError> {
        check_unit(e.name(), v)?;
        self.0[e.index()] = v;
        Ok(self)
    }

    pub fn get(&self, e: Emotion) -> f64 {
        self.0[e.index()]
    }

    pub fn as_array(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn max_score(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

#[derive(Serialize, Deserialize)]
struct EmotionFields {
    anger: f64,
    disgust: f64,
    fear: f64,
    sadness: f64,
    surprise: f64,
    joy: f64,
    optimism: f64,
    love: f64,
}

impl TryFrom<EmotionFields> for EmotionVector {
    type Error = CorpusError;

    fn try_from(f: EmotionFields) -> Result<Self, Self::Error> {
        EmotionVector::new([
            f.anger, f.disgust, f.fear, f.sadness, f.surprise, f.joy, f.optimism, f.love,
        ])
    }
}

impl From<EmotionVector> for EmotionFields {
    fn from(v: EmotionVector) -> Self {
        let [anger, disgust, fear, sadness, surprise, joy, optimism, love] = v.0;
        EmotionFields { anger, disgust, fear, sadness, surprise, joy, optimism, love }
    }
}

/// Four-channel moderation score vector, every channel in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "HarmFields", into = "HarmFields")]
pub struct HarmVector([f64; 4]);

impl HarmVector {
    pub fn new(values: [f64; 4]) -> Result<Self, CorpusError> {
        for (h, v) in Harm::ALL.iter().zip(values) {
            check_unit(h.name(), v)?;
        }
        Ok(HarmVector(values))
    }

    pub fn clamped(values: [f64; 4]) -> Self {
        HarmVector(values.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }))
    }

    pub fn get(&self, h: Harm) -> f64 {
        self.0[h.index()]
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn max_score(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct HarmFields {
    harassment: f64,
    self_harm: f64,
    sexual: f64,
    violence: f64,
}

impl TryFrom<HarmFields> for HarmVector {
    type Error = CorpusError;

    fn try_from(f: HarmFields) -> Result<Self, Self::Error> {
        HarmVector::new([f.harassment, f.self_harm, f.sexual, f.violence])
    }
}

impl From<HarmVector> for HarmFields {
    fn from(v: HarmVector) -> Self {
        let [harassment, self_harm, sexual, violence] = v.0;
        HarmFields { harassment, self_harm, sexual, violence }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    Chatbot,
}

/// Chatbot response categories for replies to harmful user turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseType {
    PlayAlongFlirtation,
    PoliteRefusal,
    Deflection,
    Retaliation,
    ChastisingHostile,
    NonCommittal,
    Other,
}

impl ResponseType {
    pub const ALL: [ResponseType; 7] = [
        ResponseType::PlayAlongFlirtation,
        ResponseType::PoliteRefusal,
        ResponseType::Deflection,
        ResponseType::Retaliation,
        ResponseType::ChastisingHostile,
        ResponseType::NonCommittal,
        ResponseType::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResponseType::PlayAlongFlirtation => "play_along_flirtation",
            ResponseType::PoliteRefusal => "polite_refusal",
            ResponseType::Deflection => "deflection",
            ResponseType::Retaliation => "retaliation",
            ResponseType::ChastisingHostile => "chastising_hostile",
            ResponseType::NonCommittal => "non_committal",
            ResponseType::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub speaker: Speaker,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotions: Option<EmotionVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harms: Option<HarmVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_type: Option<ResponseType>,
}

impl Turn {
    pub fn user(index: usize) -> Self {
        Turn { index, speaker: Speaker::User, text: None, emotions: None, harms: None, response_type: None }
    }

    pub fn chatbot(index: usize) -> Self {
        Turn { speaker: Speaker::Chatbot, ..Turn::user(index) }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    pub fn with_emotions(mut self, emotions: EmotionVector) -> Self {
        self.emotions = Some(emotions);
        self
    }

    pub fn with_harms(mut self, harms: HarmVector) -> Self {
        self.harms = Some(harms);
        self
    }

    pub fn with_response_type(mut self, label: ResponseType) -> Self {
        self.response_type = Some(label);
        self
    }

    pub fn is_user(&self) -> bool {
        self.speaker == Speaker::User
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.text.is_none() && self.emotions.is_none() {
            return Err(CorpusError::InvalidTurn {
                index: self.index,
                reason: "turn has neither text nor emotions".into(),
            });
        }
        if self.response_type.is_some() && self.speaker != Speaker::Chatbot {
            return Err(CorpusError::InvalidTurn {
                index: self.index,
                reason: "response_type on a user turn".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub turns: Vec<Turn>,
}

impl Dialogue {
    pub fn new(id: impl Into<String>, turns: Vec<Turn>) -> Self {
        Dialogue { id: id.into(), source: None, turns }
    }

    /// Checks the turn invariants: at least one turn, indices strictly
    /// increasing from 0, and every turn individually valid.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.turns.is_empty() {
            return Err(CorpusError::InvalidDialogue("dialogue has no turns".into()));
        }
        if self.turns[0].index != 0 {
            return Err(CorpusError::InvalidDialogue(format!(
                "first turn index is {}, expected 0",
                self.turns[0].index
            )));
        }
        for w in self.turns.windows(2) {
            if w[1].index <= w[0].index {
                return Err(CorpusError::InvalidDialogue(format!(
                    "turn index {} does not follow {}",
                    w[1].index, w[0].index
                )));
            }
        }
        self.turns.iter().try_for_each(Turn::validate)
    }

    pub fn user_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.speaker == Speaker::User)
    }

    pub fn chatbot_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.speaker == Speaker::Chatbot)
    }
}

/// A record that failed validation during loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number (or array position for array input).
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub dialogues: Vec<Dialogue>,
    #[serde(default)]
    pub rejects: Vec<Rejection>,
}

impl Corpus {
    pub fn new(dialogues: Vec<Dialogue>) -> Self {
        Corpus { dialogues, rejects: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.dialogues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialogues.is_empty()
    }

    pub fn total_turns(&self) -> usize {
        self.dialogues.iter().map(|d| d.turns.len()).sum()
    }

    pub fn get(&self, id: &str) -> Option<&Dialogue> {
        self.dialogues.iter().find(|d| d.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub emotion: Emotion,
    pub value: f64,
    pub is_first_spike: bool,
}

/// An adjacent user turn and the chatbot turn that immediately follows it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnPair<'a> {
    pub dialogue_id: &'a str,
    pub user_turn: &'a Turn,
    pub bot_turn: &'a Turn,
}
