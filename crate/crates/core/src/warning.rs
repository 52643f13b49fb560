use serde::{Deserialize, Serialize};

/// Non-fatal problem met while analysing one dialogue.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Warning {
    pub dialogue_id: String,
    /// Stable machine-readable reason, e.g. `missing_speaker`.
    pub code: String,
    pub detail: String,
}

impl Warning {
    /// `dialogue_id` of warnings that concern the corpus or the community
    /// graph rather than a single dialogue.
    pub const CORPUS: &'static str = "*";

    pub fn new(dialogue_id: &str, code: &str, detail: impl Into<String>) -> Self {
        Warning { dialogue_id: dialogue_id.to_string(), code: code.to_string(), detail: detail.into() }
    }
}
