use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::Deserialize;

use super::model::{Corpus, Dialogue, Rejection, ResponseType, Speaker};
use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// One JSON dialogue object per line.
    JsonLines,
    /// A single JSON array of dialogue objects.
    JsonArray,
    /// Array if the first non-blank byte is `[`, otherwise JSON lines.
    #[default]
    Auto,
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_corpus(&text, format)
}

/// Parses corpus text. Invalid records are collected in `rejects`; only an
/// unparseable array or an empty result is fatal.
pub fn parse_corpus(text: &str, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let format = match format {
        CorpusFormat::Auto if text.trim_start().starts_with('[') => CorpusFormat::JsonArray,
        CorpusFormat::Auto => CorpusFormat::JsonLines,
        f => f,
    };

    let results: Vec<(usize, Result<Dialogue, Rejection>)> = match format {
        CorpusFormat::JsonArray => {
            let values: Vec<serde_json::Value> = serde_json::from_str(text)
                .map_err(|e| CorpusError::Malformed(format!("corpus array: {e}")))?;
            values
                .into_par_iter()
                .enumerate()
                .map(|(i, v)| (i + 1, check_record(i + 1, serde_json::from_value(v.clone()), &v)))
                .collect()
        }
        _ => text
            .lines()
            .enumerate()
            .filter(|(_, line)| !line.trim().is_empty())
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(i, line)| {
                let parsed = serde_json::from_str::<Dialogue>(line);
                let raw = serde_json::from_str::<serde_json::Value>(line).unwrap_or_default();
                (i + 1, check_record(i + 1, parsed, &raw))
            })
            .collect(),
    };

    let mut corpus = Corpus::default();
    for (_, r) in results {
        match r {
            Ok(d) => corpus.dialogues.push(d),
            Err(rej) => {
                warn!("rejected record at line {}: {}", rej.line, rej.reason);
                corpus.rejects.push(rej);
            }
        }
    }
    if corpus.dialogues.is_empty() {
        return Err(CorpusError::Empty { rejected: corpus.rejects.len() });
    }
    Ok(corpus)
}

fn check_record(
    line: usize,
    parsed: Result<Dialogue, serde_json::Error>,
    raw: &serde_json::Value,
) -> Result<Dialogue, Rejection> {
    let id = raw.get("id").and_then(|v| v.as_str()).map(str::to_string);
    let d = parsed.map_err(|e| Rejection { line, id: id.clone(), reason: e.to_string() })?;
    d.validate().map_err(|e| Rejection { line, id, reason: e.to_string() })?;
    Ok(d)
}

/// Writes the corpus as JSON lines (rejections are not persisted).
pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for d in &corpus.dialogues {
        let line = serde_json::to_string(d).map_err(|e| CorpusError::Malformed(e.to_string()))?;
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Deserialize)]
struct LabelRecord {
    dialogue_id: String,
    turn_index: usize,
    response_type: ResponseType,
}

/// Merges a response-type sidecar (JSON lines of
/// `{"dialogue_id","turn_index","response_type"}`) into the corpus.
///
/// Returns the number of labels applied; unmatched or invalid records are
/// returned as rejections.
pub fn merge_response_labels(
    corpus: &mut Corpus,
    path: &Path,
) -> Result<(usize, Vec<Rejection>), CorpusError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    let mut applied = 0;
    let mut rejects = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: LabelRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                rejects.push(Rejection { line: i + 1, id: None, reason: e.to_string() });
                continue;
            }
        };
        let turn = corpus
            .dialogues
            .iter_mut()
            .find(|d| d.id == rec.dialogue_id)
            .and_then(|d| d.turns.iter_mut().find(|t| t.index == rec.turn_index));
        match turn {
            Some(t) if t.speaker == Speaker::Chatbot => {
                t.response_type = Some(rec.response_type);
                applied += 1;
            }
            Some(_) => rejects.push(Rejection {
                line: i + 1,
                id: Some(rec.dialogue_id),
                reason: format!("turn {} is not a chatbot turn", rec.turn_index),
            }),
            None => rejects.push(Rejection {
                line: i + 1,
                id: Some(rec.dialogue_id),
                reason: format!("no turn {} in dialogue", rec.turn_index),
            }),
        }
    }
    Ok((applied, rejects))
}
