use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{tokenize, StyleError};
use crate::corpus::{extract_turn_pairs, Corpus};

/// Terms seen fewer times than this across both classes are ignored.
pub const MIN_TERM_FREQUENCY: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub weight: f64,
}

/// Top terms per speaker, ranked by how much more that speaker uses them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DistinctiveTerms {
    pub user: Vec<TermWeight>,
    pub chatbot: Vec<TermWeight>,
}

impl DistinctiveTerms {
    /// CSV with columns `term,weight,speaker`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), StyleError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["term", "weight", "speaker"])?;
        for (speaker, list) in [("user", &self.user), ("chatbot", &self.chatbot)] {
            for t in list {
                out.write_record([t.term.as_str(), &t.weight.to_string(), speaker])?;
            }
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn counts(tokens: &[String]) -> BTreeMap<&str, usize> {
    let mut m = BTreeMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}

/// `tfidf_a(term) − tfidf_b(term)` with each class treated as one document:
/// `tf = ln(1 + count)`, `idf = ln((1 + 2) / (1 + df)) + 1`.
pub fn term_deltas(a: &[String], b: &[String], min_frequency: usize) -> BTreeMap<String, f64> {
    let (ca, cb) = (counts(a), counts(b));
    let mut terms: Vec<&str> = ca.keys().chain(cb.keys()).copied().collect();
    terms.sort_unstable();
    terms.dedup();
    terms
        .into_iter()
        .filter_map(|term| {
            let (na, nb) = (ca.get(term).copied().unwrap_or(0), cb.get(term).copied().unwrap_or(0));
            if na + nb < min_frequency {
                return None;
            }
            let df = (na > 0) as usize + (nb > 0) as usize;
            let idf = (3.0 / (1.0 + df as f64)).ln() + 1.0;
            let tfidf = |n: usize| (1.0 + n as f64).ln() * idf;
            Some((term.to_string(), tfidf(na) - tfidf(nb)))
        })
        .collect()
}

/// Top `k` positive deltas for each side. Ties are ordered by term.
pub fn delta_tfidf_tokens(user: &[String], bot: &[String], k: usize) -> Result<DistinctiveTerms, StyleError> {
    if user.is_empty() {
        return Err(StyleError::EmptyClass("user"));
    }
    if bot.is_empty() {
        return Err(StyleError::EmptyClass("chatbot"));
    }
    let deltas = term_deltas(user, bot, MIN_TERM_FREQUENCY);
    let top = |sign: f64| {
        let mut v: Vec<TermWeight> = deltas
            .iter()
            .filter(|(_, d)| sign * **d > 0.0)
            .map(|(t, d)| TermWeight { term: t.clone(), weight: sign * d })
            .collect();
        v.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
        v.truncate(k);
        v
    };
    Ok(DistinctiveTerms { user: top(1.0), chatbot: top(-1.0) })
}

/// Distinctive terms of spiking user turns (any emotion above `t`) against
/// the chatbot turns answering them.
pub fn delta_tfidf(c: &Corpus, k: usize, t: f64) -> Result<DistinctiveTerms, StyleError> {
    let (mut user, mut bot) = (Vec::new(), Vec::new());
    for d in &c.dialogues {
        for p in extract_turn_pairs(d) {
            if !p.user_turn.emotions.as_ref().is_some_and(|v| v.max_score() > t) {
                continue;
            }
            if let Some(s) = &p.user_turn.text {
                user.extend(tokenize(s));
            }
            if let Some(s) = &p.bot_turn.text {
                bot.extend(tokenize(s));
            }
        }
    }
    delta_tfidf_tokens(&user, &bot, k)
}
