use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::style::tokenize;

/// Minimum bigram count for NPMI ranking.
pub const MIN_BIGRAM_COUNT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeywordMethod {
    Tfidf,
    Npmi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub term: String,
    pub score: f64,
    pub method: KeywordMethod,
}

/// Unigrams and within-document adjacent bigrams (joined by a space).
pub fn ngrams(docs: &[String]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for d in docs {
        let toks = tokenize(d);
        for t in &toks {
            *counts.entry(t.clone()).or_insert(0) += 1;
        }
        for w in toks.windows(2) {
            *counts.entry(format!("{} {}", w[0], w[1])).or_insert(0) += 1;
        }
    }
    counts
}

fn top_k(mut scored: Vec<(String, f64)>, k: usize, method: KeywordMethod) -> Vec<Keyword> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.into_iter().take(k).map(|(term, score)| Keyword { term, score, method }).collect()
}

/// Each cluster is one document. `tf` is the term's share of the cluster's
/// n-grams and `idf = ln((1 + N) / (1 + df))` over the foreground and the
/// background clusters, so a term in every cluster scores zero. Only
/// positive scores are ranked.
pub fn tfidf_keywords(cluster: &[String], background: &[Vec<String>], k: usize) -> Vec<Keyword> {
    let fg = ngrams(cluster);
    let total: usize = fg.values().sum();
    if total == 0 {
        return Vec::new();
    }
    let bg: Vec<BTreeSet<String>> = background.iter().map(|docs| ngrams(docs).into_keys().collect()).collect();
    let n = (background.len() + 1) as f64;
    let scored = fg
        .into_iter()
        .map(|(term, c)| {
            let df = 1 + bg.iter().filter(|s| s.contains(&term)).count();
            let idf = ((1.0 + n) / (1.0 + df as f64)).ln();
            (term, c as f64 / total as f64 * idf)
        })
        .filter(|(_, s)| *s > 0.0)
        .collect();
    top_k(scored, k, KeywordMethod::Tfidf)
}

/// NPMI of adjacent token pairs, `ln(p(x,y) / p(x)p(y)) / −ln p(x,y)`, with
/// every probability add-one smoothed over the same `N + V` denominator
/// (tokens plus vocabulary). This keeps `p(x,y) ≤ min(p(x), p(y))`, so the
/// score stays in `[−1, 1]`. Bigrams seen fewer than [`MIN_BIGRAM_COUNT`]
/// times are not ranked.
pub fn npmi_keywords(cluster: &[String], k: usize) -> Vec<Keyword> {
    let mut uni: BTreeMap<String, usize> = BTreeMap::new();
    let mut bi: BTreeMap<(String, String), usize> = BTreeMap::new();
    for d in cluster {
        let toks = tokenize(d);
        for t in &toks {
            *uni.entry(t.clone()).or_insert(0) += 1;
        }
        for w in toks.windows(2) {
            *bi.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
        }
    }
    let tokens: usize = uni.values().sum();
    if tokens < 2 {
        return Vec::new();
    }
    let denom = (tokens + uni.len()) as f64;
    let p = |c: usize| (c as f64 + 1.0) / denom;
    let scored = bi
        .into_iter()
        .filter(|(_, c)| *c >= MIN_BIGRAM_COUNT)
        .map(|((x, y), c)| {
            let pxy = p(c);
            let score = (pxy / (p(uni[&x]) * p(uni[&y]))).ln() / -pxy.ln();
            (format!("{x} {y}"), score.clamp(-1.0, 1.0))
        })
        .collect();
    top_k(scored, k, KeywordMethod::Npmi)
}
