use serde::{Deserialize, Serialize};

use crate::corpus::{Dialogue, EmotionVector, Speaker};

/// Scored turns of one speaker in turn order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionSeries {
    pub dialogue_id: String,
    pub speaker: Speaker,
    pub values: Vec<EmotionVector>,
}

impl EmotionSeries {
    /// `None` when the speaker has no scored turn.
    pub fn from_dialogue(d: &Dialogue, speaker: Speaker) -> Option<EmotionSeries> {
        let values: Vec<EmotionVector> =
            d.turns.iter().filter(|t| t.speaker == speaker).filter_map(|t| t.emotions).collect();
        (!values.is_empty()).then(|| EmotionSeries { dialogue_id: d.id.clone(), speaker, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Per-channel mean over the series.
    pub fn mean(&self) -> [f64; 8] {
        let mut m = [0.0; 8];
        for v in &self.values {
            for (acc, x) in m.iter_mut().zip(v.as_array()) {
                *acc += x;
            }
        }
        m.map(|x| x / self.values.len() as f64)
    }
}

/// `1 − cos(a, b)`. Two zero vectors are at distance 0, a zero and a
/// non-zero vector at distance 1.
pub fn cosine_distance(a: &EmotionVector, b: &EmotionVector) -> f64 {
    cosine_distance_slices(a.as_array(), b.as_array())
}

pub(crate) fn cosine_distance_slices(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 0.0;
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    match (na == 0.0, nb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => (1.0 - dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 2.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtwResult {
    pub raw_cost: f64,
    /// `raw_cost / path.len()`.
    pub normalized_cost: f64,
    pub path: Vec<(usize, usize)>,
}

/// DTW of two emotion series under cosine distance.
pub fn dtw(a: &[EmotionVector], b: &[EmotionVector]) -> DtwResult {
    dtw_with(a, b, cosine_distance)
}

/// Unconstrained DTW with an arbitrary local distance. Both inputs must be
/// non-empty. Backtracking prefers the diagonal step, then the step that
/// advances only `a`.
pub fn dtw_with<T>(a: &[T], b: &[T], dist: impl Fn(&T, &T) -> f64) -> DtwResult {
    assert!(!a.is_empty() && !b.is_empty(), "dtw needs non-empty series");
    let (n, m) = (a.len(), b.len());
    let mut acc = vec![f64::INFINITY; n * m];
    let at = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        for j in 0..m {
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => acc[at(0, j - 1)],
                (_, 0) => acc[at(i - 1, 0)],
                _ => acc[at(i - 1, j - 1)].min(acc[at(i - 1, j)]).min(acc[at(i, j - 1)]),
            };
            acc[at(i, j)] = best + dist(&a[i], &b[j]);
        }
    }
    let (mut i, mut j) = (n - 1, m - 1);
    let mut path = vec![(i, j)];
    while (i, j) != (0, 0) {
        (i, j) = match (i, j) {
            (0, _) => (0, j - 1),
            (_, 0) => (i - 1, 0),
            _ => {
                let (d, v, h) = (acc[at(i - 1, j - 1)], acc[at(i - 1, j)], acc[at(i, j - 1)]);
                if d <= v && d <= h {
                    (i - 1, j - 1)
                } else if v <= h {
                    (i - 1, j)
                } else {
                    (i, j - 1)
                }
            }
        };
        path.push((i, j));
    }
    path.reverse();
    let raw_cost = acc[at(n - 1, m - 1)];
    DtwResult { raw_cost, normalized_cost: raw_cost / path.len() as f64, path }
}
