use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{BipartiteGraph, NodeKind};
use super::PsychosocialError;

/// Walk and skip-gram settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Node2vecParams {
    pub dimensions: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub negatives: usize,
    pub epochs: usize,
    /// Starting learning rate, decayed linearly to `min_learning_rate`.
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub seed: u64,
    /// Hogwild training over threads. Faster, not bit-reproducible.
    pub parallel: bool,
}

impl Default for Node2vecParams {
    fn default() -> Self {
        Node2vecParams {
            dimensions: 64,
            walks_per_node: 10,
            walk_length: 40,
            window: 5,
            p: 1.0,
            q: 1.0,
            negatives: 5,
            epochs: 3,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            seed: 0,
            parallel: false,
        }
    }
}

impl Node2vecParams {
    pub fn validate(&self) -> Result<(), PsychosocialError> {
        let bad = |what: &str| Err(PsychosocialError::InvalidParams(what.to_string()));
        if self.dimensions < 8 {
            return bad("dimensions must be at least 8");
        }
        if self.walks_per_node == 0 || self.walk_length == 0 || self.window == 0 {
            return bad("walks, walk length and window must be positive");
        }
        if self.negatives == 0 || self.epochs == 0 {
            return bad("negatives and epochs must be positive");
        }
        if !(self.p > 0.0 && self.q > 0.0 && self.p.is_finite() && self.q.is_finite()) {
            return bad("p and q must be positive and finite");
        }
        if !(self.learning_rate > 0.0 && self.min_learning_rate > 0.0 && self.min_learning_rate <= self.learning_rate) {
            return bad("learning rates must satisfy 0 < min <= start");
        }
        Ok(())
    }
}

/// Node vectors keyed by community name and user id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub dimensions: usize,
    pub communities: BTreeMap<String, Vec<f64>>,
    pub users: BTreeMap<String, Vec<f64>>,
    /// Nodes outside the largest connected component. They still get a
    /// vector but it carries no information about the main component.
    pub disconnected: Vec<(NodeKind, String)>,
}

impl EmbeddingTable {
    /// Table of community vectors only.
    pub fn from_communities<I, S>(vectors: I) -> Result<EmbeddingTable, PsychosocialError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let communities: BTreeMap<String, Vec<f64>> = vectors.into_iter().map(|(k, v)| (k.into(), v)).collect();
        let dimensions = communities.values().next().map_or(0, Vec::len);
        for (name, v) in &communities {
            if v.len() != dimensions {
                return Err(PsychosocialError::DimensionMismatch { expected: dimensions, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(PsychosocialError::NonFinite(name.clone()));
            }
        }
        Ok(EmbeddingTable { dimensions, communities, users: BTreeMap::new(), disconnected: Vec::new() })
    }

    pub fn community(&self, name: &str) -> Option<&[f64]> {
        self.communities.get(name).map(Vec::as_slice)
    }

    pub fn is_disconnected(&self, community: &str) -> bool {
        self.disconnected.iter().any(|(k, n)| *k == NodeKind::Community && n == community)
    }
}

/// Second-order transition distribution out of `cur` having arrived from
/// `prev`. Each edge weight is scaled by `1/p` for returning to `prev`, `1`
/// for a neighbour of `prev` and `1/q` otherwise. Probabilities sum to one;
/// an isolated node gives an empty list.
pub fn transition_probabilities(g: &BipartiteGraph, prev: Option<usize>, cur: usize, p: f64, q: f64) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> =
        g.neighbors(cur).iter().map(|&(next, w)| (next, w * bias(g, prev, next, p, q))).collect();
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut out {
        *w /= total;
    }
    out
}

fn bias(g: &BipartiteGraph, prev: Option<usize>, next: usize, p: f64, q: f64) -> f64 {
    match prev {
        None => 1.0,
        Some(t) if t == next => 1.0 / p,
        Some(t) if g.weight(t, next).is_some() => 1.0,
        Some(_) => 1.0 / q,
    }
}

fn step(g: &BipartiteGraph, prev: Option<usize>, cur: usize, p: f64, q: f64, rng: &mut ChaCha8Rng) -> Option<usize> {
    let nbrs = g.neighbors(cur);
    if nbrs.is_empty() {
        return None;
    }
    let unbiased = p == 1.0 && q == 1.0;
    let weight = |&(next, w): &(usize, f64)| if unbiased { w } else { w * bias(g, prev, next, p, q) };
    let total: f64 = nbrs.iter().map(weight).sum();
    let mut target = rng.random::<f64>() * total;
    for e in nbrs {
        target -= weight(e);
        if target < 0.0 {
            return Some(e.0);
        }
    }
    nbrs.last().map(|e| e.0)
}

/// One biased walk of at most `length` nodes starting at `start`.
pub fn random_walk(g: &BipartiteGraph, start: usize, length: usize, p: f64, q: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut prev = None;
    while walk.len() < length {
        let cur = *walk.last().unwrap();
        match step(g, prev, cur, p, q, rng) {
            Some(next) => {
                prev = Some(cur);
                walk.push(next);
            }
            None => break,
        }
    }
    walk
}

/// Every walk of the corpus, in a seeded shuffled order. Each walk has its
/// own RNG stream so generation order does not affect the result.
fn generate_walks(g: &BipartiteGraph, params: &Node2vecParams) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut walks: Vec<Vec<usize>> = (0..params.walks_per_node * n)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(k as u64);
            random_walk(g, k % n, params.walk_length, params.p, params.q, &mut rng)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed_0f_5a11);
    walks.shuffle(&mut rng);
    walks
}

/// Shared weight matrix. Relaxed atomics keep hogwild updates free of data
/// races; the single-threaded path uses the same storage.
struct Weights {
    d: usize,
    cells: Vec<AtomicU32>,
}

impl Weights {
    fn new(n: usize, d: usize, init: impl FnMut() -> f32) -> Self {
        let mut init = init;
        Weights { d, cells: (0..n * d).map(|_| AtomicU32::new(init().to_bits())).collect() }
    }

    fn row(&self, i: usize) -> &[AtomicU32] {
        &self.cells[i * self.d..(i + 1) * self.d]
    }

    fn read(&self, i: usize, out: &mut [f32]) {
        for (o, c) in out.iter_mut().zip(self.row(i)) {
            *o = f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add(&self, i: usize, delta: &[f32], scale: f32) {
        for (c, dv) in self.row(i).iter().zip(delta) {
            let v = f32::from_bits(c.load(Ordering::Relaxed)) + scale * dv;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }
}

struct Trainer<'a> {
    input: &'a Weights,
    output: &'a Weights,
    noise: &'a WeightedIndex<f64>,
    negatives: usize,
    window: usize,
    start_lr: f64,
    min_lr: f64,
    total: usize,
    seen: &'a AtomicUsize,
}

impl Trainer<'_> {
    fn train_walk(&self, walk: &[usize], rng: &mut ChaCha8Rng, buf: &mut Buffers) {
        let done = self.seen.fetch_add(walk.len(), Ordering::Relaxed);
        let progress = done as f64 / self.total as f64;
        let lr = (self.start_lr - (self.start_lr - self.min_lr) * progress).max(self.min_lr) as f32;
        for (i, &center) in walk.iter().enumerate() {
            let lo = i.saturating_sub(self.window);
            let hi = (i + self.window + 1).min(walk.len());
            for (j, &context) in walk.iter().enumerate().take(hi).skip(lo) {
                if j != i {
                    self.update(center, context, lr, rng, buf);
                }
            }
        }
    }

    fn update(&self, center: usize, context: usize, lr: f32, rng: &mut ChaCha8Rng, buf: &mut Buffers) {
        self.input.read(center, &mut buf.center);
        buf.grad.iter_mut().for_each(|g| *g = 0.0);
        for k in 0..=self.negatives {
            let (target, label) = if k == 0 {
                (context, 1.0)
            } else {
                let t = self.noise.sample(rng);
                if t == context {
                    continue;
                }
                (t, 0.0)
            };
            self.output.read(target, &mut buf.target);
            let dot: f32 = buf.center.iter().zip(&buf.target).map(|(a, b)| a * b).sum();
            let g = (label - sigmoid(dot)) * lr;
            for (acc, t) in buf.grad.iter_mut().zip(&buf.target) {
                *acc += g * t;
            }
            self.output.add(target, &buf.center, g);
        }
        self.input.add(center, &buf.grad, 1.0);
    }
}

struct Buffers {
    center: Vec<f32>,
    target: Vec<f32>,
    grad: Vec<f32>,
}

impl Buffers {
    fn new(d: usize) -> Self {
        Buffers { center: vec![0.0; d], target: vec![0.0; d], grad: vec![0.0; d] }
    }
}

fn sigmoid(x: f32) -> f32 {
    if x > 6.0 {
        1.0
    } else if x < -6.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

const WALKS_PER_CHUNK: usize = 64;

/// node2vec: biased second-order walks on the bipartite graph, then
/// skip-gram with negative sampling (noise ∝ frequency^0.75) trained by SGD.
/// Single-threaded training is bit-reproducible for a given seed.
pub fn node2vec_embed(g: &BipartiteGraph, params: &Node2vecParams) -> Result<EmbeddingTable, PsychosocialError> {
    params.validate()?;
    if g.is_empty() {
        return Err(PsychosocialError::EmptyGraph);
    }
    let (n, d) = (g.node_count(), params.dimensions);
    let walks = generate_walks(g, params);

    let mut freq = vec![0.0f64; n];
    for w in &walks {
        for &v in w {
            freq[v] += 1.0;
        }
    }
    let noise_weights: Vec<f64> = freq.iter().map(|f| f.powf(0.75)).collect();
    // Every node appears as a walk start, so the weights are never all zero.
    let noise = WeightedIndex::new(&noise_weights).expect("walk frequencies are positive");

    let mut init_rng = ChaCha8Rng::seed_from_u64(params.seed);
    init_rng.set_stream(u64::MAX);
    let input = Weights::new(n, d, || (init_rng.random::<f32>() - 0.5) / d as f32);
    let output = Weights::new(n, d, || 0.0);
    let seen = AtomicUsize::new(0);
    let tokens: usize = walks.iter().map(Vec::len).sum();
    let trainer = Trainer {
        input: &input,
        output: &output,
        noise: &noise,
        negatives: params.negatives,
        window: params.window,
        start_lr: params.learning_rate,
        min_lr: params.min_learning_rate,
        total: tokens * params.epochs,
        seen: &seen,
    };

    let chunks = walks.len().div_ceil(WALKS_PER_CHUNK);
    for epoch in 0..params.epochs {
        let run_chunk = |c: usize, chunk: &[Vec<usize>]| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream((1 << 62) + (epoch * chunks + c) as u64);
            let mut buf = Buffers::new(d);
            for w in chunk {
                trainer.train_walk(w, &mut rng, &mut buf);
            }
        };
        if params.parallel {
            walks.par_chunks(WALKS_PER_CHUNK).enumerate().for_each(|(c, chunk)| run_chunk(c, chunk));
        } else {
            walks.chunks(WALKS_PER_CHUNK).enumerate().for_each(|(c, chunk)| run_chunk(c, chunk));
        }
    }

    let mut row = vec![0.0f32; d];
    let mut vector = |i: usize| {
        input.read(i, &mut row);
        row.iter().map(|&x| x as f64).collect::<Vec<f64>>()
    };
    let mut communities = BTreeMap::new();
    let mut users = BTreeMap::new();
    for i in 0..n {
        let v = vector(i);
        match g.kind(i) {
            NodeKind::Community => communities.insert(g.name(i).to_string(), v),
            NodeKind::User => users.insert(g.name(i).to_string(), v),
        };
    }
    Ok(EmbeddingTable { dimensions: d, communities, users, disconnected: disconnected_nodes(g) })
}

fn disconnected_nodes(g: &BipartiteGraph) -> Vec<(NodeKind, String)> {
    let labels = g.components();
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in &labels {
        *sizes.entry(l).or_insert(0) += 1;
    }
    // Largest component, smallest label on ties.
    let main = sizes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(l, _)| *l);
    labels
        .iter()
        .enumerate()
        .filter(|(_, l)| Some(**l) != main)
        .map(|(i, _)| (g.kind(i), g.name(i).to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psychosocial::graph::Interaction;

    fn small() -> Node2vecParams {
        Node2vecParams { dimensions: 16, walks_per_node: 20, walk_length: 20, epochs: 2, ..Default::default() }
    }

    #[test]
    fn params_are_checked() {
        assert!(Node2vecParams::default().validate().is_ok());
        for bad in [
            Node2vecParams { dimensions: 4, ..Default::default() },
            Node2vecParams { walk_length: 0, ..Default::default() },
            Node2vecParams { q: 0.0, ..Default::default() },
            Node2vecParams { min_learning_rate: 1.0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(PsychosocialError::InvalidParams(_))));
        }
    }

    #[test]
    fn biased_transitions_by_hand() {
        // u0 - a - u1 - b : from a (arrived from u0), the choices are u0
        // (return, 1/p) and u1 (distance 2 from u0, 1/q).
        let g = BipartiteGraph::build(&[
            Interaction::new("u0", "a", 1),
            Interaction::new("u1", "a", 3),
            Interaction::new("u1", "b", 1),
        ]);
        let (a, u0, u1) = (g.community_node("a").unwrap(), g.user_node("u0").unwrap(), g.user_node("u1").unwrap());
        let probs = transition_probabilities(&g, Some(u0), a, 0.5, 2.0);
        let w0 = 1.0 / 0.5;
        let w1 = 3.0 / 2.0;
        let expect: BTreeMap<usize, f64> = [(u0, w0 / (w0 + w1)), (u1, w1 / (w0 + w1))].into_iter().collect();
        for (v, pr) in probs {
            assert!((pr - expect[&v]).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_graph_is_an_error() {
        assert!(matches!(node2vec_embed(&BipartiteGraph::default(), &small()), Err(PsychosocialError::EmptyGraph)));
    }

    #[test]
    fn isolated_nodes_are_embedded_and_flagged() {
        let g = BipartiteGraph::build(&[
            Interaction::new("u0", "a", 1),
            Interaction::new("u1", "a", 1),
            Interaction::new("u1", "b", 2),
            Interaction::new("loner", "island", 1),
        ]);
        let emb = node2vec_embed(&g, &small()).unwrap();
        assert!(emb.communities.values().chain(emb.users.values()).all(|v| v.len() == 16 && v.iter().all(|x| x.is_finite())));
        assert!(emb.is_disconnected("island"));
        assert!(!emb.is_disconnected("a"));
        assert_eq!(emb.disconnected.len(), 2);
    }

    #[test]
    fn single_edge_graph() {
        let g = BipartiteGraph::build(&[Interaction::new("u", "c", 5)]);
        let emb = node2vec_embed(&g, &small()).unwrap();
        assert!(emb.community("c").unwrap().iter().all(|x| x.is_finite()));
        assert!(emb.disconnected.is_empty());
    }

    #[test]
    fn sequential_training_is_reproducible() {
        let rows: Vec<Interaction> =
            (0..12).map(|i| Interaction::new(&format!("u{}", i % 5), &format!("c{}", i % 4), 1 + i as u64 % 3)).collect();
        let g = BipartiteGraph::build(&rows);
        let a = node2vec_embed(&g, &small()).unwrap();
        let b = node2vec_embed(&g, &small()).unwrap();
        assert_eq!(a, b);
        let c = node2vec_embed(&g, &Node2vecParams { seed: 1, ..small() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn from_communities_validates() {
        assert!(matches!(
            EmbeddingTable::from_communities([("a", vec![1.0, 2.0]), ("b", vec![1.0])]),
            Err(PsychosocialError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            EmbeddingTable::from_communities([("a", vec![f64::NAN])]),
            Err(PsychosocialError::NonFinite(_))
        ));
    }
}
