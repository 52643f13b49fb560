use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::EmbeddingMatrix;
use super::{Keyword, TopicsError};

/// Iteration cap of the assign/update loop.
pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCluster {
    pub id: usize,
    pub members: Vec<String>,
    pub centroid: Vec<f64>,
    #[serde(default)]
    pub keywords: Vec<Keyword>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpMeansResult {
    pub clusters: Vec<TopicCluster>,
    /// Cluster id of every matrix row, in matrix order.
    pub assignments: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// `Σ‖x − μ‖² + λk` after each iteration.
    pub objective: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centroids.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

fn objective(m: &EmbeddingMatrix, z: &[usize], centroids: &[Vec<f64>], lambda: f64) -> f64 {
    let cost: f64 = m.rows.iter().zip(z).map(|(x, &k)| sq_dist(x, &centroids[k])).sum();
    cost + lambda * centroids.len() as f64
}

/// Recomputes centroids as member means and drops empty clusters,
/// renumbering assignments to stay dense.
fn update(m: &EmbeddingMatrix, z: &mut [usize], k: usize) -> Vec<Vec<f64>> {
    let d = m.dimensions();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (x, &c) in m.rows.iter().zip(z.iter()) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    let mut remap = vec![usize::MAX; k];
    let mut centroids = Vec::new();
    for c in 0..k {
        if counts[c] > 0 {
            remap[c] = centroids.len();
            centroids.push(sums[c].iter().map(|s| s / counts[c] as f64).collect());
        }
    }
    for c in z.iter_mut() {
        *c = remap[*c];
    }
    centroids
}

/// DP-Means: start from one cluster at the global mean; each pass assigns
/// every point (in id order) to its nearest centroid, opening a new cluster
/// at the point whenever the nearest squared distance exceeds `lambda`, then
/// recomputes centroids. Stops when assignments repeat or after
/// [`MAX_ITERATIONS`]. Panics if the objective ever increases.
pub fn dp_means(m: &EmbeddingMatrix, lambda: f64) -> Result<DpMeansResult, TopicsError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(TopicsError::InvalidLambda(lambda));
    }
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by(|&a, &b| m.ids[a].cmp(&m.ids[b]));

    let global: Vec<f64> =
        (0..m.dimensions()).map(|j| m.rows.iter().map(|r| r[j]).sum::<f64>() / m.len() as f64).collect();
    let mut centroids = vec![global];
    let mut z = vec![0usize; m.len()];
    let mut trace = vec![objective(m, &z, &centroids, lambda)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Distances to the centroids that exist at the start of the pass are
        // independent; only clusters opened during the pass need the
        // sequential scan.
        let base: Vec<(usize, f64)> = m.rows.par_iter().map(|x| nearest(x, &centroids)).collect();
        let existing = centroids.len();
        let mut next = vec![0usize; m.len()];
        for &i in &order {
            let (mut k, mut d) = base[i];
            let (nk, nd) = nearest(&m.rows[i], &centroids[existing..]);
            if nd < d {
                (k, d) = (existing + nk, nd);
            }
            if d > lambda {
                centroids.push(m.rows[i].clone());
                k = centroids.len() - 1;
            }
            next[i] = k;
        }
        let k = centroids.len();
        centroids = update(m, &mut next, k);
        let obj = objective(m, &next, &centroids, lambda);
        let prev = *trace.last().unwrap();
        assert!(obj <= prev + 1e-9 * prev.abs().max(1.0), "dp-means objective rose from {prev} to {obj}");
        trace.push(obj);
        let stable = next == z;
        z = next;
        if stable {
            converged = true;
            break;
        }
    }

    let mut members: Vec<Vec<String>> = vec![Vec::new(); centroids.len()];
    for &i in &order {
        members[z[i]].push(m.ids[i].clone());
    }
    let clusters = centroids
        .into_iter()
        .zip(members)
        .enumerate()
        .map(|(id, (centroid, members))| TopicCluster { id, members, centroid, keywords: Vec::new() })
        .collect();
    Ok(DpMeansResult { clusters, assignments: z, iterations, converged, objective: trace })
}
