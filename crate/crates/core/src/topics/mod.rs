//! DP-Means clustering of precomputed text embeddings and cluster keywords
//! by TF-IDF and NPMI.

mod dpmeans;
mod keywords;
mod matrix;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dpmeans::{dp_means, DpMeansResult, TopicCluster, MAX_ITERATIONS};
pub use keywords::{ngrams, npmi_keywords, tfidf_keywords, Keyword, KeywordMethod, MIN_BIGRAM_COUNT};
pub use matrix::EmbeddingMatrix;

#[derive(Debug, Error)]
pub enum TopicsError {
    #[error("embedding matrix has no rows")]
    Empty,
    #[error("malformed embedding matrix: {0}")]
    Malformed(String),
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: Vec<f64>,
    pub clusters: Vec<TopicCluster>,
}

/// Clusters the matrix and, when it carries texts, attaches the top `k`
/// TF-IDF terms and NPMI bigrams of every cluster.
pub fn cluster_topics(m: &EmbeddingMatrix, lambda: f64, k: usize) -> Result<TopicModel, TopicsError> {
    let r = dp_means(m, lambda)?;
    let mut clusters = r.clusters;
    if let Some(texts) = &m.texts {
        let index: BTreeMap<&str, usize> = m.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let docs: Vec<Vec<String>> =
            clusters.iter().map(|c| c.members.iter().map(|id| texts[index[id.as_str()]].clone()).collect()).collect();
        for (i, c) in clusters.iter_mut().enumerate() {
            let background: Vec<Vec<String>> =
                docs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, d)| d.clone()).collect();
            c.keywords = tfidf_keywords(&docs[i], &background, k);
            c.keywords.extend(npmi_keywords(&docs[i], k));
        }
    }
    Ok(TopicModel { lambda, iterations: r.iterations, converged: r.converged, objective: r.objective, clusters })
}

/// One `cluster_NNN.json` per cluster in `dir`.
pub fn write_cluster_files(dir: &Path, clusters: &[TopicCluster]) -> Result<(), TopicsError> {
    std::fs::create_dir_all(dir)?;
    for c in clusters {
        let f = std::fs::File::create(dir.join(format!("cluster_{:03}.json", c.id)))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(f), c)?;
    }
    Ok(())
}
