//! Browser bindings: DTW alignment of two emotion series, DP-Means on a
//! point cloud and contingency residuals. Inputs and outputs are JSON
//! strings so the page needs no generated type glue.

use affectdyn::dynamics::dtw;
use affectdyn::stats::chi_squared_independence;
use affectdyn::topics::{dp_means, EmbeddingMatrix};
use affectdyn::EmotionVector;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Alignment {
    pub raw_cost: f64,
    pub normalized_cost: f64,
    pub path: Vec<(usize, usize)>,
    /// Local cosine distance for every cell, row per `a` element.
    pub cost_matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Residuals {
    pub chi2: f64,
    pub df: usize,
    pub p_value: f64,
    pub cramers_v: f64,
    pub expected: Vec<Vec<f64>>,
    pub residuals: Vec<Vec<Option<f64>>>,
}

fn series(json: &str) -> Result<Vec<EmotionVector>, String> {
    let raw: Vec<[f64; 8]> = serde_json::from_str(json).map_err(|e| format!("series: {e}"))?;
    if raw.is_empty() {
        return Err("series is empty".into());
    }
    raw.into_iter().map(|v| EmotionVector::new(v).map_err(|e| e.to_string())).collect()
}

/// `a`, `b`: JSON arrays of eight-channel score vectors.
pub fn align(a: &str, b: &str) -> Result<Alignment, String> {
    let (a, b) = (series(a)?, series(b)?);
    let r = dtw(&a, &b);
    let cost_matrix = a.iter().map(|x| b.iter().map(|y| affectdyn::dynamics::cosine_distance(x, y)).collect()).collect();
    Ok(Alignment { raw_cost: r.raw_cost, normalized_cost: r.normalized_cost, path: r.path, cost_matrix })
}

/// `points`: JSON array of equal-length coordinate arrays.
pub fn cluster(points: &str, lambda: f64) -> Result<Clustering, String> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(points).map_err(|e| format!("points: {e}"))?;
    let ids = (0..rows.len()).map(|i| format!("p{i:04}")).collect();
    let m = EmbeddingMatrix::new(ids, rows, None).map_err(|e| e.to_string())?;
    let r = dp_means(&m, lambda).map_err(|e| e.to_string())?;
    Ok(Clustering {
        assignments: r.assignments,
        centroids: r.clusters.into_iter().map(|c| c.centroid).collect(),
        objective: r.objective,
        iterations: r.iterations,
        converged: r.converged,
    })
}

/// `table`: JSON array of count rows.
pub fn residuals(table: &str) -> Result<Residuals, String> {
    let t: Vec<Vec<f64>> = serde_json::from_str(table).map_err(|e| format!("table: {e}"))?;
    let r = chi_squared_independence(&t).map_err(|e| e.to_string())?;
    Ok(Residuals {
        chi2: r.chi2,
        df: r.df,
        p_value: r.p_value,
        cramers_v: r.cramers_v,
        expected: r.expected,
        residuals: r.residuals,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn dtw_align(a: &str, b: &str) -> Result<String, JsError> {
    to_js(align(a, b))
}

#[wasm_bindgen]
pub fn dp_means_demo(points: &str, lambda: f64) -> Result<String, JsError> {
    to_js(cluster(points, lambda))
}

#[wasm_bindgen]
pub fn contingency_residuals(table: &str) -> Result<String, JsError> {
    to_js(residuals(table))
}
