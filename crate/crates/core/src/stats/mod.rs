//! Statistics kernel shared by every analysis: rank and permutation tests,
//! effect sizes, contingency analysis, OLS and Bonferroni correction.
//!
//! All functions are pure; the Monte Carlo routines take an explicit seed.

mod contingency;
mod correction;
mod parametric;
mod permutation;
mod rank;
mod regression;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

pub use contingency::{chi_squared_independence, standardized_residuals, ContingencyResult};
pub use correction::{bonferroni_adjust, bonferroni_alpha, bonferroni_z_cutoff, significance_stars};
pub use parametric::{
    cohens_d, cohens_dz, one_sample_t, paired_t, pearson_correlation, welch_t,
};
pub use permutation::{
    paired_sign_flip_permutation, sign_flip_exact, sign_flip_monte_carlo, EXACT_MAX_N,
};
pub use rank::{cliffs_delta, mann_whitney_u, wilcoxon_signed_rank, WILCOXON_EXACT_MAX_N};
pub use regression::{icc_oneway, ols_fit, ols_fit_named, RegressionFit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("row or column {0} has a zero marginal total")]
    ZeroMarginal(String),
    #[error("design matrix is rank deficient; collinear columns: {columns:?}")]
    RankDeficient { columns: Vec<String> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Uniform record for a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_name: Option<String>,
    /// Sample size of each group entering the test.
    pub n: Vec<usize>,
}

impl TestResult {
    pub fn new(method: &str, statistic: f64, p_value: f64, n: Vec<usize>) -> Self {
        let p_value = if p_value.is_nan() { 1.0 } else { p_value.clamp(0.0, 1.0) };
        TestResult { method: method.to_string(), statistic, p_value, effect_size: None, effect_name: None, n }
    }

    pub fn with_effect(mut self, name: &str, value: f64) -> Self {
        self.effect_name = Some(name.to_string());
        self.effect_size = Some(value);
        self
    }

    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with `n − 1` denominator.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn median(x: &[f64]) -> Option<f64> {
    if x.is_empty() {
        return None;
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) })
}

/// Average ranks (1-based) with ties sharing their mean rank, plus the sizes
/// of every tie group.
pub(crate) fn midranks(x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        if j > i {
            ties.push(j - i + 1);
        }
        i = j + 1;
    }
    (ranks, ties)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Two-sided normal p-value for `z`.
pub(crate) fn normal_two_sided(z: f64) -> f64 {
    (2.0 * std_normal().sf(z.abs())).min(1.0)
}

pub(crate) fn normal_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

/// Two-sided Student t p-value.
pub(crate) fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

pub(crate) fn chi2_sf(x: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("positive degrees of freedom").sf(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_average_ties() {
        let (r, ties) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(ties, vec![2]);
    }

    #[test]
    fn test_result_clamps_p() {
        assert_eq!(TestResult::new("x", 0.0, 1.0000001, vec![1]).p_value, 1.0);
        assert_eq!(TestResult::new("x", 0.0, f64::NAN, vec![1]).p_value, 1.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
