use super::{normal_quantile, StatsError};

/// Per-test significance level `alpha / k`.
pub fn bonferroni_alpha(alpha: f64, k: usize) -> Result<f64, StatsError> {
    if k == 0 {
        return Err(StatsError::InvalidArgument("k must be at least 1".into()));
    }
    Ok(alpha / k as f64)
}

/// Bonferroni-adjusted p-values `min(1, p · k)`.
pub fn bonferroni_adjust(p_values: &[f64], k: usize) -> Result<Vec<f64>, StatsError> {
    if k == 0 {
        return Err(StatsError::InvalidArgument("k must be at least 1".into()));
    }
    Ok(p_values.iter().map(|p| (p * k as f64).min(1.0)).collect())
}

/// Two-sided standard-normal cutoff at the Bonferroni level:
/// `Φ⁻¹(1 − alpha / (2k))`.
pub fn bonferroni_z_cutoff(alpha: f64, k: usize) -> Result<f64, StatsError> {
    let a = bonferroni_alpha(alpha, k)?;
    Ok(normal_quantile(1.0 - a / 2.0))
}

/// `*` p<0.05, `**` p<0.01, `***` p<0.001.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}
