use super::{mean, sample_variance, t_two_sided, StatsError, TestResult};

fn require(n: usize, needed: usize) -> Result<(), StatsError> {
    if n < needed {
        Err(StatsError::TooFewObservations { needed, got: n })
    } else {
        Ok(())
    }
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

/// Pearson correlation with a two-sided t-based p-value.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    require(x.len(), 3)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = x.len() as f64 - 2.0;
    let p = if r.abs() >= 1.0 { 0.0 } else { t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df) };
    Ok(TestResult::new("pearson", r, p, vec![x.len()]).with_effect("r", r))
}

/// `(mean x − mean y) / pooled SD`.
pub fn cohens_d(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    require(x.len(), 2)?;
    require(y.len(), 2)?;
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let pooled =
        (((nx - 1.0) * sample_variance(x) + (ny - 1.0) * sample_variance(y)) / (nx + ny - 2.0)).sqrt();
    if is_constant(x) && is_constant(y) {
        return Err(StatsError::ZeroVariance);
    }
    Ok((mean(x) - mean(y)) / pooled)
}

/// `mean(d) / SD(d)` for paired differences.
pub fn cohens_dz(deltas: &[f64]) -> Result<f64, StatsError> {
    require(deltas.len(), 2)?;
    let sd = sample_variance(deltas).sqrt();
    if is_constant(deltas) {
        return Err(StatsError::ZeroVariance);
    }
    Ok(mean(deltas) / sd)
}

/// Two-sided one-sample t-test against `mu0`.
pub fn one_sample_t(x: &[f64], mu0: f64) -> Result<TestResult, StatsError> {
    require(x.len(), 3)?;
    let n = x.len() as f64;
    let sd = sample_variance(x).sqrt();
    if is_constant(x) {
        return Err(StatsError::ZeroVariance);
    }
    let diff = mean(x) - mu0;
    let t = diff / (sd / n.sqrt());
    Ok(TestResult::new("one_sample_t", t, t_two_sided(t, n - 1.0), vec![x.len()])
        .with_effect("cohens_d", diff / sd))
}

/// Paired t-test on `x − y` with Cohen's d_z as the effect size.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mut r = one_sample_t(&d, 0.0)?;
    r.method = "paired_t".into();
    Ok(r.with_effect("cohens_dz", cohens_dz(&d)?))
}

/// Welch two-sample t-test, two-sided, with Cohen's d when defined.
///
/// Two constant samples with different means give `t = ±∞`, `p = 0`.
pub fn welch_t(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    require(x.len(), 2)?;
    require(y.len(), 2)?;
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (vx, vy) = (sample_variance(x) / nx, sample_variance(y) / ny);
    let diff = mean(x) - mean(y);
    let se = (vx + vy).sqrt();
    let n = vec![x.len(), y.len()];
    if is_constant(x) && is_constant(y) {
        if diff == 0.0 {
            return Err(StatsError::ZeroVariance);
        }
        return Ok(TestResult::new("welch_t", diff.signum() * f64::INFINITY, 0.0, n));
    }
    let t = diff / se;
    let df = (vx + vy).powi(2) / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    let result = TestResult::new("welch_t", t, t_two_sided(t, df), n);
    Ok(match cohens_d(x, y) {
        Ok(d) => result.with_effect("cohens_d", d),
        Err(_) => result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((pearson_correlation(&x, &x).unwrap().statistic - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 7.0).collect();
        let r = pearson_correlation(&x, &y).unwrap();
        assert!((r.statistic + 1.0).abs() < 1e-15);
        assert_eq!(r.p_value, 0.0);
        assert_eq!(pearson_correlation(&x, &[1.0; 5]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn pearson_matches_covariance_formula() {
        let x = [0.3, 1.1, 2.4, 0.8, 3.9, 2.2, 1.7, 0.1, 2.9, 3.3];
        let y = [1.0, 0.7, 2.1, 1.6, 3.0, 1.9, 2.6, 0.4, 2.0, 3.8];
        let n = x.len() as f64;
        let cov = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n - mean(&x) * mean(&y);
        let sx = (x.iter().map(|a| a * a).sum::<f64>() / n - mean(&x).powi(2)).sqrt();
        let sy = (y.iter().map(|a| a * a).sum::<f64>() / n - mean(&y).powi(2)).sqrt();
        let r = pearson_correlation(&x, &y).unwrap().statistic;
        assert!((r - cov / (sx * sy)).abs() < 1e-12);
    }

    #[test]
    fn cohens_d_examples() {
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), 0.0);
        // Both samples have SD 1; shifted by exactly one unit.
        assert!((cohens_d(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        let (x, y) = ([0.5, 1.5, 2.0, 4.0], [0.0, 1.0, 1.0]);
        let pooled = ((3.0 * sample_variance(&x) + 2.0 * sample_variance(&y)) / 5.0).sqrt();
        let hand = (mean(&x) - mean(&y)) / pooled;
        assert!((cohens_d(&x, &y).unwrap() - hand).abs() < 1e-12);
    }

    #[test]
    fn cohens_dz_examples() {
        assert_eq!(cohens_dz(&[0.5, 0.5, 0.5]), Err(StatsError::ZeroVariance));
        assert_eq!(cohens_dz(&[1.0, -1.0]).unwrap(), 0.0);
        assert!((cohens_dz(&[0.0, 1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    /// Student-t density integrated with composite Simpson's rule.
    fn t_two_sided_by_quadrature(t: f64, df: f64) -> f64 {
        let c = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
        let pdf = |x: f64| c * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
        let (a, b, n) = (0.0, t.abs(), 20_000);
        let h = (b - a) / n as f64;
        let mut s = pdf(a) + pdf(b);
        for i in 1..n {
            s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        1.0 - 2.0 * s * h / 3.0
    }

    #[test]
    fn one_sample_examples() {
        let r = one_sample_t(&[1.0, 2.0, 3.0], 2.0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = one_sample_t(&[1.0, 2.0, 3.0], 0.0).unwrap();
        assert!((r.statistic - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((r.p_value - t_two_sided_by_quadrature(r.statistic, 2.0)).abs() < 1e-6);
        let r = one_sample_t(&[0.2, 0.9, 1.4, 0.3, 1.1, 0.7], 0.1).unwrap();
        assert!((r.p_value - t_two_sided_by_quadrature(r.statistic, 5.0)).abs() < 1e-6);
        assert_eq!(one_sample_t(&[1.0, 1.0, 1.0], 0.0), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn welch_degenerate_groups() {
        let r = welch_t(&[1.0; 5], &[0.0; 5]).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert_eq!(welch_t(&[1.0; 5], &[1.0; 5]), Err(StatsError::ZeroVariance));
        assert_eq!(welch_t(&[0.1; 7], &[0.3; 5]).unwrap().p_value, 0.0);
        assert_eq!(one_sample_t(&[0.1; 30], 0.0), Err(StatsError::ZeroVariance));
        assert_eq!(pearson_correlation(&[0.1, 0.4, 0.3], &[0.2; 3]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn paired_t_uses_dz() {
        let r = paired_t(&[1.0, 2.0, 4.0], &[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.effect_name.as_deref(), Some("cohens_dz"));
        assert!((r.effect_size.unwrap() - 1.0).abs() < 1e-15);
    }
}
