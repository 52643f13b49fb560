use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{t_two_sided, StatsError};

/// Ordinary least squares fit. Index 0 of every coefficient vector is the
/// intercept; index `j + 1` is predictor column `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub n: usize,
    pub df_resid: usize,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

pub fn ols_fit(x: &[Vec<f64>], y: &[f64]) -> Result<RegressionFit, StatsError> {
    let k = x.first().map_or(0, Vec::len);
    let names: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    ols_fit_named(x, y, &names)
}

/// OLS of `y` on the rows of `x` plus an intercept, via Householder QR.
///
/// `names` label the predictor columns in rank-deficiency errors.
pub fn ols_fit_named(x: &[Vec<f64>], y: &[f64], names: &[&str]) -> Result<RegressionFit, StatsError> {
    let n = x.len();
    if n != y.len() {
        return Err(StatsError::LengthMismatch(n, y.len()));
    }
    let k = names.len();
    if x.iter().any(|row| row.len() != k) {
        return Err(StatsError::InvalidArgument("row length differs from column names".into()));
    }
    if n <= k + 1 {
        return Err(StatsError::TooFewObservations { needed: k + 2, got: n });
    }
    let p = k + 1;
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
    let yv = DVector::from_column_slice(y);

    let qr = design.clone().qr();
    let r = qr.r();
    let collinear: Vec<String> = (0..p)
        .filter(|&j| {
            let norm = design.column(j).norm();
            norm == 0.0 || r[(j, j)].abs() <= 1e-10 * norm
        })
        .map(|j| if j == 0 { "intercept".to_string() } else { names[j - 1].to_string() })
        .collect();
    if !collinear.is_empty() {
        return Err(StatsError::RankDeficient { columns: collinear });
    }

    let qty = qr.q().transpose() * &yv;
    let beta = r.solve_upper_triangular(&qty).expect("non-singular R");
    let residuals = &yv - &design * &beta;
    let rss = residuals.norm_squared();
    let y_mean = yv.mean();
    let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };

    let df = n - p;
    let sigma2 = rss / df as f64;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(p, p)).expect("non-singular R");
    let cov_unscaled = &r_inv * r_inv.transpose();

    let mut se = Vec::with_capacity(p);
    let mut t = Vec::with_capacity(p);
    let mut pv = Vec::with_capacity(p);
    for j in 0..p {
        let s = (sigma2 * cov_unscaled[(j, j)]).sqrt();
        let (tj, pj) = if s > 0.0 {
            let tj = beta[j] / s;
            (tj, t_two_sided(tj, df as f64))
        } else if beta[j] == 0.0 {
            (0.0, 1.0)
        } else {
            (beta[j].signum() * f64::INFINITY, 0.0)
        };
        se.push(s);
        t.push(tj);
        pv.push(pj);
    }

    Ok(RegressionFit {
        coefficients: beta.iter().copied().collect(),
        std_errors: se,
        t_values: t,
        p_values: pv,
        r_squared,
        n,
        df_resid: df,
        residuals: residuals.iter().copied().collect(),
    })
}

/// One-way random-effects ICC(1): share of variance lying between groups,
/// clamped to `[0, 1]`. `None` when it cannot be estimated.
pub fn icc_oneway(groups: &[Vec<f64>]) -> Option<f64> {
    let groups: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
    let k = groups.len();
    let total: usize = groups.iter().map(|g| g.len()).sum();
    if k < 2 || total <= k {
        return None;
    }
    let nf = total as f64;
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / nf;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in &groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let msb = ssb / (k - 1) as f64;
    let msw = ssw / (nf - k as f64);
    let n0 = (nf - groups.iter().map(|g| (g.len() * g.len()) as f64).sum::<f64>() / nf) / (k - 1) as f64;
    let denom = msb + (n0 - 1.0) * msw;
    (denom > 0.0).then(|| ((msb - msw) / denom).clamp(0.0, 1.0))
}
